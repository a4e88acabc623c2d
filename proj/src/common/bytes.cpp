#include "weft/common/bytes.hpp"

#include "weft/common/status.hpp"

namespace weft {

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(static_cast<char>(v));
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  return *this;
}

ByteWriter& ByteWriter::i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

ByteWriter& ByteWriter::bytes(std::string_view v) {
  u32(static_cast<std::uint32_t>(v.size()));
  buf_.append(v);
  return *this;
}

ByteWriter& ByteWriter::raw(std::string_view v) {
  buf_.append(v);
  return *this;
}

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw Error(Errc::DecodeError, "truncated record");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
  return v;
}

std::int64_t ByteReader::i64() { return static_cast<std::int64_t>(u64()); }

std::string ByteReader::bytes() {
  const auto n = u32();
  return std::string(raw(n));
}

std::string_view ByteReader::raw(std::size_t n) {
  need(n);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace weft
