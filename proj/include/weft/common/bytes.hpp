#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace weft {

// Opaque payloads travel as std::string byte buffers.
using Bytes = std::string;

// Length-prefixed little-endian record encoding used for every message payload
// on the simulated wire. Integers are fixed width; byte strings and text are a
// u32 length followed by the raw bytes.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& i64(std::int64_t v);
  ByteWriter& boolean(bool v) { return u8(v ? 1 : 0); }
  ByteWriter& bytes(std::string_view v);
  ByteWriter& raw(std::string_view v);

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Reads what ByteWriter wrote. Truncated or malformed input throws
// weft::Error(Errc::DecodeError).
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  bool boolean() { return u8() != 0; }
  std::string bytes();
  std::string_view raw(std::size_t n);

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace weft
