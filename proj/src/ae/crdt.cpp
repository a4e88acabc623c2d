#include "weft/ae/crdt.hpp"

#include <algorithm>

#include "weft/common/status.hpp"

namespace weft::ae {

namespace {

enum Kind : std::uint8_t { kLww = 1, kCounter = 2, kMap = 3 };

bool lww_less(const LwwRegister& a, const LwwRegister& b) {
  if (a.stamp != b.stamp) return a.stamp < b.stamp;
  if (a.tombstone != b.tombstone) return !a.tombstone;
  return a.value < b.value;
}

void encode_reg(ByteWriter& w, const LwwRegister& r) {
  encode(w, r.stamp);
  w.boolean(r.tombstone).bytes(r.value);
}

LwwRegister decode_reg(ByteReader& r) {
  LwwRegister reg;
  reg.stamp = decode_stamp(r);
  reg.tombstone = r.boolean();
  reg.value = r.bytes();
  return reg;
}

}  // namespace

std::uint64_t GCounter::total() const {
  std::uint64_t t = 0;
  for (const auto& [_, n] : slots) t += n;
  return t;
}

LwwRegister lww_merge(const LwwRegister& a, const LwwRegister& b) { return lww_less(a, b) ? b : a; }

GCounter gcounter_merge(const GCounter& a, const GCounter& b) {
  GCounter out = a;
  for (const auto& [r, n] : b.slots) {
    auto& slot = out.slots[r];
    slot = std::max(slot, n);
  }
  return out;
}

LwwMap lwwmap_merge(const LwwMap& a, const LwwMap& b) {
  LwwMap out = a;
  for (const auto& [k, reg] : b.entries) {
    auto [it, inserted] = out.entries.try_emplace(k, reg);
    if (!inserted) it->second = lww_merge(it->second, reg);
  }
  return out;
}

CrdtValue crdt_merge(const CrdtValue& a, const CrdtValue& b) {
  if (a.index() != b.index()) throw Error(Errc::KindMismatch, "merging different CRDT kinds");
  if (auto* x = std::get_if<LwwRegister>(&a)) return lww_merge(*x, std::get<LwwRegister>(b));
  if (auto* x = std::get_if<GCounter>(&a)) return gcounter_merge(*x, std::get<GCounter>(b));
  return lwwmap_merge(std::get<LwwMap>(a), std::get<LwwMap>(b));
}

Stamp version_of(const CrdtValue& v) {
  if (auto* r = std::get_if<LwwRegister>(&v)) return r->stamp;
  if (auto* m = std::get_if<LwwMap>(&v)) {
    Stamp best;
    for (const auto& [_, reg] : m->entries) best = std::max(best, reg.stamp);
    return best;
  }
  return {};
}

void encode(ByteWriter& w, const Stamp& s) { w.i64(s.ms).u32(s.replica).u64(s.seq); }

Stamp decode_stamp(ByteReader& r) {
  Stamp s;
  s.ms = r.i64();
  s.replica = r.u32();
  s.seq = r.u64();
  return s;
}

void encode(ByteWriter& w, const CrdtValue& v) {
  if (auto* reg = std::get_if<LwwRegister>(&v)) {
    w.u8(kLww);
    encode_reg(w, *reg);
  } else if (auto* c = std::get_if<GCounter>(&v)) {
    w.u8(kCounter).u32(static_cast<std::uint32_t>(c->slots.size()));
    for (const auto& [r, n] : c->slots) w.u32(r).u64(n);
  } else {
    const auto& m = std::get<LwwMap>(v);
    w.u8(kMap).u32(static_cast<std::uint32_t>(m.entries.size()));
    for (const auto& [k, reg] : m.entries) {
      w.bytes(k);
      encode_reg(w, reg);
    }
  }
}

Bytes encode(const CrdtValue& v) {
  ByteWriter w;
  encode(w, v);
  return std::move(w).take();
}

CrdtValue decode_crdt(ByteReader& r) {
  switch (r.u8()) {
    case kLww:
      return decode_reg(r);
    case kCounter: {
      GCounter c;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto id = r.u32();
        c.slots[id] = r.u64();
      }
      return c;
    }
    case kMap: {
      LwwMap m;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        auto k = r.bytes();
        m.entries[std::move(k)] = decode_reg(r);
      }
      return m;
    }
    default:
      throw Error(Errc::DecodeError, "unknown CRDT kind");
  }
}

}  // namespace weft::ae
