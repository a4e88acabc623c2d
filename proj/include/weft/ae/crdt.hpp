#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "weft/common/bytes.hpp"

namespace weft::ae {

using Millis = std::int64_t;
using ReplicaId = std::uint32_t;

// Total order: virtual ms, then replica id, then a per-replica sequence that
// separates writes issued by one replica within the same ms.
struct Stamp {
  Millis ms = 0;
  ReplicaId replica = 0;
  std::uint64_t seq = 0;

  friend bool operator==(const Stamp&, const Stamp&) = default;
  friend auto operator<=>(const Stamp&, const Stamp&) = default;
};

struct LwwRegister {
  Stamp stamp;
  bool tombstone = false;
  Bytes value;

  friend bool operator==(const LwwRegister&, const LwwRegister&) = default;
};

struct GCounter {
  std::map<ReplicaId, std::uint64_t> slots;

  std::uint64_t total() const;
  friend bool operator==(const GCounter&, const GCounter&) = default;
};

struct LwwMap {
  std::map<std::string, LwwRegister> entries;

  friend bool operator==(const LwwMap&, const LwwMap&) = default;
};

using CrdtValue = std::variant<LwwRegister, GCounter, LwwMap>;

// Least upper bound. Throws Error(KindMismatch) when a and b are different kinds.
CrdtValue crdt_merge(const CrdtValue& a, const CrdtValue& b);
LwwRegister lww_merge(const LwwRegister& a, const LwwRegister& b);
GCounter gcounter_merge(const GCounter& a, const GCounter& b);
LwwMap lwwmap_merge(const LwwMap& a, const LwwMap& b);

// The newest stamp carried by a value: the register stamp, the newest map
// entry, or a zero stamp for counters.
Stamp version_of(const CrdtValue& v);

void encode(ByteWriter& w, const CrdtValue& v);
CrdtValue decode_crdt(ByteReader& r);
Bytes encode(const CrdtValue& v);

void encode(ByteWriter& w, const Stamp& s);
Stamp decode_stamp(ByteReader& r);

}  // namespace weft::ae
