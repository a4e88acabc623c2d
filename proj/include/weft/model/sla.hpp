#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace weft::model {

using DcId = std::string;
using Millis = std::int64_t;

enum class ConsistencyKind { Strong, BoundedStaleness, ReadYourWrite };

struct Consistency {
  ConsistencyKind kind = ConsistencyKind::ReadYourWrite;
  Millis delta_ms = 0;  // only meaningful for BoundedStaleness

  static Consistency strong() { return {ConsistencyKind::Strong, 0}; }
  static Consistency bounded(Millis delta_ms) { return {ConsistencyKind::BoundedStaleness, delta_ms}; }
  static Consistency ryw() { return {ConsistencyKind::ReadYourWrite, 0}; }

  friend bool operator==(const Consistency&, const Consistency&) = default;
};

// "strong", "bounded_staleness", "ryw"
std::string consistency_name(ConsistencyKind kind);

struct SlaSpec {
  Consistency consistency;
  double availability = 0.99;
  std::optional<std::uint64_t> throughput;  // RPS floor
  std::vector<DcId> locality;               // preferred sites, in order; empty = none

  friend bool operator==(const SlaSpec&, const SlaSpec&) = default;
};

// A partial SLA attached to a member or a child class. Present fields replace
// the corresponding field of the base SLA.
struct SlaOverride {
  std::optional<Consistency> consistency;
  std::optional<double> availability;
  std::optional<std::uint64_t> throughput;
  std::optional<std::vector<DcId>> locality;

  bool empty() const { return !consistency && !availability && !throughput && !locality; }
  static SlaOverride full(const SlaSpec& spec);

  friend bool operator==(const SlaOverride&, const SlaOverride&) = default;
};

SlaSpec apply_override(SlaSpec base, const SlaOverride& o);
SlaOverride combine(SlaOverride lower, const SlaOverride& upper);

// Throws Error(InvalidSla) when an invariant does not hold.
void check_sla(const SlaSpec& spec);
void check_override(const SlaOverride& o);

}  // namespace weft::model
