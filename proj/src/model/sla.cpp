#include "weft/model/sla.hpp"

#include "weft/common/status.hpp"

namespace weft::model {

std::string consistency_name(ConsistencyKind kind) {
  switch (kind) {
    case ConsistencyKind::Strong: return "strong";
    case ConsistencyKind::BoundedStaleness: return "bounded_staleness";
    case ConsistencyKind::ReadYourWrite: return "ryw";
  }
  return "unknown";
}

SlaOverride SlaOverride::full(const SlaSpec& spec) {
  SlaOverride o;
  o.consistency = spec.consistency;
  o.availability = spec.availability;
  o.throughput = spec.throughput;
  o.locality = spec.locality;
  return o;
}

SlaSpec apply_override(SlaSpec base, const SlaOverride& o) {
  if (o.consistency) base.consistency = *o.consistency;
  if (o.availability) base.availability = *o.availability;
  if (o.throughput) base.throughput = *o.throughput;
  if (o.locality) base.locality = *o.locality;
  return base;
}

SlaOverride combine(SlaOverride lower, const SlaOverride& upper) {
  if (upper.consistency) lower.consistency = upper.consistency;
  if (upper.availability) lower.availability = upper.availability;
  if (upper.throughput) lower.throughput = upper.throughput;
  if (upper.locality) lower.locality = upper.locality;
  return lower;
}

namespace {

void check_consistency(const Consistency& c) {
  if (c.kind == ConsistencyKind::BoundedStaleness && c.delta_ms <= 0)
    throw Error(Errc::InvalidSla, "bounded staleness delta must be positive");
}

void check_availability(double a) {
  if (!(a >= 0.0) || !(a < 1.0))
    throw Error(Errc::InvalidSla, "availability must lie in [0, 1)");
}

void check_throughput(std::uint64_t t) {
  if (t < 1) throw Error(Errc::InvalidSla, "throughput floor must be at least 1 RPS");
}

}  // namespace

void check_sla(const SlaSpec& spec) {
  check_consistency(spec.consistency);
  check_availability(spec.availability);
  if (spec.throughput) check_throughput(*spec.throughput);
}

void check_override(const SlaOverride& o) {
  if (o.consistency) check_consistency(*o.consistency);
  if (o.availability) check_availability(*o.availability);
  if (o.throughput) check_throughput(*o.throughput);
}

}  // namespace weft::model
