#pragma once

#include <map>
#include <string>
#include <vector>

#include "weft/runtime/class_runtime.hpp"
#include "weft/sim/network.hpp"

namespace weft::harness {

using model::ConsistencyKind;
using model::DcId;
using model::Millis;

// One served read. `write_at` is the apply time of the earliest write to the
// key that the read does not reflect and that was applied by the time the
// read was issued; staleness is the gap to it, 0 when there is none.
struct StalenessSample {
  std::string cls;
  std::string key;
  ConsistencyKind mode = ConsistencyKind::ReadYourWrite;
  DcId dc;
  Millis read_at = 0;
  Millis write_at = -1;
  Millis staleness = 0;
};

struct StalenessStats {
  Millis max = 0;
  double mean = 0;
  std::uint64_t samples = 0;
};

// A write is reflected when the read's version is at least the write's.
// Writes without a version (counter increments) are not ordered and skipped.
std::vector<StalenessSample> staleness_samples(const std::vector<runtime::DataEvent>& trace);
std::map<ConsistencyKind, StalenessStats> summarize(const std::vector<StalenessSample>& samples);

// Client-side view of one invocation, joined to session events by request id.
struct CallWindow {
  Millis issued = 0;
  Millis completed = 0;
  bool ok = false;
};

struct RywViolation {
  std::uint64_t session = 0;
  std::string key;
  std::uint64_t read_req = 0;
  std::uint64_t write_req = 0;
};

// For every session read R and every successful session write W to the same
// key whose call completed no later than R's call was issued, R must return a
// version at least W's.
std::vector<RywViolation> check_ryw(const std::vector<runtime::DataEvent>& trace,
                                    const std::map<std::uint64_t, CallWindow>& calls);

// Bounded-staleness accesses that succeeded at a replica cut off from one of
// its peers for at least the attribute's bound.
struct GateViolation {
  std::string cls;
  std::string key;
  DcId dc;
  Millis at = 0;
};
std::vector<GateViolation> check_gate(const std::vector<runtime::DataEvent>& trace,
                                      const std::vector<model::FlattenedClass>& classes,
                                      const std::map<std::string, std::vector<DcId>>& replicas,
                                      const std::vector<sim::PartitionEvent>& partitions);

}  // namespace weft::harness
