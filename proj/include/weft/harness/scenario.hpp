#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "weft/control/control_plane.hpp"
#include "weft/model/class_def.hpp"
#include "weft/sim/network.hpp"

namespace weft::harness {

using model::DcId;
using model::Millis;

// One client population. Operation i belongs to session i % S and round
// r = i / S; it calls functions[r % F] on object (s + r / F) % N with payload
// payload_of(workload, i). Open loop issues op i at start + floor(i * 1000 / rate); closed
// loop keeps `concurrency` calls outstanding.
struct WorkloadSpec {
  std::string cls;
  std::vector<std::string> functions;
  double rate = 0;
  std::uint32_t concurrency = 0;
  std::uint32_t objects = 1;
  std::uint32_t sessions = 0;  // 0: calls carry no session
  DcId client_dc;
  Millis start = 0;
  Millis duration = 0;  // 0: until the end of the run
};

// "w<workload>v<i>": unique across the workloads of one run.
inline std::string payload_of(std::size_t workload, std::uint64_t i) {
  return "w" + std::to_string(workload) + "v" + std::to_string(i);
}

struct KillSpec {
  std::string cls;
  DcId dc;
  Millis at = 0;
};

struct LinkRate {
  DcId a;
  DcId b;
  std::uint64_t msgs_per_sec = 0;
};

struct Measurement {
  bool staleness = true;
  Millis sample_period = 1000;
};

// Times are relative to the start of the measured window, which opens once
// every class is deployed and its objects exist.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Millis duration = 0;
  std::vector<model::DatacenterProfile> datacenters;
  DcId control;
  Millis jitter_ms = 0;
  std::vector<LinkRate> link_rates;
  std::vector<model::FlattenedClass> classes;
  std::vector<WorkloadSpec> workloads;
  std::vector<sim::PartitionEvent> partitions;
  std::vector<sim::Outage> outages;
  std::vector<KillSpec> kills;
  Measurement measurement;
  control::ControlConfig control_cfg;
};

// Scenario documents (times in seconds):
//   {"name"?, "seed", "duration_s", "datacenters": [profile...], "control"?,
//    "jitter_ms"?, "link_rates"?: [{"a","b","msgs_per_sec"}],
//    "classes": [path | class document], "workloads": [{"class", "functions",
//    "rate" | "concurrency", "objects"?, "sessions"?, "client_dc", "start_s"?,
//    "duration_s"?}], "partitions"?: [{"a": [dc], "b": [dc], "start_s",
//    "duration_s"}], "outages"?: [{"dc","start_s","duration_s"}],
//    "kills"?: [{"class","dc","at_s"}], "measurement"?: {"staleness",
//    "sample_period_s"}, "runtime"?: {"ryw_sync_s", "cold_start_ms",
//    "initial_elastic"}}
// Class paths resolve against `base_dir`. Throws Error(ScriptError) naming
// the offending field, or the class validation error.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// Loads and validates one class file against the built-in handlers, resolving
// parents from neighbouring class files.
model::FlattenedClass load_class(const std::filesystem::path& path);

}  // namespace weft::harness
