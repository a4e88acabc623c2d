#pragma once

#include <map>
#include <optional>
#include <vector>

#include "weft/harness/report.hpp"
#include "weft/harness/scenario.hpp"
#include "weft/harness/staleness.hpp"
#include "weft/raft/safety.hpp"

namespace weft::harness {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // replaces the scenario's seed
};

// One client call as the workload saw it. Times are absolute.
struct CallRecord {
  std::size_t workload = 0;
  std::string cls;
  std::string function;
  std::uint64_t req = 0;
  std::uint64_t session = 0;
  Millis issued = 0;
  Millis completed = 0;
  Errc code = Errc::Ok;
  DcId executed_at;
  std::uint64_t object = 0;  // instance number
  std::uint64_t op = 0;      // index within the workload
  Bytes result;
};

struct RunResult {
  MetricsReport report;
  Millis origin = 0;  // absolute time of the window start
  std::vector<runtime::DataEvent> trace;
  std::vector<CallRecord> calls;
  std::vector<runtime::ExecRecord> execs;
  std::vector<StalenessSample> staleness;
  std::vector<RywViolation> ryw;
  std::vector<GateViolation> gate;
  raft::SafetyReport safety;
  std::map<std::string, std::vector<DcId>> replicas;  // at the end of the run
};

// Builds the deployment, deploys every class, creates the objects, opens
// the sessions, then drives the workloads and faults over the window.
// Throws Error(DeployFailed) when a class cannot be deployed.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts = {});

}  // namespace weft::harness
