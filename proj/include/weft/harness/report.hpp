#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "weft/control/control_plane.hpp"
#include "weft/sim/network.hpp"

namespace weft::harness {

using model::DcId;
using model::Millis;

struct SeriesRow {
  std::int64_t t_sec = 0;
  std::string function;  // "<class>.<function>"
  double committed_rps = 0;
  std::uint64_t failed = 0;
  std::string mode;
  Millis staleness_max_ms = 0;
  Millis write_latency_p50_ms = 0;
  std::uint32_t replica_count = 0;

  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

struct LatencyStats {
  std::uint64_t count = 0;
  double mean = 0;
  Millis p50 = 0;
  Millis p99 = 0;
  Millis max = 0;

  friend bool operator==(const LatencyStats&, const LatencyStats&) = default;
};

struct ModeStaleness {
  Millis max = 0;
  double mean = 0;
  std::uint64_t samples = 0;

  friend bool operator==(const ModeStaleness&, const ModeStaleness&) = default;
};

struct PlacementRow {
  std::string cls;
  std::vector<DcId> replicas;
  std::uint32_t k = 0;
  std::map<DcId, std::map<std::string, std::uint32_t>> reserved;

  friend bool operator==(const PlacementRow&, const PlacementRow&) = default;
};

struct PartitionRow {
  std::vector<DcId> a;
  std::vector<DcId> b;
  Millis start = 0;
  Millis end = 0;

  friend bool operator==(const PartitionRow&, const PartitionRow&) = default;
};

struct CorrectionRow {
  Millis at = 0;
  std::string cls;
  std::string action;
  DcId dc;
  std::string function;
  std::string cause;
  std::uint32_t attempt = 0;
  bool ok = false;

  friend bool operator==(const CorrectionRow&, const CorrectionRow&) = default;
};

// Everything one run produced. Times are relative to the measured window.
struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  Millis duration_ms = 0;
  std::vector<SeriesRow> series;
  std::map<std::string, ModeStaleness> staleness;  // by consistency name
  std::map<std::string, LatencyStats> latency;     // by "<class>.<function>"
  std::vector<PlacementRow> placements;
  std::map<std::string, std::uint64_t> outcomes;  // by error code name
  std::vector<PartitionRow> partitions;
  std::vector<CorrectionRow> corrections;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t invocations = 0;
  std::uint64_t ryw_violations = 0;
  std::uint64_t gate_violations = 0;
  bool raft_safe = true;
  std::uint64_t trace_digest = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

nlohmann::json to_json(const MetricsReport& r);
// Throws Error(DecodeError) on a malformed document.
MetricsReport report_from_json(const nlohmann::json& j);

// The per-second series; the header is always present.
std::string to_csv(const MetricsReport& r);

enum class ExportFormat { Csv, Json };
// Throws Error(InvalidArgument) on an unknown name.
ExportFormat parse_format(const std::string& name);
std::string render(const MetricsReport& r, ExportFormat f);
// Throws Error(IoError) when the file cannot be written.
void export_report(const MetricsReport& r, const std::filesystem::path& path, ExportFormat f);

// Nearest-rank percentile of an unsorted sample; 0 for an empty one.
Millis percentile(std::vector<Millis> v, double p);

}  // namespace weft::harness
