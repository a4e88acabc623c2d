#include "weft/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "weft/common/status.hpp"

namespace weft::harness {

using nlohmann::json;

Millis percentile(std::vector<Millis> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

json to_json(const MetricsReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["duration_ms"] = r.duration_ms;
  j["series"] = json::array();
  for (const auto& s : r.series)
    j["series"].push_back({{"t_sec", s.t_sec},
                           {"function", s.function},
                           {"committed_rps", s.committed_rps},
                           {"failed", s.failed},
                           {"mode", s.mode},
                           {"staleness_max_ms", s.staleness_max_ms},
                           {"write_latency_p50_ms", s.write_latency_p50_ms},
                           {"replica_count", s.replica_count}});
  j["staleness"] = json::object();
  for (const auto& [m, s] : r.staleness) j["staleness"][m] = {{"max", s.max}, {"mean", s.mean}, {"samples", s.samples}};
  j["latency"] = json::object();
  for (const auto& [f, l] : r.latency)
    j["latency"][f] = {{"count", l.count}, {"mean", l.mean}, {"p50", l.p50}, {"p99", l.p99}, {"max", l.max}};
  j["placements"] = json::array();
  for (const auto& p : r.placements)
    j["placements"].push_back({{"class", p.cls}, {"replicas", p.replicas}, {"k", p.k}, {"reserved", p.reserved}});
  j["outcomes"] = r.outcomes;
  j["partitions"] = json::array();
  for (const auto& p : r.partitions)
    j["partitions"].push_back({{"a", p.a}, {"b", p.b}, {"start", p.start}, {"end", p.end}});
  j["corrections"] = json::array();
  for (const auto& c : r.corrections)
    j["corrections"].push_back({{"at", c.at},
                                {"class", c.cls},
                                {"action", c.action},
                                {"dc", c.dc},
                                {"function", c.function},
                                {"cause", c.cause},
                                {"attempt", c.attempt},
                                {"ok", c.ok}});
  j["network"] = {{"sent", r.messages_sent}, {"delivered", r.messages_delivered}, {"dropped", r.messages_dropped}};
  j["checks"] = {{"invocations", r.invocations},
                 {"ryw_violations", r.ryw_violations},
                 {"gate_violations", r.gate_violations},
                 {"raft_safe", r.raft_safe},
                 {"trace_digest", r.trace_digest}};
  return j;
}

MetricsReport report_from_json(const json& j) {
  try {
    MetricsReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.duration_ms = j.at("duration_ms").get<Millis>();
    for (const auto& s : j.at("series"))
      r.series.push_back({s.at("t_sec").get<std::int64_t>(), s.at("function").get<std::string>(),
                          s.at("committed_rps").get<double>(), s.at("failed").get<std::uint64_t>(),
                          s.at("mode").get<std::string>(), s.at("staleness_max_ms").get<Millis>(),
                          s.at("write_latency_p50_ms").get<Millis>(), s.at("replica_count").get<std::uint32_t>()});
    for (const auto& [m, s] : j.at("staleness").items())
      r.staleness[m] = {s.at("max").get<Millis>(), s.at("mean").get<double>(), s.at("samples").get<std::uint64_t>()};
    for (const auto& [f, l] : j.at("latency").items())
      r.latency[f] = {l.at("count").get<std::uint64_t>(), l.at("mean").get<double>(), l.at("p50").get<Millis>(),
                      l.at("p99").get<Millis>(), l.at("max").get<Millis>()};
    for (const auto& p : j.at("placements"))
      r.placements.push_back({p.at("class").get<std::string>(), p.at("replicas").get<std::vector<DcId>>(),
                              p.at("k").get<std::uint32_t>(),
                              p.at("reserved").get<std::map<DcId, std::map<std::string, std::uint32_t>>>()});
    r.outcomes = j.at("outcomes").get<std::map<std::string, std::uint64_t>>();
    for (const auto& p : j.at("partitions"))
      r.partitions.push_back({p.at("a").get<std::vector<DcId>>(), p.at("b").get<std::vector<DcId>>(),
                              p.at("start").get<Millis>(), p.at("end").get<Millis>()});
    for (const auto& c : j.at("corrections"))
      r.corrections.push_back({c.at("at").get<Millis>(), c.at("class").get<std::string>(),
                               c.at("action").get<std::string>(), c.at("dc").get<std::string>(),
                               c.at("function").get<std::string>(), c.at("cause").get<std::string>(),
                               c.at("attempt").get<std::uint32_t>(), c.at("ok").get<bool>()});
    const auto& n = j.at("network");
    r.messages_sent = n.at("sent").get<std::uint64_t>();
    r.messages_delivered = n.at("delivered").get<std::uint64_t>();
    r.messages_dropped = n.at("dropped").get<std::uint64_t>();
    const auto& c = j.at("checks");
    r.invocations = c.at("invocations").get<std::uint64_t>();
    r.ryw_violations = c.at("ryw_violations").get<std::uint64_t>();
    r.gate_violations = c.at("gate_violations").get<std::uint64_t>();
    r.raft_safe = c.at("raft_safe").get<bool>();
    r.trace_digest = c.at("trace_digest").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::DecodeError, std::string("report: ") + e.what());
  }
}

std::string to_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "t_sec,function,committed_rps,failed,mode,staleness_max_ms,write_latency_p50_ms,replica_count\n";
  for (const auto& s : r.series) {
    out << s.t_sec << ',' << s.function << ',' << json(s.committed_rps).dump() << ',' << s.failed << ',' << s.mode
        << ',' << s.staleness_max_ms << ',' << s.write_latency_p50_ms << ',' << s.replica_count << '\n';
  }
  return out.str();
}

ExportFormat parse_format(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw Error(Errc::InvalidArgument, "unknown export format '" + name + "'");
}

std::string render(const MetricsReport& r, ExportFormat f) {
  return f == ExportFormat::Csv ? to_csv(r) : to_json(r).dump(2) + "\n";
}

void export_report(const MetricsReport& r, const std::filesystem::path& path, ExportFormat f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << render(r, f);
  out.flush();
  if (!out) throw Error(Errc::IoError, "write to " + path.string() + " failed");
}

}  // namespace weft::harness
