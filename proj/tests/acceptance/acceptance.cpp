// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   weft_acceptance            all criteria
//   weft_acceptance AC3 AC7    a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weft/ae/crdt.hpp"
#include "weft/ae/mst.hpp"
#include "weft/control/failure.hpp"
#include "weft/harness/report.hpp"
#include "weft/harness/runner.hpp"
#include "weft/harness/scenario.hpp"
#include "weft/raft/group.hpp"

using namespace weft;
using nlohmann::json;
using model::ConsistencyKind;
using model::DcId;
using model::Millis;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(WEFT_SOURCE_DIR) / "scenarios";

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 1) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::size_t outcome(const harness::MetricsReport& r, Errc code) {
  auto it = r.outcomes.find(std::string(errc_name(code)));
  return it == r.outcomes.end() ? 0 : it->second;
}

// committed_rps per second for one "cls.fn" series.
std::vector<double> series_of(const harness::MetricsReport& r, const std::string& function) {
  std::vector<double> out;
  for (const auto& row : r.series) {
    if (row.function != function) continue;
    if (out.size() <= static_cast<std::size_t>(row.t_sec)) out.resize(row.t_sec + 1, 0.0);
    out[row.t_sec] = row.committed_rps;
  }
  return out;
}

double mean_over(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t s = from; s < std::min(to, v.size()); ++s, ++n) sum += v[s];
  return n ? sum / n : 0.0;
}

// First second from which every later second stays at or above `level`.
std::size_t sustained_from(const std::vector<double>& v, std::size_t from, double level) {
  std::size_t s = v.size();
  while (s > from && v[s - 1] >= level) --s;
  return s;
}

json bounded_class(int delta_s) {
  return {{"name", "Bounded"},
          {"sla", {{"consistency", "bounded_staleness"}, {"delta_s", delta_s}, {"availability", 0.9999}}},
          {"attributes", json::array({{{"name", "value"}, {"kind", "scalar"}}})},
          {"functions", json::array({{{"name", "put"}, {"handler", "put"}, {"service_ms", 1},
                                      {"params", {{"attr", "value"}}}},
                                     {{"name", "get"}, {"handler", "get"}, {"service_ms", 1},
                                      {"params", {{"attr", "value"}}}}})}};
}

json two_sites(int cloud_capacity, int edge_capacity, int latency_ms) {
  return json::array({{{"id", "cloud"}, {"tier", "cloud"}, {"capacity", cloud_capacity}, {"failure_prob", 0.01},
                       {"latency_ms", {{"edge", latency_ms}}}},
                      {{"id", "edge"}, {"tier", "edge"}, {"capacity", edge_capacity}, {"failure_prob", 0.01},
                       {"latency_ms", {{"cloud", latency_ms}}}}});
}

// ---------------------------------------------------------------------------

Verdict ac1() {
  Clock clock;
  const auto sc = harness::load_scenario(kScenarios / "strong_staleness.json");
  const auto res = harness::run_scenario(sc);
  const double wall = clock.seconds();

  const auto& cls = sc.classes.at(0).name;
  auto reps = res.replicas.count(cls) ? res.replicas.at(cls) : std::vector<DcId>{};
  std::sort(reps.begin(), reps.end());
  const bool placement = reps == std::vector<DcId>{"cloud", "edge1", "edge2"};

  const auto stats = harness::summarize(res.staleness);
  const auto it = stats.find(ConsistencyKind::Strong);
  const std::size_t samples = it == stats.end() ? 0 : it->second.samples;
  const Millis max_stale = it == stats.end() ? -1 : it->second.max;

  // Real-time oracle per object: a read returns either nothing, when no write
  // finished before it began, or the payload of a write that started before
  // the read finished and that no other write strictly follows and precedes
  // the read.
  struct Put {
    Millis issued, completed;
    bool ok;
  };
  std::map<std::uint64_t, std::map<std::string, Put>> puts;
  // A failed write may still take effect later, so it never finishes.
  constexpr Millis kNever = std::numeric_limits<Millis>::max();
  for (const auto& c : res.calls)
    if (c.function == "put")
      puts[c.object][harness::payload_of(c.workload, c.op)] = {c.issued, c.code == Errc::Ok ? c.completed : kNever,
                                                               c.code == Errc::Ok};
  std::size_t reads = 0, bad = 0;
  for (const auto& c : res.calls) {
    if (c.function != "get" || c.code != Errc::Ok) continue;
    ++reads;
    const auto& obj = puts[c.object];
    if (c.result.empty()) {
      for (const auto& [_, p] : obj)
        if (p.ok && p.completed < c.issued) {
          ++bad;
          break;
        }
      continue;
    }
    auto src = obj.find(c.result);
    if (src == obj.end() || src->second.issued > c.completed) {
      ++bad;
      continue;
    }
    for (const auto& [_, p] : obj)
      if (p.ok && p.issued > src->second.completed && p.completed < c.issued) {
        ++bad;
        break;
      }
  }

  Verdict v;
  v.pass = placement && samples > 0 && max_stale == 0 && res.safety.ok() && reads > 0 && bad == 0 && wall < 30;
  v.detail = "replicas=" + std::to_string(reps.size()) + " strong staleness max=" + std::to_string(max_stale) +
             "ms over " + std::to_string(samples) + " reads, oracle checked " + std::to_string(reads) +
             " reads with " + std::to_string(bad) + " stale, raft " + (res.safety.ok() ? "safe" : "UNSAFE") +
             ", wall " + fmt(wall) + "s";
  return v;
}

Verdict ac2() {
  bool pass = true;
  std::string detail;
  for (int delta : {5, 10, 30}) {
    for (double factor : {0.8, 1.2}) {
      const double part_s = factor * delta;
      json doc = {{"name", "bounded-" + std::to_string(delta)},
                  {"seed", 100 + delta},
                  {"duration_s", 60},
                  {"datacenters", two_sites(64, 32, 25)},
                  {"jitter_ms", 10},
                  {"classes", json::array({bounded_class(delta)})},
                  {"workloads", json::array({{{"class", "Bounded"}, {"functions", {"put", "get", "get"}},
                                              {"rate", 200}, {"objects", 200}, {"client_dc", "edge"}},
                                             {{"class", "Bounded"}, {"functions", {"put", "get", "get"}},
                                              {"rate", 200}, {"objects", 200}, {"client_dc", "cloud"}}})},
                  {"partitions", json::array({{{"a", {"edge"}}, {"b", {"cloud"}}, {"start_s", 10},
                                               {"duration_s", part_s}}})}};
      const auto res = harness::run_scenario(harness::parse_scenario(doc, kScenarios));
      const auto stats = harness::summarize(res.staleness);
      const auto it = stats.find(ConsistencyKind::BoundedStaleness);
      const Millis max_stale = it == stats.end() ? -1 : it->second.max;
      const std::size_t samples = it == stats.end() ? 0 : it->second.samples;
      const std::size_t blocked = outcome(res.report, Errc::StalenessExceeded);
      bool ok = samples > 0 && max_stale < delta * 1000 && res.gate.empty();
      if (factor > 1) ok = ok && blocked > 0;
      pass = pass && ok;
      detail += " d=" + std::to_string(delta) + "s/p=" + fmt(part_s) + "s:max=" + std::to_string(max_stale) +
                "ms,gate_violations=" + std::to_string(res.gate.size()) + ",blocked=" + std::to_string(blocked);
    }
  }
  return {pass, detail.substr(1)};
}

Verdict ac3() {
  const auto sc = harness::load_scenario(kScenarios / "ryw_sessions.json");
  const auto res = harness::run_scenario(sc);
  std::size_t sessions = 0;
  for (const auto& w : sc.workloads) sessions += w.sessions;
  std::size_t session_calls = 0;
  for (const auto& c : res.calls) session_calls += c.session != 0;

  // Failover: the killed site served session traffic before the kill, the
  // replacement runs elsewhere, and sessions keep completing afterwards.
  const auto& kill = sc.kills.at(0);
  const Millis kill_at = res.origin + kill.at;
  std::size_t served_before = 0, served_after = 0;
  for (const auto& e : res.trace) {
    if (e.cls != kill.cls || e.mode != ConsistencyKind::ReadYourWrite || e.dc != kill.dc) continue;
    (e.at < kill_at ? served_before : served_after)++;
  }
  std::size_t ok_after = 0, reads_after = 0;
  for (const auto& c : res.calls) {
    if (c.issued < kill_at || c.code != Errc::Ok || sc.workloads[c.workload].client_dc != kill.dc) continue;
    ++ok_after;
    reads_after += c.function == "get";
  }
  const auto& reps = res.replicas.at(kill.cls);
  const bool moved = std::find(reps.begin(), reps.end(), kill.dc) == reps.end();
  std::size_t redeploys = 0;
  for (const auto& c : res.report.corrections) redeploys += c.action == "redeploy" && c.ok;

  Verdict v;
  v.pass = sessions == 200 && session_calls == 200 * 500 && res.ryw.empty() && res.report.ryw_violations == 0 &&
           served_before > 0 && served_after == 0 && moved && redeploys > 0 && reads_after > 0;
  v.detail = std::to_string(sessions) + " sessions x " + std::to_string(sessions ? session_calls / sessions : 0) +
             " ops, ryw violations=" + std::to_string(res.ryw.size()) + ", failover: " + std::to_string(redeploys) +
             " redeploy, " + std::to_string(ok_after) + " ok ops (" + std::to_string(reads_after) +
             " reads) from " + kill.dc + " sessions after the kill";
  return v;
}

Verdict ac4() {
  Clock clock;
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0;
  // Same comparison rule as the placement code: unavailability within a 1e-9
  // relative slack of the budget.
  auto meets = [](double target, long double unavail) {
    return unavail <= static_cast<long double>(1 - target) * (1 + 1e-9L);
  };
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<control::SiteProb> sites;
    const bool uniform = rng() % 4 == 0;
    const double base = 0.001 + (rng() % 3000) / 10000.0;
    for (std::size_t i = 0; i < n; ++i)
      sites.push_back({"s" + std::to_string(i), uniform ? base : 0.001 + (rng() % 3000) / 10000.0});
    const double target = rng() % 2 ? 1 - std::pow(10.0, -static_cast<double>(1 + rng() % 9))
                                    : 0.5 + (rng() % 499999) / 1e6;
    std::size_t brute = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      long double u = 1;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) u *= sites[i].failure_prob;
      const std::size_t k = std::popcount(mask);
      if (meets(target, u) && (brute == 0 || k < brute)) brute = k;
    }
    try {
      const auto got = control::replication_factor(target, sites);
      std::vector<double> chosen;
      for (const auto& dc : got.sites)
        for (const auto& s : sites)
          if (s.dc == dc) chosen.push_back(s.failure_prob);
      if (got.k != brute || got.sites.size() != got.k || !control::meets_target(target, chosen)) ++mismatches;
    } catch (const Error& e) {
      if (!(e.code() == Errc::InsufficientSites && brute == 0)) ++mismatches;
    }
  }
  auto uniform_k = [](double p, double target) {
    std::vector<control::SiteProb> sites;
    for (int i = 0; i < 12; ++i) sites.push_back({"s" + std::to_string(i), p});
    return control::replication_factor(target, sites).k;
  };
  const auto k2 = uniform_k(0.01, 0.9999);
  const auto k7 = uniform_k(0.05, 0.999999999);
  const double wall = clock.seconds();
  return {mismatches == 0 && k2 == 2 && k7 == 7 && k7 <= 9 && wall < 5,
          "1000 cases, " + std::to_string(mismatches) + " mismatches; p=0.01/0.9999 -> k=" + std::to_string(k2) +
              "; p=0.05/nine nines -> k=" + std::to_string(k7) + "; wall " + fmt(wall, 2) + "s"};
}

Verdict ac5() {
  const auto sc = harness::load_scenario(kScenarios / "partition_throughput.json");
  const auto res = harness::run_scenario(sc);
  const auto& p = sc.partitions.at(0);
  const std::size_t start = p.start / 1000, end = p.end() / 1000;
  const std::size_t dur = sc.duration / 1000;

  std::string strong_fn, thr_fn, ryw_fn;
  double rate = 0;
  for (const auto& w : sc.workloads) {
    rate = w.rate;
    for (const auto& cls : sc.classes) {
      if (cls.name != w.cls) continue;
      const auto& fn = *cls.function(w.functions.at(0));
      const std::string name = cls.name + "." + fn.name;
      if (fn.sla.consistency.kind == ConsistencyKind::Strong) strong_fn = name;
      else if (fn.sla.throughput) thr_fn = name;
      else ryw_fn = name;
    }
  }
  const double hi = 0.95 * rate;
  const auto strong = series_of(res.report, strong_fn);
  const auto thr = series_of(res.report, thr_fn);
  const auto ryw = series_of(res.report, ryw_fn);

  double strong_during = 0;
  for (std::size_t s = start; s < end; ++s) strong_during = std::max(strong_during, strong[s]);
  const std::size_t strong_back = sustained_from(strong, end, hi);
  const bool strong_ok = strong_during == 0 && strong_back < end + 5;

  std::size_t thr_low = 0;
  for (std::size_t s = 1; s < dur; ++s) {
    const bool edge = (s >= start && s < start + 2) || (s >= end && s < end + 2);
    if (thr[s] < hi && !edge) ++thr_low;
  }
  const bool thr_ok = thr_low == 0;

  const double ryw_before = mean_over(ryw, 1, start);
  const double ryw_during = mean_over(ryw, start, end);
  const std::size_t ryw_back = sustained_from(ryw, end, hi);
  const bool ryw_ok = ryw_before >= hi && ryw_during <= 0.8 * rate && ryw_back < end + 10;

  return {strong_ok && thr_ok && ryw_ok,
          "strong: max " + fmt(strong_during, 0) + " rps during partition, back at +" +
              std::to_string(strong_back - end) + "s; ryw-thr: " + std::to_string(thr_low) +
              " low seconds outside the edges; ryw: " + fmt(ryw_before, 0) + " -> " + fmt(ryw_during, 0) +
              " rps during partition, back at +" + std::to_string(ryw_back - end) + "s"};
}

struct RaftCluster {
  sim::EventLoop loop;
  sim::Network net{loop};
  raft::SafetyChecker checker;
  std::vector<std::unique_ptr<raft::RaftPeer>> peers;
  std::unique_ptr<raft::RaftClient> client;

  RaftCluster(int n, std::uint64_t seed, Millis latency) : loop(seed) {
    std::vector<raft::NodeId> ids;
    for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    for (const auto& id : ids) net.add_datacenter(id);
    net.add_datacenter("client");
    for (const auto& a : net.datacenters())
      for (const auto& b : net.datacenters())
        if (a < b) net.set_latency(a, b, latency);
    for (const auto& id : ids)
      peers.push_back(std::make_unique<raft::RaftPeer>(net, raft::GroupConfig{"kv"}, id, ids, &checker));
    client = std::make_unique<raft::RaftClient>(net, raft::GroupConfig{"kv"}, "client", "c", ids);
  }

  void snapshot_logs() {
    std::map<raft::NodeId, std::vector<raft::LogEntry>> logs;
    for (const auto& p : peers) logs[p->id()] = p->node().log();
    checker.on_logs(logs);
  }
};

Verdict ac6() {
  Clock clock;
  const Millis bound = 10 * raft::Timings{}.election_max;
  std::size_t unsafe = 0, stuck = 0, runs = 0;
  Millis worst = 0;
  raft::SafetyReport total;
  for (std::uint64_t seed = 1; seed <= 500; ++seed, ++runs) {
    std::mt19937_64 rng(seed * 7919);
    const int n = seed % 2 ? 3 : 5;
    RaftCluster c(n, seed, 5 + static_cast<Millis>(rng() % 15));
    c.net.set_jitter(50);
    Millis t = 500;
    for (int k = 0; k < 4; ++k) {
      std::set<sim::DcId> a, b;
      for (const auto& p : c.peers) (rng() % 2 ? a : b).insert(p->id());
      if (a.empty() || b.empty()) continue;
      const Millis start = t + static_cast<Millis>(rng() % 1000);
      const Millis dur = 200 + static_cast<Millis>(rng() % 1500);
      c.net.inject_partition({a, b, start, dur});
      t = start + dur;
    }
    for (Millis at = 0; at < t; at += 20)
      c.loop.schedule(at, [&c, at] {
        c.client->write({false, "k" + std::to_string(at % 7), std::to_string(at), false}, [](auto) {});
      });
    c.loop.run_until(t);
    c.snapshot_logs();
    // a command pending at the final heal, resubmitted until some leader commits it
    Millis committed_at = -1;
    for (auto& p : c.peers)
      p->on_commit = [&](const raft::LogEntry& e) {
        if (e.command.key == "pending" && committed_at < 0) committed_at = c.loop.now();
      };
    std::function<void()> submit = [&] {
      c.client->write({false, "pending", "p", false}, [&](StatusOr<raft::Index> r) {
        if (!r.ok() && committed_at < 0) c.loop.after(20, [&] { submit(); });
      });
    };
    submit();
    c.loop.run_until(t + bound);
    c.snapshot_logs();
    if (committed_at < 0) ++stuck;
    else worst = std::max(worst, committed_at - t);
    const auto rep = c.checker.report();
    if (!rep.ok()) ++unsafe;
    total.election_safety += rep.election_safety;
    total.log_matching += rep.log_matching;
    total.leader_completeness += rep.leader_completeness;
    total.state_machine_safety += rep.state_machine_safety;
  }
  const double wall = clock.seconds();
  return {unsafe == 0 && stuck == 0 && wall < 120,
          std::to_string(runs) + " runs: election=" + std::to_string(total.election_safety) +
              " log_matching=" + std::to_string(total.log_matching) +
              " leader_completeness=" + std::to_string(total.leader_completeness) +
              " state_machine=" + std::to_string(total.state_machine_safety) + ", " + std::to_string(stuck) +
              " runs without commit within " + std::to_string(bound) + "ms of heal (worst " +
              std::to_string(worst) + "ms), wall " + fmt(wall) + "s"};
}

ae::CrdtValue random_crdt(std::mt19937_64& rng, int kind) {
  auto stamp = [&] { return ae::Stamp{static_cast<Millis>(rng() % 8), static_cast<ae::ReplicaId>(rng() % 3), rng() % 3}; };
  auto reg = [&] { return ae::LwwRegister{stamp(), rng() % 5 == 0, "v" + std::to_string(rng() % 4)}; };
  switch (kind) {
    case 0:
      return reg();
    case 1: {
      ae::GCounter g;
      for (int i = rng() % 4; i > 0; --i) g.slots[static_cast<ae::ReplicaId>(rng() % 4)] = rng() % 10;
      return g;
    }
    default: {
      ae::LwwMap m;
      for (int i = rng() % 4; i > 0; --i) m.entries["f" + std::to_string(rng() % 4)] = reg();
      return m;
    }
  }
}

Verdict ac7() {
  std::mt19937_64 rng(77);
  std::size_t algebra_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const int kind = i % 3;
    const auto a = random_crdt(rng, kind), b = random_crdt(rng, kind), c = random_crdt(rng, kind);
    using ae::crdt_merge;
    if (crdt_merge(a, b) != crdt_merge(b, a)) ++algebra_bad;
    if (crdt_merge(crdt_merge(a, b), c) != crdt_merge(a, crdt_merge(b, c))) ++algebra_bad;
    if (crdt_merge(a, a) != a) ++algebra_bad;
  }

  auto value_hash = [](std::uint64_t v) { return ae::sha256(std::to_string(v)); };
  auto fetcher = [](const ae::MerkleSearchTree& t) {
    return [&t](const ae::Hash& h) -> std::optional<ae::MstNode> {
      if (const ae::MstNode* n = t.node(h)) return *n;
      return std::nullopt;
    };
  };
  std::size_t diff_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = rng() % 4097;
    std::map<std::string, ae::Hash> a, b;
    while (a.size() < n) a["k" + std::to_string(rng() % (4 * n + 16))] = value_hash(rng() % 5);
    if (trial % 7 == 0) {
      while (b.size() < rng() % 4097) b["k" + std::to_string(rng() % 20000)] = value_hash(rng() % 5);
    } else {
      b = a;
      for (int e = static_cast<int>(rng() % 64); e > 0; --e) {
        const auto choice = rng() % 3;
        if (choice == 0 && !b.empty()) b.erase(std::next(b.begin(), rng() % b.size()));
        else if (choice == 1 && !b.empty()) std::next(b.begin(), rng() % b.size())->second = value_hash(rng());
        else b["x" + std::to_string(rng() % 100000)] = value_hash(rng() % 5);
      }
    }
    std::set<std::string> brute;
    for (const auto& [k, h] : a)
      if (!b.count(k) || b.at(k) != h) brute.insert(k);
    for (const auto& [k, _] : b)
      if (!a.count(k)) brute.insert(k);
    const ae::MerkleSearchTree ta(a), tb(b);
    const auto d = ae::mst_diff(ta, tb.root(), fetcher(tb));
    if (!d.ok() || d->keys != brute) ++diff_bad;
  }

  const double bound = 4 * std::log(1024.0) / std::log(16.0) + 4;
  std::size_t worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, ae::Hash> a;
    while (a.size() < 1024) a["k" + std::to_string(rng())] = value_hash(rng() % 5);
    auto b = a;
    std::next(b.begin(), rng() % b.size())->second = value_hash(1000 + rng());
    const ae::MerkleSearchTree ta(a), tb(b);
    const auto d = ae::mst_diff(ta, tb.root(), fetcher(tb));
    if (!d.ok() || d->keys.size() != 1) ++diff_bad;
    else worst = std::max(worst, d->fetches);
  }
  return {algebra_bad == 0 && diff_bad == 0 && worst <= bound,
          "10000 merge triples, " + std::to_string(algebra_bad) + " law failures; 500+200 diffs, " +
              std::to_string(diff_bad) + " mismatches; worst fetches for 1 of 1024 = " + std::to_string(worst) +
              " (bound " + fmt(bound) + ")"};
}

Verdict ac8() {
  const int capacity = 16;
  const int service_ms = 4;
  const int reserved_rps = 1000;
  const int flood_rps = 5 * capacity * 1000 / service_ms;
  json cls = {{"name", "Reserved"},
              {"sla", {{"consistency", "ryw"}, {"availability", 0.99}}},
              {"attributes", json::array()},
              {"functions", json::array({{{"name", "guaranteed"}, {"handler", "echo"}, {"service_ms", service_ms},
                                          {"sla", {{"throughput", reserved_rps}}}},
                                         {{"name", "best_effort"}, {"handler", "echo"}, {"service_ms", service_ms}}})}};
  json doc = {{"name", "reservation"},
              {"seed", 8},
              {"duration_s", 30},
              {"datacenters", json::array({{{"id", "cloud"}, {"tier", "cloud"}, {"capacity", capacity},
                                            {"failure_prob", 0.01}, {"latency_ms", json::object()}}})},
              {"classes", json::array({cls})},
              {"workloads", json::array({{{"class", "Reserved"}, {"functions", {"guaranteed"}},
                                          {"rate", reserved_rps}, {"client_dc", "cloud"}},
                                         {{"class", "Reserved"}, {"functions", {"best_effort"}},
                                          {"rate", flood_rps}, {"client_dc", "cloud"}}})},
              {"measurement", {{"staleness", false}}}};
  const auto res = harness::run_scenario(harness::parse_scenario(doc, kScenarios));

  std::size_t reserved_execs = 0, waited = 0, cold = 0;
  for (const auto& e : res.execs) {
    if (e.function != "guaranteed" || e.arrival < res.origin) continue;
    ++reserved_execs;
    waited += e.start != e.arrival;
    cold += e.cold_ms > 0;
  }
  std::size_t reserved_calls = 0, reserved_nocap = 0, reserved_failed = 0, flood_nocap = 0, flood_ok = 0;
  for (const auto& c : res.calls) {
    if (c.function == "guaranteed") {
      ++reserved_calls;
      reserved_nocap += c.code == Errc::NoCapacity;
      reserved_failed += c.code != Errc::Ok;
    } else {
      flood_nocap += c.code == Errc::NoCapacity;
      flood_ok += c.code == Errc::Ok;
    }
  }
  return {reserved_execs >= reserved_calls && reserved_calls > 0 && waited == 0 && cold == 0 &&
              reserved_nocap == 0 && reserved_failed == 0 && flood_nocap > 0,
          std::to_string(reserved_calls) + " reserved calls, " + std::to_string(waited) + " waited, " +
              std::to_string(cold) + " cold, " + std::to_string(reserved_failed) + " failed; best effort at " +
              std::to_string(flood_rps) + " rps: " + std::to_string(flood_ok) + " ok, " +
              std::to_string(flood_nocap) + " NoCapacity"};
}

Verdict ac9() {
  const int service_ms = 10;
  const std::uint64_t link = 10000;
  json cls = {{"name", "Compute"},
              {"sla", {{"consistency", "ryw"}, {"availability", 0.99}, {"locality", {"cloud"}}}},
              {"attributes", json::array()},
              {"functions", json::array({{{"name", "work"}, {"handler", "echo"}, {"service_ms", service_ms}}})}};
  std::vector<int> sizes{8, 16, 32, 64, 128, 256};
  std::vector<double> measured;
  for (int c : sizes) {
    json doc = {{"name", "scaling-" + std::to_string(c)},
                {"seed", 9},
                {"duration_s", 10},
                {"datacenters", two_sites(c, 4, 5)},
                {"link_rates", json::array({{{"a", "edge"}, {"b", "cloud"}, {"msgs_per_sec", link}}})},
                {"classes", json::array({cls})},
                {"workloads", json::array({{{"class", "Compute"}, {"functions", {"work"}}, {"concurrency", 8 * c},
                                            {"client_dc", "edge"}}})},
                {"measurement", {{"staleness", false}}}};
    const auto res = harness::run_scenario(harness::parse_scenario(doc, kScenarios));
    measured.push_back(mean_over(series_of(res.report, "Compute.work"), 2, 10));
  }
  // Linear while compute-bound, then flat at the link rate.
  bool pass = true;
  std::vector<double> plateau;
  std::string detail;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double linear = 1000.0 * sizes[i] / service_ms;
    if (linear < link) {
      pass = pass && std::abs(measured[i] - linear) <= 0.1 * linear;
    } else {
      plateau.push_back(measured[i]);
    }
    detail += " C=" + std::to_string(sizes[i]) + ":" + fmt(measured[i], 0);
  }
  double level = 0;
  for (double v : plateau) level += v / plateau.size();
  for (double v : plateau) pass = pass && std::abs(v - level) <= 0.1 * level;
  pass = pass && !plateau.empty() && level <= 1.1 * link;
  return {pass, "inv/s" + detail + "; plateau " + fmt(level, 0) + " at link " + std::to_string(link) + " msgs/s"};
}

Verdict ac10() {
  std::string detail;
  bool pass = true;
  for (const char* name : {"bounded_partition.json", "ryw_sessions.json"}) {
    const auto sc = harness::load_scenario(kScenarios / name);
    const auto a = harness::run_scenario(sc).report;
    const auto b = harness::run_scenario(sc).report;
    const bool json_same = render(a, harness::ExportFormat::Json) == render(b, harness::ExportFormat::Json);
    const bool csv_same = render(a, harness::ExportFormat::Csv) == render(b, harness::ExportFormat::Csv);
    pass = pass && json_same && csv_same;
    detail += std::string(detail.empty() ? "" : "; ") + name + (json_same ? " json same" : " json DIFFERS") +
              (csv_same ? ", csv same" : ", csv DIFFERS");
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weft acceptance criteria"};
  std::vector<std::string> only;
  app.add_option("criteria", only, "criteria to run, e.g. AC1 AC7 (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> all = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  int failed = 0;
  for (const auto& [name, run] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << name << (v.pass ? " PASS " : " FAIL ") << v.detail << std::endl;
  }
  return failed ? 1 : 0;
}
