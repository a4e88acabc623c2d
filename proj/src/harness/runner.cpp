#include "weft/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "weft/control/platform.hpp"
#include "weft/session/session.hpp"

namespace weft::harness {

namespace {

using model::ObjectId;

constexpr Millis kDrainMs = 3500;

struct Client {
  std::size_t index = 0;
  const WorkloadSpec* spec = nullptr;
  std::vector<ObjectId> objects;
  std::vector<std::shared_ptr<session::SessionToken>> sessions;
  Millis start = 0;
  Millis end = 0;
  std::uint64_t next = 0;
};

struct Op {
  std::size_t session = 0;
  const std::string* function = nullptr;
  std::size_t object = 0;
};

Op op_of(const Client& c, std::uint64_t i) {
  const auto s_count = std::max<std::uint64_t>(1, c.spec->sessions);
  const auto f_count = c.spec->functions.size();
  const auto s = i % s_count;
  const auto r = i / s_count;
  return {static_cast<std::size_t>(s), &c.spec->functions[r % f_count],
          static_cast<std::size_t>((s + r / f_count) % c.objects.size())};
}

class Driver {
 public:
  Driver(control::Platform& plat, std::vector<CallRecord>& calls) : plat_(plat), calls_(calls) {}

  void start(Client& c) {
    auto& loop = plat_.net().loop();
    if (c.spec->rate > 0) {
      loop.schedule(c.start, [this, &c] { open_tick(c); });
    } else {
      for (std::uint32_t k = 0; k < c.spec->concurrency; ++k) loop.schedule(c.start, [this, &c] { closed_next(c); });
    }
  }

 private:
  Millis open_at(const Client& c, std::uint64_t i) const {
    return c.start + static_cast<Millis>(std::floor(static_cast<double>(i) * 1000.0 / c.spec->rate));
  }

  void open_tick(Client& c) {
    auto& loop = plat_.net().loop();
    const auto i = c.next++;
    issue(c, i, nullptr);
    const Millis at = open_at(c, c.next);
    if (at < c.end) loop.schedule(std::max(at, loop.now()), [this, &c] { open_tick(c); });
  }

  void closed_next(Client& c) {
    auto& loop = plat_.net().loop();
    if (loop.now() >= c.end) return;
    const auto i = c.next++;
    issue(c, i, [this, &c, &loop](bool sync_fail) {
      loop.after(sync_fail ? 1 : 0, [this, &c] { closed_next(c); });
    });
  }

  void issue(Client& c, std::uint64_t i, std::function<void(bool)> then) {
    auto& loop = plat_.net().loop();
    const Op op = op_of(c, i);
    std::shared_ptr<session::SessionToken> tok;
    if (!c.sessions.empty()) tok = c.sessions[op.session];
    const std::size_t slot = calls_.size();
    calls_.push_back({c.index, c.spec->cls, *op.function, 0, tok ? tok->id : 0, loop.now(), -1, Errc::Ok, {},
                      c.objects[op.object].instance, i, {}});
    const Millis issued = loop.now();
    plat_.ingress(c.spec->client_dc)
        .invoke(c.objects[op.object], *op.function, payload_of(c.index, i), tok,
                [this, slot, issued, then](const runtime::InvokeOutcome& o) {
                  auto& rec = calls_[slot];
                  rec.req = o.req;
                  rec.completed = o.completed;
                  rec.code = o.status.code();
                  rec.executed_at = o.executed_at;
                  rec.result = o.result;
                  if (then) then(o.completed == issued && !o.status.ok());
                });
  }

  control::Platform& plat_;
  std::vector<CallRecord>& calls_;
};

std::string fn_key(const std::string& cls, const std::string& fn) { return cls + "." + fn; }

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  sim::EventLoop loop(seed);
  sim::Network net(loop);
  RunResult out;

  control::Platform plat(net, sc.datacenters, runtime::builtin_handlers(), sc.control, sc.control_cfg);
  if (sc.jitter_ms > 0) net.set_jitter(sc.jitter_ms);
  for (const auto& l : sc.link_rates) net.set_link_rate(l.a, l.b, l.msgs_per_sec);
  plat.on_data = [&](const runtime::DataEvent& e) { out.trace.push_back(e); };
  plat.on_exec = [&](const runtime::ExecRecord& e) { out.execs.push_back(e); };

  for (const auto& cls : sc.classes) {
    auto plan = plat.deploy(cls);
    if (!plan.ok()) throw Error(Errc::DeployFailed, "deploy of " + cls.name + " failed: " + plan.status().to_string());
  }

  std::map<std::string, std::vector<ObjectId>> objects;
  for (const auto& w : sc.workloads) {
    auto& objs = objects[w.cls];
    while (objs.size() < w.objects) objs.push_back(plat.ingress(w.client_dc).create_object(w.cls));
  }

  out.origin = (static_cast<Millis>(std::ceil(static_cast<double>(loop.now()) / 1000.0)) + 2) * 1000;
  const Millis origin = out.origin;
  const Millis window_end = origin + sc.duration;

  std::vector<std::unique_ptr<Client>> clients;
  std::uint64_t next_session = 1;
  for (std::size_t wi = 0; wi < sc.workloads.size(); ++wi) {
    const auto& w = sc.workloads[wi];
    auto c = std::make_unique<Client>();
    c->index = wi;
    c->spec = &w;
    c->objects = objects[w.cls];
    c->start = origin + w.start;
    c->end = w.duration > 0 ? std::min(window_end, c->start + w.duration) : window_end;
    const auto replicas = plat.control().replicas(w.cls);
    for (std::uint32_t s = 0; s < w.sessions; ++s) {
      auto tok = session::open_session(net, next_session++, w.client_dc, replicas);
      if (!tok.ok()) throw Error(tok.status());
      c->sessions.push_back(std::make_shared<session::SessionToken>(tok.value()));
    }
    clients.push_back(std::move(c));
  }

  for (const auto& p : sc.partitions) {
    auto q = p;
    q.start += origin;
    net.inject_partition(q);
  }
  for (const auto& o : sc.outages) net.schedule_outage({o.dc, o.start + origin, o.duration});
  for (const auto& k : sc.kills) loop.schedule(origin + k.at, [&plat, k] { plat.agent(k.dc).kill(k.cls); });

  std::map<std::string, std::map<std::int64_t, std::uint32_t>> replica_counts;
  const std::int64_t seconds = (sc.duration + 999) / 1000;
  for (std::int64_t s = 0; s < seconds; ++s) {
    loop.schedule(origin + s * 1000, [&, s] {
      for (const auto& cls : sc.classes)
        replica_counts[cls.name][s] = static_cast<std::uint32_t>(plat.control().replicas(cls.name).size());
    });
  }

  Driver driver(plat, out.calls);
  for (auto& c : clients) driver.start(*c);
  loop.run_until(window_end + kDrainMs);

  // checks
  std::map<std::uint64_t, CallWindow> windows;
  for (const auto& c : out.calls)
    if (c.req != 0) windows[c.req] = {c.issued, c.completed, c.completed >= 0 && c.code == Errc::Ok};
  out.ryw = check_ryw(out.trace, windows);
  for (const auto& cls : sc.classes) {
    out.replicas[cls.name] = plat.control().replicas(cls.name);
  }
  std::vector<sim::PartitionEvent> abs_parts;
  for (auto p : sc.partitions) {
    p.start += origin;
    abs_parts.push_back(p);
  }
  out.gate = check_gate(out.trace, sc.classes, out.replicas, abs_parts);
  if (sc.measurement.staleness) out.staleness = staleness_samples(out.trace);
  out.safety = plat.checker.report();

  // report
  auto& r = out.report;
  r.scenario = sc.name;
  r.seed = seed;
  r.duration_ms = sc.duration;

  std::map<std::string, model::ConsistencyKind> fn_mode;
  std::set<std::string> fn_keys;
  for (const auto& w : sc.workloads) {
    auto cls = std::find_if(sc.classes.begin(), sc.classes.end(), [&](const auto& k) { return k.name == w.cls; });
    for (const auto& f : w.functions) {
      fn_keys.insert(fn_key(w.cls, f));
      const auto* rf = cls == sc.classes.end() ? nullptr : cls->function(f);
      fn_mode[fn_key(w.cls, f)] = rf ? rf->sla.consistency.kind : model::ConsistencyKind::ReadYourWrite;
    }
  }

  struct Bucket {
    std::uint64_t ok = 0;
    std::uint64_t failed = 0;
    std::vector<Millis> lat;
  };
  std::map<std::pair<std::string, std::int64_t>, Bucket> buckets;
  std::map<std::string, std::vector<Millis>> lat_all;
  for (const auto& c : out.calls) {
    if (c.issued < origin || c.issued >= window_end) continue;
    ++r.invocations;
    const Errc code = c.completed < 0 ? Errc::Timeout : c.code;
    ++r.outcomes[std::string(errc_name(code))];
    if (c.completed < 0) continue;
    const auto sec = (c.completed - origin) / 1000;
    const auto key = fn_key(c.cls, c.function);
    auto& b = buckets[{key, sec}];
    if (code == Errc::Ok) {
      ++b.ok;
      b.lat.push_back(c.completed - c.issued);
      lat_all[key].push_back(c.completed - c.issued);
    } else {
      ++b.failed;
    }
  }

  std::map<std::pair<std::string, std::int64_t>, Millis> stale_max;
  std::vector<StalenessSample> window_samples;
  for (const auto& s : out.staleness) {
    if (s.read_at < origin || s.read_at >= window_end) continue;
    window_samples.push_back(s);
    auto& m = stale_max[{s.cls, (s.read_at - origin) / 1000}];
    m = std::max(m, s.staleness);
  }
  for (const auto& [mode, st] : summarize(window_samples))
    r.staleness[model::consistency_name(mode)] = {st.max, st.mean, st.samples};

  for (std::int64_t s = 0; s < seconds; ++s) {
    for (const auto& key : fn_keys) {
      const auto dot = key.find('.');
      const std::string cls = key.substr(0, dot);
      SeriesRow row;
      row.t_sec = s;
      row.function = key;
      row.mode = model::consistency_name(fn_mode[key]);
      if (auto b = buckets.find({key, s}); b != buckets.end()) {
        row.committed_rps = static_cast<double>(b->second.ok);
        row.failed = b->second.failed;
        row.write_latency_p50_ms = percentile(b->second.lat, 50);
      }
      if (auto m = stale_max.find({cls, s}); m != stale_max.end()) row.staleness_max_ms = m->second;
      row.replica_count = replica_counts[cls][s];
      r.series.push_back(std::move(row));
    }
  }

  for (auto& [key, v] : lat_all) {
    LatencyStats l;
    l.count = v.size();
    double sum = 0;
    for (auto x : v) sum += static_cast<double>(x);
    l.mean = sum / static_cast<double>(v.size());
    l.p50 = percentile(v, 50);
    l.p99 = percentile(v, 99);
    l.max = *std::max_element(v.begin(), v.end());
    r.latency[key] = l;
  }

  for (const auto& cls : sc.classes) {
    if (const auto* p = plat.control().placement(cls.name))
      r.placements.push_back({cls.name, p->replicas, static_cast<std::uint32_t>(p->k), p->reserved});
  }
  for (const auto& p : sc.partitions)
    r.partitions.push_back({{p.group_a.begin(), p.group_a.end()}, {p.group_b.begin(), p.group_b.end()}, p.start,
                            p.end()});
  for (const auto& c : plat.control().corrections())
    r.corrections.push_back({c.at - origin, c.cls, control::action_name(c.action), c.dc, c.function, c.cause,
                             static_cast<std::uint32_t>(c.attempt), c.ok});

  r.messages_sent = net.stats().sent;
  r.messages_delivered = net.stats().delivered;
  r.messages_dropped = net.stats().dropped;
  r.ryw_violations = out.ryw.size();
  r.gate_violations = out.gate.size();
  r.raft_safe = out.safety.ok();
  r.trace_digest = net.trace_digest();
  return out;
}

}  // namespace weft::harness
