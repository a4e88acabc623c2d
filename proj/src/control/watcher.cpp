#include <algorithm>

#include "weft/control/control_plane.hpp"

namespace weft::control {

namespace {

bool contains(const std::vector<DcId>& v, const DcId& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::uint32_t sum_slots(const std::map<std::string, std::uint32_t>& m) {
  std::uint32_t n = 0;
  for (const auto& [_, s] : m) n += s;
  return n;
}

}  // namespace

void ControlPlane::tick() {
  const Millis now = net_.now();
  const Millis prev = last_tick_;
  std::vector<std::string> names;
  for (const auto& [n, s] : classes_)
    if (s.active) names.push_back(n);
  for (const auto& n : names) {
    auto it = classes_.find(n);
    if (it != classes_.end()) check(it->second, prev, now);
  }
  last_tick_ = now;
  timer_ = net_.loop().after(cfg_.period, life_.guard([this] { tick(); }));
}

void ControlPlane::check(ClassState& s, Millis prev, Millis now) {
  const std::string name = s.cls.name;
  // Heartbeats in (prev, now] left their site up to one period earlier.
  const Millis from = prev - cfg_.period;
  bool any_partition = false;
  for (const auto& p : net_.partitions())
    if (p.start <= now && from < p.end()) any_partition = true;

  std::vector<DcId> live;
  const std::vector<DcId> current = s.replicas;
  for (const auto& dc : current) {
    Member& m = s.members[dc];
    if (m.last_seen >= prev - cfg_.heartbeat_grace) {
      m.strikes = 0;
      estimators_.at(dc).observe(false);
      live.push_back(dc);
      continue;
    }
    if (!net_.link_up_during(dc, at_, from, now)) {
      live.push_back(dc);  // cut off by a partition, not known to be dead
      continue;
    }
    estimators_.at(dc).observe(true);
    if (++m.strikes >= cfg_.strikes && !s.correcting) {
      m.strikes = 0;
      replace(name, dc, 0, {});
    }
  }

  std::vector<double> probs;
  for (const auto& dc : live) probs.push_back(estimators_.at(dc).current());
  samples_.push_back({now, name, "", Metric::AvailabilityWindow, availability_of(probs)});
  if (!s.correcting && !any_partition && !meets_target(s.plan.target, probs)) {
    if (++s.avail_strikes >= cfg_.strikes) {
      s.avail_strikes = 0;
      add_replica(name, "availability below " + std::to_string(s.plan.target), 0, {});
    }
  } else {
    s.avail_strikes = 0;
  }

  const double secs = static_cast<double>(std::max<Millis>(1, now - prev)) / 1000.0;
  for (const auto& f : s.cls.functions) {
    const auto w = s.window[f.name];
    const double committed = static_cast<double>(w.ok) / secs;
    samples_.push_back({now, name, f.name, Metric::CommittedRps, committed});
    if (!f.sla.throughput) continue;
    const double offered = static_cast<double>(w.arrivals) / secs;
    const double need = cfg_.throughput_slack * std::min(static_cast<double>(*f.sla.throughput), offered);
    int& strikes = s.thr_strikes[f.name];
    if (!any_partition && committed < need) {
      if (++strikes >= cfg_.strikes) {
        strikes = 0;
        grow(name, f.name, 0);
      }
    } else {
      strikes = 0;
    }
  }
  s.window.clear();
}

std::optional<DcId> ControlPlane::rotation_site(const ClassState& s, const std::set<DcId>& exclude) {
  const std::size_t m = profiles_.size();
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t i = (rotation_.cursor + step) % m;
    const auto& dc = profiles_[i].id;
    if (contains(s.replicas, dc) || exclude.count(dc) || s.inflight.count(dc)) continue;
    rotation_.cursor = (i + 1) % m;
    return dc;
  }
  return std::nullopt;
}

void ControlPlane::retry_later(int attempt, std::function<void()> again) {
  const Millis delay = cfg_.backoff * (Millis{1} << std::min(attempt, 10));
  net_.loop().after(delay, life_.guard(std::move(again)));
}

void ControlPlane::replace(const std::string& cls, const DcId& dead, int attempt, std::set<DcId> tried) {
  auto it = classes_.find(cls);
  if (it == classes_.end()) return;
  ClassState& s = it->second;
  const std::string cause = "runtime at " + dead + " missed " + std::to_string(cfg_.strikes) + " heartbeats";
  s.correcting = true;
  tried.insert(dead);
  auto give_up_or_retry = [this, cls, dead, attempt, &tried](const DcId& site) {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return;
    if (attempt + 1 < cfg_.max_retries) {
      std::set<DcId> next = tried;
      if (!site.empty()) next.insert(site);
      retry_later(attempt, [this, cls, dead, attempt, next] { replace(cls, dead, attempt + 1, next); });
    } else {
      it->second.correcting = false;
    }
  };
  auto site = rotation_site(s, tried);
  if (!site) {
    record({net_.now(), cls, Action::Redeploy, "", "", cause + "; no spare site", attempt, false});
    give_up_or_retry("");
    return;
  }
  std::vector<DcId> next;
  for (const auto& dc : s.replicas)
    if (dc != dead) next.push_back(dc);
  next.push_back(*site);

  // Reservations follow the replacement when they fit there.
  std::map<std::string, std::uint32_t> moved;
  if (auto r = s.plan.reserved.find(dead); r != s.plan.reserved.end()) {
    std::uint32_t cap = 0;
    for (const auto& p : profiles_)
      if (p.id == *site) cap = p.capacity;
    if (load_[*site] + sum_slots(r->second) <= cap) moved = r->second;
  }
  auto spec = spec_for(s, *site, next, true);
  spec.reserved = moved;
  s.inflight.insert(*site);
  const DcId at = *site;
  send_deploy(spec, at, [this, cls, dead, at, next, moved, cause, attempt, tried](Status st) {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return;
    ClassState& s = it->second;
    s.inflight.erase(at);
    if (!st.ok()) {
      record({net_.now(), cls, Action::Redeploy, at, "", cause + "; " + st.message(), attempt, false});
      net_.send({at_, at, "ctl/" + at, runtime::encode_undeploy(cls), 0});
      if (attempt + 1 < cfg_.max_retries) {
        std::set<DcId> again = tried;
        again.insert(at);
        retry_later(attempt, [this, cls, dead, attempt, again] { replace(cls, dead, attempt + 1, again); });
      } else {
        s.correcting = false;
      }
      return;
    }
    if (auto r = s.plan.reserved.find(dead); r != s.plan.reserved.end()) {
      load_[dead] -= std::min(load_[dead], sum_slots(r->second));
      s.plan.reserved.erase(r);
    }
    if (!moved.empty()) {
      s.plan.reserved[at] = moved;
      load_[at] += sum_slots(moved);
    }
    s.replicas = next;
    s.members.erase(dead);
    s.members[at].last_seen = net_.now();
    for (const auto& dc : s.replicas)
      if (dc != at) net_.send({at_, dc, "ctl/" + dc, encode(runtime::SetReplicasMsg{cls, s.replicas}), 0});
    net_.send({at_, dead, "ctl/" + dead, runtime::encode_undeploy(cls), 0});
    publish(s);
    s.correcting = false;
    record({net_.now(), cls, Action::Redeploy, at, "", cause, attempt, true});
  });
}

void ControlPlane::add_replica(const std::string& cls, std::string cause, int attempt, std::set<DcId> tried) {
  auto it = classes_.find(cls);
  if (it == classes_.end()) return;
  ClassState& s = it->second;
  s.correcting = true;
  auto site = rotation_site(s, tried);
  if (!site) {
    record({net_.now(), cls, Action::AddReplica, "", "", cause + "; no spare site", attempt, false});
    s.correcting = false;
    return;
  }
  std::vector<DcId> next = s.replicas;
  next.push_back(*site);
  auto spec = spec_for(s, *site, next, true);
  spec.reserved.clear();
  s.inflight.insert(*site);
  const DcId at = *site;
  send_deploy(spec, at, [this, cls, at, next, cause, attempt, tried](Status st) {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return;
    ClassState& s = it->second;
    s.inflight.erase(at);
    if (!st.ok()) {
      record({net_.now(), cls, Action::AddReplica, at, "", cause + "; " + st.message(), attempt, false});
      net_.send({at_, at, "ctl/" + at, runtime::encode_undeploy(cls), 0});
      if (attempt + 1 < cfg_.max_retries) {
        std::set<DcId> again = tried;
        again.insert(at);
        retry_later(attempt, [this, cls, cause, attempt, again] { add_replica(cls, cause, attempt + 1, again); });
      } else {
        s.correcting = false;
      }
      return;
    }
    s.replicas = next;
    s.members[at].last_seen = net_.now();
    for (const auto& dc : s.replicas)
      if (dc != at) net_.send({at_, dc, "ctl/" + dc, encode(runtime::SetReplicasMsg{cls, s.replicas}), 0});
    publish(s);
    s.correcting = false;
    record({net_.now(), cls, Action::AddReplica, at, "", cause, attempt, true});
  });
}

void ControlPlane::grow(const std::string& cls, const std::string& fn, int attempt) {
  auto it = classes_.find(cls);
  if (it == classes_.end()) return;
  ClassState& s = it->second;
  DcId at;
  for (const auto& [dc, fns] : s.plan.reserved)
    if (fns.count(fn) && contains(s.replicas, dc)) at = dc;
  if (at.empty()) {
    const auto* f = s.cls.function(fn);
    for (const auto& dc : f ? f->sla.locality : std::vector<DcId>{})
      if (at.empty() && contains(s.replicas, dc)) at = dc;
  }
  if (at.empty() && !s.replicas.empty()) at = s.replicas.front();
  if (at.empty()) return;
  std::uint32_t slots = 1;
  if (auto r = s.plan.reserved.find(at); r != s.plan.reserved.end())
    if (auto f = r->second.find(fn); f != r->second.end()) slots = f->second + 1;
  const std::string cause = fn + " committed below its throughput floor";
  send_reserve(cls, fn, at, slots, [this, cls, fn, at, slots, cause, attempt](Status st) {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return;
    if (!st.ok()) {
      record({net_.now(), cls, Action::GrowReservation, at, fn, cause + "; " + st.message(), attempt, false});
      if (attempt + 1 < cfg_.max_retries)
        retry_later(attempt, [this, cls, fn, attempt] { grow(cls, fn, attempt + 1); });
      return;
    }
    auto& cur = it->second.plan.reserved[at][fn];
    load_[at] += slots - std::min(cur, slots);
    cur = slots;
    record({net_.now(), cls, Action::GrowReservation, at, fn, cause, attempt, true});
  });
}

}  // namespace weft::control
