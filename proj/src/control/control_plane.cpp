#include "weft/control/control_plane.hpp"

#include <algorithm>

namespace weft::control {

using runtime::Kind;

std::string action_name(Action a) {
  switch (a) {
    case Action::Rollback: return "rollback";
    case Action::Redeploy: return "redeploy";
    case Action::AddReplica: return "add_replica";
    case Action::GrowReservation: return "grow_reservation";
    case Action::Undeploy: return "undeploy";
  }
  return "unknown";
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::StalenessMs: return "staleness_ms";
    case Metric::CommittedRps: return "committed_rps";
    case Metric::AvailabilityWindow: return "availability_window";
    case Metric::QueueWaitMs: return "queue_wait_ms";
  }
  return "unknown";
}

ControlPlane::ControlPlane(sim::Network& net, DcId at, runtime::Directory& dir,
                           std::vector<model::DatacenterProfile> profiles, ControlConfig cfg)
    : net_(net), at_(std::move(at)), dir_(dir), profiles_(std::move(profiles)), cfg_(cfg) {
  for (const auto& p : profiles_) {
    estimators_.emplace(p.id, FailureEstimator(p.failure_prob));
    dir_.set_capacity(p.id, p.capacity);
  }
  sub_ = net_.subscribe(at_, "ctl/" + at_, life_.guard([this](const sim::Envelope& e) { on_message(e); }));
  last_tick_ = net_.now();
  timer_ = net_.loop().after(cfg_.phase, life_.guard([this] { tick(); }));
}

ControlPlane::~ControlPlane() {
  net_.unsubscribe(sub_);
  net_.loop().cancel(timer_);
  for (auto& [_, p] : pending_) net_.loop().cancel(p.timer);
}

PlacementPlan ControlPlane::plan(const model::FlattenedClass& cls) const {
  Rotation r = rotation_;
  return place_class(cls, profiles_, load_, r);
}

const PlacementPlan* ControlPlane::placement(const std::string& cls) const {
  auto it = classes_.find(cls);
  return it == classes_.end() || !it->second.active ? nullptr : &it->second.plan;
}

std::vector<DcId> ControlPlane::replicas(const std::string& cls) const {
  auto it = classes_.find(cls);
  return it == classes_.end() ? std::vector<DcId>{} : it->second.replicas;
}

double ControlPlane::failure_estimate(const DcId& dc) const {
  auto it = estimators_.find(dc);
  if (it == estimators_.end()) throw Error(Errc::UnknownDatacenter, dc);
  return it->second.current();
}

runtime::RuntimeSpec ControlPlane::spec_for(ClassState& s, const DcId& dc, const std::vector<DcId>& replicas,
                                            bool joining) {
  runtime::RuntimeSpec spec;
  spec.cls = s.cls;
  spec.replicas = replicas;
  spec.raft_members = s.raft_members;
  spec.replica_id = s.next_id++;
  spec.joining = joining;
  if (auto it = s.plan.reserved.find(dc); it != s.plan.reserved.end()) spec.reserved = it->second;
  spec.ryw_sync_ms = cfg_.ryw_sync_ms;
  spec.cold_start_ms = cfg_.cold_start_ms;
  spec.initial_elastic = cfg_.initial_elastic;
  spec.timings = cfg_.timings;
  return spec;
}

std::uint64_t ControlPlane::await(std::function<void(Status)> done) {
  const auto id = ++seq_;
  Pending& p = pending_[id];
  p.done = std::move(done);
  p.timer = net_.loop().after(cfg_.deploy_timeout, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto f = std::move(it->second.done);
    pending_.erase(it);
    f(Status(Errc::Timeout, "no acknowledgement"));
  }));
  return id;
}

void ControlPlane::send_deploy(const runtime::RuntimeSpec& spec, const DcId& dc, std::function<void(Status)> done) {
  runtime::DeployMsg m;
  m.seq = await(std::move(done));
  m.control = at_;
  m.spec = spec;
  net_.send({at_, dc, "ctl/" + dc, encode(m), 0});
}

void ControlPlane::send_reserve(const std::string& cls, const std::string& fn, const DcId& dc, std::uint32_t slots,
                                std::function<void(Status)> done) {
  runtime::ReserveMsg m;
  m.seq = await(std::move(done));
  m.control = at_;
  m.cls = cls;
  m.function = fn;
  m.slots = slots;
  net_.send({at_, dc, "ctl/" + dc, encode(m), 0});
}

void ControlPlane::publish(ClassState& s) {
  s.plan.replicas = s.replicas;
  s.plan.k = s.replicas.size();
  if (dir_.find(s.cls.name)) {
    dir_.set_replicas(s.cls.name, s.replicas);
  } else {
    dir_.publish(s.cls, s.replicas);
  }
}

void ControlPlane::deploy(const model::FlattenedClass& cls, std::function<void(StatusOr<PlacementPlan>)> done) {
  if (classes_.count(cls.name)) {
    done(Status(Errc::InvalidArgument, cls.name + " is already deployed"));
    return;
  }
  PlacementPlan plan;
  try {
    plan = place_class(cls, profiles_, load_, rotation_);
  } catch (const Error& e) {
    done(Status(e.code(), e.what()));
    return;
  }
  ClassState& s = classes_[cls.name];
  s.cls = cls;
  s.plan = plan;
  s.replicas = plan.replicas;
  s.raft_members = plan.replicas;
  s.inflight.insert(plan.replicas.begin(), plan.replicas.end());

  struct Round {
    std::size_t left;
    bool failed = false;
  };
  auto round = std::make_shared<Round>(Round{plan.replicas.size()});
  const std::string name = cls.name;
  for (const auto& dc : plan.replicas) {
    send_deploy(spec_for(s, dc, plan.replicas, false), dc, [this, round, name, dc, plan, done](Status st) {
      if (round->failed) return;
      if (!st.ok()) {
        round->failed = true;
        for (const auto& d : plan.replicas) net_.send({at_, d, "ctl/" + d, runtime::encode_undeploy(name), 0});
        record({net_.now(), name, Action::Rollback, dc, "", "deploy failed: " + st.message(), 0, true});
        classes_.erase(name);
        done(Status(Errc::DeployFailed, "deploy of " + name + " to " + dc + " failed: " + st.message()));
        return;
      }
      if (--round->left > 0) return;
      ClassState& s = classes_.at(name);
      s.active = true;
      s.inflight.clear();
      for (const auto& d : s.replicas) s.members[d].last_seen = net_.now();
      for (const auto& [d, fns] : s.plan.reserved)
        for (const auto& [_, n] : fns) load_[d] += n;
      publish(s);
      done(s.plan);
    });
  }
}

void ControlPlane::on_message(const sim::Envelope& env) {
  const auto kind = static_cast<Kind>(runtime::kind_of(env.payload));
  if (kind != Kind::Ack && kind != Kind::Heartbeat) return;
  try {
    ByteReader r(env.payload);
    r.u8();
    if (kind == Kind::Heartbeat) {
      on_heartbeat(runtime::decode_heartbeat(r));
      return;
    }
    const auto ack = runtime::decode_ack(r);
    auto it = pending_.find(ack.seq);
    if (it == pending_.end()) return;
    net_.loop().cancel(it->second.timer);
    auto f = std::move(it->second.done);
    pending_.erase(it);
    f(ack.code == Errc::Ok ? Status{} : Status(ack.code, ack.message));
  } catch (const Error& e) {
    if (e.code() != Errc::DecodeError) throw;
  }
}

void ControlPlane::on_heartbeat(const runtime::Heartbeat& hb) {
  auto it = classes_.find(hb.cls);
  const bool expected = it != classes_.end() &&
                        (std::find(it->second.replicas.begin(), it->second.replicas.end(), hb.dc) !=
                             it->second.replicas.end() ||
                         it->second.inflight.count(hb.dc));
  if (!expected) {
    net_.send({at_, hb.dc, "ctl/" + hb.dc, runtime::encode_undeploy(hb.cls), 0});
    if (orphans_.insert({hb.cls, hb.dc}).second)
      record({net_.now(), hb.cls, Action::Undeploy, hb.dc, "", "runtime outside the replica set", 0, true});
    return;
  }
  orphans_.erase({hb.cls, hb.dc});
  ClassState& s = it->second;
  s.members[hb.dc].last_seen = net_.now();
  for (const auto& [fn, st] : hb.functions) {
    auto& w = s.window[fn];
    w.arrivals += st.arrivals;
    w.ok += st.ok;
    w.failed += st.failed;
    w.rejected += st.rejected;
  }
}

void ControlPlane::record(Correction c) {
  log_.push_back(c);
  if (on_correction) on_correction(log_.back());
}

}  // namespace weft::control
