#include "weft/runtime/platform.hpp"

#include <algorithm>

namespace weft::runtime {

namespace {

std::string object_topic(const ObjectId& obj) { return "obj/" + obj.cls + "/" + std::to_string(obj.instance); }

}  // namespace

std::uint32_t Directory::capacity(const DcId& dc) const {
  auto it = capacity_.find(dc);
  return it == capacity_.end() ? 1 : it->second;
}

void Directory::publish(model::FlattenedClass cls, std::vector<DcId> replicas) {
  const auto name = cls.name;
  routes_[name] = ClassRoute{std::move(cls), std::move(replicas)};
}

void Directory::set_replicas(const std::string& cls, std::vector<DcId> replicas) {
  auto it = routes_.find(cls);
  if (it != routes_.end()) it->second.replicas = std::move(replicas);
}

const ClassRoute* Directory::find(const std::string& cls) const {
  auto it = routes_.find(cls);
  return it == routes_.end() ? nullptr : &it->second;
}

std::vector<std::string> Directory::classes() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : routes_) out.push_back(n);
  return out;
}

Ingress::Ingress(sim::Network& net, DcId at, Directory& dir) : net_(net), at_(std::move(at)), dir_(dir) {
  topic_ = "in/" + at_;
  sub_ = net_.subscribe(at_, topic_, life_.guard([this](const sim::Envelope& e) { on_message(e); }));
}

Ingress::~Ingress() {
  net_.unsubscribe(sub_);
  for (auto& [_, p] : pending_) net_.loop().cancel(p.timer);
}

StatusOr<DcId> Ingress::route(const std::string& cls, const std::string& function) {
  const ClassRoute* r = dir_.find(cls);
  if (!r) return Status(Errc::UnknownClass, "class " + cls + " is not deployed");
  const auto* fn = r->cls.function(function);
  if (!fn) return Status(Errc::UnknownFunction, cls + " has no function " + function);
  auto hosts = [&](const DcId& dc) { return std::find(r->replicas.begin(), r->replicas.end(), dc) != r->replicas.end(); };
  if (!fn->sla.locality.empty()) {
    for (const auto& dc : fn->sla.locality)
      if (hosts(dc) && net_.reachable(at_, dc)) return dc;
    return Status(Errc::NoReplicaAvailable, "no preferred datacenter of " + cls + "." + function + " is reachable");
  }
  std::vector<DcId> live;
  for (const auto& dc : r->replicas)
    if (net_.reachable(at_, dc)) live.push_back(dc);
  if (live.empty()) return Status(Errc::NoReplicaAvailable, "no runtime of " + cls + " is reachable");
  auto& cur = wrr_[cls];
  std::int64_t total = 0;
  const DcId* best = nullptr;
  for (const auto& dc : live) {
    const auto w = static_cast<std::int64_t>(dir_.capacity(dc));
    total += w;
    cur[dc] += w;
    if (!best || cur[dc] > cur[*best]) best = &dc;
  }
  cur[*best] -= total;
  return *best;
}

void Ingress::invoke(const ObjectId& obj, const std::string& function, Bytes payload,
                     std::shared_ptr<session::SessionToken> session, std::function<void(const InvokeOutcome&)> done) {
  const Millis issued = net_.now();
  InvokeRequest req;
  req.req = dir_.next_request();
  auto target = route(obj.cls, function);
  if (!target.ok()) {
    InvokeOutcome o;
    o.req = req.req;
    o.status = target.status();
    o.issued = o.arrival = o.start = o.end = o.completed = issued;
    done(o);
    return;
  }
  req.reply_topic = topic_;
  req.instance = obj.instance;
  req.function = function;
  req.payload = std::move(payload);
  if (session) req.token = *session;
  req.issued = issued;
  const auto id = req.req;
  auto on_timeout = [this, id, issued, done] {
    InvokeOutcome o;
    o.req = id;
    o.status = Status(Errc::Timeout, "no reply");
    o.issued = issued;
    o.completed = net_.now();
    done(o);
  };
  Pending& p = pending_[id];
  p.on_reply = [this, id, issued, session, done](ByteReader& r, Kind k) {
    if (k != Kind::InvokeReply) return;
    InvokeReply rep = decode_invoke_reply(r);
    if (session && rep.token) session::absorb(*session, *rep.token);
    InvokeOutcome o;
    o.req = id;
    if (rep.code != Errc::Ok) o.status = Status(rep.code, rep.message);
    o.result = std::move(rep.result);
    o.executed_at = std::move(rep.executed_at);
    o.issued = issued;
    o.arrival = rep.arrival;
    o.start = rep.start;
    o.end = rep.end;
    o.completed = net_.now();
    done(o);
  };
  p.on_timeout = std::move(on_timeout);
  p.timer = net_.loop().after(timeout_, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto f = std::move(it->second.on_timeout);
    pending_.erase(it);
    f();
  }));
  net_.send({at_, *target, object_topic(obj), encode(req), 0});
}

void Ingress::on_message(const sim::Envelope& env) {
  const auto kind = static_cast<Kind>(kind_of(env.payload));
  if (kind != Kind::InvokeReply && kind != Kind::ObjectReply) return;
  ByteReader r(env.payload);
  r.u8();
  const auto id = r.u64();
  auto it = pending_.find(id);
  if (it == pending_.end()) return;
  net_.loop().cancel(it->second.timer);
  auto f = std::move(it->second.on_reply);
  pending_.erase(it);
  ByteReader body(env.payload);
  body.u8();
  f(body, kind);
}

StatusOr<DcId> Ingress::primary(const std::string& cls) const {
  const ClassRoute* r = dir_.find(cls);
  if (!r) return Status(Errc::UnknownClass, "class " + cls + " is not deployed");
  for (const auto& dc : r->replicas)
    if (net_.reachable(at_, dc)) return dc;
  return Status(Errc::NoReplicaAvailable, "no runtime of " + cls + " is reachable");
}

ObjectId Ingress::create_object(const std::string& cls) {
  const ClassRoute* r = dir_.find(cls);
  if (!r) throw Error(Errc::UnknownClass, "class " + cls + " is not deployed");
  const ObjectId obj{cls, dir_.next_instance(cls)};
  for (const auto& dc : r->replicas)
    net_.send({at_, dc, object_topic(obj), encode(Kind::Create, ObjectOp{0, {}, obj.instance}), 0});
  return obj;
}

void Ingress::get_object(const ObjectId& obj, std::function<void(StatusOr<ObjectDescriptor>)> done) {
  auto target = primary(obj.cls);
  if (!target.ok()) {
    done(target.status());
    return;
  }
  const auto id = dir_.next_request();
  Pending& p = pending_[id];
  p.on_reply = [obj, done](ByteReader& r, Kind) {
    ObjectReply rep = decode_object_reply(r);
    if (rep.code != Errc::Ok) {
      done(Status(rep.code, obj.to_string()));
    } else {
      done(ObjectDescriptor{obj, std::move(rep.replicas)});
    }
  };
  p.on_timeout = [done] { done(Status(Errc::Timeout, "no reply")); };
  p.timer = net_.loop().after(timeout_, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto f = std::move(it->second.on_timeout);
    pending_.erase(it);
    f();
  }));
  net_.send({at_, *target, object_topic(obj), encode(Kind::Describe, ObjectOp{id, topic_, obj.instance}), 0});
}

void Ingress::delete_object(const ObjectId& obj, std::function<void(Status)> done) {
  auto target = primary(obj.cls);
  if (!target.ok()) {
    done(target.status());
    return;
  }
  const auto id = dir_.next_request();
  Pending& p = pending_[id];
  p.on_reply = [obj, done](ByteReader& r, Kind) {
    ObjectReply rep = decode_object_reply(r);
    done(rep.code == Errc::Ok ? Status{} : Status(rep.code, obj.to_string()));
  };
  p.on_timeout = [done] { done(Status(Errc::Timeout, "no reply")); };
  p.timer = net_.loop().after(timeout_, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto f = std::move(it->second.on_timeout);
    pending_.erase(it);
    f();
  }));
  net_.send({at_, *target, object_topic(obj), encode(Kind::Delete, ObjectOp{id, topic_, obj.instance}), 0});
}

DatacenterAgent::DatacenterAgent(sim::Network& net, DcId dc, std::uint32_t capacity, const HandlerRegistry& handlers,
                                 HookFactory hooks)
    : net_(net), dc_(std::move(dc)), ledger_(capacity), handlers_(handlers), hooks_(std::move(hooks)) {
  sub_ = net_.subscribe(dc_, "ctl/" + dc_, life_.guard([this](const sim::Envelope& e) { on_message(e); }));
  timer_ = net_.loop().after(1000, life_.guard([this] { heartbeat(); }));
}

DatacenterAgent::~DatacenterAgent() {
  net_.unsubscribe(sub_);
  net_.loop().cancel(timer_);
  runtimes_.clear();
}

ClassRuntime* DatacenterAgent::runtime(const std::string& cls) {
  auto it = runtimes_.find(cls);
  return it == runtimes_.end() ? nullptr : it->second.get();
}

std::vector<std::string> DatacenterAgent::classes() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : runtimes_) out.push_back(n);
  return out;
}

void DatacenterAgent::kill(const std::string& cls) { runtimes_.erase(cls); }

void DatacenterAgent::ack(const DcId& control, std::uint64_t seq, const std::string& cls, const Status& s) {
  AckMsg a{seq, cls, dc_, s.code(), s.message()};
  net_.send({dc_, control, "ctl/" + control, encode(a), 0});
}

void DatacenterAgent::on_message(const sim::Envelope& env) {
  const auto kind = static_cast<Kind>(kind_of(env.payload));
  ByteReader r(env.payload);
  try {
    switch (kind) {
      case Kind::Deploy: {
        r.u8();
        DeployMsg m = decode_deploy(r);
        const auto cls = m.spec.cls.name;
        control_[cls] = m.control;
        if (auto* rt = runtime(cls)) {
          rt->set_replicas(m.spec.replicas);
          ack(m.control, m.seq, cls, {});
          return;
        }
        try {
          runtimes_[cls] = std::make_unique<ClassRuntime>(net_, dc_, std::move(m.spec), handlers_, ledger_,
                                                          hooks_ ? hooks_(dc_, cls) : RuntimeHooks{});
          ack(m.control, m.seq, cls, {});
        } catch (const Error& e) {
          runtimes_.erase(cls);
          ack(m.control, m.seq, cls, Status(e.code(), e.what()));
        }
        return;
      }
      case Kind::Undeploy:
        r.u8();
        runtimes_.erase(decode_undeploy(r));
        return;
      case Kind::SetReplicas: {
        r.u8();
        auto m = decode_set_replicas(r);
        if (auto* rt = runtime(m.cls)) rt->set_replicas(std::move(m.replicas));
        return;
      }
      case Kind::Reserve: {
        r.u8();
        auto m = decode_reserve(r);
        auto* rt = runtime(m.cls);
        if (!rt) {
          ack(m.control, m.seq, m.cls, Status(Errc::UnknownClass, m.cls + " is not running here"));
          return;
        }
        try {
          rt->reserve_slots(m.function, m.slots);
          ack(m.control, m.seq, m.cls, {});
        } catch (const Error& e) {
          ack(m.control, m.seq, m.cls, Status(e.code(), e.what()));
        }
        return;
      }
      default:
        return;
    }
  } catch (const Error& e) {
    if (e.code() != Errc::DecodeError) throw;
  }
}

void DatacenterAgent::heartbeat() {
  for (auto& [cls, rt] : runtimes_) {
    auto c = control_.find(cls);
    if (c == control_.end()) continue;
    Heartbeat hb;
    hb.cls = cls;
    hb.dc = dc_;
    hb.at = net_.now();
    hb.functions = rt->take_stats();
    hb.elastic = rt->pool().elastic();
    hb.reserved = rt->pool().reserved_total();
    net_.send({dc_, c->second, "ctl/" + c->second, encode(hb), 0});
  }
  timer_ = net_.loop().after(1000, life_.guard([this] { heartbeat(); }));
}

}  // namespace weft::runtime
