#include "weft/runtime/class_runtime.hpp"

#include <algorithm>

#include "weft/model/validate.hpp"

namespace weft::runtime {

using model::ConsistencyKind;
using session::WriteKind;

namespace {

AttrValue to_attr_value(const ae::CrdtValue* v) {
  AttrValue out;
  if (!v) return out;
  if (const auto* reg = std::get_if<ae::LwwRegister>(v)) {
    out.found = !reg->tombstone;
    if (out.found) out.value = reg->value;
  } else if (const auto* c = std::get_if<ae::GCounter>(v)) {
    out.found = true;
    out.counter = c->total();
  } else if (const auto* m = std::get_if<ae::LwwMap>(v)) {
    out.found = true;
    for (const auto& [f, e] : m->entries)
      if (!e.tombstone) out.fields[f] = e.value;
  }
  return out;
}

bool any_mode(const model::FlattenedClass& c, ConsistencyKind k) {
  return std::any_of(c.attributes.begin(), c.attributes.end(),
                     [k](const model::ResolvedAttribute& a) { return a.sla.consistency.kind == k; });
}

constexpr Millis kScalePeriod = 250;

std::string object_topic(const std::string& cls, std::uint64_t instance) {
  return "obj/" + cls + "/" + std::to_string(instance);
}

}  // namespace

// Storage access for one invocation; holds the session it runs in.
class ClassRuntime::Access : public ObjectAccess {
 public:
  Access(ClassRuntime* rt, SessionUse s) : rt_(rt), alive_(rt->alive_), s_(std::move(s)) {}

  void commit(const ObjectId& obj, const std::string& attr, Bytes value, StatusCb done) override {
    write(obj, attr, model::AttributeKind::Scalar, WriteKind::Put, std::move(value), {}, std::move(done));
  }
  void increment(const ObjectId& obj, const std::string& attr, std::uint64_t by, StatusCb done) override {
    write(obj, attr, model::AttributeKind::Counter, WriteKind::Increment, std::to_string(by), {}, std::move(done));
  }
  void map_put(const ObjectId& obj, const std::string& attr, const std::string& field, Bytes value,
               StatusCb done) override {
    write(obj, attr, model::AttributeKind::Map, WriteKind::MapPut, std::move(value), field, std::move(done));
  }
  void refresh(const ObjectId& obj, const std::string& attr, std::function<void(StatusOr<AttrValue>)> done) override {
    if (alive_.expired()) return;
    const auto* a = rt_->spec_.cls.attribute(attr);
    if (!a) {
      done(Status(Errc::UnknownMember, "no attribute " + attr));
      return;
    }
    rt_->read_attr(obj, *a, s_, std::move(done));
  }
  void invoke(const ObjectId& target, const std::string& function, Bytes payload,
              std::function<void(StatusOr<Bytes>)> done) override {
    if (alive_.expired()) return;
    if (!rt_->hooks_.route) {
      done(Status(Errc::NoReplicaAvailable, "no route for " + target.to_string()));
      return;
    }
    rt_->hooks_.route(target, function, std::move(payload), std::move(done));
  }

  const SessionUse& session() const { return s_; }

 private:
  void write(const ObjectId& obj, const std::string& attr, model::AttributeKind kind, WriteKind wk, Bytes value,
             std::string field, StatusCb done) {
    if (alive_.expired()) return;
    const auto* a = rt_->spec_.cls.attribute(attr);
    if (!a) {
      done(Status(Errc::UnknownMember, "no attribute " + attr));
      return;
    }
    if (a->kind != kind) {
      done(Status(Errc::InvalidArgument, attr + " is a " + model::attribute_kind_name(a->kind) + " attribute"));
      return;
    }
    auto* rt = rt_;
    std::weak_ptr<int> alive = alive_;
    rt_->write_attr(obj, *a, wk, std::move(value), std::move(field), s_,
                    [rt, alive, obj, attr, done = std::move(done)](Status s) {
                      if (alive.expired()) return;
                      if (s.ok()) rt->committed(obj, attr);
                      done(s);
                    });
  }

  ClassRuntime* rt_;
  std::weak_ptr<int> alive_;
  SessionUse s_;
};

ClassRuntime::ClassRuntime(sim::Network& net, DcId dc, RuntimeSpec spec, const HandlerRegistry& handlers,
                           CapacityLedger& ledger, RuntimeHooks hooks)
    : net_(net),
      dc_(std::move(dc)),
      spec_(std::move(spec)),
      handlers_(handlers),
      ledger_(ledger),
      hooks_(std::move(hooks)),
      pool_(net.loop(), spec_.cold_start_ms) {
  const auto& c = spec_.cls;
  const bool strong = any_mode(c, ConsistencyKind::Strong);
  const bool bounded = any_mode(c, ConsistencyKind::BoundedStaleness);
  const bool ryw = any_mode(c, ConsistencyKind::ReadYourWrite);

  try {
    for (const auto& [fn, n] : spec_.reserved) {
      if (!c.function(fn)) throw Error(Errc::UnknownFunction, c.name + " has no function " + fn);
      ledger_.reserve(c.name + "/" + fn, n);
      pool_.set_reserved(fn, n);
    }
  } catch (...) {
    ledger_.release(c.name);
    throw;
  }
  pool_.set_elastic(ledger_.grant_elastic(c.name, std::max<std::uint32_t>(1, spec_.initial_elastic)));
  pool_.on_pressure = [this] {
    const auto want = std::min<std::uint64_t>(2ull * pool_.elastic(), ledger_.capacity());
    pool_.set_elastic(ledger_.grant_elastic(spec_.cls.name, static_cast<std::uint32_t>(want)));
  };

  if (bounded || ryw) {
    Millis period = spec_.ryw_sync_ms;
    if (bounded) {
      period = std::numeric_limits<Millis>::max();
      for (const auto& a : c.attributes)
        if (a.sla.consistency.kind == ConsistencyKind::BoundedStaleness)
          period = std::min(period, ae::default_sync_period(a.sla.consistency.delta_ms));
      if (ryw) period = std::min(period, spec_.ryw_sync_ms);
    }
    replica_ = std::make_unique<ae::Replica>(net_, ae::ReplicaConfig{c.name, dc_, spec_.replica_id, period, 0});
    for (const auto& p : spec_.replicas)
      if (p != dc_) replica_->add_peer(p, spec_.joining ? ae::kNeverSynced : net_.now());
    replica_->start();
  }
  if (ryw) {
    endpoint_ = std::make_unique<session::SessionEndpoint>(net_, c.name, *replica_);
    endpoint_->on_serve = [this](const std::string& key, const ae::Stamp& stamp, bool write) {
      emit(write ? DataOp::Apply : DataOp::Serve, key, ConsistencyKind::ReadYourWrite, stamp, net_.now());
    };
    session_client_ = std::make_unique<session::SessionClient>(net_, c.name, dc_, "rt-" + dc_);
  }
  if (strong) {
    raft::GroupConfig g{c.name, "0", spec_.timings};
    if (std::find(spec_.raft_members.begin(), spec_.raft_members.end(), dc_) != spec_.raft_members.end()) {
      raft_peer_ = std::make_unique<raft::RaftPeer>(net_, g, dc_, spec_.raft_members, hooks_.checker);
      raft_peer_->on_commit = [this](const raft::LogEntry& e) {
        if (e.command.noop) return;
        emit(DataOp::Apply, e.command.key, ConsistencyKind::Strong, ae::Stamp{static_cast<Millis>(e.index), 0, 0},
             net_.now());
      };
      raft_peer_->on_read = [this](const std::string& key, Millis arrived, raft::Index index) {
        emit(DataOp::Serve, key, ConsistencyKind::Strong, ae::Stamp{static_cast<Millis>(index), 0, 0}, arrived);
      };
    }
    raft_client_ = std::make_unique<raft::RaftClient>(net_, g, dc_, "rt-" + dc_, spec_.raft_members);
  }

  for (const auto& t : c.triggers) triggers_.insert(t);
  sub_ = net_.subscribe(dc_, "obj/" + c.name + "/", life_.guard([this](const sim::Envelope& e) { on_message(e); }));

  scaler_ = net_.loop().after(kScalePeriod, life_.guard([this] { tick_again(); }));
  if (spec_.joining) {
    synced_ = false;
    request_objects();
  }
}

ClassRuntime::~ClassRuntime() {
  net_.unsubscribe(sub_);
  net_.loop().cancel(scaler_);
  net_.loop().cancel(sync_timer_);
  ledger_.release(spec_.cls.name);
}

// Asks every peer for the object registry until one answers.
void ClassRuntime::request_objects() {
  if (synced_) return;
  for (const auto& p : spec_.replicas)
    if (p != dc_) net_.send({dc_, p, "obj/" + spec_.cls.name + "/sync", encode(Kind::ObjectSync, ObjectOp{}), 0});
  sync_timer_ = net_.loop().after(1000, life_.guard([this] { request_objects(); }));
}

void ClassRuntime::tick_again() {
  rescale();
  scaler_ = net_.loop().after(kScalePeriod, life_.guard([this] { tick_again(); }));
}

std::string ClassRuntime::key(std::uint64_t instance, const std::string& attr) const {
  return std::to_string(instance) + "/" + attr;
}

bool ClassRuntime::has_object(std::uint64_t instance) const {
  auto it = objects_.find(instance);
  return it != objects_.end() && !it->second.deleted;
}

bool ClassRuntime::is_deleted(std::uint64_t instance) const {
  auto it = objects_.find(instance);
  return it != objects_.end() && it->second.deleted;
}

std::size_t ClassRuntime::object_count() const {
  return static_cast<std::size_t>(
      std::count_if(objects_.begin(), objects_.end(), [](const auto& kv) { return !kv.second.deleted; }));
}

void ClassRuntime::set_replicas(std::vector<DcId> replicas) {
  if (replica_) {
    for (const auto& p : spec_.replicas)
      if (p != dc_ && std::find(replicas.begin(), replicas.end(), p) == replicas.end()) replica_->remove_peer(p);
    for (const auto& p : replicas)
      if (p != dc_ && std::find(spec_.replicas.begin(), spec_.replicas.end(), p) == spec_.replicas.end())
        replica_->add_peer(p, net_.now());
  }
  spec_.replicas = std::move(replicas);
}

void ClassRuntime::register_trigger(const model::TriggerRule& rule) {
  auto def = model::to_definition(spec_.cls);
  def.triggers.assign(triggers_.begin(), triggers_.end());
  def.triggers.push_back(rule);
  model::validate_class(def, handlers_.names());
  triggers_.insert(rule);
}

void ClassRuntime::suppress(const model::TriggerRule& rule) {
  if (triggers_.erase(rule) == 0)
    throw Error(Errc::UnknownRule, "no active trigger " + rule.source + "/" + model::trigger_event_name(rule.event) +
                                       " -> " + rule.target_function);
}

std::set<model::TriggerRule> ClassRuntime::active_triggers() const { return triggers_; }

std::uint64_t ClassRuntime::fired(const model::TriggerRule& rule) const {
  auto it = fired_.find(rule);
  return it == fired_.end() ? 0 : it->second;
}

ReservationPlan ClassRuntime::reserve_throughput(const std::string& fn, std::uint64_t rps, Millis mean_service_ms) {
  if (!spec_.cls.function(fn)) throw Error(Errc::UnknownFunction, spec_.cls.name + " has no function " + fn);
  ReservationPlan plan;
  plan.rps = rps;
  plan.mean_service_ms = mean_service_ms;
  const auto n = reserved_slots(rps, mean_service_ms);
  reserve_slots(fn, n);
  if (n > 0) plan.slots[fn] = n;
  return plan;
}

void ClassRuntime::reserve_slots(const std::string& fn, std::uint32_t slots) {
  if (!spec_.cls.function(fn)) throw Error(Errc::UnknownFunction, spec_.cls.name + " has no function " + fn);
  ledger_.reserve(spec_.cls.name + "/" + fn, slots);
  pool_.set_reserved(fn, slots);
  if (slots == 0) {
    spec_.reserved.erase(fn);
  } else {
    spec_.reserved[fn] = slots;
  }
  pool_.set_elastic(ledger_.grant_elastic(spec_.cls.name, pool_.elastic()));
}

void ClassRuntime::rescale() {
  const PoolWindow w = pool_.take_window();
  const auto work = static_cast<std::uint64_t>(std::max<Millis>(0, w.work_ms));
  // slots to carry the window's work at 80% utilisation, plus the backlog
  const auto period = static_cast<std::uint64_t>(kScalePeriod);
  std::uint64_t want = (work * 5 + 4 * period - 1) / (4 * period) + pool_.queued();
  want = std::clamp<std::uint64_t>(want, 1, ledger_.capacity());
  pool_.set_elastic(ledger_.grant_elastic(spec_.cls.name, static_cast<std::uint32_t>(want)));
}

std::map<std::string, FunctionStats> ClassRuntime::take_stats() {
  auto out = std::move(stats_);
  stats_.clear();
  return out;
}

void ClassRuntime::note(const std::string& fn, Errc code) {
  auto& s = stats_[fn];
  if (code == Errc::Ok) {
    ++s.ok;
  } else {
    ++s.failed;
    if (code == Errc::NoCapacity) ++s.rejected;
  }
}

void ClassRuntime::emit(DataOp op, const std::string& key, ConsistencyKind mode, const ae::Stamp& v, Millis issued,
                        std::uint64_t session, std::uint64_t corr) {
  if (!hooks_.on_data) return;
  DataEvent e;
  e.op = op;
  e.at = net_.now();
  e.issued = issued;
  e.cls = spec_.cls.name;
  e.key = key;
  e.mode = mode;
  e.version = v;
  e.dc = dc_;
  e.session = session;
  e.corr = corr;
  hooks_.on_data(e);
}

void ClassRuntime::on_message(const sim::Envelope& env) {
  const auto kind = static_cast<Kind>(kind_of(env.payload));
  try {
    ByteReader r(env.payload);
    switch (kind) {
      case Kind::Invoke:
        r.u8();
        on_invoke(env, decode_invoke(r));
        break;
      case Kind::ObjectSync: {
        if (!synced_) break;
        ObjectList list;
        for (const auto& [n, o] : objects_) list.objects.emplace_back(n, o.deleted);
        net_.send({dc_, env.src, "obj/" + spec_.cls.name + "/sync", encode(list), 0});
        break;
      }
      case Kind::ObjectList: {
        r.u8();
        for (const auto& [n, deleted] : decode_object_list(r).objects) {
          auto& o = objects_[n];
          o.deleted = o.deleted || deleted;
        }
        synced_ = true;
        net_.loop().cancel(sync_timer_);
        break;
      }
      case Kind::Create:
      case Kind::Delete:
      case Kind::Tombstone:
      case Kind::Describe:
        r.u8();
        on_object_op(env, kind, decode_object_op(r));
        break;
      default:
        break;
    }
  } catch (const Error& e) {
    if (e.code() != Errc::DecodeError) throw;
  }
}

void ClassRuntime::reply(const sim::DcId& to, const InvokeRequest& req, InvokeReply rep) {
  rep.req = req.req;
  rep.executed_at = dc_;
  net_.send({dc_, to, req.reply_topic, encode(rep), 0});
}

void ClassRuntime::on_invoke(const sim::Envelope& env, InvokeRequest req) {
  const Millis arrival = net_.now();
  auto fail = [&](Errc code, std::string msg) {
    InvokeReply rep;
    rep.code = code;
    rep.message = std::move(msg);
    rep.arrival = rep.start = rep.end = arrival;
    rep.token = req.token;
    reply(env.src, req, std::move(rep));
  };
  const auto* fn = spec_.cls.function(req.function);
  if (!fn) {
    fail(Errc::UnknownFunction, spec_.cls.name + " has no function " + req.function);
    return;
  }
  ++stats_[fn->name].arrivals;
  if (!has_object(req.instance)) {
    note(fn->name, Errc::UnknownObject);
    fail(Errc::UnknownObject, model::ObjectId{spec_.cls.name, req.instance}.to_string() + " does not exist");
    return;
  }
  auto shared = std::make_shared<InvokeRequest>(std::move(req));
  const sim::DcId from = env.src;
  Status s = pool_.submit(fn->name, fn->service_ms, [this, from, shared, fn, arrival](const Grant& g) {
    start(from, shared, *fn, arrival, g);
  });
  if (!s.ok()) {
    note(fn->name, s.code());
    InvokeReply rep;
    rep.code = s.code();
    rep.message = s.message();
    rep.arrival = rep.start = rep.end = arrival;
    rep.token = shared->token;
    reply(from, *shared, std::move(rep));
    if (hooks_.on_exec)
      hooks_.on_exec({model::ObjectId{spec_.cls.name, shared->instance}, fn->name, dc_, arrival, arrival, arrival, 0,
                      false, s.code()});
  }
}

void ClassRuntime::start(const sim::DcId& from, std::shared_ptr<InvokeRequest> req, const model::ResolvedFunction& fn,
                         Millis arrival, const Grant& g) {
  struct Exec {
    std::optional<StatusOr<Bytes>> result;
    bool service_done = false;
  };
  auto exec = std::make_shared<Exec>();
  const model::ObjectId obj{spec_.cls.name, req->instance};

  SessionUse su;
  if (req->token) {
    su.token = std::make_shared<session::SessionToken>(*req->token);
  } else {
    su.token = std::make_shared<session::SessionToken>();
    su.token->pinned = dc_;
  }
  su.corr = req->req;
  auto access = std::make_shared<Access>(this, su);

  const std::string fname = fn.name;
  auto complete = [this, from, req, exec, obj, fname, arrival, g, token = su.token] {
    const auto& res = *exec->result;
    InvokeReply rep;
    rep.code = res.code();
    if (res.ok()) {
      rep.result = *res;
    } else {
      rep.message = res.status().message();
    }
    if (req->token) rep.token = *token;
    rep.arrival = arrival;
    rep.start = g.start;
    rep.end = net_.now();
    const Errc code = rep.code;
    reply(from, *req, std::move(rep));
    note(fname, code);
    if (hooks_.on_exec) hooks_.on_exec({obj, fname, dc_, arrival, g.start, net_.now(), g.cold_ms, g.reserved, code});
    fire(obj, fname, code == Errc::Ok ? model::TriggerEvent::OnComplete : model::TriggerEvent::OnFailure);
  };

  auto alive = std::weak_ptr<int>(alive_);
  auto ctx = std::make_shared<InvocationContext>(obj, fn, req->payload, dc_, access,
                                                 [exec, complete, alive](StatusOr<Bytes> r) {
                                                   if (alive.expired()) return;
                                                   exec->result = std::move(r);
                                                   if (exec->service_done) complete();
                                                 });
  net_.loop().schedule(g.end, life_.guard([exec, complete] {
    exec->service_done = true;
    if (exec->result) complete();
  }));

  const Handler* h = handlers_.find(fn.handler);
  if (!h) {
    ctx->fail(Status(Errc::HandlerError, "no handler " + fn.handler));
    return;
  }
  try {
    (*h)(ctx);
  } catch (const std::exception& e) {
    ctx->fail(Status(Errc::HandlerError, e.what()));
  }
}

void ClassRuntime::fire(const model::ObjectId& obj, const std::string& source, model::TriggerEvent event) {
  for (const auto& rule : triggers_) {
    if (rule.source != source || rule.event != event) continue;
    ++fired_[rule];
    if (hooks_.route) hooks_.route(obj, rule.target_function, encode_event(source, event, obj), [](StatusOr<Bytes>) {});
  }
}

void ClassRuntime::committed(const model::ObjectId& obj, const std::string& attr) {
  auto it = objects_.find(obj.instance);
  if (it == objects_.end()) return;
  if (it->second.committed.insert(attr).second) fire(obj, attr, model::TriggerEvent::OnCreate);
  fire(obj, attr, model::TriggerEvent::OnUpdate);
}

void ClassRuntime::on_object_op(const sim::Envelope& env, Kind kind, const ObjectOp& op) {
  const model::ObjectId obj{spec_.cls.name, op.instance};
  ObjectReply rep;
  rep.req = op.req;
  switch (kind) {
    case Kind::Create:
      objects_.try_emplace(op.instance);
      break;
    case Kind::Tombstone:
      objects_[op.instance].deleted = true;
      return;
    case Kind::Delete: {
      auto it = objects_.find(op.instance);
      if (it == objects_.end()) {
        rep.code = Errc::UnknownObject;
      } else if (it->second.deleted) {
        rep.code = Errc::AlreadyDeleted;
      } else {
        it->second.deleted = true;
        for (const auto& p : spec_.replicas)
          if (p != dc_) net_.send({dc_, p, object_topic(spec_.cls.name, op.instance), encode(Kind::Tombstone, op), 0});
        for (const auto& a : spec_.cls.attributes) fire(obj, a.name, model::TriggerEvent::OnDelete);
      }
      break;
    }
    case Kind::Describe:
      if (is_deleted(op.instance)) {
        rep.code = Errc::AlreadyDeleted;
      } else if (!has_object(op.instance)) {
        rep.code = Errc::UnknownObject;
      } else {
        rep.replicas = spec_.replicas;
      }
      break;
    default:
      return;
  }
  if (!op.reply_topic.empty()) net_.send({dc_, env.src, op.reply_topic, encode(rep), 0});
}

void ClassRuntime::write_attr(const model::ObjectId& obj, const model::ResolvedAttribute& a, WriteKind kind,
                              Bytes value, std::string field, const SessionUse& s, StatusCb done) {
  const auto k = key(obj.instance, a.name);
  switch (a.sla.consistency.kind) {
    case ConsistencyKind::Strong: {
      if (kind != WriteKind::Put) {
        done(Status(Errc::InvalidArgument, "strong attributes hold scalar values only"));
        return;
      }
      raft::Command cmd;
      cmd.key = k;
      cmd.value = std::move(value);
      raft_client_->write(std::move(cmd), [done = std::move(done)](StatusOr<raft::Index> r) { done(r.status()); });
      return;
    }
    case ConsistencyKind::BoundedStaleness: {
      if (replica_->gate(a.sla.consistency.delta_ms) == ae::Gate::Block) {
        emit(DataOp::Blocked, k, a.sla.consistency.kind, {}, net_.now());
        done(Status(Errc::StalenessExceeded, "replica of " + k + " is staler than the bound"));
        return;
      }
      ae::Stamp stamp;
      switch (kind) {
        case WriteKind::Put:
          stamp = replica_->write(k, std::move(value)).stamp;
          break;
        case WriteKind::Delete:
          stamp = replica_->write(k, {}, true).stamp;
          break;
        case WriteKind::Increment:
          replica_->increment(k, std::stoull(value));
          break;
        case WriteKind::MapPut:
          stamp = replica_->map_put(k, field, std::move(value)).entries.at(field).stamp;
          break;
      }
      emit(DataOp::Apply, k, a.sla.consistency.kind, stamp, net_.now());
      done(Status{});
      return;
    }
    case ConsistencyKind::ReadYourWrite:
      session_write(k, kind, std::move(value), std::move(field), s, true, std::move(done));
      return;
  }
}

void ClassRuntime::read_attr(const model::ObjectId& obj, const model::ResolvedAttribute& a, const SessionUse& s,
                             std::function<void(StatusOr<AttrValue>)> done) {
  const auto k = key(obj.instance, a.name);
  switch (a.sla.consistency.kind) {
    case ConsistencyKind::Strong:
      raft_client_->read(k, [done = std::move(done)](StatusOr<raft::ReadValue> r) {
        if (!r.ok()) {
          done(r.status());
          return;
        }
        AttrValue v;
        v.found = r->found && !r->tombstone;
        if (v.found) v.value = r->value;
        done(std::move(v));
      });
      return;
    case ConsistencyKind::BoundedStaleness: {
      if (replica_->gate(a.sla.consistency.delta_ms) == ae::Gate::Block) {
        emit(DataOp::Blocked, k, a.sla.consistency.kind, {}, net_.now());
        done(Status(Errc::StalenessExceeded, "replica of " + k + " is staler than the bound"));
        return;
      }
      const ae::CrdtValue* v = replica_->get(k);
      emit(DataOp::Serve, k, a.sla.consistency.kind, v ? ae::version_of(*v) : ae::Stamp{}, net_.now());
      done(to_attr_value(v));
      return;
    }
    case ConsistencyKind::ReadYourWrite:
      session_read(k, s, true, std::move(done));
      return;
  }
}

void ClassRuntime::session_write(const std::string& key, WriteKind kind, Bytes value, std::string field, SessionUse s,
                                 bool retry, StatusCb done) {
  const Millis issued = net_.now();
  auto again = [this, key, kind, value, field, s, done]() mutable {
    session_client_->repin(s.token, spec_.replicas, [this, key, kind, value, field, s, done](StatusOr<session::SessionToken> t) {
      if (!t.ok()) {
        done(t.status());
        return;
      }
      session_write(key, kind, value, field, s, false, done);
    });
  };
  session_client_->write(s.token, key, kind, value, field,
                         [this, key, s, retry, issued, again, done](StatusOr<session::WriteAck> r) mutable {
                           if (r.ok()) {
                             if (s.token->id != 0)
                               emit(DataOp::SessionWrite, key, ConsistencyKind::ReadYourWrite, r->stamp, issued,
                                    s.token->id, s.corr);
                             done(Status{});
                           } else if (r.code() == Errc::ReplicaUnreachable && retry) {
                             again();
                           } else {
                             done(r.status());
                           }
                         });
}

void ClassRuntime::session_read(const std::string& key, SessionUse s, bool retry,
                                std::function<void(StatusOr<AttrValue>)> done) {
  const Millis issued = net_.now();
  session_client_->read(s.token, key, [this, key, s, retry, issued, done](StatusOr<session::SessionRead> r) {
    if (r.ok()) {
      if (s.token->id != 0)
        emit(DataOp::SessionRead, key, ConsistencyKind::ReadYourWrite, r->stamp, issued, s.token->id, s.corr);
      done(r->found ? to_attr_value(&r->value) : AttrValue{});
    } else if (r.code() == Errc::ReplicaUnreachable && retry) {
      session_client_->repin(s.token, spec_.replicas, [this, key, s, done](StatusOr<session::SessionToken> t) {
        if (!t.ok()) {
          done(t.status());
          return;
        }
        session_read(key, s, false, done);
      });
    } else {
      done(r.status());
    }
  });
}

}  // namespace weft::runtime
