#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "weft/model/io.hpp"
#include "weft/runtime/platform.hpp"

using namespace weft;
using namespace weft::runtime;

namespace {

model::FlattenedClass make_class(const nlohmann::json& j, const HandlerRegistry& h) {
  return model::validate_class(model::class_from_json(j), h.names());
}

nlohmann::json basic_class(const std::string& name, const std::string& consistency = "ryw") {
  nlohmann::json sla = {{"consistency", consistency}, {"availability", 0.99}};
  if (consistency == "bounded_staleness") sla["delta_s"] = 1.0;
  return {{"name", name},
          {"sla", sla},
          {"attributes", {{{"name", "value"}, {"kind", "scalar"}}, {{"name", "hits"}, {"kind", "counter"}}}},
          {"functions",
           {{{"name", "echo"}, {"handler", "echo"}, {"service_ms", 10}},
            {{"name", "put"}, {"handler", "put"}, {"service_ms", 5}},
            {{"name", "get"}, {"handler", "get"}, {"service_ms", 5}},
            {{"name", "bump"}, {"handler", "increment"}, {"service_ms", 2}, {"params", {{"attr", "hits"}}}},
            {{"name", "relay"}, {"handler", "relay"}, {"service_ms", 1}},
            {{"name", "bad"}, {"handler", "fail"}, {"service_ms", 1}},
            {{"name", "audit"}, {"handler", "echo"}, {"service_ms", 1}}}}};
}

struct Rig {
  sim::EventLoop loop{11};
  sim::Network net{loop};
  Directory dir;
  HandlerRegistry handlers = builtin_handlers();
  std::map<DcId, std::unique_ptr<Ingress>> ingress;
  std::map<DcId, std::unique_ptr<DatacenterAgent>> agents;
  std::vector<DataEvent> data;
  std::vector<ExecRecord> execs;
  std::vector<std::pair<sim::Envelope, Millis>> delivered;
  std::uint64_t seq = 0;

  explicit Rig(std::map<DcId, std::uint32_t> caps = {{"edge", 8}, {"edge2", 8}, {"cloud", 32}}) {
    for (const auto& [dc, _] : caps) net.add_datacenter(dc);
    auto link = [&](const DcId& a, const DcId& b, Millis ms) {
      if (caps.count(a) && caps.count(b)) net.set_latency(a, b, ms);
    };
    link("edge", "cloud", 20);
    link("edge2", "cloud", 20);
    link("edge", "edge2", 30);
    net.on_deliver = [this](const sim::Envelope& e, Millis at) { delivered.emplace_back(e, at); };
    for (const auto& [dc, cap] : caps) {
      dir.set_capacity(dc, cap);
      ingress[dc] = std::make_unique<Ingress>(net, dc, dir);
    }
    for (const auto& [dc, cap] : caps) {
      agents[dc] = std::make_unique<DatacenterAgent>(net, dc, cap, handlers, [this](const DcId& at, const std::string&) {
        RuntimeHooks h;
        h.on_data = [this](const DataEvent& e) { data.push_back(e); };
        h.on_exec = [this](const ExecRecord& r) { execs.push_back(r); };
        h.route = [this, at](const ObjectId& obj, const std::string& fn, Bytes payload,
                             std::function<void(StatusOr<Bytes>)> done) {
          ingress.at(at)->invoke(obj, fn, std::move(payload), nullptr, [done](const InvokeOutcome& o) {
            if (o.status.ok()) {
              done(o.result);
            } else {
              done(o.status);
            }
          });
        };
        return h;
      });
    }
  }

  void deploy(const model::FlattenedClass& cls, const std::vector<DcId>& replicas,
              std::map<DcId, std::map<std::string, std::uint32_t>> reserved = {}) {
    ae::ReplicaId id = 1;
    const DcId control = net.has("cloud") ? "cloud" : replicas.front();
    for (const auto& dc : replicas) {
      DeployMsg m;
      m.seq = ++seq;
      m.control = control;
      m.spec.cls = cls;
      m.spec.replicas = replicas;
      m.spec.raft_members = replicas;
      m.spec.replica_id = id++;
      m.spec.reserved = reserved[dc];
      net.send({control, dc, "ctl/" + dc, encode(m), 0});
    }
    loop.run_until(loop.now() + 1500);
    dir.publish(cls, replicas);
  }

  InvokeOutcome call(const DcId& from, const ObjectId& obj, const std::string& fn, Bytes payload = {},
                     std::shared_ptr<session::SessionToken> token = nullptr) {
    std::optional<InvokeOutcome> out;
    ingress.at(from)->invoke(obj, fn, std::move(payload), token, [&](const InvokeOutcome& o) { out = o; });
    while (!out && loop.step()) {
    }
    return *out;
  }

  ObjectId create(const std::string& cls, const DcId& from = "edge") {
    auto id = ingress.at(from)->create_object(cls);
    loop.run_until(loop.now() + 100);
    return id;
  }
};

}  // namespace

TEST(Workers, ReservedSlotsFormula) {
  EXPECT_EQ(reserved_slots(4000, 1), 4u);
  EXPECT_EQ(reserved_slots(100, 15), 2u);
  EXPECT_EQ(reserved_slots(1, 1), 1u);
  EXPECT_EQ(reserved_slots(0, 50), 0u);
}

TEST(Workers, LedgerRefusesOverReservation) {
  CapacityLedger l(10);
  l.reserve("a", 6);
  EXPECT_THROW(
      {
        try {
          l.reserve("b", 5);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::InsufficientCapacity);
          throw;
        }
      },
      Error);
  EXPECT_EQ(l.grant_elastic("x", 10), 4u);
  EXPECT_EQ(l.grant_elastic("y", 10), 0u);
  l.release("a");
  EXPECT_EQ(l.grant_elastic("y", 10), 6u);
  EXPECT_EQ(l.reserved_total() + l.elastic_total(), 10u);
}

TEST(Workers, ColdStartThenWarmReuse) {
  sim::EventLoop loop(1);
  WorkerPool pool(loop, 200);
  pool.set_elastic(1);
  std::vector<Grant> g;
  ASSERT_TRUE(pool.submit("f", 10, [&](const Grant& x) { g.push_back(x); }).ok());
  ASSERT_TRUE(pool.submit("f", 10, [&](const Grant& x) { g.push_back(x); }).ok());
  loop.run_until(1000);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].start, 0);
  EXPECT_EQ(g[0].cold_ms, 200);
  EXPECT_EQ(g[0].end, 210);
  EXPECT_EQ(g[1].start, 210);
  EXPECT_EQ(g[1].cold_ms, 0);
  EXPECT_EQ(g[1].end, 220);
}

TEST(Workers, ReservedSlotsAreWarmAndImmediate) {
  sim::EventLoop loop(1);
  WorkerPool pool(loop, 200);
  pool.set_reserved("r", 2);
  pool.set_elastic(1);
  std::vector<Grant> g;
  for (int i = 0; i < 2; ++i) ASSERT_TRUE(pool.submit("r", 4, [&](const Grant& x) { g.push_back(x); }).ok());
  loop.run_until(100);
  ASSERT_EQ(g.size(), 2u);
  for (const auto& x : g) {
    EXPECT_TRUE(x.reserved);
    EXPECT_EQ(x.start, x.submitted);
    EXPECT_EQ(x.cold_ms, 0);
  }
}

TEST(Workers, BestEffortQueueOverflowRejects) {
  sim::EventLoop loop(1);
  WorkerPool pool(loop, 0);
  pool.set_elastic(1);
  EXPECT_EQ(pool.queue_bound(), 10u);
  for (int i = 0; i < 11; ++i) ASSERT_TRUE(pool.submit("f", 10, [](const Grant&) {}).ok()) << i;
  EXPECT_EQ(pool.submit("f", 10, [](const Grant&) {}).code(), Errc::NoCapacity);
  EXPECT_EQ(pool.take_window().rejected, 1u);
}

// Random load against a fixed pool: no slot is double booked, concurrency never
// exceeds the slots owned, and best-effort work never lands on a reserved slot.
TEST(Workers, SlotAccountingUnderRandomLoad) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sim::EventLoop loop(seed);
    WorkerPool pool(loop, 50);
    pool.set_reserved("r", 3);
    pool.set_elastic(2);
    std::vector<std::pair<std::string, Grant>> grants;
    pool.on_grant = [&](const std::string& fn, const Grant& g) { grants.emplace_back(fn, g); };
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 300; ++i) {
      const Millis at = static_cast<Millis>(rng() % 5000);
      const bool r = rng() % 3 == 0;
      const Millis svc = 1 + static_cast<Millis>(rng() % 40);
      loop.schedule(at, [&pool, r, svc] { (void)pool.submit(r ? "r" : "be", svc, [](const Grant&) {}); });
    }
    loop.run_until(20000);
    std::map<std::uint64_t, std::vector<std::pair<Millis, Millis>>> by_slot;
    for (const auto& [fn, g] : grants) {
      if (fn != "r") EXPECT_FALSE(g.reserved);
      EXPECT_GE(g.start, g.submitted);
      by_slot[g.slot].emplace_back(g.start, g.end);
    }
    for (auto& [slot, iv] : by_slot) {
      std::sort(iv.begin(), iv.end());
      for (std::size_t i = 1; i < iv.size(); ++i) EXPECT_GE(iv[i].first, iv[i - 1].second) << "slot " << slot;
    }
    std::vector<std::pair<Millis, int>> edges;
    for (const auto& [_, g] : grants) {
      edges.emplace_back(g.start, 1);
      edges.emplace_back(g.end, -1);
    }
    std::sort(edges.begin(), edges.end(), [](auto a, auto b) { return a.first != b.first ? a.first < b.first : a.second < b.second; });
    int live = 0;
    for (const auto& [_, d] : edges) {
      live += d;
      EXPECT_LE(live, 5);
    }
  }
}

TEST(Wire, RuntimeSpecRoundTrip) {
  auto h = builtin_handlers();
  DeployMsg m;
  m.seq = 9;
  m.control = "cloud";
  m.spec.cls = make_class(basic_class("Doc"), h);
  m.spec.replicas = {"edge", "cloud"};
  m.spec.raft_members = {"edge", "cloud"};
  m.spec.replica_id = 2;
  m.spec.joining = true;
  m.spec.reserved = {{"echo", 3}};
  m.spec.timings.heartbeat = 40;
  const Bytes b = encode(m);
  ByteReader r(b);
  ASSERT_EQ(r.u8(), static_cast<std::uint8_t>(Kind::Deploy));
  const DeployMsg back = decode_deploy(r);
  EXPECT_EQ(back.spec.cls, m.spec.cls);
  EXPECT_EQ(encode(back), b);
}

TEST(Wire, TruncatedPayloadIsDecodeError) {
  Bytes b = encode(InvokeRequest{7, "in/edge", 1, "echo", "x", std::nullopt, 0});
  b.resize(b.size() - 3);
  ByteReader r(b);
  r.u8();
  try {
    decode_invoke(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DecodeError);
  }
}

TEST(Runtime, CreateDescribeAndDelete) {
  Rig rig;
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge", "cloud", "edge2"});
  const auto obj = rig.create("Doc");
  for (const auto& dc : {"edge", "cloud", "edge2"}) EXPECT_TRUE(rig.agents[dc]->runtime("Doc")->has_object(obj.instance));

  std::optional<StatusOr<ObjectDescriptor>> d;
  rig.ingress["cloud"]->get_object(obj, [&](StatusOr<ObjectDescriptor> x) { d = std::move(x); });
  rig.loop.run_until(rig.loop.now() + 200);
  ASSERT_TRUE(d && d->ok());
  EXPECT_EQ((*d)->replicas, (std::vector<DcId>{"edge", "cloud", "edge2"}));

  std::vector<Errc> codes;
  for (int i = 0; i < 2; ++i) {
    rig.ingress["edge"]->delete_object(obj, [&](Status s) { codes.push_back(s.code()); });
    rig.loop.run_until(rig.loop.now() + 200);
  }
  EXPECT_EQ(codes, (std::vector<Errc>{Errc::Ok, Errc::AlreadyDeleted}));
  for (const auto& dc : {"edge", "cloud", "edge2"}) EXPECT_TRUE(rig.agents[dc]->runtime("Doc")->is_deleted(obj.instance));
  EXPECT_EQ(rig.call("edge", obj, "echo").status.code(), Errc::UnknownObject);
}

TEST(Runtime, UnknownClassAndFunction) {
  Rig rig;
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge"});
  EXPECT_THROW(rig.ingress["edge"]->create_object("Nope"), Error);
  const auto obj = rig.create("Doc");
  EXPECT_EQ(rig.call("edge", obj, "missing").status.code(), Errc::UnknownFunction);
}

TEST(Runtime, EchoHoldsSlotForServiceTime) {
  Rig rig;
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge"});
  const auto obj = rig.create("Doc");
  auto first = rig.call("edge", obj, "echo", "hi");
  ASSERT_TRUE(first.status.ok());
  EXPECT_EQ(first.result, "hi");
  EXPECT_EQ(first.executed_at, "edge");
  EXPECT_EQ(first.end - first.start, 200 + 10);  // cold slot
  auto second = rig.call("edge", obj, "echo", "again");
  EXPECT_EQ(second.end - second.start, 10);
  ASSERT_EQ(rig.execs.size(), 2u);
  EXPECT_EQ(rig.execs[0].cold_ms, 200);
  EXPECT_EQ(rig.execs[1].cold_ms, 0);
}

TEST(Runtime, LocalityPinsExecutionSite) {
  Rig rig;
  auto j = basic_class("Cam");
  j["member_slas"] = {{"echo", {{"locality", {"edge2"}}}}};
  rig.deploy(make_class(j, rig.handlers), {"cloud", "edge2", "edge"});
  const auto obj = rig.create("Cam", "cloud");
  for (int i = 0; i < 5; ++i) EXPECT_EQ(rig.call("cloud", obj, "echo").executed_at, "edge2");
  rig.net.inject_partition({{"edge2"}, {"cloud", "edge"}, rig.loop.now(), rig.loop.now() + 10000});
  EXPECT_EQ(rig.call("cloud", obj, "echo").status.code(), Errc::NoReplicaAvailable);
}

TEST(Runtime, WeightedRoundRobinFollowsCapacity) {
  Rig rig({{"edge", 8}, {"cloud", 24}});
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge", "cloud"});
  std::map<DcId, int> n;
  for (int i = 0; i < 32; ++i) ++n[*rig.ingress["edge"]->route("Doc", "echo")];
  EXPECT_EQ(n["edge"], 8);
  EXPECT_EQ(n["cloud"], 24);
}

TEST(Runtime, RelayHopsAcrossDatacenters) {
  Rig rig;
  auto a = basic_class("Front");
  auto b = basic_class("Back");
  rig.deploy(make_class(a, rig.handlers), {"edge"});
  rig.deploy(make_class(b, rig.handlers), {"cloud"});
  const auto front = rig.create("Front");
  const auto back = rig.create("Back");
  rig.delivered.clear();
  auto out = rig.call("edge", front, "relay", back.to_string() + "|ping");
  ASSERT_TRUE(out.status.ok()) << out.status.message();
  EXPECT_EQ(out.result, "ping");
  bool hop = false;
  for (const auto& [e, _] : rig.delivered)
    if (e.src == "edge" && e.dst == "cloud" && e.topic == "obj/Back/" + std::to_string(back.instance)) hop = true;
  EXPECT_TRUE(hop);
  EXPECT_GE(out.completed - out.issued, 2 * 20);
}

TEST(Runtime, UpdateTriggersFireOncePerCommit) {
  Rig rig;
  auto j = basic_class("Doc");
  j["triggers"] = {{{"function", "audit"}, {"source", "value"}, {"event", "on_update"}},
                   {{"function", "audit"}, {"source", "value"}, {"event", "on_create"}}};
  rig.deploy(make_class(j, rig.handlers), {"edge"});
  const auto obj = rig.create("Doc");
  for (int i = 0; i < 3; ++i) ASSERT_TRUE(rig.call("edge", obj, "put", "v" + std::to_string(i)).status.ok());
  rig.loop.run_until(rig.loop.now() + 500);
  auto* rt = rig.agents["edge"]->runtime("Doc");
  const model::TriggerRule upd{"audit", "value", model::TriggerEvent::OnUpdate};
  const model::TriggerRule cre{"audit", "value", model::TriggerEvent::OnCreate};
  EXPECT_EQ(rt->fired(upd), 3u);
  EXPECT_EQ(rt->fired(cre), 1u);
  auto audits = [&] {
    return std::count_if(rig.execs.begin(), rig.execs.end(), [](const ExecRecord& r) { return r.function == "audit"; });
  };
  EXPECT_EQ(audits(), 4);

  rt->suppress(upd);
  ASSERT_TRUE(rig.call("edge", obj, "put", "again").status.ok());
  rig.loop.run_until(rig.loop.now() + 500);
  EXPECT_EQ(rt->fired(upd), 3u);
  EXPECT_EQ(audits(), 4);
  try {
    rt->suppress(upd);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownRule);
  }
}

TEST(Runtime, FailureTriggerFiresExactlyOnce) {
  Rig rig;
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge"});
  auto* rt = rig.agents["edge"]->runtime("Doc");
  const model::TriggerRule onfail{"audit", "bad", model::TriggerEvent::OnFailure};
  const model::TriggerRule ondone{"echo", "bad", model::TriggerEvent::OnComplete};
  rt->register_trigger(onfail);
  rt->register_trigger(ondone);
  EXPECT_EQ(rt->active_triggers().size(), 2u);
  EXPECT_THROW(rt->register_trigger({"nope", "bad", model::TriggerEvent::OnFailure}), Error);
  EXPECT_THROW(rt->register_trigger({"audit", "bad", model::TriggerEvent::OnUpdate}), Error);
  const auto obj = rig.create("Doc");
  EXPECT_EQ(rig.call("edge", obj, "bad").status.code(), Errc::HandlerError);
  rig.loop.run_until(rig.loop.now() + 500);
  EXPECT_EQ(rt->fired(onfail), 1u);
  EXPECT_EQ(rt->fired(ondone), 0u);
}

TEST(Runtime, StrongWriteThenRead) {
  Rig rig;
  rig.deploy(make_class(basic_class("Acct", "strong"), rig.handlers), {"edge", "cloud", "edge2"});
  rig.loop.run_until(rig.loop.now() + 2000);
  const auto obj = rig.create("Acct");
  auto w = rig.call("edge", obj, "put", "42");
  ASSERT_TRUE(w.status.ok()) << w.status.message();
  auto r = rig.call("edge2", obj, "get");
  ASSERT_TRUE(r.status.ok()) << r.status.message();
  EXPECT_EQ(r.result, "42");
  EXPECT_EQ(rig.call("edge", obj, "bump").status.code(), Errc::InvalidArgument);
  bool applied = false;
  for (const auto& e : rig.data)
    if (e.op == DataOp::Apply && e.mode == model::ConsistencyKind::Strong && e.key == "1/value") applied = true;
  EXPECT_TRUE(applied);
}

TEST(Runtime, BoundedStalenessBlocksWhenIsolated) {
  Rig rig;
  rig.deploy(make_class(basic_class("Feed", "bounded_staleness"), rig.handlers), {"edge", "cloud"});
  const auto obj = rig.create("Feed");
  ASSERT_TRUE(rig.call("edge", obj, "put", "a").status.ok());
  EXPECT_EQ(rig.call("edge", obj, "bump").result, "1");
  const Millis t0 = rig.loop.now();
  rig.net.inject_partition({{"edge"}, {"cloud", "edge2"}, t0, t0 + 10000});
  rig.loop.run_until(t0 + 3000);
  auto out = rig.call("edge", obj, "get");
  EXPECT_EQ(out.status.code(), Errc::StalenessExceeded);
  EXPECT_TRUE(std::any_of(rig.data.begin(), rig.data.end(), [](const DataEvent& e) { return e.op == DataOp::Blocked; }));
  rig.loop.run_until(t0 + 13000);
  auto healed = rig.call("edge", obj, "get");
  ASSERT_TRUE(healed.status.ok()) << healed.status.message();
  EXPECT_EQ(healed.result, "a");
}

TEST(Runtime, ReadYourWriteAcrossPartition) {
  Rig rig;
  rig.deploy(make_class(basic_class("Note"), rig.handlers), {"edge", "cloud"});
  const auto obj = rig.create("Note");
  auto token = std::make_shared<session::SessionToken>(
      session::open_session(rig.net, 5, "edge", {"edge", "cloud"}).value());
  for (int i = 0; i < 4; ++i) ASSERT_TRUE(rig.call("edge", obj, "put", "v" + std::to_string(i), token).status.ok());
  const Millis t0 = rig.loop.now();
  rig.net.inject_partition({{"edge"}, {"cloud", "edge2"}, t0, t0 + 5000});
  auto out = rig.call("edge", obj, "get", {}, token);
  ASSERT_TRUE(out.status.ok()) << out.status.message();
  EXPECT_EQ(out.result, "v3");
  EXPECT_GE(token->write_counter, 4u);
  std::size_t sw = 0, sr = 0;
  for (const auto& e : rig.data) {
    if (e.session != 5) continue;
    sw += e.op == DataOp::SessionWrite;
    sr += e.op == DataOp::SessionRead;
  }
  EXPECT_EQ(sw, 4u);
  EXPECT_EQ(sr, 1u);
}

TEST(Runtime, ReservationDoesNotExceedCapacity) {
  Rig rig({{"edge", 4}});
  rig.deploy(make_class(basic_class("Doc"), rig.handlers), {"edge"}, {{"edge", {{"echo", 3}}}});
  auto* rt = rig.agents["edge"]->runtime("Doc");
  ASSERT_NE(rt, nullptr);
  EXPECT_EQ(rt->pool().reserved("echo"), 3u);
  EXPECT_LE(rt->pool().elastic() + rt->pool().reserved_total(), 4u);
  try {
    rt->reserve_throughput("put", 1000, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientCapacity);
  }
  auto plan = rt->reserve_throughput("put", 0, 5);
  EXPECT_TRUE(plan.empty());
}

TEST(Runtime, DeployRejectedWhenReservationsDoNotFit) {
  Rig rig({{"edge", 2}});
  std::vector<AckMsg> acks;
  rig.net.subscribe("edge", "ctl/edge", [&](const sim::Envelope& e) {
    if (kind_of(e.payload) != static_cast<std::uint8_t>(Kind::Ack)) return;
    ByteReader r(e.payload);
    r.u8();
    acks.push_back(decode_ack(r));
  });
  DeployMsg m;
  m.seq = 1;
  m.control = "edge";
  m.spec.cls = make_class(basic_class("Doc"), rig.handlers);
  m.spec.replicas = {"edge"};
  m.spec.raft_members = {"edge"};
  m.spec.reserved = {{"echo", 5}};
  rig.net.send({"edge", "edge", "ctl/edge", encode(m), 0});
  rig.loop.run_until(100);
  ASSERT_EQ(acks.size(), 1u);
  EXPECT_EQ(acks[0].code, Errc::InsufficientCapacity);
  EXPECT_EQ(rig.agents["edge"]->runtime("Doc"), nullptr);
  EXPECT_EQ(rig.agents["edge"]->ledger().reserved_total(), 0u);
}
