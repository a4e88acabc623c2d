#include <gtest/gtest.h>

#include "weft/session/session.hpp"

using namespace weft;
using namespace weft::session;

namespace {

struct World {
  sim::EventLoop loop{5};
  sim::Network net{loop};
  std::map<DcId, std::unique_ptr<ae::Replica>> replicas;
  std::map<DcId, std::unique_ptr<SessionEndpoint>> endpoints;
  std::unique_ptr<SessionClient> client;

  World() {
    for (auto dc : {"edge", "edge2", "cloud"}) net.add_datacenter(dc);
    net.set_latency("edge", "cloud", 17);
    net.set_latency("edge2", "cloud", 17);
    net.set_latency("edge", "edge2", 25);
    ae::ReplicaId id = 1;
    for (auto dc : {"edge", "cloud"}) {
      replicas[dc] = std::make_unique<ae::Replica>(net, ae::ReplicaConfig{"C", dc, id++, 1000, 0});
      endpoints[dc] = std::make_unique<SessionEndpoint>(net, "C", *replicas[dc]);
    }
    replicas["edge"]->add_peer("cloud", 0);
    replicas["cloud"]->add_peer("edge", 0);
    client = std::make_unique<SessionClient>(net, "C", "edge", "test");
  }

  StatusOr<WriteAck> put(std::shared_ptr<SessionToken> t, const std::string& k, const std::string& v) {
    StatusOr<WriteAck> out = Status(Errc::Timeout, "pending");
    client->write(t, k, WriteKind::Put, v, "", [&](StatusOr<WriteAck> r) { out = std::move(r); });
    loop.run_until(loop.now() + 1000);
    return out;
  }
  StatusOr<SessionRead> get(std::shared_ptr<SessionToken> t, const std::string& k) {
    StatusOr<SessionRead> out = Status(Errc::Timeout, "pending");
    client->read(t, k, [&](StatusOr<SessionRead> r) { out = std::move(r); });
    loop.run_until(loop.now() + 1000);
    return out;
  }
  StatusOr<SessionToken> repin(std::shared_ptr<SessionToken> t) {
    StatusOr<SessionToken> out = Status(Errc::Timeout, "pending");
    client->repin(t, {"edge", "cloud"}, [&](StatusOr<SessionToken> r) { out = std::move(r); });
    loop.run_until(loop.now() + 1000);
    return out;
  }
  std::shared_ptr<SessionToken> open(const DcId& at = "edge") {
    return std::make_shared<SessionToken>(open_session(net, 1, at, {"edge", "cloud"}).value());
  }
};

std::string value_of(const SessionRead& r) { return std::get<ae::LwwRegister>(r.value).value; }

}  // namespace

TEST(Session, PinsColocatedThenNearest) {
  World w;
  EXPECT_EQ(open_session(w.net, 1, "edge", {"edge", "cloud"})->pinned, "edge");
  EXPECT_EQ(open_session(w.net, 1, "edge2", {"edge", "cloud"})->pinned, "cloud");
  EXPECT_EQ(open_session(w.net, 1, "edge", {"cloud"})->pinned, "cloud");
  w.net.set_up("edge", false);
  w.net.set_up("cloud", false);
  EXPECT_EQ(open_session(w.net, 1, "edge2", {"edge", "cloud"}).code(), Errc::NoReplicaAvailable);
}

TEST(Session, WriteCountersAndHighWater) {
  World w;
  auto t = w.open();
  EXPECT_EQ(w.put(t, "1/k", "a")->counter, 1u);
  EXPECT_EQ(w.put(t, "1/k", "b")->counter, 2u);
  EXPECT_EQ(t->high_water.at("1/k"), 2u);
  EXPECT_LE(t->high_water.at("1/k"), t->write_counter);
}

TEST(Session, ReadYourWriteEvenMidPartition) {
  World w;
  w.net.inject_partition({{"edge"}, {"cloud", "edge2"}, 10, 100000});
  w.loop.run_until(20);
  auto t = w.open();
  ASSERT_TRUE(w.put(t, "1/k", "5").ok());
  auto r = w.get(t, "1/k");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(value_of(*r), "5");
  EXPECT_TRUE(read_ok(*t, "1/k", r->stamp));
  auto missing = w.get(t, "1/none");
  ASSERT_TRUE(missing.ok());
  EXPECT_FALSE(missing->found);
}

TEST(Session, OtherSessionsUnsyncedWriteIsInvisibleButHarmless) {
  World w;
  auto mine = w.open();
  ASSERT_TRUE(w.put(mine, "1/k", "mine").ok());
  w.replicas["cloud"]->write("1/k", "theirs");
  auto r = w.get(mine, "1/k");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(value_of(*r), "mine");
  EXPECT_TRUE(read_ok(*mine, "1/k", r->stamp));
}

TEST(Session, PinnedDatacenterDown) {
  World w;
  auto t = w.open();
  w.net.set_up("edge", false);
  SessionClient remote(w.net, "C", "edge2", "r");
  StatusOr<WriteAck> out = Status(Errc::Timeout, "pending");
  remote.write(t, "1/k", WriteKind::Put, "x", "", [&](StatusOr<WriteAck> r) { out = std::move(r); });
  w.loop.run_until(1000);
  EXPECT_EQ(out.code(), Errc::ReplicaUnreachable);
}

TEST(Session, RepinAfterSyncKeepsRyw) {
  World w;
  SessionClient from_edge2(w.net, "C", "edge2", "e2");
  auto t = std::make_shared<SessionToken>(open_session(w.net, 7, "edge2", {"edge", "cloud"}).value());
  ASSERT_EQ(t->pinned, "cloud");
  StatusOr<WriteAck> ack = Status(Errc::Timeout, "pending");
  from_edge2.write(t, "1/k", WriteKind::Put, "v", "", [&](StatusOr<WriteAck> r) { ack = std::move(r); });
  w.loop.run_until(500);
  ASSERT_TRUE(ack.ok());
  Status synced(Errc::Timeout, "pending");
  w.replicas["cloud"]->sync_with("edge", [&](const Status& s) { synced = s; });
  w.loop.run_until(1500);
  ASSERT_TRUE(synced.ok());
  w.net.set_up("cloud", false);
  StatusOr<SessionToken> moved = Status(Errc::Timeout, "pending");
  from_edge2.repin(t, {"edge", "cloud"}, [&](StatusOr<SessionToken> r) { moved = std::move(r); });
  w.loop.run_until(2500);
  ASSERT_TRUE(moved.ok());
  EXPECT_EQ(moved->pinned, "edge");
  StatusOr<SessionRead> r = Status(Errc::Timeout, "pending");
  from_edge2.read(t, "1/k", [&](StatusOr<SessionRead> x) { r = std::move(x); });
  w.loop.run_until(3500);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(value_of(*r), "v");
}

TEST(Session, RepinRefusedWhenWritesUnsynced) {
  World w;
  SessionClient from_edge2(w.net, "C", "edge2", "e2");
  auto t = std::make_shared<SessionToken>(open_session(w.net, 7, "edge2", {"edge", "cloud"}).value());
  StatusOr<WriteAck> ack = Status(Errc::Timeout, "pending");
  from_edge2.write(t, "1/k", WriteKind::Put, "v", "", [&](StatusOr<WriteAck> r) { ack = std::move(r); });
  w.loop.run_until(500);
  ASSERT_TRUE(ack.ok());
  w.net.set_up("cloud", false);
  StatusOr<SessionToken> moved = Status(Errc::Timeout, "pending");
  from_edge2.repin(t, {"edge", "cloud"}, [&](StatusOr<SessionToken> r) { moved = std::move(r); });
  w.loop.run_until(1500);
  EXPECT_EQ(moved.code(), Errc::NoQualifiedReplica);
  EXPECT_EQ(t->pinned, "cloud");
}

TEST(Session, RepinWhileHealthyIsIdentity) {
  World w;
  auto t = w.open();
  ASSERT_TRUE(w.put(t, "1/k", "v").ok());
  const SessionToken before = *t;
  auto same = w.repin(t);
  ASSERT_TRUE(same.ok());
  EXPECT_EQ(*same, before);
}

TEST(Session, RepinLeavesPinDroppedFromReplicaSet) {
  World w;
  auto t = w.open();
  ASSERT_EQ(t->pinned, "edge");
  ASSERT_TRUE(w.put(t, "1/k", "v").ok());
  Status synced(Errc::Timeout, "pending");
  w.replicas["cloud"]->sync_with("edge", [&](const Status& s) { synced = s; });
  w.loop.run_until(w.loop.now() + 1000);
  ASSERT_TRUE(synced.ok());
  StatusOr<SessionToken> moved = Status(Errc::Timeout, "pending");
  w.client->repin(t, {"cloud"}, [&](StatusOr<SessionToken> r) { moved = std::move(r); });
  w.loop.run_until(w.loop.now() + 1000);
  ASSERT_TRUE(moved.ok());
  EXPECT_EQ(moved->pinned, "cloud");
}

TEST(Session, TokenEncodingRoundTrips) {
  SessionToken t;
  t.id = 9;
  t.pinned = "edge";
  note_write(t, "a", {5, 1, 0});
  note_read(t, "b", {7, 2, 3});
  ByteWriter w;
  encode(w, t);
  ByteReader r(w.data());
  EXPECT_EQ(decode_token(r), t);
}
