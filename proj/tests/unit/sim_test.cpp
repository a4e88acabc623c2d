#include <gtest/gtest.h>

#include <map>

#include "weft/common/status.hpp"
#include "weft/sim/network.hpp"

using namespace weft;
using namespace weft::sim;

namespace {

struct Fixture {
  EventLoop loop{7};
  Network net{loop};
  std::vector<std::pair<Millis, Envelope>> got;

  Fixture() {
    net.add_datacenter("edge");
    net.add_datacenter("cloud");
    net.add_datacenter("edge2");
    net.set_latency("edge", "cloud", 17);
    net.set_latency("edge2", "cloud", 17);
    net.set_latency("edge", "edge2", 30);
    for (const auto& dc : net.datacenters())
      net.subscribe(dc, "t/", [this](const Envelope& e) { got.emplace_back(loop.now(), e); });
  }
  void send(const DcId& a, const DcId& b, Bytes p = "x") { net.send({a, b, "t/x", std::move(p), 0}); }
};

PartitionEvent split(Millis start, Millis dur) { return {{"edge"}, {"cloud"}, start, dur}; }

}  // namespace

TEST(EventLoop, SameTimeFiresAtNow) {
  EventLoop loop;
  loop.run_until(40);
  Millis fired = -1;
  loop.schedule(loop.now(), [&] { fired = loop.now(); });
  EXPECT_TRUE(loop.step());
  EXPECT_EQ(fired, 40);
}

TEST(EventLoop, TiesFireInInsertionOrder) {
  EventLoop loop;
  std::vector<int> order;
  for (int i = 0; i < 5; ++i) loop.schedule(100, [&order, i] { order.push_back(i); });
  loop.schedule(50, [&order] { order.push_back(-1); });
  loop.run();
  EXPECT_EQ(order, (std::vector<int>{-1, 0, 1, 2, 3, 4}));
}

TEST(EventLoop, PastTimestampRejected) {
  EventLoop loop;
  loop.run_until(10);
  try {
    loop.schedule(9, [] {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PastTimestamp);
  }
}

TEST(EventLoop, CancelledEventsNeverFire) {
  EventLoop loop;
  int n = 0;
  auto h = loop.schedule(5, [&] { ++n; });
  loop.schedule(6, [&] { n += 10; });
  loop.cancel(h);
  loop.run_until(5);
  EXPECT_EQ(n, 0);
  loop.run();
  EXPECT_EQ(n, 10);
  EXPECT_TRUE(loop.empty());
}

TEST(Network, CrossDcLatency) {
  Fixture f;
  f.send("edge", "cloud");
  f.loop.run();
  ASSERT_EQ(f.got.size(), 1u);
  EXPECT_EQ(f.got[0].first, 17);
  EXPECT_EQ(f.got[0].second.send_time, 0);
}

TEST(Network, IntraDcIsInstant) {
  Fixture f;
  f.loop.run_until(5);
  f.send("edge", "edge");
  f.loop.run();
  ASSERT_EQ(f.got.size(), 1u);
  EXPECT_EQ(f.got[0].first, 5);
}

TEST(Network, UnknownDatacenter) {
  Fixture f;
  try {
    f.send("edge", "mars");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownDatacenter);
  }
}

TEST(Network, PartitionDropsCrossTraffic) {
  Fixture f;
  f.net.inject_partition(split(10000, 30000));
  f.loop.run_until(15000);
  f.send("edge", "cloud");
  f.send("cloud", "edge");
  f.send("edge2", "cloud");  // not part of the partition
  f.loop.run();
  ASSERT_EQ(f.got.size(), 1u);
  EXPECT_EQ(f.got[0].second.src, "edge2");
  EXPECT_EQ(f.net.stats().dropped, 2u);
}

TEST(Network, InFlightMessageCrossingPartitionStartIsDropped) {
  Fixture f;
  f.net.inject_partition(split(10000, 30000));
  f.loop.run_until(9999);
  f.send("edge", "cloud");
  f.loop.run();
  EXPECT_TRUE(f.got.empty());
  EXPECT_EQ(f.net.stats().dropped, 1u);
}

TEST(Network, HealIsInstantaneous) {
  Fixture f;
  f.net.inject_partition(split(100, 100));
  f.loop.run_until(199);
  f.send("edge", "cloud");
  f.loop.run_until(200);
  f.send("edge", "cloud");
  f.loop.run();
  ASSERT_EQ(f.got.size(), 1u);
  EXPECT_EQ(f.got[0].first, 217);
}

TEST(Network, PartitionValidation) {
  Fixture f;
  auto code = [&](PartitionEvent p) {
    try {
      f.net.inject_partition(p);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Ok;
  };
  EXPECT_EQ(code(split(10, 0)), Errc::InvalidPartition);
  EXPECT_EQ(code({{"edge"}, {"edge", "cloud"}, 10, 5}), Errc::InvalidPartition);
  EXPECT_EQ(code({{}, {"cloud"}, 10, 5}), Errc::InvalidPartition);
  EXPECT_EQ(code(split(10, 100)), Errc::Ok);
  EXPECT_EQ(code({{"cloud"}, {"edge", "edge2"}, 50, 100}), Errc::OverlapWithExistingPartition);
  EXPECT_EQ(code({{"edge2"}, {"cloud"}, 50, 100}), Errc::Ok);
  EXPECT_EQ(code(split(110, 10)), Errc::Ok);
  f.loop.run_until(500);
  EXPECT_EQ(code(split(400, 10)), Errc::InvalidPartition);
}

TEST(Network, FifoPerLinkUnderJitter) {
  Fixture f;
  f.net.set_jitter(50);
  for (int i = 0; i < 2000; ++i) {
    f.loop.schedule(i / 4, [&f, i] {
      f.send("edge", "cloud", std::to_string(i));
      f.send("cloud", "edge2", std::to_string(i));
    });
  }
  f.loop.run();
  std::map<std::pair<DcId, DcId>, int> last;
  Millis prev_t = 0;
  for (const auto& [t, e] : f.got) {
    EXPECT_GE(t, prev_t);
    prev_t = t;
    auto& l = last.try_emplace({e.src, e.dst}, -1).first->second;
    const int seq = std::stoi(e.payload);
    EXPECT_GT(seq, l);
    l = seq;
    EXPECT_GE(t - e.send_time, 17);
    EXPECT_LE(t - e.send_time, 17 + 50 + 50);
  }
  EXPECT_EQ(f.got.size(), 4000u);
}

TEST(Network, DownDatacenterNeitherSendsNorReceives) {
  Fixture f;
  f.net.schedule_outage({"cloud", 100, 100});
  f.loop.run_until(90);
  f.send("edge", "cloud");  // lands at 107 while cloud is down
  f.loop.run_until(150);
  EXPECT_FALSE(f.net.reachable("edge", "cloud"));
  f.send("cloud", "edge");
  f.loop.run_until(250);
  EXPECT_TRUE(f.net.reachable("edge", "cloud"));
  f.send("edge", "cloud");
  f.loop.run();
  ASSERT_EQ(f.got.size(), 1u);
  EXPECT_EQ(f.got[0].first, 267);
}

TEST(Network, LinkRateSerialisesMessages) {
  Fixture f;
  f.net.set_link_rate("edge", "cloud", 1000);  // one message per ms
  for (int i = 0; i < 10; ++i) f.send("edge", "cloud");
  f.loop.run();
  ASSERT_EQ(f.got.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(f.got[i].first, 17 + 1 + i);
}

TEST(Network, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    EventLoop loop(seed);
    Network net(loop);
    for (auto dc : {"a", "b", "c"}) net.add_datacenter(dc);
    net.set_latency("a", "b", 5);
    net.set_latency("b", "c", 9);
    net.set_latency("a", "c", 12);
    net.set_jitter(20);
    net.inject_partition({{"a"}, {"c"}, 300, 200});
    for (auto dc : {"a", "b", "c"}) net.subscribe(dc, "", [](const Envelope&) {});
    for (int i = 0; i < 500; ++i)
      loop.schedule(i * 2, [&net, i] {
        const char* names[] = {"a", "b", "c"};
        net.send({names[i % 3], names[(i + 1 + i / 3) % 3], "m", std::to_string(i), 0});
      });
    loop.run();
    return net.trace_digest();
  };
  EXPECT_EQ(run(1), run(1));
  EXPECT_NE(run(1), run(2));
}
