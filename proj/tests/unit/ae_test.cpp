#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "weft/ae/replica.hpp"

using namespace weft;
using namespace weft::ae;

namespace {

Hash vh(const std::string& s) { return sha256(s); }

std::map<std::string, Hash> random_entries(std::mt19937_64& rng, std::size_t n) {
  std::map<std::string, Hash> m;
  while (m.size() < n) m["k" + std::to_string(rng() % (n * 4 + 10))] = vh(std::to_string(rng() % 7));
  return m;
}

std::set<std::string> brute_diff(const std::map<std::string, Hash>& a, const std::map<std::string, Hash>& b) {
  std::set<std::string> out;
  for (const auto& [k, h] : a)
    if (!b.count(k) || b.at(k) != h) out.insert(k);
  for (const auto& [k, _] : b)
    if (!a.count(k)) out.insert(k);
  return out;
}

NodeFetcher fetcher_for(const MerkleSearchTree& t) {
  return [&t](const Hash& h) -> std::optional<MstNode> {
    if (const MstNode* n = t.node(h)) return *n;
    return std::nullopt;
  };
}

struct Pair {
  sim::EventLoop loop{3};
  sim::Network net{loop};
  std::unique_ptr<Replica> a, b;

  explicit Pair(Millis period = 1000) {
    net.add_datacenter("dc-a");
    net.add_datacenter("dc-b");
    net.set_latency("dc-a", "dc-b", 17);
    a = std::make_unique<Replica>(net, ReplicaConfig{"cls", "dc-a", 1, period, 0});
    b = std::make_unique<Replica>(net, ReplicaConfig{"cls", "dc-b", 2, period, 0});
    a->add_peer("dc-b", 0);
    b->add_peer("dc-a", 0);
  }
  Status round() {
    Status result(Errc::Timeout, "no result");
    a->sync_with("dc-b", [&](const Status& s) { result = s; });
    loop.run_until(loop.now() + 2000);
    return result;
  }
};

}  // namespace

TEST(Crdt, LwwTieBreaksOnReplicaId) {
  LwwRegister a{{100, 1, 0}, false, "v1"};
  LwwRegister b{{100, 2, 0}, false, "v2"};
  EXPECT_EQ(std::get<LwwRegister>(crdt_merge(a, b)).value, "v2");
  EXPECT_EQ(std::get<LwwRegister>(crdt_merge(b, a)).value, "v2");
}

TEST(Crdt, GCounterSlotwiseMax) {
  GCounter a{{{1, 3}}};
  GCounter b{{{1, 1}, {2, 5}}};
  EXPECT_EQ(gcounter_merge(a, b), (GCounter{{{1, 3}, {2, 5}}}));
  EXPECT_EQ(gcounter_merge(a, b).total(), 8u);
}

TEST(Crdt, KindMismatch) {
  try {
    crdt_merge(LwwRegister{}, GCounter{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::KindMismatch);
  }
}

TEST(Crdt, EncodeRoundTrip) {
  LwwMap m;
  m.entries["x"] = {{5, 1, 2}, false, "a"};
  m.entries["y"] = {{6, 2, 0}, true, ""};
  for (const CrdtValue& v : {CrdtValue(LwwRegister{{9, 3, 1}, false, "zz"}), CrdtValue(GCounter{{{1, 4}}}), CrdtValue(m)}) {
    const Bytes b = encode(v);
    ByteReader r(b);
    EXPECT_EQ(decode_crdt(r), v);
    EXPECT_TRUE(r.done());
  }
}

TEST(Mst, EmptyRootIsCanonical) {
  MerkleSearchTree t;
  EXPECT_EQ(t.root(), sha256(""));
  EXPECT_EQ(MerkleSearchTree(std::map<std::string, Hash>{}).root(), t.root());
}

TEST(Mst, KeyLevelCountsLeadingZeroNibbles) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::string k = "key" + std::to_string(rng());
    const std::string hex = to_hex(sha256(k));
    const int expect = static_cast<int>(hex.find_first_not_of('0'));
    EXPECT_EQ(key_level(k), expect);
  }
}

TEST(Mst, HistoryIndependent) {
  std::mt19937_64 rng(11);
  auto entries = random_entries(rng, 100);
  std::vector<std::pair<std::string, Hash>> items(entries.begin(), entries.end());
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(items.begin(), items.end(), rng);
    std::map<std::string, Hash> rebuilt;
    for (const auto& kv : items) rebuilt.insert(kv);
    EXPECT_EQ(MerkleSearchTree(rebuilt).root(), MerkleSearchTree(entries).root());
  }
}

TEST(Mst, FlippingOneValueChangesRoot) {
  std::mt19937_64 rng(12);
  auto entries = random_entries(rng, 1024);
  const MerkleSearchTree before(entries);
  entries.begin()->second = vh("different");
  EXPECT_NE(MerkleSearchTree(entries).root(), before.root());
}

TEST(Mst, IdenticalTreesNeedNoFetch) {
  std::mt19937_64 rng(13);
  auto entries = random_entries(rng, 300);
  const MerkleSearchTree a(entries), b(entries);
  auto d = mst_diff(a, b.root(), fetcher_for(b));
  ASSERT_TRUE(d.ok());
  EXPECT_TRUE(d->keys.empty());
  EXPECT_EQ(d->fetches, 0u);
}

TEST(Mst, SingleDivergentKey) {
  std::mt19937_64 rng(14);
  auto entries = random_entries(rng, 1024);
  auto other = entries;
  const std::string k = std::next(other.begin(), 517)->first;
  other[k] = vh("changed");
  const MerkleSearchTree a(entries), b(other);
  auto d = mst_diff(a, b.root(), fetcher_for(b));
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->keys, std::set<std::string>{k});
}

TEST(Mst, FetchFailureAborts) {
  std::mt19937_64 rng(15);
  auto entries = random_entries(rng, 200);
  auto other = entries;
  other.erase(other.begin());
  const MerkleSearchTree a(entries), b(other);
  auto d = mst_diff(a, b.root(), [](const Hash&) -> std::optional<MstNode> { return std::nullopt; });
  EXPECT_EQ(d.code(), Errc::FetchFailed);
}

// Property: the diff is exactly the brute-force symmetric difference.
TEST(Mst, DiffMatchesBruteForce) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + rng() % 600;
    auto a = random_entries(rng, n);
    auto b = a;
    const int edits = static_cast<int>(rng() % 20);
    for (int e = 0; e < edits; ++e) {
      const auto choice = rng() % 3;
      if (choice == 0 && !b.empty()) b.erase(std::next(b.begin(), rng() % b.size()));
      else if (choice == 1 && !b.empty()) std::next(b.begin(), rng() % b.size())->second = vh(std::to_string(rng()));
      else b["new" + std::to_string(rng() % 1000)] = vh("n");
    }
    if (trial % 10 == 0) b.clear();
    const MerkleSearchTree ta(a), tb(b);
    auto d = mst_diff(ta, tb.root(), fetcher_for(tb));
    ASSERT_TRUE(d.ok());
    ASSERT_EQ(d->keys, brute_diff(a, b)) << "trial " << trial;
    auto back = mst_diff(tb, ta.root(), fetcher_for(ta));
    ASSERT_EQ(back->keys, brute_diff(a, b));
  }
}

TEST(Gate, Examples) {
  EXPECT_EQ(staleness_gate({{"p", 7000}}, 10000, 10000), Gate::Allow);
  EXPECT_EQ(staleness_gate({{"p", 3000}}, 15000, 10000), Gate::Block);
  EXPECT_EQ(staleness_gate({}, 123456, 1), Gate::Allow);
  EXPECT_EQ(default_sync_period(10000), 5000);
  EXPECT_EQ(default_sync_period(600), 500);
}

TEST(Sync, DisjointWritesUnion) {
  Pair p;
  p.a->write("x", "1");
  p.b->write("y", "2");
  ASSERT_TRUE(p.round().ok());
  EXPECT_EQ(p.a->data(), p.b->data());
  EXPECT_EQ(p.a->data().size(), 2u);
}

TEST(Sync, ConcurrentWritesConvergeToLwwWinner) {
  Pair p;
  p.a->write("k", "from-a");
  p.b->write("k", "from-b");  // same ms, higher replica id wins
  ASSERT_TRUE(p.round().ok());
  EXPECT_EQ(encode(*p.a->get("k")), encode(*p.b->get("k")));
  EXPECT_EQ(std::get<LwwRegister>(*p.a->get("k")).value, "from-b");
}

TEST(Sync, RecordsRoundStartOnBothSides) {
  Pair p;
  p.loop.run_until(4000);
  p.a->write("x", "1");
  const Millis start = p.loop.now();
  ASSERT_TRUE(p.round().ok());
  EXPECT_EQ(p.a->last_sync().at("dc-b"), start - 1);
  EXPECT_EQ(p.b->last_sync().at("dc-a"), start - 1);
}

TEST(Sync, PartitionFailsWithoutTouchingLastSync) {
  Pair p;
  p.net.inject_partition({{"dc-a"}, {"dc-b"}, 100, 20000});
  p.loop.run_until(500);
  p.a->write("x", "1");
  const Status s = p.round();
  EXPECT_EQ(s.code(), Errc::FetchFailed);
  EXPECT_EQ(p.a->last_sync().at("dc-b"), 0);
  EXPECT_EQ(p.b->get("x"), nullptr);
  p.loop.run_until(12000);
  EXPECT_EQ(p.a->gate(10000), Gate::Block);
}

TEST(Sync, PeriodicRoundsKeepGateOpen) {
  Pair p(500);
  p.a->start();
  for (int i = 0; i < 100; ++i) {
    p.loop.run_until(p.loop.now() + 97);
    (i % 2 ? p.a : p.b)->write("k" + std::to_string(i % 13), std::to_string(i));
    EXPECT_EQ(p.a->gate(1000), Gate::Allow);
    EXPECT_EQ(p.b->gate(1000), Gate::Allow);
  }
  p.loop.run_until(p.loop.now() + 1000);
  EXPECT_EQ(p.a->data(), p.b->data());
  EXPECT_GT(p.a->stats().rounds_ok, 15u);
}

// Property: replicas that applied the same write set in different orders, or
// that each hold part of it, converge to byte-identical state after one round.
TEST(Sync, ConvergenceAfterOneRound) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Pair p;
    std::vector<std::pair<std::string, CrdtValue>> writes;
    for (int i = 0; i < 60; ++i) {
      const std::string key = "k" + std::to_string(rng() % 15);
      Stamp s{static_cast<Millis>(rng() % 50), static_cast<ReplicaId>(1 + rng() % 2), rng() % 3};
      if (key.back() % 3 == 0) {
        GCounter c;
        c.slots[s.replica] = rng() % 10;
        writes.emplace_back(key, c);
      } else {
        writes.emplace_back(key, LwwRegister{s, rng() % 5 == 0, std::to_string(rng() % 4)});
      }
    }
    for (const auto& [k, v] : writes)
      if (rng() % 2) p.a->merge(k, v);
    std::shuffle(writes.begin(), writes.end(), rng);
    for (const auto& [k, v] : writes)
      if (rng() % 2) p.b->merge(k, v);
    ASSERT_TRUE(p.round().ok());
    ASSERT_EQ(p.a->data(), p.b->data());
    EXPECT_EQ(p.a->tree()->root(), p.b->tree()->root());
  }
}
