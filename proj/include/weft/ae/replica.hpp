#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "weft/ae/crdt.hpp"
#include "weft/ae/mst.hpp"
#include "weft/sim/network.hpp"

namespace weft::ae {

using sim::DcId;

enum class Gate { Allow, Block };

// Allow iff now - min(last_sync) <= delta. No peers: always Allow.
Gate staleness_gate(const std::map<DcId, Millis>& last_sync, Millis now, Millis delta);

// Sync period for a staleness bound: delta / 2, but never below 500 ms.
Millis default_sync_period(Millis delta);

constexpr Millis kNeverSynced = std::numeric_limits<Millis>::min() / 2;

struct ReplicaConfig {
  std::string scope;  // topic scope: ae/<scope>/<pair>
  DcId dc;
  ReplicaId id = 0;
  Millis sync_period = 1000;
  Millis round_timeout = 0;  // 0: one sync period, clamped to [1 s, 2 s]
  Millis retry_after = 500;  // a failed periodic round is retried this soon
};

struct ReplicaStats {
  std::uint64_t rounds_started = 0;
  std::uint64_t rounds_ok = 0;
  std::uint64_t rounds_failed = 0;
  std::uint64_t nodes_fetched = 0;
  std::uint64_t keys_exchanged = 0;
};

// One CRDT store plus its anti-entropy state towards a set of peer replicas.
//
// A sync round between initiator A and responder B:
//   A -> B  Probe{round, start, root(A)}
//   B -> A  ProbeReply{root(B)}           B pins its tree for the round
//   A -> B  Fetch{hashes}  (repeated)     remote MST nodes, level by level
//   A -> B  Batch{A's values for the divergent keys}
//   B -> A  BatchReply{B's merged values}
// After a complete round both sides hold every write the other had applied
// before `start`, and record start - 1 as the last successful sync. The lower
// datacenter id of each pair initiates.
class Replica {
 public:
  Replica(sim::Network& net, ReplicaConfig cfg);
  ~Replica();
  Replica(const Replica&) = delete;
  Replica& operator=(const Replica&) = delete;

  const ReplicaConfig& config() const { return cfg_; }
  const DcId& dc() const { return cfg_.dc; }

  void add_peer(const DcId& peer, Millis last_sync);
  void remove_peer(const DcId& peer);
  const std::map<DcId, Millis>& last_sync() const { return last_sync_; }
  Gate gate(Millis delta) const { return staleness_gate(last_sync_, net_.now(), delta); }

  // Periodic rounds towards every peer this replica initiates for.
  void start();
  void stop();
  // One round towards `peer`; `done` gets Ok or FetchFailed.
  void sync_with(const DcId& peer, std::function<void(const Status&)> done = {});

  Stamp next_stamp();
  LwwRegister write(const std::string& key, Bytes value, bool tombstone = false);
  GCounter increment(const std::string& key, std::uint64_t by);
  LwwMap map_put(const std::string& key, const std::string& field, Bytes value);
  // Merges `v` into the stored value. Throws Error(KindMismatch).
  void merge(const std::string& key, const CrdtValue& v);

  const CrdtValue* get(const std::string& key) const;
  const std::map<std::string, CrdtValue>& data() const { return data_; }
  std::shared_ptr<const MerkleSearchTree> tree();
  const ReplicaStats& stats() const { return stats_; }

  // Called after a key changes because of a merge from a peer.
  std::function<void(const std::string& key)> on_remote_change;

 private:
  struct Outgoing {
    std::uint64_t round = 0;
    Millis start = 0;
    std::shared_ptr<const MerkleSearchTree> snapshot;
    std::unique_ptr<MstDiff> diff;
    std::function<void(const Status&)> done;
    sim::EventHandle timeout;
  };
  struct Pinned {
    std::uint64_t round = 0;
    std::shared_ptr<const MerkleSearchTree> snapshot;
  };

  std::string topic(const DcId& peer) const;
  void send(const DcId& peer, Bytes payload);
  void on_message(const sim::Envelope& env);
  void finish(const DcId& peer, const Status& s);
  void send_fetch_or_batch(const DcId& peer, Outgoing& r);
  void tick();
  void periodic_round(const DcId& peer);
  void touch(const std::string& key);
  bool merge_from_peer(const std::string& key, const CrdtValue& v);

  sim::Network& net_;
  ReplicaConfig cfg_;
  std::map<std::string, CrdtValue> data_;
  std::shared_ptr<const MerkleSearchTree> tree_;
  std::map<std::string, Hash> value_hashes_;
  std::map<DcId, Millis> last_sync_;
  std::map<DcId, Outgoing> outgoing_;
  std::map<DcId, Pinned> pinned_;
  std::uint64_t next_round_ = 1;
  std::uint64_t seq_ = 0;
  Millis last_stamp_ms_ = -1;
  std::uint64_t sub_ = 0;
  bool running_ = false;
  sim::EventHandle tick_;
  ReplicaStats stats_;
  sim::Lifetime life_;
};

}  // namespace weft::ae
