#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "weft/raft/node.hpp"
#include "weft/raft/safety.hpp"
#include "weft/sim/network.hpp"

namespace weft::raft {

struct GroupConfig {
  std::string cls;
  std::string shard = "0";
  Timings timings;

  std::string topic() const { return "raft/" + cls + "/" + shard; }
};

struct ReadValue {
  bool found = false;
  Bytes value;
  Index index = 0;
  bool tombstone = false;
};

// A RaftNode living in one datacenter: drives its timers on the event loop,
// carries its RPCs as envelopes on raft/<class>/<shard>/n, and serves client
// requests arriving on raft/<class>/<shard>/c.
class RaftPeer {
 public:
  RaftPeer(sim::Network& net, GroupConfig cfg, const NodeId& self, std::vector<NodeId> members,
           SafetyChecker* checker = nullptr);
  ~RaftPeer();
  RaftPeer(const RaftPeer&) = delete;
  RaftPeer& operator=(const RaftPeer&) = delete;

  const RaftNode& node() const { return node_; }
  const NodeId& id() const { return node_.id(); }

  // Called for every entry this node applies, in log order.
  std::function<void(const LogEntry&)> on_apply;
  // Called when this node, as leader, learns an entry is committed.
  std::function<void(const LogEntry&)> on_commit;
  // Called when a linearizable read is answered: the key, the time the
  // request reached this node, and the index of the value returned (0: none).
  std::function<void(const std::string& key, Millis arrived, Index index)> on_read;

 private:
  struct Waiter {
    sim::DcId dc;
    std::string topic;
    std::uint64_t id;
    std::string key;
    Millis arrived = 0;
  };

  void on_raft(const sim::Envelope& env);
  void on_client(const sim::Envelope& env);
  void reply(const Waiter& w, ClientReply r);
  void flush();
  void arm();

  sim::Network& net_;
  GroupConfig cfg_;
  RaftNode node_;
  SafetyChecker* checker_;
  std::map<Index, Waiter> write_waiters_;
  std::map<std::uint64_t, Waiter> read_waiters_;
  std::vector<std::uint64_t> subs_;
  sim::EventHandle timer_;
  Millis armed_at_ = -1;
  sim::Lifetime life_;
};

// Client-side entry point to a Raft group from one datacenter. Follows
// NotLeader redirects up to 10 hops; any other failure is returned as is.
class RaftClient {
 public:
  static constexpr std::uint32_t kMaxHops = 10;

  RaftClient(sim::Network& net, GroupConfig cfg, sim::DcId at, std::string name, std::vector<NodeId> members);
  ~RaftClient();
  RaftClient(const RaftClient&) = delete;
  RaftClient& operator=(const RaftClient&) = delete;

  void write(Command cmd, std::function<void(StatusOr<Index>)> done);
  void read(const std::string& key, std::function<void(StatusOr<ReadValue>)> done);

  void set_members(std::vector<NodeId> members);
  const std::vector<NodeId>& members() const { return members_; }
  // Per-attempt wait before a request is abandoned with Timeout.
  void set_attempt_timeout(Millis ms) { attempt_timeout_ = ms; }

 private:
  struct Pending {
    ClientRequest req;
    NodeId target;
    std::function<void(const ClientReply&)> done;
    sim::EventHandle timeout;
  };

  void submit(ClientRequest req, std::function<void(const ClientReply&)> done);
  void attempt(std::uint64_t id);
  void on_reply(const sim::Envelope& env);
  NodeId first_target() const;
  NodeId next_after(const NodeId& n) const;

  sim::Network& net_;
  GroupConfig cfg_;
  sim::DcId at_;
  std::string reply_topic_;
  std::vector<NodeId> members_;
  std::optional<NodeId> leader_;
  std::map<std::uint64_t, Pending> pending_;
  std::uint64_t next_id_ = 1;
  Millis attempt_timeout_ = 1000;
  std::uint64_t sub_ = 0;
  sim::Lifetime life_;
};

}  // namespace weft::raft
