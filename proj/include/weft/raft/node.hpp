#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "weft/raft/messages.hpp"

namespace weft::raft {

enum class Role { Follower, Candidate, Leader };

struct Timings {
  Millis election_min = 150;
  Millis election_max = 300;
  Millis heartbeat = 50;
  Millis read_timeout = 300;  // quorum confirmation for a read must arrive within this
  std::size_t max_batch = 512;
  std::size_t max_inflight = 4;  // appends per follower before proposals wait for a reply
};

struct Outbound {
  NodeId to;
  Message msg;
};

struct StateValue {
  Bytes value;
  Index index = 0;
  bool tombstone = false;
};

struct WriteDone {
  Index index = 0;
  Status status;
};

struct ReadDone {
  std::uint64_t id = 0;
  Status status;
  Index read_index = 0;
};

// Everything the node wants the outside world to do or know after a call.
struct Effects {
  std::vector<Outbound> outbox;
  std::vector<LogEntry> applied;
  std::vector<LogEntry> committed_by_me;  // entries this node, as leader, saw commit
  std::vector<WriteDone> writes;
  std::vector<ReadDone> reads;
  bool became_leader = false;
};

// One Raft participant as a pure state machine: callers feed it time and
// messages and drain the resulting Effects. Membership is fixed.
class RaftNode {
 public:
  using TimeoutDraw = std::function<Millis()>;

  RaftNode(NodeId self, std::vector<NodeId> members, Timings timings, TimeoutDraw draw, Millis now);

  void tick(Millis now);
  void handle(Millis now, const NodeId& from, const Message& m);
  // Appends `cmd` when leader; NotLeader (message = leader hint) otherwise.
  StatusOr<Index> propose(Millis now, Command cmd);
  // Starts a read-index confirmation. The matching ReadDone arrives in a
  // later Effects once a quorum has acknowledged this leader, or fails with
  // LeadershipLost.
  StatusOr<std::uint64_t> read_index(Millis now);

  Effects take_effects();
  Millis next_deadline() const;

  const NodeId& id() const { return self_; }
  Role role() const { return role_; }
  Term term() const { return term_; }
  const std::optional<NodeId>& leader_hint() const { return leader_; }
  const std::vector<LogEntry>& log() const { return log_; }
  Index commit_index() const { return commit_; }
  Index last_applied() const { return applied_; }
  const StateValue* lookup(const std::string& key) const;
  const std::vector<NodeId>& members() const { return members_; }

 private:
  struct PendingRead {
    std::uint64_t id;
    std::uint64_t seq;
    Index read_index;
    Millis deadline;
    bool waiting_for_term_commit;
  };

  Index last_index() const { return log_.size(); }
  Term term_at(Index i) const { return i == 0 || i > log_.size() ? 0 : log_[i - 1].term; }
  std::size_t quorum() const { return members_.size() / 2 + 1; }
  void reset_election(Millis now);
  void become_follower(Millis now, Term term);
  void start_pre_vote(Millis now);
  void become_candidate(Millis now);
  void become_leader(Millis now);
  void send_append(const NodeId& peer, Millis now);
  void broadcast_append(Millis now);
  void advance_commit(Millis now);
  void apply_committed();
  void confirm_reads(Millis now);
  void fail_pending(Errc code);
  void on_vote(Millis now, const NodeId& from, const RequestVote& m);
  void on_vote_reply(Millis now, const NodeId& from, const VoteReply& m);
  void on_append(Millis now, const NodeId& from, const AppendEntries& m);
  void on_append_reply(Millis now, const NodeId& from, const AppendReply& m);

  NodeId self_;
  std::vector<NodeId> members_;
  Timings timings_;
  TimeoutDraw draw_;

  Role role_ = Role::Follower;
  Term term_ = 0;
  std::optional<NodeId> voted_for_;
  std::optional<NodeId> leader_;
  std::vector<LogEntry> log_;
  Index commit_ = 0;
  Index applied_ = 0;
  std::map<std::string, StateValue> state_;
  Millis election_deadline_ = 0;

  std::set<NodeId> votes_;
  std::set<NodeId> pre_votes_;
  bool pre_voting_ = false;
  Millis leader_seen_ = -1;  // last AppendEntries from a current leader

  Millis heartbeat_due_ = 0;
  std::map<NodeId, Index> next_;
  std::map<NodeId, Index> match_;
  std::map<NodeId, std::size_t> inflight_;
  std::map<NodeId, Millis> last_ack_;
  std::map<NodeId, std::uint64_t> acked_seq_;
  std::uint64_t read_seq_ = 0;
  std::uint64_t next_read_id_ = 1;
  std::vector<PendingRead> reads_;
  std::set<Index> pending_writes_;

  Effects fx_;
};

}  // namespace weft::raft
