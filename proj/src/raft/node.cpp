#include "weft/raft/node.hpp"

#include <algorithm>

namespace weft::raft {

RaftNode::RaftNode(NodeId self, std::vector<NodeId> members, Timings timings, TimeoutDraw draw, Millis now)
    : self_(std::move(self)), members_(std::move(members)), timings_(timings), draw_(std::move(draw)) {
  if (std::find(members_.begin(), members_.end(), self_) == members_.end()) members_.push_back(self_);
  std::sort(members_.begin(), members_.end());
  reset_election(now);
}

void RaftNode::reset_election(Millis now) { election_deadline_ = now + draw_(); }

Millis RaftNode::next_deadline() const {
  if (role_ != Role::Leader) return election_deadline_;
  Millis d = heartbeat_due_;
  for (const auto& r : reads_)
    if (!r.waiting_for_term_commit) d = std::min(d, r.deadline);
  return d;
}

Effects RaftNode::take_effects() { return std::exchange(fx_, Effects{}); }

const StateValue* RaftNode::lookup(const std::string& key) const {
  auto it = state_.find(key);
  return it == state_.end() ? nullptr : &it->second;
}

void RaftNode::tick(Millis now) {
  if (role_ == Role::Leader) {
    for (auto it = reads_.begin(); it != reads_.end();) {
      if (!it->waiting_for_term_commit && now >= it->deadline) {
        fx_.reads.push_back({it->id, Status(Errc::LeadershipLost, "no quorum confirmed leadership"), 0});
        it = reads_.erase(it);
      } else {
        ++it;
      }
    }
    if (now >= heartbeat_due_) {
      // Step down when a majority has been silent for a full election timeout.
      std::size_t live = 1;
      for (const auto& m : members_)
        if (m != self_ && now - last_ack_[m] <= timings_.election_max) ++live;
      if (live < quorum()) {
        become_follower(now, term_);
        return;
      }
      broadcast_append(now);
    }
    return;
  }
  if (now >= election_deadline_) start_pre_vote(now);
}

void RaftNode::become_follower(Millis now, Term term) {
  pre_voting_ = false;
  const bool was_leader = role_ == Role::Leader;
  if (term > term_) {
    term_ = term;
    voted_for_.reset();
    leader_.reset();
  }
  role_ = Role::Follower;
  if (was_leader) {
    leader_.reset();
    fail_pending(Errc::LeadershipLost);
  }
  reset_election(now);
}

// A node only raises its term once a quorum would vote for it, so a node
// with a stale log or cut off from the leader cannot disrupt the others.
void RaftNode::start_pre_vote(Millis now) {
  reset_election(now);
  pre_voting_ = true;
  pre_votes_ = {self_};
  if (pre_votes_.size() >= quorum()) {
    become_candidate(now);
    return;
  }
  RequestVote rv{term_ + 1, self_, last_index(), term_at(last_index()), true};
  for (const auto& m : members_)
    if (m != self_) fx_.outbox.push_back({m, rv});
}

void RaftNode::become_candidate(Millis now) {
  pre_voting_ = false;
  role_ = Role::Candidate;
  ++term_;
  voted_for_ = self_;
  leader_.reset();
  votes_ = {self_};
  reset_election(now);
  if (votes_.size() >= quorum()) {
    become_leader(now);
    return;
  }
  RequestVote rv{term_, self_, last_index(), term_at(last_index())};
  for (const auto& m : members_)
    if (m != self_) fx_.outbox.push_back({m, rv});
}

void RaftNode::become_leader(Millis now) {
  pre_voting_ = false;
  role_ = Role::Leader;
  leader_ = self_;
  fx_.became_leader = true;
  for (const auto& m : members_) {
    next_[m] = last_index() + 1;
    match_[m] = 0;
    inflight_[m] = 0;
    last_ack_[m] = now;
    acked_seq_[m] = 0;
  }
  log_.push_back({term_, last_index() + 1, Command::no_op()});
  match_[self_] = last_index();
  advance_commit(now);
  broadcast_append(now);
}

void RaftNode::send_append(const NodeId& peer, Millis now) {
  (void)now;
  AppendEntries ae;
  ae.term = term_;
  ae.leader = self_;
  const Index next = std::max<Index>(1, next_[peer]);
  ae.prev_index = next - 1;
  ae.prev_term = term_at(ae.prev_index);
  for (Index i = next; i <= last_index() && ae.entries.size() < timings_.max_batch; ++i) ae.entries.push_back(log_[i - 1]);
  ae.leader_commit = commit_;
  ae.read_seq = read_seq_;
  // pipelined: the next append carries only what this one does not
  if (!ae.entries.empty()) next_[peer] = ae.entries.back().index + 1;
  ++inflight_[peer];
  fx_.outbox.push_back({peer, std::move(ae)});
}

void RaftNode::broadcast_append(Millis now) {
  for (const auto& m : members_)
    if (m != self_) send_append(m, now);
  heartbeat_due_ = now + timings_.heartbeat;
}

StatusOr<Index> RaftNode::propose(Millis now, Command cmd) {
  if (role_ != Role::Leader) return Status(Errc::NotLeader, leader_.value_or(""));
  log_.push_back({term_, last_index() + 1, std::move(cmd)});
  const Index idx = last_index();
  match_[self_] = idx;
  pending_writes_.insert(idx);
  advance_commit(now);
  for (const auto& m : members_)
    if (m != self_ && inflight_[m] < timings_.max_inflight) send_append(m, now);
  return idx;
}

StatusOr<std::uint64_t> RaftNode::read_index(Millis now) {
  if (role_ != Role::Leader) return Status(Errc::NotLeader, leader_.value_or(""));
  const std::uint64_t id = next_read_id_++;
  const bool term_committed = term_at(commit_) == term_;
  reads_.push_back({id, 0, commit_, now + timings_.read_timeout, !term_committed});
  if (term_committed) {
    reads_.back().seq = ++read_seq_;
    if (quorum() == 1) {
      confirm_reads(now);
    } else {
      broadcast_append(now);
    }
  }
  return id;
}

void RaftNode::confirm_reads(Millis now) {
  (void)now;
  for (auto it = reads_.begin(); it != reads_.end();) {
    if (it->waiting_for_term_commit) {
      ++it;
      continue;
    }
    std::size_t acks = 1;
    for (const auto& m : members_)
      if (m != self_ && acked_seq_[m] >= it->seq) ++acks;
    if (acks >= quorum() && applied_ >= it->read_index) {
      fx_.reads.push_back({it->id, Status{}, it->read_index});
      it = reads_.erase(it);
    } else {
      ++it;
    }
  }
}

void RaftNode::fail_pending(Errc code) {
  for (const auto& r : reads_) fx_.reads.push_back({r.id, Status(code, "leadership lost"), 0});
  reads_.clear();
  for (Index i : pending_writes_) fx_.writes.push_back({i, Status(code, "leadership lost")});
  pending_writes_.clear();
}

void RaftNode::advance_commit(Millis now) {
  if (role_ != Role::Leader) return;
  std::vector<Index> matches;
  for (const auto& m : members_) matches.push_back(m == self_ ? last_index() : match_[m]);
  std::sort(matches.begin(), matches.end(), std::greater<>());
  const Index candidate = matches[quorum() - 1];
  if (candidate <= commit_ || term_at(candidate) != term_) return;
  for (Index i = commit_ + 1; i <= candidate; ++i) fx_.committed_by_me.push_back(log_[i - 1]);
  commit_ = candidate;
  apply_committed();
  for (auto it = pending_writes_.begin(); it != pending_writes_.end() && *it <= commit_;) {
    fx_.writes.push_back({*it, Status{}});
    it = pending_writes_.erase(it);
  }
  // Reads queued before this term's first commit can now pick their index.
  bool started = false;
  for (auto& r : reads_) {
    if (!r.waiting_for_term_commit) continue;
    r.waiting_for_term_commit = false;
    r.read_index = commit_;
    r.seq = ++read_seq_;
    r.deadline = now + timings_.read_timeout;
    started = true;
  }
  if (started) {
    if (quorum() == 1) {
      confirm_reads(now);
    } else {
      broadcast_append(now);
    }
  }
  confirm_reads(now);
}

void RaftNode::apply_committed() {
  while (applied_ < commit_) {
    const LogEntry& e = log_[applied_];
    ++applied_;
    if (!e.command.noop) state_[e.command.key] = {e.command.value, e.index, e.command.tombstone};
    fx_.applied.push_back(e);
  }
}

void RaftNode::handle(Millis now, const NodeId& from, const Message& m) {
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, RequestVote>) on_vote(now, from, msg);
        else if constexpr (std::is_same_v<T, VoteReply>) on_vote_reply(now, from, msg);
        else if constexpr (std::is_same_v<T, AppendEntries>) on_append(now, from, msg);
        else on_append_reply(now, from, msg);
      },
      m);
}

void RaftNode::on_vote(Millis now, const NodeId& from, const RequestVote& m) {
  const Term my_last_term = term_at(last_index());
  const bool up_to_date =
      m.last_log_term > my_last_term || (m.last_log_term == my_last_term && m.last_log_index >= last_index());
  if (m.pre) {
    const bool leader_live =
        role_ == Role::Leader || (leader_seen_ >= 0 && now - leader_seen_ < timings_.election_min);
    fx_.outbox.push_back({from, VoteReply{term_, m.term > term_ && up_to_date && !leader_live, true}});
    return;
  }
  if (m.term > term_) become_follower(now, m.term);
  bool grant = false;
  if (m.term == term_ && (!voted_for_ || *voted_for_ == m.candidate)) {
    if (up_to_date) {
      grant = true;
      voted_for_ = m.candidate;
      reset_election(now);
    }
  }
  fx_.outbox.push_back({from, VoteReply{term_, grant}});
}

void RaftNode::on_vote_reply(Millis now, const NodeId& from, const VoteReply& m) {
  if (m.term > term_) {
    become_follower(now, m.term);
    return;
  }
  if (m.pre) {
    if (!pre_voting_ || role_ == Role::Leader || !m.granted) return;
    pre_votes_.insert(from);
    if (pre_votes_.size() >= quorum()) become_candidate(now);
    return;
  }
  if (role_ != Role::Candidate || m.term != term_ || !m.granted) return;
  votes_.insert(from);
  if (votes_.size() >= quorum()) become_leader(now);
}

void RaftNode::on_append(Millis now, const NodeId& from, const AppendEntries& m) {
  AppendReply reply;
  reply.read_seq = m.read_seq;
  if (m.term < term_) {
    reply.term = term_;
    fx_.outbox.push_back({from, reply});
    return;
  }
  if (m.term > term_ || role_ != Role::Follower) become_follower(now, m.term);
  pre_voting_ = false;
  leader_ = m.leader;
  leader_seen_ = now;
  reset_election(now);
  reply.term = term_;

  if (m.prev_index > last_index()) {
    reply.hint = last_index() + 1;
    fx_.outbox.push_back({from, reply});
    return;
  }
  if (term_at(m.prev_index) != m.prev_term) {
    const Term bad = term_at(m.prev_index);
    Index first = m.prev_index;
    while (first > 1 && term_at(first - 1) == bad) --first;
    reply.hint = std::max<Index>(1, first);
    fx_.outbox.push_back({from, reply});
    return;
  }
  for (const auto& e : m.entries) {
    if (e.index <= last_index()) {
      if (term_at(e.index) == e.term) continue;
      log_.resize(e.index - 1);
    }
    log_.push_back(e);
  }
  const Index last_new = m.prev_index + m.entries.size();
  if (m.leader_commit > commit_) {
    commit_ = std::min(m.leader_commit, last_new);
    apply_committed();
  }
  reply.success = true;
  reply.match_index = last_new;
  fx_.outbox.push_back({from, reply});
}

void RaftNode::on_append_reply(Millis now, const NodeId& from, const AppendReply& m) {
  if (m.term > term_) {
    become_follower(now, m.term);
    return;
  }
  if (role_ != Role::Leader || m.term != term_) return;
  last_ack_[from] = now;
  if (inflight_[from] > 0) --inflight_[from];
  acked_seq_[from] = std::max(acked_seq_[from], m.read_seq);
  if (m.success) {
    match_[from] = std::max(match_[from], m.match_index);
    next_[from] = std::max(next_[from], match_[from] + 1);
    advance_commit(now);
    confirm_reads(now);
    if (role_ == Role::Leader && next_[from] <= last_index()) send_append(from, now);
  } else {
    next_[from] = std::max(match_[from] + 1, std::min(next_[from] - 1, m.hint));
    confirm_reads(now);
    send_append(from, now);
  }
}

}  // namespace weft::raft
