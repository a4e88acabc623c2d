#include "weft/raft/group.hpp"

#include <algorithm>

namespace weft::raft {

RaftPeer::RaftPeer(sim::Network& net, GroupConfig cfg, const NodeId& self, std::vector<NodeId> members,
                   SafetyChecker* checker)
    : net_(net),
      cfg_(std::move(cfg)),
      node_(self, std::move(members), cfg_.timings,
            [&net, t = cfg_.timings] { return net.loop().uniform(t.election_min, t.election_max); }, net.now()),
      checker_(checker) {
  subs_.push_back(net_.subscribe(self, cfg_.topic() + "/n", life_.guard([this](const sim::Envelope& e) { on_raft(e); })));
  subs_.push_back(net_.subscribe(self, cfg_.topic() + "/c", life_.guard([this](const sim::Envelope& e) { on_client(e); })));
  arm();
}

RaftPeer::~RaftPeer() {
  for (auto s : subs_) net_.unsubscribe(s);
  net_.loop().cancel(timer_);
}

void RaftPeer::arm() {
  const Millis at = std::max(node_.next_deadline(), net_.now());
  if (at == armed_at_) return;
  net_.loop().cancel(timer_);
  armed_at_ = at;
  timer_ = net_.loop().schedule(at, life_.guard([this] {
    armed_at_ = -1;
    node_.tick(net_.now());
    flush();
  }));
}

void RaftPeer::on_raft(const sim::Envelope& env) {
  node_.handle(net_.now(), env.src, decode_message(env.payload));
  flush();
}

void RaftPeer::on_client(const sim::Envelope& env) {
  ClientRequest req = decode_client_request(env.payload);
  Waiter w{env.src, req.reply_topic, req.id, req.command.key, net_.now()};
  if (req.read) {
    auto r = node_.read_index(net_.now());
    if (!r.ok()) {
      reply(w, {req.id, Errc::NotLeader, r.status().message(), false, {}, 0, false});
    } else {
      read_waiters_[*r] = w;
    }
  } else {
    auto r = node_.propose(net_.now(), std::move(req.command));
    if (!r.ok()) {
      reply(w, {req.id, Errc::NotLeader, r.status().message(), false, {}, 0, false});
    } else {
      write_waiters_[*r] = w;
    }
  }
  flush();
}

void RaftPeer::reply(const Waiter& w, ClientReply r) { net_.send({id(), w.dc, w.topic, encode(r), 0}); }

void RaftPeer::flush() {
  Effects fx = node_.take_effects();
  if (fx.became_leader && checker_) checker_->on_leader(id(), node_.term(), node_.log());
  for (auto& out : fx.outbox) net_.send({id(), out.to, cfg_.topic() + "/n", encode(out.msg), 0});
  for (const auto& e : fx.committed_by_me) {
    if (checker_) checker_->on_commit(node_.term(), e);
    if (on_commit) on_commit(e);
  }
  for (const auto& e : fx.applied) {
    if (checker_) checker_->on_apply(id(), e);
    if (on_apply) on_apply(e);
  }
  for (const auto& wd : fx.writes) {
    auto it = write_waiters_.find(wd.index);
    if (it == write_waiters_.end()) continue;
    ClientReply r{it->second.id, wd.status.code(), {}, false, {}, wd.index, false};
    reply(it->second, r);
    write_waiters_.erase(it);
  }
  for (const auto& rd : fx.reads) {
    auto it = read_waiters_.find(rd.id);
    if (it == read_waiters_.end()) continue;
    ClientReply r{it->second.id, rd.status.code(), {}, false, {}, 0, false};
    if (rd.status.ok()) {
      if (const StateValue* v = node_.lookup(it->second.key)) {
        r.found = true;
        r.value = v->value;
        r.index = v->index;
        r.tombstone = v->tombstone;
      }
      if (on_read) on_read(it->second.key, it->second.arrived, r.index);
    }
    reply(it->second, r);
    read_waiters_.erase(it);
  }
  arm();
}

RaftClient::RaftClient(sim::Network& net, GroupConfig cfg, sim::DcId at, std::string name, std::vector<NodeId> members)
    : net_(net), cfg_(std::move(cfg)), at_(std::move(at)), members_(std::move(members)) {
  reply_topic_ = cfg_.topic() + "/r/" + name;
  sub_ = net_.subscribe(at_, reply_topic_, life_.guard([this](const sim::Envelope& e) { on_reply(e); }));
}

RaftClient::~RaftClient() {
  net_.unsubscribe(sub_);
  for (auto& [_, p] : pending_) net_.loop().cancel(p.timeout);
}

void RaftClient::set_members(std::vector<NodeId> members) {
  members_ = std::move(members);
  if (leader_ && std::find(members_.begin(), members_.end(), *leader_) == members_.end()) leader_.reset();
}

NodeId RaftClient::first_target() const {
  if (leader_) return *leader_;
  if (std::find(members_.begin(), members_.end(), at_) != members_.end()) return at_;
  NodeId best = members_.front();
  for (const auto& m : members_)
    if (net_.latency(at_, m) < net_.latency(at_, best)) best = m;
  return best;
}

NodeId RaftClient::next_after(const NodeId& n) const {
  auto it = std::find(members_.begin(), members_.end(), n);
  if (it == members_.end() || ++it == members_.end()) return members_.front();
  return *it;
}

void RaftClient::write(Command cmd, std::function<void(StatusOr<Index>)> done) {
  ClientRequest req;
  req.command = std::move(cmd);
  submit(std::move(req), [done = std::move(done)](const ClientReply& r) {
    if (r.code == Errc::Ok) {
      done(r.index);
    } else {
      done(Status(r.code, "raft write failed"));
    }
  });
}

void RaftClient::read(const std::string& key, std::function<void(StatusOr<ReadValue>)> done) {
  ClientRequest req;
  req.read = true;
  req.command.key = key;
  submit(std::move(req), [done = std::move(done)](const ClientReply& r) {
    if (r.code == Errc::Ok) {
      done(ReadValue{r.found, r.value, r.index, r.tombstone});
    } else {
      done(Status(r.code, "raft read failed"));
    }
  });
}

void RaftClient::submit(ClientRequest req, std::function<void(const ClientReply&)> done) {
  if (members_.empty()) {
    done({0, Errc::NoReplicaAvailable, {}, false, {}, 0, false});
    return;
  }
  const auto id = next_id_++;
  req.id = id;
  req.reply_topic = reply_topic_;
  pending_[id] = {std::move(req), first_target(), std::move(done), {}};
  attempt(id);
}

void RaftClient::attempt(std::uint64_t id) {
  auto it = pending_.find(id);
  if (it == pending_.end()) return;
  Pending& p = it->second;
  net_.loop().cancel(p.timeout);
  p.timeout = net_.loop().after(attempt_timeout_, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto done = std::move(it->second.done);
    const auto req_id = it->second.req.id;
    if (leader_ == it->second.target) leader_.reset();
    pending_.erase(it);
    done({req_id, Errc::Timeout, {}, false, {}, 0, false});
  }));
  net_.send({at_, p.target, cfg_.topic() + "/c", encode(p.req), 0});
}

void RaftClient::on_reply(const sim::Envelope& env) {
  ClientReply r = decode_client_reply(env.payload);
  auto it = pending_.find(r.id);
  if (it == pending_.end() || env.src != it->second.target) return;
  Pending& p = it->second;
  if (r.code == Errc::NotLeader && p.req.hops < kMaxHops) {
    ++p.req.hops;
    const bool hinted = !r.leader_hint.empty() && r.leader_hint != p.target &&
                        std::find(members_.begin(), members_.end(), r.leader_hint) != members_.end();
    p.target = hinted ? r.leader_hint : next_after(p.target);
    leader_.reset();
    if (hinted) {
      attempt(r.id);
    } else {
      // Nobody knows a leader yet; give the election a moment.
      net_.loop().cancel(p.timeout);
      p.timeout = net_.loop().after(cfg_.timings.heartbeat, life_.guard([this, id = r.id] { attempt(id); }));
    }
    return;
  }
  net_.loop().cancel(p.timeout);
  if (r.code == Errc::Ok) leader_ = p.target;
  auto done = std::move(p.done);
  pending_.erase(it);
  done(r);
}

}  // namespace weft::raft
