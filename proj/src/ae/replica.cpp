#include "weft/ae/replica.hpp"

#include <algorithm>

namespace weft::ae {

namespace {

enum Msg : std::uint8_t { kProbe = 1, kProbeReply = 2, kFetch = 3, kNodes = 4, kBatch = 5, kBatchReply = 6 };

void put_hash(ByteWriter& w, const Hash& h) { w.raw({reinterpret_cast<const char*>(h.data()), h.size()}); }

Hash get_hash(ByteReader& r) {
  Hash h{};
  auto raw = r.raw(h.size());
  std::copy(raw.begin(), raw.end(), h.begin());
  return h;
}

}  // namespace

Gate staleness_gate(const std::map<DcId, Millis>& last_sync, Millis now, Millis delta) {
  Millis oldest = now;
  for (const auto& [_, t] : last_sync) oldest = std::min(oldest, t);
  return now - oldest <= delta ? Gate::Allow : Gate::Block;
}

Millis default_sync_period(Millis delta) { return std::max<Millis>(500, delta / 2); }

Replica::Replica(sim::Network& net, ReplicaConfig cfg)
    : net_(net), cfg_(std::move(cfg)), tree_(std::make_shared<MerkleSearchTree>()) {
  if (cfg_.round_timeout <= 0) cfg_.round_timeout = std::clamp<Millis>(cfg_.sync_period, 1000, 2000);
  sub_ = net_.subscribe(cfg_.dc, "ae/" + cfg_.scope + "/", life_.guard([this](const sim::Envelope& e) { on_message(e); }));
}

Replica::~Replica() {
  net_.unsubscribe(sub_);
  net_.loop().cancel(tick_);
  for (auto& [_, r] : outgoing_) net_.loop().cancel(r.timeout);
}

void Replica::add_peer(const DcId& peer, Millis last_sync) {
  if (peer == cfg_.dc) return;
  last_sync_[peer] = last_sync;
}

void Replica::remove_peer(const DcId& peer) {
  last_sync_.erase(peer);
  pinned_.erase(peer);
  if (outgoing_.count(peer)) finish(peer, Status(Errc::FetchFailed, "peer removed"));
}

void Replica::start() {
  if (running_) return;
  running_ = true;
  tick_ = net_.loop().after(cfg_.sync_period, life_.guard([this] { tick(); }));
}

void Replica::stop() {
  running_ = false;
  net_.loop().cancel(tick_);
}

void Replica::tick() {
  if (!running_) return;
  for (const auto& [peer, _] : last_sync_)
    if (cfg_.dc < peer && !outgoing_.count(peer)) periodic_round(peer);
  tick_ = net_.loop().after(cfg_.sync_period, life_.guard([this] { tick(); }));
}

void Replica::periodic_round(const DcId& peer) {
  const std::uint64_t round = next_round_;
  sync_with(peer, [this, peer, round](const Status& s) {
    if (s.ok() || !running_) return;
    net_.loop().after(cfg_.retry_after, life_.guard([this, peer, round] {
      // a newer round already covers this peer
      if (!running_ || !last_sync_.count(peer) || outgoing_.count(peer) || next_round_ != round + 1) return;
      periodic_round(peer);
    }));
  });
}

std::string Replica::topic(const DcId& peer) const {
  const auto& a = std::min(cfg_.dc, peer);
  const auto& b = std::max(cfg_.dc, peer);
  return "ae/" + cfg_.scope + "/" + a + "|" + b;
}

void Replica::send(const DcId& peer, Bytes payload) {
  net_.send({cfg_.dc, peer, topic(peer), std::move(payload), 0});
}

void Replica::sync_with(const DcId& peer, std::function<void(const Status&)> done) {
  if (outgoing_.count(peer)) finish(peer, Status(Errc::FetchFailed, "round superseded"));
  if (!net_.is_up(cfg_.dc)) {
    ++stats_.rounds_started;
    ++stats_.rounds_failed;
    if (done) done(Status(Errc::FetchFailed, "local datacenter down"));
    return;
  }
  Outgoing& r = outgoing_[peer];
  r.round = next_round_++;
  r.start = net_.now();
  r.snapshot = tree();
  r.done = std::move(done);
  r.timeout = net_.loop().after(cfg_.round_timeout, life_.guard([this, peer, round = r.round] {
    auto it = outgoing_.find(peer);
    if (it != outgoing_.end() && it->second.round == round) finish(peer, Status(Errc::FetchFailed, "sync timed out"));
  }));
  ++stats_.rounds_started;
  ByteWriter w;
  w.u8(kProbe).u64(r.round).i64(r.start);
  put_hash(w, r.snapshot->root());
  send(peer, std::move(w).take());
}

void Replica::finish(const DcId& peer, const Status& s) {
  auto it = outgoing_.find(peer);
  if (it == outgoing_.end()) return;
  Outgoing r = std::move(it->second);
  outgoing_.erase(it);
  net_.loop().cancel(r.timeout);
  if (s.ok()) {
    ++stats_.rounds_ok;
    auto ls = last_sync_.find(peer);
    if (ls != last_sync_.end()) ls->second = std::max(ls->second, r.start - 1);
  } else {
    ++stats_.rounds_failed;
  }
  if (r.done) r.done(s);
}

void Replica::send_fetch_or_batch(const DcId& peer, Outgoing& r) {
  ByteWriter w;
  if (!r.diff->done()) {
    w.u8(kFetch).u64(r.round).u32(static_cast<std::uint32_t>(r.diff->wanted().size()));
    for (const auto& h : r.diff->wanted()) put_hash(w, h);
  } else {
    const auto keys = r.diff->divergent();
    w.u8(kBatch).u64(r.round).i64(r.start).u32(static_cast<std::uint32_t>(keys.size()));
    for (const auto& k : keys) {
      w.bytes(k);
      const CrdtValue* v = get(k);
      w.boolean(v != nullptr);
      if (v) encode(w, *v);
    }
    stats_.keys_exchanged += keys.size();
  }
  send(peer, std::move(w).take());
}

void Replica::on_message(const sim::Envelope& env) {
  const DcId& peer = env.src;
  if (!last_sync_.count(peer)) return;
  ByteReader r(env.payload);
  const auto kind = r.u8();
  const auto round = r.u64();
  switch (kind) {
    case kProbe: {
      const Millis start = r.i64();
      const Hash their_root = get_hash(r);
      auto snap = tree();
      ByteWriter w;
      w.u8(kProbeReply).u64(round);
      if (snap->root() == their_root) {
        pinned_.erase(peer);
        last_sync_[peer] = std::max(last_sync_[peer], start - 1);
        w.boolean(true);
      } else {
        pinned_[peer] = {round, snap};
        w.boolean(false);
        put_hash(w, snap->root());
      }
      send(peer, std::move(w).take());
      break;
    }
    case kProbeReply: {
      auto it = outgoing_.find(peer);
      if (it == outgoing_.end() || it->second.round != round) return;
      if (r.boolean()) {
        finish(peer, Status{});
        return;
      }
      Outgoing& o = it->second;
      o.diff = std::make_unique<MstDiff>(*o.snapshot, get_hash(r));
      send_fetch_or_batch(peer, o);
      break;
    }
    case kFetch: {
      auto it = pinned_.find(peer);
      ByteWriter w;
      w.u8(kNodes).u64(round);
      std::vector<const MstNode*> found;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const Hash h = get_hash(r);
        if (it != pinned_.end() && it->second.round == round)
          if (const MstNode* node = it->second.snapshot->node(h)) found.push_back(node);
      }
      w.u32(static_cast<std::uint32_t>(found.size()));
      for (const MstNode* node : found) encode(w, *node);
      send(peer, std::move(w).take());
      break;
    }
    case kNodes: {
      auto it = outgoing_.find(peer);
      if (it == outgoing_.end() || it->second.round != round || !it->second.diff) return;
      std::vector<MstNode> nodes;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) nodes.push_back(decode_mst_node(r));
      try {
        it->second.diff->supply(nodes);
      } catch (const Error&) {
        finish(peer, Status(Errc::FetchFailed, "peer lost its snapshot"));
        return;
      }
      stats_.nodes_fetched += nodes.size();
      send_fetch_or_batch(peer, it->second);
      break;
    }
    case kBatch: {
      const Millis start = r.i64();
      const auto n = r.u32();
      std::vector<std::string> keys;
      for (std::uint32_t i = 0; i < n; ++i) {
        keys.push_back(r.bytes());
        if (r.boolean()) merge_from_peer(keys.back(), decode_crdt(r));
      }
      ByteWriter w;
      w.u8(kBatchReply).u64(round).u32(n);
      for (const auto& k : keys) {
        w.bytes(k);
        const CrdtValue* v = get(k);
        w.boolean(v != nullptr);
        if (v) encode(w, *v);
      }
      pinned_.erase(peer);
      last_sync_[peer] = std::max(last_sync_[peer], start - 1);
      send(peer, std::move(w).take());
      break;
    }
    case kBatchReply: {
      auto it = outgoing_.find(peer);
      if (it == outgoing_.end() || it->second.round != round) return;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        auto k = r.bytes();
        if (r.boolean()) merge_from_peer(k, decode_crdt(r));
      }
      finish(peer, Status{});
      break;
    }
    default:
      break;
  }
}

Stamp Replica::next_stamp() {
  const Millis now = net_.now();
  if (now != last_stamp_ms_) {
    last_stamp_ms_ = now;
    seq_ = 0;
  }
  return {now, cfg_.id, seq_++};
}

LwwRegister Replica::write(const std::string& key, Bytes value, bool tombstone) {
  LwwRegister reg{next_stamp(), tombstone, std::move(value)};
  merge(key, reg);
  return reg;
}

GCounter Replica::increment(const std::string& key, std::uint64_t by) {
  GCounter c;
  if (const CrdtValue* v = get(key)) {
    if (!std::holds_alternative<GCounter>(*v)) throw Error(Errc::KindMismatch, key + " is not a counter");
    c = std::get<GCounter>(*v);
  }
  c.slots[cfg_.id] += by;
  merge(key, c);
  return c;
}

LwwMap Replica::map_put(const std::string& key, const std::string& field, Bytes value) {
  LwwMap m;
  m.entries[field] = LwwRegister{next_stamp(), false, std::move(value)};
  merge(key, m);
  return std::get<LwwMap>(data_.at(key));
}

void Replica::merge(const std::string& key, const CrdtValue& v) {
  auto [it, inserted] = data_.try_emplace(key, v);
  if (!inserted) it->second = crdt_merge(it->second, v);
  touch(key);
}

bool Replica::merge_from_peer(const std::string& key, const CrdtValue& v) {
  auto it = data_.find(key);
  if (it != data_.end() && it->second.index() != v.index()) return false;
  CrdtValue merged = it == data_.end() ? v : crdt_merge(it->second, v);
  if (it != data_.end() && merged == it->second) return false;
  data_[key] = std::move(merged);
  touch(key);
  if (on_remote_change) on_remote_change(key);
  return true;
}

void Replica::touch(const std::string& key) {
  value_hashes_[key] = sha256(encode(data_.at(key)));
  tree_.reset();
}

const CrdtValue* Replica::get(const std::string& key) const {
  auto it = data_.find(key);
  return it == data_.end() ? nullptr : &it->second;
}

std::shared_ptr<const MerkleSearchTree> Replica::tree() {
  if (!tree_) tree_ = std::make_shared<MerkleSearchTree>(value_hashes_);
  return tree_;
}

}  // namespace weft::ae
