#include "weft/session/session.hpp"

#include <algorithm>

namespace weft::session {

namespace {

enum Kind : std::uint8_t { kWrite = 0x41, kRead = 0x42, kQualify = 0x43, kReply = 0x4A };

void encode_stamps(ByteWriter& w, const std::map<std::string, Stamp>& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [k, s] : m) {
    w.bytes(k);
    ae::encode(w, s);
  }
}

std::map<std::string, Stamp> decode_stamps(ByteReader& r) {
  std::map<std::string, Stamp> m;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = r.bytes();
    m[std::move(k)] = ae::decode_stamp(r);
  }
  return m;
}

// Session traffic for key "<instance>/<attr>" rides obj/<scope>/<instance>.
std::string topic_for(const std::string& scope, const std::string& key) {
  return "obj/" + scope + "/" + key.substr(0, key.find('/'));
}

}  // namespace

void encode(ByteWriter& w, const SessionToken& t) {
  w.u64(t.id).bytes(t.pinned).u64(t.write_counter).u32(static_cast<std::uint32_t>(t.high_water.size()));
  for (const auto& [k, c] : t.high_water) w.bytes(k).u64(c);
  encode_stamps(w, t.write_stamps);
  encode_stamps(w, t.read_stamps);
}

SessionToken decode_token(ByteReader& r) {
  SessionToken t;
  t.id = r.u64();
  t.pinned = r.bytes();
  t.write_counter = r.u64();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = r.bytes();
    t.high_water[std::move(k)] = r.u64();
  }
  t.write_stamps = decode_stamps(r);
  t.read_stamps = decode_stamps(r);
  return t;
}

StatusOr<DcId> choose_pin(const sim::Network& net, const DcId& client_dc, const std::vector<DcId>& replicas) {
  std::optional<DcId> best;
  for (const auto& r : replicas) {
    if (!net.is_up(r)) continue;
    if (r == client_dc) return r;
    if (!best || net.latency(client_dc, r) < net.latency(client_dc, *best) ||
        (net.latency(client_dc, r) == net.latency(client_dc, *best) && r < *best))
      best = r;
  }
  if (!best) return Status(Errc::NoReplicaAvailable, "no live replica");
  return *best;
}

StatusOr<SessionToken> open_session(const sim::Network& net, std::uint64_t id, const DcId& client_dc,
                                    const std::vector<DcId>& replicas) {
  auto pin = choose_pin(net, client_dc, replicas);
  if (!pin.ok()) return pin.status();
  SessionToken t;
  t.id = id;
  t.pinned = *pin;
  return t;
}

std::uint64_t note_write(SessionToken& t, const std::string& key, const Stamp& stamp) {
  ++t.write_counter;
  t.high_water[key] = t.write_counter;
  auto& s = t.write_stamps[key];
  s = std::max(s, stamp);
  return t.write_counter;
}

void note_read(SessionToken& t, const std::string& key, const Stamp& stamp) {
  auto& s = t.read_stamps[key];
  s = std::max(s, stamp);
}

bool read_ok(const SessionToken& t, const std::string& key, const Stamp& returned) {
  auto w = t.write_stamps.find(key);
  if (w != t.write_stamps.end() && returned < w->second) return false;
  auto r = t.read_stamps.find(key);
  return r == t.read_stamps.end() || !(returned < r->second);
}

namespace {

// Pointwise max of two sorted maps in one pass.
template <class V>
void merge_max(std::map<std::string, V>& into, const std::map<std::string, V>& from) {
  auto it = into.begin();
  for (const auto& [k, v] : from) {
    while (it != into.end() && it->first < k) ++it;
    if (it != into.end() && it->first == k) {
      if (it->second < v) it->second = v;
    } else {
      it = std::next(into.emplace_hint(it, k, v));
    }
  }
}

}  // namespace

void absorb(SessionToken& into, const SessionToken& from) {
  into.write_counter = std::max(into.write_counter, from.write_counter);
  merge_max(into.high_water, from.high_water);
  merge_max(into.write_stamps, from.write_stamps);
  merge_max(into.read_stamps, from.read_stamps);
  if (!from.pinned.empty()) into.pinned = from.pinned;
}

bool qualifies(const SessionToken& t, const ae::Replica& replica) {
  auto holds = [&](const std::map<std::string, Stamp>& stamps) {
    for (const auto& [k, s] : stamps) {
      const ae::CrdtValue* v = replica.get(k);
      if (!v || ae::version_of(*v) < s) return false;
    }
    return true;
  };
  return holds(t.write_stamps) && holds(t.read_stamps);
}

SessionEndpoint::SessionEndpoint(sim::Network& net, std::string scope, ae::Replica& replica)
    : net_(net), scope_(std::move(scope)), replica_(replica) {
  sub_ = net_.subscribe(replica_.dc(), "obj/" + scope_ + "/",
                        life_.guard([this](const sim::Envelope& e) { on_message(e); }));
}

SessionEndpoint::~SessionEndpoint() { net_.unsubscribe(sub_); }

void SessionEndpoint::on_message(const sim::Envelope& env) {
  if (env.payload.empty()) return;
  const auto kind = static_cast<std::uint8_t>(env.payload[0]);
  if (kind != kWrite && kind != kRead && kind != kQualify) return;
  ByteReader r(env.payload);
  r.u8();
  const auto req = r.u64();
  const auto reply_topic = r.bytes();
  ByteWriter w;
  w.u8(kReply).u64(req);
  if (kind == kWrite) {
    const auto key = r.bytes();
    const auto wk = static_cast<WriteKind>(r.u8());
    auto value = r.bytes();
    const auto field = r.bytes();
    try {
      Stamp stamp;
      switch (wk) {
        case WriteKind::Put:
          stamp = replica_.write(key, std::move(value)).stamp;
          break;
        case WriteKind::Delete:
          stamp = replica_.write(key, {}, true).stamp;
          break;
        case WriteKind::Increment:
          replica_.increment(key, std::stoull(value.empty() ? "1" : value));
          break;
        case WriteKind::MapPut:
          stamp = replica_.map_put(key, field, std::move(value)).entries.at(field).stamp;
          break;
      }
      w.u32(static_cast<std::uint32_t>(Errc::Ok));
      ae::encode(w, stamp);
      if (on_serve) on_serve(key, stamp, true);
    } catch (const Error& e) {
      w.u32(static_cast<std::uint32_t>(e.code()));
    }
  } else if (kind == kRead) {
    const auto key = r.bytes();
    w.u32(static_cast<std::uint32_t>(Errc::Ok));
    const ae::CrdtValue* v = replica_.get(key);
    w.boolean(v != nullptr);
    if (v) {
      ae::encode(w, *v);
      ae::encode(w, ae::version_of(*v));
    }
    if (on_serve) on_serve(key, v ? ae::version_of(*v) : Stamp{}, false);
  } else {
    const SessionToken t = decode_token(r);
    w.u32(static_cast<std::uint32_t>(Errc::Ok)).boolean(qualifies(t, replica_));
  }
  net_.send({replica_.dc(), env.src, reply_topic, std::move(w).take(), 0});
}

SessionClient::SessionClient(sim::Network& net, std::string scope, DcId at, std::string name)
    : net_(net), scope_(std::move(scope)), at_(std::move(at)) {
  reply_topic_ = "obj/" + scope_ + "/~session/" + name;
  sub_ = net_.subscribe(at_, reply_topic_, life_.guard([this](const sim::Envelope& e) { on_message(e); }));
}

SessionClient::~SessionClient() {
  net_.unsubscribe(sub_);
  for (auto& [_, p] : pending_) net_.loop().cancel(p.timer);
}

void SessionClient::request(const DcId& dst, const std::string& key, std::uint8_t kind,
                            const std::function<void(ByteWriter&)>& body,
                            std::function<void(ByteReader&)> on_reply, std::function<void()> on_fail) {
  if (!net_.reachable(at_, dst)) {
    on_fail();
    return;
  }
  const auto id = next_++;
  ByteWriter w;
  w.u8(kind).u64(id).bytes(reply_topic_);
  body(w);
  Pending& p = pending_[id];
  p.on_reply = std::move(on_reply);
  p.on_fail = std::move(on_fail);
  p.timer = net_.loop().after(timeout_, life_.guard([this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto fail = std::move(it->second.on_fail);
    pending_.erase(it);
    fail();
  }));
  net_.send({at_, dst, topic_for(scope_, key), std::move(w).take(), 0});
}

void SessionClient::on_message(const sim::Envelope& env) {
  ByteReader r(env.payload);
  if (r.u8() != kReply) return;
  auto it = pending_.find(r.u64());
  if (it == pending_.end()) return;
  net_.loop().cancel(it->second.timer);
  auto cb = std::move(it->second.on_reply);
  pending_.erase(it);
  cb(r);
}

void SessionClient::write(std::shared_ptr<SessionToken> t, const std::string& key, WriteKind kind, Bytes value,
                          std::string field, std::function<void(StatusOr<WriteAck>)> done) {
  auto fail = [done] { done(Status(Errc::ReplicaUnreachable, "pinned replica unreachable")); };
  request(
      t->pinned, key, kWrite,
      [&](ByteWriter& w) { w.bytes(key).u8(static_cast<std::uint8_t>(kind)).bytes(value).bytes(field); },
      [t, key, done](ByteReader& r) {
        const auto code = static_cast<Errc>(r.u32());
        if (code != Errc::Ok) {
          done(Status(code, "session write rejected"));
          return;
        }
        const Stamp s = ae::decode_stamp(r);
        done(WriteAck{note_write(*t, key, s), s});
      },
      fail);
}

void SessionClient::read(std::shared_ptr<SessionToken> t, const std::string& key,
                         std::function<void(StatusOr<SessionRead>)> done) {
  auto fail = [done] { done(Status(Errc::ReplicaUnreachable, "pinned replica unreachable")); };
  request(
      t->pinned, key, kRead, [&](ByteWriter& w) { w.bytes(key); },
      [t, key, done](ByteReader& r) {
        r.u32();
        SessionRead out;
        out.found = r.boolean();
        if (out.found) {
          out.value = ae::decode_crdt(r);
          out.stamp = ae::decode_stamp(r);
        }
        note_read(*t, key, out.stamp);
        done(std::move(out));
      },
      fail);
}

void SessionClient::repin(std::shared_ptr<SessionToken> t, const std::vector<DcId>& replicas,
                          std::function<void(StatusOr<SessionToken>)> done) {
  const bool still_replica = std::find(replicas.begin(), replicas.end(), t->pinned) != replicas.end();
  if (!t->pinned.empty() && still_replica && net_.reachable(at_, t->pinned)) {
    done(*t);
    return;
  }
  std::vector<DcId> candidates;
  for (const auto& r : replicas)
    if (r != t->pinned && net_.reachable(at_, r)) candidates.push_back(r);
  std::stable_sort(candidates.begin(), candidates.end(), [this](const DcId& a, const DcId& b) {
    if (a == at_ || b == at_) return a == at_ && b != at_;
    return net_.latency(at_, a) < net_.latency(at_, b);
  });
  try_candidates(std::move(t), std::move(candidates), 0, std::move(done));
}

void SessionClient::try_candidates(std::shared_ptr<SessionToken> t, std::vector<DcId> candidates, std::size_t i,
                                   std::function<void(StatusOr<SessionToken>)> done) {
  if (i >= candidates.size()) {
    done(Status(Errc::NoQualifiedReplica, "no replica holds the session's writes"));
    return;
  }
  const DcId target = candidates[i];
  auto next = [this, t, candidates, i, done] { try_candidates(t, candidates, i + 1, done); };
  request(
      target, "~qualify", kQualify, [&](ByteWriter& w) { encode(w, *t); },
      [t, target, next, done](ByteReader& r) {
        r.u32();
        if (r.boolean()) {
          t->pinned = target;
          done(*t);
        } else {
          next();
        }
      },
      next);
}

}  // namespace weft::session
