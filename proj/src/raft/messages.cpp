#include "weft/raft/messages.hpp"

namespace weft::raft {

namespace {

enum Tag : std::uint8_t { kVote = 1, kVoteReply = 2, kAppend = 3, kAppendReply = 4 };

}  // namespace

void encode(ByteWriter& w, const Command& c) { w.boolean(c.noop).bytes(c.key).bytes(c.value).boolean(c.tombstone); }

Command decode_command(ByteReader& r) {
  Command c;
  c.noop = r.boolean();
  c.key = r.bytes();
  c.value = r.bytes();
  c.tombstone = r.boolean();
  return c;
}

Bytes encode(const Message& m) {
  ByteWriter w;
  if (auto* v = std::get_if<RequestVote>(&m)) {
    w.u8(kVote).u64(v->term).bytes(v->candidate).u64(v->last_log_index).u64(v->last_log_term).boolean(v->pre);
  } else if (auto* v = std::get_if<VoteReply>(&m)) {
    w.u8(kVoteReply).u64(v->term).boolean(v->granted).boolean(v->pre);
  } else if (auto* a = std::get_if<AppendEntries>(&m)) {
    w.u8(kAppend).u64(a->term).bytes(a->leader).u64(a->prev_index).u64(a->prev_term);
    w.u32(static_cast<std::uint32_t>(a->entries.size()));
    for (const auto& e : a->entries) {
      w.u64(e.term).u64(e.index);
      encode(w, e.command);
    }
    w.u64(a->leader_commit).u64(a->read_seq);
  } else {
    const auto& r = std::get<AppendReply>(m);
    w.u8(kAppendReply).u64(r.term).boolean(r.success).u64(r.match_index).u64(r.hint).u64(r.read_seq);
  }
  return std::move(w).take();
}

Message decode_message(std::string_view bytes) {
  ByteReader r(bytes);
  switch (r.u8()) {
    case kVote: {
      RequestVote v;
      v.term = r.u64();
      v.candidate = r.bytes();
      v.last_log_index = r.u64();
      v.last_log_term = r.u64();
      v.pre = r.boolean();
      return v;
    }
    case kVoteReply: {
      VoteReply v;
      v.term = r.u64();
      v.granted = r.boolean();
      v.pre = r.boolean();
      return v;
    }
    case kAppend: {
      AppendEntries a;
      a.term = r.u64();
      a.leader = r.bytes();
      a.prev_index = r.u64();
      a.prev_term = r.u64();
      const auto n = r.u32();
      a.entries.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        LogEntry e;
        e.term = r.u64();
        e.index = r.u64();
        e.command = decode_command(r);
        a.entries.push_back(std::move(e));
      }
      a.leader_commit = r.u64();
      a.read_seq = r.u64();
      return a;
    }
    case kAppendReply: {
      AppendReply a;
      a.term = r.u64();
      a.success = r.boolean();
      a.match_index = r.u64();
      a.hint = r.u64();
      a.read_seq = r.u64();
      return a;
    }
    default:
      throw Error(Errc::DecodeError, "unknown raft message");
  }
}

Bytes encode(const ClientRequest& q) {
  ByteWriter w;
  w.u64(q.id).boolean(q.read).u32(q.hops).bytes(q.reply_topic);
  encode(w, q.command);
  return std::move(w).take();
}

ClientRequest decode_client_request(std::string_view bytes) {
  ByteReader r(bytes);
  ClientRequest q;
  q.id = r.u64();
  q.read = r.boolean();
  q.hops = r.u32();
  q.reply_topic = r.bytes();
  q.command = decode_command(r);
  return q;
}

Bytes encode(const ClientReply& p) {
  ByteWriter w;
  w.u64(p.id).u32(static_cast<std::uint32_t>(p.code)).bytes(p.leader_hint).boolean(p.found).bytes(p.value);
  w.u64(p.index).boolean(p.tombstone);
  return std::move(w).take();
}

ClientReply decode_client_reply(std::string_view bytes) {
  ByteReader r(bytes);
  ClientReply p;
  p.id = r.u64();
  p.code = static_cast<Errc>(r.u32());
  p.leader_hint = r.bytes();
  p.found = r.boolean();
  p.value = r.bytes();
  p.index = r.u64();
  p.tombstone = r.boolean();
  return p;
}

}  // namespace weft::raft
