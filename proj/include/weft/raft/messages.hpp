#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "weft/common/bytes.hpp"
#include "weft/common/status.hpp"

namespace weft::raft {

using NodeId = std::string;
using Term = std::uint64_t;
using Index = std::uint64_t;
using Millis = std::int64_t;

struct Command {
  bool noop = false;
  std::string key;  // "<object>/<attribute>"
  Bytes value;
  bool tombstone = false;

  static Command no_op() { return {true, {}, {}, false}; }
  friend bool operator==(const Command&, const Command&) = default;
};

struct LogEntry {
  Term term = 0;
  Index index = 0;
  Command command;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct RequestVote {
  Term term = 0;
  NodeId candidate;
  Index last_log_index = 0;
  Term last_log_term = 0;
  bool pre = false;  // pre-vote probe for `term`; changes no state at the receiver
};

struct VoteReply {
  Term term = 0;
  bool granted = false;
  bool pre = false;
};

struct AppendEntries {
  Term term = 0;
  NodeId leader;
  Index prev_index = 0;
  Term prev_term = 0;
  std::vector<LogEntry> entries;
  Index leader_commit = 0;
  std::uint64_t read_seq = 0;
};

struct AppendReply {
  Term term = 0;
  bool success = false;
  Index match_index = 0;  // on success: last index known to match
  Index hint = 0;         // on failure: first index the leader should retry from
  std::uint64_t read_seq = 0;
};

using Message = std::variant<RequestVote, VoteReply, AppendEntries, AppendReply>;

Bytes encode(const Message& m);
Message decode_message(std::string_view bytes);

void encode(ByteWriter& w, const Command& c);
Command decode_command(ByteReader& r);

// Client traffic between a RaftClient and group members.
struct ClientRequest {
  std::uint64_t id = 0;
  bool read = false;
  Command command;  // for reads only key is used
  std::uint32_t hops = 0;
  std::string reply_topic;
};

struct ClientReply {
  std::uint64_t id = 0;
  Errc code = Errc::Ok;
  NodeId leader_hint;
  bool found = false;
  Bytes value;
  Index index = 0;  // commit index of the write, or of the value read
  bool tombstone = false;
};

Bytes encode(const ClientRequest& r);
ClientRequest decode_client_request(std::string_view bytes);
Bytes encode(const ClientReply& r);
ClientReply decode_client_reply(std::string_view bytes);

}  // namespace weft::raft
