#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weft/ae/replica.hpp"
#include "weft/sim/network.hpp"

namespace weft::session {

using ae::Stamp;
using sim::DcId;
using Millis = std::int64_t;

// Client-held RYW state. Besides the acknowledged-write counter and per-key
// high-water marks it remembers the stamps of the session's own writes and of
// the newest versions it has read; a replica may serve the session only if it
// already holds versions at least that new.
struct SessionToken {
  std::uint64_t id = 0;
  DcId pinned;
  std::uint64_t write_counter = 0;
  std::map<std::string, std::uint64_t> high_water;
  std::map<std::string, Stamp> write_stamps;
  std::map<std::string, Stamp> read_stamps;

  friend bool operator==(const SessionToken&, const SessionToken&) = default;
};

void encode(ByteWriter& w, const SessionToken& t);
SessionToken decode_token(ByteReader& r);

// Pin choice: the replica in client_dc if it is live, else the live replica
// with the lowest latency from client_dc (ties by id). NoReplicaAvailable
// when no replica is live.
StatusOr<DcId> choose_pin(const sim::Network& net, const DcId& client_dc, const std::vector<DcId>& replicas);
StatusOr<SessionToken> open_session(const sim::Network& net, std::uint64_t id, const DcId& client_dc,
                                    const std::vector<DcId>& replicas);

// Bookkeeping after an acknowledged write / a served read.
std::uint64_t note_write(SessionToken& t, const std::string& key, const Stamp& stamp);
void note_read(SessionToken& t, const std::string& key, const Stamp& stamp);
// A read of `key` returning `returned` keeps RYW and monotonic reads.
bool read_ok(const SessionToken& t, const std::string& key, const Stamp& returned);
// Folds a token returned by a pipelined operation into `into`.
void absorb(SessionToken& into, const SessionToken& from);

// The replica already holds every version the session has written or read.
bool qualifies(const SessionToken& t, const ae::Replica& replica);

enum class WriteKind : std::uint8_t { Put = 1, Delete = 2, Increment = 3, MapPut = 4 };

struct WriteAck {
  std::uint64_t counter = 0;
  Stamp stamp;
};

struct SessionRead {
  bool found = false;
  ae::CrdtValue value;
  Stamp stamp;
};

// Serves session operations against the local replica of `scope` on topic
// obj/<scope>/ with session message kinds.
class SessionEndpoint {
 public:
  SessionEndpoint(sim::Network& net, std::string scope, ae::Replica& replica);
  ~SessionEndpoint();
  SessionEndpoint(const SessionEndpoint&) = delete;
  SessionEndpoint& operator=(const SessionEndpoint&) = delete;

  // Called after a write is applied or a read is served, with the version
  // involved (zero stamp when the key is absent).
  std::function<void(const std::string& key, const Stamp& stamp, bool write)> on_serve;

 private:
  void on_message(const sim::Envelope& env);

  sim::Network& net_;
  std::string scope_;
  ae::Replica& replica_;
  std::uint64_t sub_ = 0;
  sim::Lifetime life_;
};

// Issues session operations from one datacenter to pinned replicas.
class SessionClient {
 public:
  SessionClient(sim::Network& net, std::string scope, DcId at, std::string name);
  ~SessionClient();
  SessionClient(const SessionClient&) = delete;
  SessionClient& operator=(const SessionClient&) = delete;

  // The token is updated when the acknowledgement arrives.
  void write(std::shared_ptr<SessionToken> t, const std::string& key, WriteKind kind, Bytes value, std::string field,
             std::function<void(StatusOr<WriteAck>)> done);
  void read(std::shared_ptr<SessionToken> t, const std::string& key, std::function<void(StatusOr<SessionRead>)> done);
  // Moves the pin to a replica that qualifies; identical token when the
  // current pin is reachable; NoQualifiedReplica when none does.
  void repin(std::shared_ptr<SessionToken> t, const std::vector<DcId>& replicas,
             std::function<void(StatusOr<SessionToken>)> done);

  void set_timeout(Millis ms) { timeout_ = ms; }

 private:
  struct Pending {
    std::function<void(ByteReader&)> on_reply;
    std::function<void()> on_fail;
    sim::EventHandle timer;
  };

  void request(const DcId& dst, const std::string& key, std::uint8_t kind, const std::function<void(ByteWriter&)>& body,
               std::function<void(ByteReader&)> on_reply, std::function<void()> on_fail);
  void on_message(const sim::Envelope& env);
  void try_candidates(std::shared_ptr<SessionToken> t, std::vector<DcId> candidates, std::size_t i,
                      std::function<void(StatusOr<SessionToken>)> done);

  sim::Network& net_;
  std::string scope_;
  DcId at_;
  std::string reply_topic_;
  std::map<std::uint64_t, Pending> pending_;
  std::uint64_t next_ = 1;
  Millis timeout_ = 500;
  std::uint64_t sub_ = 0;
  sim::Lifetime life_;
};

}  // namespace weft::session
