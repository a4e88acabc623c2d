#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "weft/ae/replica.hpp"
#include "weft/raft/group.hpp"
#include "weft/runtime/handlers.hpp"
#include "weft/runtime/wire.hpp"
#include "weft/runtime/workers.hpp"
#include "weft/session/session.hpp"

namespace weft::runtime {

// Storage-level events, the ground truth for staleness and session checks.
enum class DataOp {
  Apply,         // a write took effect: Raft commit at the leader, or a CRDT write at its origin replica
  Serve,         // a read was answered by a replica; `issued` is when the request reached it
  SessionWrite,  // a session write was acknowledged to the runtime using the session
  SessionRead,   // a session read returned to the runtime using the session
  Blocked,       // a gated access was refused with StalenessExceeded
};

struct DataEvent {
  DataOp op = DataOp::Apply;
  Millis at = 0;
  Millis issued = 0;
  std::string cls;
  std::string key;  // "<instance>/<attribute>"
  model::ConsistencyKind mode = model::ConsistencyKind::ReadYourWrite;
  ae::Stamp version;  // Raft index in `ms` for strong attributes
  DcId dc;
  std::uint64_t session = 0;
  std::uint64_t corr = 0;  // request id of the invocation that issued a session operation
};

// One finished invocation as executed by a runtime.
struct ExecRecord {
  model::ObjectId obj;
  std::string function;
  DcId dc;
  Millis arrival = 0;
  Millis start = 0;
  Millis end = 0;
  Millis cold_ms = 0;
  bool reserved_slot = false;
  Errc code = Errc::Ok;
};

struct RuntimeHooks {
  std::function<void(const DataEvent&)> on_data;
  std::function<void(const ExecRecord&)> on_exec;
  // Routes an invocation issued from this datacenter (relays and triggers).
  std::function<void(const model::ObjectId&, const std::string& function, Bytes payload,
                     std::function<void(StatusOr<Bytes>)>)>
      route;
  raft::SafetyChecker* checker = nullptr;
};

// One class hosted in one datacenter: object table, worker slots, triggers and
// a storage backend per attribute consistency (Raft for strong, the local
// CRDT replica behind the staleness gate for bounded staleness, pinned
// session replicas for read-your-write).
class ClassRuntime {
 public:
  ClassRuntime(sim::Network& net, DcId dc, RuntimeSpec spec, const HandlerRegistry& handlers, CapacityLedger& ledger,
               RuntimeHooks hooks);
  ~ClassRuntime();
  ClassRuntime(const ClassRuntime&) = delete;
  ClassRuntime& operator=(const ClassRuntime&) = delete;

  const DcId& dc() const { return dc_; }
  const model::FlattenedClass& cls() const { return spec_.cls; }
  const RuntimeSpec& spec() const { return spec_; }

  bool has_object(std::uint64_t instance) const;
  bool is_deleted(std::uint64_t instance) const;
  std::size_t object_count() const;

  void set_replicas(std::vector<DcId> replicas);
  const std::vector<DcId>& replicas() const { return spec_.replicas; }

  // Throws Error(UnknownFunction | EventKindMismatch | DanglingTriggerSource).
  void register_trigger(const model::TriggerRule& rule);
  // Throws Error(UnknownRule) when the rule is not active.
  void suppress(const model::TriggerRule& rule);
  std::set<model::TriggerRule> active_triggers() const;
  std::uint64_t fired(const model::TriggerRule& rule) const;

  // Reserves ceil(rps * service / 1000) slots for `fn` here. Throws
  // Error(UnknownFunction) or Error(InsufficientCapacity).
  ReservationPlan reserve_throughput(const std::string& fn, std::uint64_t rps, Millis mean_service_ms);
  void reserve_slots(const std::string& fn, std::uint32_t slots);

  // Runs the reactive scaler once; normally driven by a 1 s timer.
  void rescale();

  // Per-function outcomes since the previous call.
  std::map<std::string, FunctionStats> take_stats();

  WorkerPool& pool() { return pool_; }
  ae::Replica* replica() { return replica_.get(); }
  raft::RaftPeer* raft_peer() { return raft_peer_.get(); }
  std::string key(std::uint64_t instance, const std::string& attr) const;

 private:
  struct Object {
    bool deleted = false;
    std::set<std::string> committed;  // attributes written through this runtime
  };
  class Access;
  friend class Access;

  void tick_again();
  void request_objects();
  void on_message(const sim::Envelope& env);
  void on_invoke(const sim::Envelope& env, InvokeRequest req);
  void on_object_op(const sim::Envelope& env, Kind kind, const ObjectOp& op);
  void start(const sim::DcId& from, std::shared_ptr<InvokeRequest> req, const model::ResolvedFunction& fn,
             Millis arrival, const Grant& g);
  void reply(const sim::DcId& to, const InvokeRequest& req, InvokeReply rep);
  void fire(const model::ObjectId& obj, const std::string& source, model::TriggerEvent event);
  void committed(const model::ObjectId& obj, const std::string& attr);
  void note(const std::string& fn, Errc code);
  void emit(DataOp op, const std::string& key, model::ConsistencyKind mode, const ae::Stamp& v, Millis issued,
            std::uint64_t session = 0, std::uint64_t corr = 0);

  // Storage paths, shared by every invocation.
  struct SessionUse {
    std::shared_ptr<session::SessionToken> token;
    std::uint64_t corr = 0;
  };
  void write_attr(const model::ObjectId& obj, const model::ResolvedAttribute& a, session::WriteKind kind, Bytes value,
                  std::string field, const SessionUse& s, StatusCb done);
  void read_attr(const model::ObjectId& obj, const model::ResolvedAttribute& a, const SessionUse& s,
                 std::function<void(StatusOr<AttrValue>)> done);
  void session_write(const std::string& key, session::WriteKind kind, Bytes value, std::string field, SessionUse s,
                     bool retry, StatusCb done);
  void session_read(const std::string& key, SessionUse s, bool retry, std::function<void(StatusOr<AttrValue>)> done);

  sim::Network& net_;
  DcId dc_;
  RuntimeSpec spec_;
  const HandlerRegistry& handlers_;
  CapacityLedger& ledger_;
  RuntimeHooks hooks_;
  WorkerPool pool_;
  std::map<std::uint64_t, Object> objects_;
  std::set<model::TriggerRule> triggers_;
  std::map<model::TriggerRule, std::uint64_t> fired_;
  std::map<std::string, FunctionStats> stats_;

  std::unique_ptr<ae::Replica> replica_;
  std::unique_ptr<session::SessionEndpoint> endpoint_;
  std::unique_ptr<session::SessionClient> session_client_;
  std::unique_ptr<raft::RaftPeer> raft_peer_;
  std::unique_ptr<raft::RaftClient> raft_client_;

  std::uint64_t sub_ = 0;
  sim::EventHandle scaler_;
  bool synced_ = true;  // object registry known
  sim::EventHandle sync_timer_;
  std::shared_ptr<int> alive_ = std::make_shared<int>(0);
  sim::Lifetime life_;
};

}  // namespace weft::runtime
