#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "weft/runtime/class_runtime.hpp"

namespace weft::runtime {

struct ClassRoute {
  model::FlattenedClass cls;
  std::vector<DcId> replicas;  // datacenters running a runtime for the class
};

// Routing table every ingress reads: deployed classes, their replica sets and
// datacenter capacities. Written by the control plane.
class Directory {
 public:
  void set_capacity(const DcId& dc, std::uint32_t capacity) { capacity_[dc] = capacity; }
  std::uint32_t capacity(const DcId& dc) const;

  void publish(model::FlattenedClass cls, std::vector<DcId> replicas);
  void set_replicas(const std::string& cls, std::vector<DcId> replicas);
  void remove(const std::string& cls) { routes_.erase(cls); }
  const ClassRoute* find(const std::string& cls) const;
  std::vector<std::string> classes() const;

  // Instance numbers grow monotonically per class.
  std::uint64_t next_instance(const std::string& cls) { return ++instances_[cls]; }
  // Request ids unique across every ingress.
  std::uint64_t next_request() { return ++requests_; }

 private:
  std::map<std::string, ClassRoute> routes_;
  std::map<DcId, std::uint32_t> capacity_;
  std::map<std::string, std::uint64_t> instances_;
  std::uint64_t requests_ = 0;
};

struct InvokeOutcome {
  std::uint64_t req = 0;
  Status status;
  Bytes result;
  DcId executed_at;
  Millis issued = 0;
  Millis arrival = 0;
  Millis start = 0;
  Millis end = 0;
  Millis completed = 0;
};

struct ObjectDescriptor {
  ObjectId id;
  std::vector<DcId> replicas;
};

// Client-side entry point in one datacenter. Picks the runtime for each call:
// functions with a locality preference go to the first preferred datacenter
// that is reachable, others to the reachable replicas by smooth weighted
// round robin over datacenter capacity.
class Ingress {
 public:
  Ingress(sim::Network& net, DcId at, Directory& dir);
  ~Ingress();
  Ingress(const Ingress&) = delete;
  Ingress& operator=(const Ingress&) = delete;

  const DcId& dc() const { return at_; }

  StatusOr<DcId> route(const std::string& cls, const std::string& function);

  // `session` may be null. When given, the call carries a copy of the token
  // and the returned token is folded back into it.
  void invoke(const ObjectId& obj, const std::string& function, Bytes payload,
              std::shared_ptr<session::SessionToken> session, std::function<void(const InvokeOutcome&)> done);

  // Throws Error(UnknownClass).
  ObjectId create_object(const std::string& cls);
  void get_object(const ObjectId& obj, std::function<void(StatusOr<ObjectDescriptor>)> done);
  void delete_object(const ObjectId& obj, std::function<void(Status)> done);

  void set_timeout(Millis ms) { timeout_ = ms; }

 private:
  struct Pending {
    std::function<void(ByteReader&, Kind)> on_reply;
    std::function<void()> on_timeout;
    sim::EventHandle timer;
  };

  void on_message(const sim::Envelope& env);
  StatusOr<DcId> primary(const std::string& cls) const;

  sim::Network& net_;
  DcId at_;
  Directory& dir_;
  std::string topic_;
  std::map<std::uint64_t, Pending> pending_;
  std::map<std::string, std::map<DcId, std::int64_t>> wrr_;
  Millis timeout_ = 3000;
  std::uint64_t sub_ = 0;
  sim::Lifetime life_;
};

// Hosts the class runtimes of one datacenter and executes control commands
// arriving on ctl/<dc>: Deploy, Undeploy, SetReplicas, Reserve. Sends one
// heartbeat per runtime per second to the control plane that deployed it.
class DatacenterAgent {
 public:
  using HookFactory = std::function<RuntimeHooks(const DcId& dc, const std::string& cls)>;

  DatacenterAgent(sim::Network& net, DcId dc, std::uint32_t capacity, const HandlerRegistry& handlers,
                  HookFactory hooks);
  ~DatacenterAgent();
  DatacenterAgent(const DatacenterAgent&) = delete;
  DatacenterAgent& operator=(const DatacenterAgent&) = delete;

  const DcId& dc() const { return dc_; }
  CapacityLedger& ledger() { return ledger_; }
  ClassRuntime* runtime(const std::string& cls);
  std::vector<std::string> classes() const;

  // Crash of one runtime process: it vanishes without telling anyone.
  void kill(const std::string& cls);

 private:
  void on_message(const sim::Envelope& env);
  void heartbeat();
  void ack(const DcId& control, std::uint64_t seq, const std::string& cls, const Status& s);

  sim::Network& net_;
  DcId dc_;
  CapacityLedger ledger_;
  const HandlerRegistry& handlers_;
  HookFactory hooks_;
  std::map<std::string, std::unique_ptr<ClassRuntime>> runtimes_;
  std::map<std::string, DcId> control_;
  std::uint64_t sub_ = 0;
  sim::EventHandle timer_;
  sim::Lifetime life_;
};

}  // namespace weft::runtime
