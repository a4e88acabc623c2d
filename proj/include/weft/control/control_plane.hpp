#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weft/control/failure.hpp"
#include "weft/control/placement.hpp"
#include "weft/runtime/platform.hpp"

namespace weft::control {

using model::Millis;

struct ControlConfig {
  Millis period = 1000;  // monitoring period
  Millis phase = 500;    // first tick; keeps ticks clear of heartbeat arrivals
  Millis heartbeat_grace = 500;  // a beat this late still counts for the window
  int strikes = 3;       // consecutive breaching samples before acting
  Millis deploy_timeout = 2000;
  int max_retries = 5;
  Millis backoff = 1000;  // doubled per retry
  double throughput_slack = 0.95;
  // Passed to every runtime.
  Millis ryw_sync_ms = 1000;
  Millis cold_start_ms = 200;
  std::uint32_t initial_elastic = 1;
  raft::Timings timings;
};

enum class Action { Rollback, Redeploy, AddReplica, GrowReservation, Undeploy };
std::string action_name(Action a);

struct Correction {
  Millis at = 0;
  std::string cls;
  Action action = Action::Redeploy;
  DcId dc;
  std::string function;
  std::string cause;
  int attempt = 0;
  bool ok = false;
};

enum class Metric { StalenessMs, CommittedRps, AvailabilityWindow, QueueWaitMs };
std::string metric_name(Metric m);

struct SlaMetricSample {
  Millis at = 0;
  std::string cls;
  std::string member;  // function name, or empty for class-wide metrics
  Metric metric = Metric::CommittedRps;
  double value = 0;
};

// Places classes, deploys their runtimes over ctl/<dc>, and once a second
// checks heartbeats, availability and throughput floors, acting after
// `strikes` consecutive breaching samples. Corrections are suppressed for a
// site separated from the control datacenter by a partition, and throughput
// corrections while any partition is active.
class ControlPlane {
 public:
  ControlPlane(sim::Network& net, DcId at, runtime::Directory& dir, std::vector<model::DatacenterProfile> profiles,
               ControlConfig cfg = {});
  ~ControlPlane();
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  const DcId& dc() const { return at_; }
  const ControlConfig& config() const { return cfg_; }

  // Placement the next deploy of `cls` would use. Throws like place_class.
  PlacementPlan plan(const model::FlattenedClass& cls) const;

  // Places and deploys `cls`. Completes with the plan once every site has
  // acknowledged, or with DeployFailed after rolling every site back.
  void deploy(const model::FlattenedClass& cls, std::function<void(StatusOr<PlacementPlan>)> done);

  const PlacementPlan* placement(const std::string& cls) const;
  std::vector<DcId> replicas(const std::string& cls) const;
  std::map<DcId, std::uint32_t> reserved_load() const { return load_; }

  const std::vector<Correction>& corrections() const { return log_; }
  const std::vector<SlaMetricSample>& samples() const { return samples_; }
  double failure_estimate(const DcId& dc) const;

  std::function<void(const Correction&)> on_correction;

 private:
  struct Member {
    Millis last_seen = -1;
    int strikes = 0;
  };
  struct ClassState {
    model::FlattenedClass cls;
    PlacementPlan plan;
    std::vector<DcId> replicas;
    std::vector<DcId> raft_members;
    std::map<DcId, Member> members;
    ae::ReplicaId next_id = 1;
    bool active = false;
    bool correcting = false;
    int avail_strikes = 0;
    std::map<std::string, int> thr_strikes;
    std::map<std::string, runtime::FunctionStats> window;
    std::set<DcId> inflight;  // sites being deployed
  };
  struct Pending {
    std::function<void(Status)> done;
    sim::EventHandle timer;
  };

  runtime::RuntimeSpec spec_for(ClassState& s, const DcId& dc, const std::vector<DcId>& replicas, bool joining);
  void send_deploy(const runtime::RuntimeSpec& spec, const DcId& dc, std::function<void(Status)> done);
  void send_reserve(const std::string& cls, const std::string& fn, const DcId& dc, std::uint32_t slots,
                    std::function<void(Status)> done);
  std::uint64_t await(std::function<void(Status)> done);
  void on_message(const sim::Envelope& env);
  void on_heartbeat(const runtime::Heartbeat& hb);

  void tick();
  void check(ClassState& s, Millis prev, Millis now);
  std::optional<DcId> rotation_site(const ClassState& s, const std::set<DcId>& exclude);
  void replace(const std::string& cls, const DcId& dead, int attempt, std::set<DcId> tried);
  void add_replica(const std::string& cls, std::string cause, int attempt, std::set<DcId> tried);
  void grow(const std::string& cls, const std::string& fn, int attempt);
  void retry_later(int attempt, std::function<void()> again);
  void record(Correction c);
  void publish(ClassState& s);

  sim::Network& net_;
  DcId at_;
  runtime::Directory& dir_;
  std::vector<model::DatacenterProfile> profiles_;
  ControlConfig cfg_;
  Rotation rotation_;
  std::map<DcId, std::uint32_t> load_;
  std::map<DcId, FailureEstimator> estimators_;
  std::map<std::string, ClassState> classes_;
  std::map<std::uint64_t, Pending> pending_;
  std::set<std::pair<std::string, DcId>> orphans_;
  std::vector<Correction> log_;
  std::vector<SlaMetricSample> samples_;
  std::uint64_t seq_ = 0;
  Millis last_tick_ = 0;
  std::uint64_t sub_ = 0;
  sim::EventHandle timer_;
  sim::Lifetime life_;
};

}  // namespace weft::control
