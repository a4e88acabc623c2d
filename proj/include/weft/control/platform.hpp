#pragma once

#include <map>
#include <memory>
#include <vector>

#include "weft/control/control_plane.hpp"
#include "weft/raft/safety.hpp"

namespace weft::control {

// Everything one simulated deployment needs: a datacenter agent and an
// ingress per site, the shared directory, and the control plane.
class Platform {
 public:
  // Registers the profiles' datacenters and latencies on `net`.
  Platform(sim::Network& net, std::vector<model::DatacenterProfile> profiles, runtime::HandlerRegistry handlers,
           DcId control_dc, ControlConfig cfg = {});
  ~Platform();
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  sim::Network& net() { return net_; }
  runtime::Directory& directory() { return dir_; }
  ControlPlane& control() { return *control_; }
  runtime::Ingress& ingress(const DcId& dc);
  runtime::DatacenterAgent& agent(const DcId& dc);
  const runtime::HandlerRegistry& handlers() const { return handlers_; }
  const std::vector<model::DatacenterProfile>& profiles() const { return profiles_; }

  // Deploys and runs the loop until the deployment settles or `max_wait`
  // passes (Timeout).
  StatusOr<PlacementPlan> deploy(const model::FlattenedClass& cls, Millis max_wait = 10000);

  // Observers for every runtime, present and future.
  std::function<void(const runtime::DataEvent&)> on_data;
  std::function<void(const runtime::ExecRecord&)> on_exec;
  raft::SafetyChecker checker;

 private:
  sim::Network& net_;
  std::vector<model::DatacenterProfile> profiles_;
  runtime::HandlerRegistry handlers_;
  runtime::Directory dir_;
  std::map<DcId, std::unique_ptr<runtime::Ingress>> ingress_;
  std::map<DcId, std::unique_ptr<runtime::DatacenterAgent>> agents_;
  std::unique_ptr<ControlPlane> control_;
};

// Adds the profiles' sites to `net` with their pairwise latencies. Throws
// Error(InvalidArgument) on asymmetric or invalid profiles.
void configure_network(sim::Network& net, const std::vector<model::DatacenterProfile>& profiles);

}  // namespace weft::control
