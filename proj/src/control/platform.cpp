#include "weft/control/platform.hpp"

namespace weft::control {

void configure_network(sim::Network& net, const std::vector<model::DatacenterProfile>& profiles) {
  model::check_symmetric(profiles);
  for (const auto& p : profiles) {
    model::check_profile(p);
    if (!net.has(p.id)) net.add_datacenter(p.id);
  }
  for (const auto& p : profiles)
    for (const auto& [peer, ms] : p.region_latency)
      if (net.has(peer) && peer != p.id) net.set_latency(p.id, peer, ms);
}

Platform::Platform(sim::Network& net, std::vector<model::DatacenterProfile> profiles,
                   runtime::HandlerRegistry handlers, DcId control_dc, ControlConfig cfg)
    : net_(net), profiles_(std::move(profiles)), handlers_(std::move(handlers)) {
  configure_network(net_, profiles_);
  if (!net_.has(control_dc)) throw Error(Errc::UnknownDatacenter, "control site " + control_dc);
  for (const auto& p : profiles_) {
    dir_.set_capacity(p.id, p.capacity);
    ingress_[p.id] = std::make_unique<runtime::Ingress>(net_, p.id, dir_);
  }
  for (const auto& p : profiles_) {
    agents_[p.id] = std::make_unique<runtime::DatacenterAgent>(
        net_, p.id, p.capacity, handlers_, [this](const DcId& at, const std::string&) {
          runtime::RuntimeHooks h;
          h.on_data = [this](const runtime::DataEvent& e) {
            if (on_data) on_data(e);
          };
          h.on_exec = [this](const runtime::ExecRecord& r) {
            if (on_exec) on_exec(r);
          };
          h.route = [this, at](const model::ObjectId& obj, const std::string& fn, Bytes payload,
                               std::function<void(StatusOr<Bytes>)> done) {
            ingress_.at(at)->invoke(obj, fn, std::move(payload), nullptr, [done](const runtime::InvokeOutcome& o) {
              if (o.status.ok()) {
                done(o.result);
              } else {
                done(o.status);
              }
            });
          };
          h.checker = &checker;
          return h;
        });
  }
  control_ = std::make_unique<ControlPlane>(net_, std::move(control_dc), dir_, profiles_, cfg);
}

Platform::~Platform() {
  control_.reset();
  agents_.clear();
  ingress_.clear();
}

runtime::Ingress& Platform::ingress(const DcId& dc) {
  auto it = ingress_.find(dc);
  if (it == ingress_.end()) throw Error(Errc::UnknownDatacenter, dc);
  return *it->second;
}

runtime::DatacenterAgent& Platform::agent(const DcId& dc) {
  auto it = agents_.find(dc);
  if (it == agents_.end()) throw Error(Errc::UnknownDatacenter, dc);
  return *it->second;
}

StatusOr<PlacementPlan> Platform::deploy(const model::FlattenedClass& cls, Millis max_wait) {
  std::optional<StatusOr<PlacementPlan>> out;
  control_->deploy(cls, [&out](StatusOr<PlacementPlan> r) { out = std::move(r); });
  const Millis deadline = net_.now() + max_wait;
  while (!out && net_.now() <= deadline && net_.loop().step()) {
  }
  if (!out) return Status(Errc::Timeout, "deploy of " + cls.name + " did not settle");
  return *out;
}

}  // namespace weft::control
