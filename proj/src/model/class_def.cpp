#include "weft/model/class_def.hpp"

#include <algorithm>

#include "weft/common/status.hpp"

namespace weft::model {

std::string attribute_kind_name(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Scalar: return "scalar";
    case AttributeKind::Counter: return "counter";
    case AttributeKind::Map: return "map";
  }
  return "unknown";
}

std::string trigger_event_name(TriggerEvent event) {
  switch (event) {
    case TriggerEvent::OnComplete: return "on_complete";
    case TriggerEvent::OnFailure: return "on_failure";
    case TriggerEvent::OnCreate: return "on_create";
    case TriggerEvent::OnUpdate: return "on_update";
    case TriggerEvent::OnDelete: return "on_delete";
  }
  return "unknown";
}

bool is_function_event(TriggerEvent event) {
  return event == TriggerEvent::OnComplete || event == TriggerEvent::OnFailure;
}

const ResolvedAttribute* FlattenedClass::attribute(const std::string& n) const {
  auto it = std::find_if(attributes.begin(), attributes.end(), [&](const auto& a) { return a.name == n; });
  return it == attributes.end() ? nullptr : &*it;
}

const ResolvedFunction* FlattenedClass::function(const std::string& n) const {
  auto it = std::find_if(functions.begin(), functions.end(), [&](const auto& f) { return f.name == n; });
  return it == functions.end() ? nullptr : &*it;
}

void check_profile(const DatacenterProfile& p) {
  if (p.id.empty()) throw Error(Errc::InvalidArgument, "datacenter id is empty");
  if (p.capacity < 1) throw Error(Errc::InvalidArgument, "datacenter " + p.id + ": capacity must be >= 1");
  if (!(p.failure_prob > 0.0 && p.failure_prob < 1.0))
    throw Error(Errc::InvalidArgument, "datacenter " + p.id + ": failure_prob must lie in (0,1)");
  for (const auto& [peer, ms] : p.region_latency) {
    if (ms < 0) throw Error(Errc::InvalidArgument, "datacenter " + p.id + ": negative latency to " + peer);
  }
}

void check_symmetric(const std::vector<DatacenterProfile>& profiles) {
  for (const auto& a : profiles) {
    for (const auto& [peer, ms] : a.region_latency) {
      auto it = std::find_if(profiles.begin(), profiles.end(), [&](const auto& p) { return p.id == peer; });
      if (it == profiles.end()) continue;
      auto back = it->region_latency.find(a.id);
      if (back != it->region_latency.end() && back->second != ms)
        throw Error(Errc::InvalidArgument, "asymmetric latency between " + a.id + " and " + peer);
    }
  }
}

}  // namespace weft::model
