#include "weft/control/placement.hpp"

#include <algorithm>

#include "weft/common/status.hpp"
#include "weft/runtime/workers.hpp"

namespace weft::control {

namespace {

bool contains(const std::vector<DcId>& v, const DcId& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

double availability_target(const model::FlattenedClass& cls) {
  double t = cls.class_sla.availability;
  for (const auto& a : cls.attributes) t = std::max(t, a.sla.availability);
  for (const auto& f : cls.functions) t = std::max(t, f.sla.availability);
  return t;
}

std::vector<DcId> preferred_sites(const model::FlattenedClass& cls) {
  std::vector<DcId> out;
  auto add = [&](const std::vector<DcId>& l) {
    for (const auto& dc : l)
      if (!contains(out, dc)) out.push_back(dc);
  };
  add(cls.class_sla.locality);
  for (const auto& a : cls.attributes) add(a.sla.locality);
  for (const auto& f : cls.functions) add(f.sla.locality);
  return out;
}

std::map<DcId, std::uint32_t> split_slots(std::uint32_t slots, const std::vector<DcId>& replicas,
                                          const std::map<DcId, std::uint32_t>& capacity) {
  std::map<DcId, std::uint32_t> out;
  std::uint64_t total = 0;
  for (const auto& dc : replicas) total += capacity.at(dc);
  if (slots == 0 || total == 0) return out;
  for (const auto& dc : replicas) {
    const std::uint64_t share = (std::uint64_t{slots} * capacity.at(dc) + total - 1) / total;
    if (share > 0) out[dc] = static_cast<std::uint32_t>(share);
  }
  return out;
}

PlacementPlan place_class(const model::FlattenedClass& cls, const std::vector<model::DatacenterProfile>& profiles,
                          const std::map<DcId, std::uint32_t>& load, Rotation& rotation) {
  if (profiles.empty()) throw Error(Errc::InsufficientSites, "no datacenters");
  PlacementPlan plan;
  plan.cls = cls.name;
  plan.target = availability_target(cls);

  std::map<DcId, std::uint32_t> capacity;
  std::map<DcId, double> prob;
  std::vector<SiteProb> candidates;
  for (const auto& p : profiles) {
    capacity[p.id] = p.capacity;
    prob[p.id] = p.failure_prob;
    candidates.push_back({p.id, p.failure_prob});
  }
  plan.required_k = replication_factor(plan.target, candidates).k;
  auto free_at = [&](const DcId& dc) {
    auto it = load.find(dc);
    const std::uint32_t used = it == load.end() ? 0 : it->second;
    return used >= capacity.at(dc) ? 0u : capacity.at(dc) - used;
  };

  // Slots pinned by functions that name preferred sites.
  struct Pinned {
    std::string fn;
    std::uint32_t slots;
    std::vector<DcId> locality;
  };
  std::vector<Pinned> pinned;
  std::vector<std::pair<std::string, std::uint32_t>> spread;
  for (const auto& f : cls.functions) {
    if (!f.sla.throughput) continue;
    const auto n = runtime::reserved_slots(*f.sla.throughput, f.service_ms);
    if (n == 0) continue;
    const auto& loc = f.sla.locality.empty() ? cls.class_sla.locality : f.sla.locality;
    if (loc.empty()) {
      spread.emplace_back(f.name, n);
    } else {
      pinned.push_back({f.name, n, loc});
    }
  }

  std::vector<DcId> rejected;
  auto pin_site = [&](const Pinned& p) -> const DcId* {
    for (const auto& dc : p.locality)
      if (capacity.count(dc) && !contains(rejected, dc)) return &dc;
    return nullptr;
  };
  for (const auto& dc : preferred_sites(cls)) {
    if (!capacity.count(dc)) continue;
    std::uint32_t demand = 0;
    for (const auto& p : pinned)
      if (const DcId* at = pin_site(p); at && *at == dc) demand += p.slots;
    if (demand > free_at(dc)) {
      rejected.push_back(dc);
      continue;
    }
    plan.replicas.push_back(dc);
  }
  for (const auto& p : pinned)
    if (!pin_site(p))
      throw Error(Errc::InsufficientCapacity, "no preferred site of " + cls.name + "." + p.fn + " has room for " +
                                                  std::to_string(p.slots) + " reserved slots");

  auto probs_of = [&](const std::vector<DcId>& set) {
    std::vector<double> out;
    for (const auto& dc : set) out.push_back(prob.at(dc));
    return out;
  };
  const std::size_t m = profiles.size();
  std::size_t i = rotation.cursor % m;
  for (std::size_t step = 0; step < m; ++step, i = (i + 1) % m) {
    if (plan.replicas.size() >= plan.required_k && meets_target(plan.target, probs_of(plan.replicas))) break;
    const auto& dc = profiles[i].id;
    if (contains(plan.replicas, dc) || contains(rejected, dc)) continue;
    plan.replicas.push_back(dc);
    rotation.cursor = (i + 1) % m;
  }
  if (plan.replicas.size() < plan.required_k || !meets_target(plan.target, probs_of(plan.replicas)))
    throw Error(Errc::InsufficientSites, cls.name + " cannot reach availability " + std::to_string(plan.target));
  plan.k = plan.replicas.size();
  for (const auto& dc : plan.replicas) plan.failure_probs[dc] = prob.at(dc);

  for (const auto& p : pinned) {
    const DcId* at = nullptr;
    for (const auto& dc : p.locality)
      if (contains(plan.replicas, dc)) {
        at = &dc;
        break;
      }
    if (!at) throw Error(Errc::InsufficientCapacity, "no preferred site of " + cls.name + "." + p.fn + " has room");
    plan.reserved[*at][p.fn] += p.slots;
  }
  for (const auto& [fn, n] : spread)
    for (const auto& [dc, share] : split_slots(n, plan.replicas, capacity)) plan.reserved[dc][fn] += share;
  for (const auto& [dc, fns] : plan.reserved) {
    std::uint32_t sum = 0;
    for (const auto& [_, n] : fns) sum += n;
    if (sum > free_at(dc))
      throw Error(Errc::InsufficientCapacity, cls.name + " needs " + std::to_string(sum) + " reserved slots at " + dc +
                                                  ", " + std::to_string(free_at(dc)) + " free");
  }
  return plan;
}

}  // namespace weft::control
