#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "weft/control/failure.hpp"
#include "weft/model/class_def.hpp"

namespace weft::control {

struct PlacementPlan {
  std::string cls;
  std::vector<DcId> replicas;  // locality sites first, then fillers
  std::size_t k = 0;           // == replicas.size()
  std::map<DcId, std::map<std::string, std::uint32_t>> reserved;  // dc -> function -> slots
  // rationale
  double target = 0;
  std::size_t required_k = 0;  // replication factor over the best sites
  std::map<DcId, double> failure_probs;
};

// Highest availability asked for by the class or any of its members.
double availability_target(const model::FlattenedClass& cls);

// Preferred sites of the class and its members, first mention first.
std::vector<DcId> preferred_sites(const model::FlattenedClass& cls);

// Round-robin cursor shared by successive placements.
struct Rotation {
  std::size_t cursor = 0;
};

// Replica set and per-site reservations for `cls`. `load` is the reserved
// slots already committed per site. Throws Error(InsufficientSites |
// InsufficientCapacity | InvalidTarget).
PlacementPlan place_class(const model::FlattenedClass& cls, const std::vector<model::DatacenterProfile>& profiles,
                          const std::map<DcId, std::uint32_t>& load, Rotation& rotation);

// Splits `slots` over `replicas` in proportion to capacity, rounding each
// share up.
std::map<DcId, std::uint32_t> split_slots(std::uint32_t slots, const std::vector<DcId>& replicas,
                                          const std::map<DcId, std::uint32_t>& capacity);

}  // namespace weft::control
