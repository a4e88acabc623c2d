#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "weft/model/class_def.hpp"

namespace weft::control {

using model::DcId;

constexpr double kMinFailureProb = 1e-6;
constexpr double kMaxFailureProb = 1 - 1e-6;

// EWMA (alpha 0.2) of down observations, starting from 0. `down[i]` is true
// when the site was observed unavailable. Throws Error(NoSamples) when empty.
double estimate_failure_prob(const std::vector<bool>& down);

// Running form of the same estimate with a chosen starting value.
class FailureEstimator {
 public:
  explicit FailureEstimator(double initial = 0.0) : value_(initial) {}
  void observe(bool down);
  std::size_t samples() const { return samples_; }
  // Throws Error(NoSamples) before the first observation.
  double estimate() const;
  // The clamped running value, including the starting value.
  double current() const;

 private:
  double value_;
  std::size_t samples_ = 0;
};

struct SiteProb {
  DcId dc;
  double failure_prob = 0.01;
};

struct ReplicaCount {
  std::size_t k = 0;
  std::vector<DcId> sites;
};

// Availability of a replica set under independent site failures.
double availability_of(const std::vector<double>& failure_probs);
// True when 1 - prod(p) >= target. Products are compared with a relative
// slack of 1e-9 on the unavailability budget so 0.01^2 meets 0.9999.
bool meets_target(double target, const std::vector<double>& failure_probs);

// Smallest k whose k most reliable candidates meet `target`. Candidates are
// ordered by failure probability, ties by id. Throws Error(InvalidTarget)
// unless 0 < target < 1, Error(InsufficientSites) when no k suffices.
ReplicaCount replication_factor(double target, std::vector<SiteProb> candidates);

}  // namespace weft::control
