#include "weft/control/failure.hpp"

#include <algorithm>
#include <cmath>

#include "weft/common/status.hpp"

namespace weft::control {

namespace {

constexpr double kAlpha = 0.2;
constexpr double kBudgetSlack = 1e-9;

double clamp_prob(double p) { return std::clamp(p, kMinFailureProb, kMaxFailureProb); }

}  // namespace

double estimate_failure_prob(const std::vector<bool>& down) {
  FailureEstimator e;
  for (bool d : down) e.observe(d);
  return e.estimate();
}

void FailureEstimator::observe(bool down) {
  value_ = kAlpha * (down ? 1.0 : 0.0) + (1 - kAlpha) * value_;
  ++samples_;
}

double FailureEstimator::estimate() const {
  if (samples_ == 0) throw Error(Errc::NoSamples, "no observations");
  return clamp_prob(value_);
}

double FailureEstimator::current() const { return clamp_prob(value_); }

double availability_of(const std::vector<double>& failure_probs) {
  double all_down = 1.0;
  for (double p : failure_probs) all_down *= p;
  return 1.0 - all_down;
}

bool meets_target(double target, const std::vector<double>& failure_probs) {
  double all_down = 1.0;
  for (double p : failure_probs) all_down *= p;
  return all_down <= (1.0 - target) * (1.0 + kBudgetSlack);
}

ReplicaCount replication_factor(double target, std::vector<SiteProb> candidates) {
  if (!(target > 0.0 && target < 1.0)) throw Error(Errc::InvalidTarget, "availability target must lie in (0,1)");
  std::stable_sort(candidates.begin(), candidates.end(), [](const SiteProb& a, const SiteProb& b) {
    return a.failure_prob != b.failure_prob ? a.failure_prob < b.failure_prob : a.dc < b.dc;
  });
  ReplicaCount out;
  std::vector<double> probs;
  for (const auto& c : candidates) {
    out.sites.push_back(c.dc);
    probs.push_back(c.failure_prob);
    if (meets_target(target, probs)) {
      out.k = out.sites.size();
      return out;
    }
  }
  throw Error(Errc::InsufficientSites, std::to_string(candidates.size()) + " sites cannot reach availability " +
                                           std::to_string(target));
}

}  // namespace weft::control
