#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "demodyn/distributions.hpp"

namespace demodyn {

struct StepResult {
  bool accepted = false;
  double log_target = 0.0;  // target at the (possibly unchanged) current point
};

inline bool metropolis_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng)) < log_ratio;
}

/// Half-normal innovation |N(0, 1)| used by the additive transformation move.
struct HalfNormalInnovation {
  double operator()(Rng& rng) const {
    return std::abs(std::normal_distribution<double>(0.0, 1.0)(rng));
  }
};

/// Additive TMCMC: one innovation eps, independent random signs b_i, and
/// x_i' = x_i + b_i a_i eps for every coordinate, accepted all-or-nothing.
/// The move is symmetric with unit Jacobian, so the acceptance ratio is the
/// target ratio alone. `target` maps a span to a log-density.
template <class Target, class Innovation = HalfNormalInnovation>
StepResult tmcmc_update_block(std::span<double> x, double current_log_target, Target&& target,
                              std::span<const double> scales, Rng& rng,
                              Innovation innovation = {}) {
  thread_local std::vector<double> proposal;
  proposal.assign(x.begin(), x.end());
  const double eps = innovation(rng);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < proposal.size(); ++i)
    proposal[i] += (coin(rng) ? 1.0 : -1.0) * scales[i] * eps;
  const double proposed = target(std::span<const double>(proposal));
  if (metropolis_accept(proposed - current_log_target, rng)) {
    std::copy(proposal.begin(), proposal.end(), x.begin());
    return {true, proposed};
  }
  return {false, current_log_target};
}

/// Plain random-walk Metropolis on one coordinate, used as the reference sampler.
template <class Target>
StepResult rw_metropolis_coordinate(std::span<double> x, std::size_t i, double current_log_target,
                                    Target&& target, double scale, Rng& rng) {
  const double old = x[i];
  x[i] = old + scale * std::normal_distribution<double>(0.0, 1.0)(rng);
  const double proposed = target(std::span<const double>(x.data(), x.size()));
  if (metropolis_accept(proposed - current_log_target, rng)) return {true, proposed};
  x[i] = old;
  return {false, current_log_target};
}

/// Robbins-Monro log-scale adaptation toward a target acceptance rate. Only used
/// while adapting (burn-in); the scale is frozen afterwards.
class AdaptiveScale {
 public:
  explicit AdaptiveScale(double scale = 1.0, double target_rate = 0.3)
      : log_scale_(std::log(scale)), target_(target_rate) {}

  double value() const { return std::exp(log_scale_); }
  void record(bool accepted) {
    ++tried_;
    if (accepted) ++accepted_;
  }
  /// Applies one adaptation step from the acceptance seen since the last call.
  void adapt(int round) {
    if (tried_ == 0) return;
    const double rate = static_cast<double>(accepted_) / static_cast<double>(tried_);
    const double gain = std::min(0.5, 2.0 / std::sqrt(static_cast<double>(round) + 1.0));
    log_scale_ = std::clamp(log_scale_ + gain * (rate - target_), -20.0, 20.0);
    tried_ = accepted_ = 0;
  }

 private:
  double log_scale_;
  double target_;
  long tried_ = 0;
  long accepted_ = 0;
};

}  // namespace demodyn
