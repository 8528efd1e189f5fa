#pragma once

#include <vector>

#include "demodyn/covariates.hpp"
#include "demodyn/model.hpp"
#include "demodyn/reference.hpp"
#include "demodyn/state_process.hpp"
#include "demodyn/validation.hpp"

namespace fixtures {

using namespace demodyn;

inline std::vector<CovariateRecord> demo_covariates(int months, std::uint64_t seed = 17) {
  Rng rng = make_stream(seed, 99);
  const auto weather = synthetic_weather({1988, 8}, months + kCovariateHistory, rng);
  return derive_covariates(weather);
}

inline HyperParams informative_hyper() {
  HyperParams h;
  h.sigma2_shape = 400.0;  // sigma^2 near 100 so ground counts inform the latent totals
  h.sigma2_rate = 4.0;
  return h;
}

struct Problem {
  Simulation sim;
  SimulatedObservations obs;
  FitData data;
  RateCoefficients truth;
  double sigma2 = 0.0;
};

inline Problem simulate_problem(int months, double total, std::uint64_t seed, const HyperParams& h,
                                const RateCoefficients& truth, int aerial_every = 6) {
  Problem p;
  p.truth = truth;
  p.sigma2 = h.sigma2_shape / h.sigma2_rate;
  const InitialStateMeans means =
      initial_means_from_proportions(reference_class_proportions(), total, h.init_var);
  Rng rng = make_stream(seed, 0);
  p.sim = simulate_trajectory(demo_covariates(months, seed), truth, h, means, rng);
  std::vector<int> aerial;
  for (int t = aerial_every; t <= months; t += aerial_every) aerial.push_back(t);
  p.obs = simulate_observations(p.sim.trajectory, p.sigma2, h, aerial, rng);
  p.data.covariates = p.sim.covariates;
  p.data.ground = p.obs.ground;
  p.data.aerial = p.obs.aerial;
  p.data.initial_means = means;
  return p;
}

inline ChainState truth_state(const PosteriorModel& model, const Problem& p) {
  return model.state_with(p.sim.trajectory, p.truth, p.sigma2, p.obs.k_t);
}

}  // namespace fixtures
