#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "demodyn/distributions.hpp"
#include "demodyn/model.hpp"
#include "demodyn/sampler.hpp"
#include "demodyn/series.hpp"
#include "demodyn/state_process.hpp"
#include "demodyn/summary.hpp"

namespace demodyn {

struct SurveyUnit {
  std::string id;
  double area = 0.0;   // km^2
  double count = 0.0;  // animals counted
};

struct SurveyUnits {
  std::vector<SurveyUnit> units;
  double frame_area = 0.0;  // Z, total area of the sampling frame
  double frame_units = 0.0; // N, number of units in the frame

  std::size_t size() const { return units.size(); }
  /// Throws ModelError unless areas are positive, counts non-negative and sum(z) <= Z.
  void validate() const;
};

struct BootstrapPlan {
  std::size_t n_units = 0;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> selections;  // selections[b] = unit indices of replicate b

  /// Times unit i was drawn in replicate b.
  long selection_count(int replicate, std::size_t unit) const;
  /// Times each unit was drawn over all replicates (always B).
  std::vector<long> unit_totals() const;
};

/// Concatenates B copies of the unit indices, applies one uniform permutation and
/// cuts the result into B blocks of n. Throws ModelError if B <= 0 or n == 0.
BootstrapPlan balanced_bootstrap(std::size_t n_units, int replicates, Rng& rng);
BootstrapPlan balanced_bootstrap(const SurveyUnits& units, int replicates, Rng& rng);

/// Units of replicate b with the original frame.
SurveyUnits bootstrap_sample(const SurveyUnits& units, const BootstrapPlan& plan, int replicate);

struct RatioEstimate {
  double ratio = 0.0;     // R = sum y / sum z
  double estimate = 0.0;  // Z R
  double se = 0.0;
};

/// Ratio estimator for units of unequal area with variance
/// N (N - n) / n * (s_y^2 - 2 R s_zy + R^2 s_z^2). Throws ModelError when sum z == 0.
RatioEstimate jolly_method2(const SurveyUnits& sample);

/// Piecewise-linear interpolation of (month, value) anchors onto months 1..T,
/// held constant beyond the first and last anchor. Throws ModelError with fewer
/// than two anchors.
std::vector<double> interpolate_monthly(std::span<const std::pair<int, double>> anchors, int months);

enum class TrackingMode {
  kInitialScale,  // initial means scaled to the first anchor; an unmodified model draw
  kPerMonth,      // every month's slots rescaled to the interpolated total
};

struct SyntheticSeries {
  GroundSeries ground;
  Trajectory trajectory;       // generating latent path
  std::vector<double> target;  // interpolated totals, months 1..T
  std::vector<CovariateRecord> covariates;
};

/// Hypothetical ground survey series that follows bootstrap total estimates.
SyntheticSeries generate_synthetic_series(std::span<const std::pair<int, double>> anchors,
                                          std::span<const CovariateRecord> covariates,
                                          const RateCoefficients& coefs, const HyperParams& hyper,
                                          const std::array<double, kClassCount>& proportions,
                                          double sigma2, Rng& rng,
                                          TrackingMode mode = TrackingMode::kInitialScale);

struct SimulatedObservations {
  std::vector<std::optional<GroundCounts>> ground;
  std::vector<AerialObservation> aerial;
  std::vector<double> k_t;
};

/// Forward draw of both observation layers along a latent path. Aerial surveys
/// happen at `aerial_months`; ground surveys every month unless listed in `missing`.
SimulatedObservations simulate_observations(const Trajectory& trajectory, double sigma2,
                                            const HyperParams& hyper,
                                            std::span<const int> aerial_months, Rng& rng,
                                            std::span<const int> missing = {});

struct ImportanceWeights {
  std::vector<double> weights;  // normalised
  double ess = 0.0;             // 1 / sum w^2
  bool degenerate = false;      // all weights zero or non-finite
};

/// Normalised weights from log w_j = log_new_j - log_ref_j.
ImportanceWeights importance_weights(std::span<const double> log_new, std::span<const double> log_ref);

/// Multinomial resampling of n indices by weight.
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t n, Rng& rng);

struct IrmcmcConfig {
  std::size_t draws = 0;            // pooled output size; 0 = number of reference draws
  long refine_iters = 20;           // short refinement from each resampled seed
  double min_ess_fraction = 0.01;   // below this the caller should run a full chain
  std::uint64_t seed = 1;
};

template <class State>
struct IrmcmcResult {
  std::vector<State> draws;
  ImportanceWeights weights;
  bool fallback = false;  // weights unusable; draws empty
  std::string reason;
};

/// Importance-resampling MCMC: reweights reference posterior draws toward a new
/// target, resamples, then runs `refine(state, iters, rng)` from every seed.
/// `log_ref` and `log_new` map a State to its log-density under each posterior.
template <class State, class LogRef, class LogNew, class Refine>
IrmcmcResult<State> irmcmc_refit(const std::vector<State>& reference, LogRef&& log_ref,
                                 LogNew&& log_new, Refine&& refine, const IrmcmcConfig& cfg) {
  IrmcmcResult<State> out;
  if (reference.empty()) {
    out.fallback = true;
    out.reason = "no reference draws";
    return out;
  }
  std::vector<double> lr(reference.size()), ln(reference.size());
  for (std::size_t j = 0; j < reference.size(); ++j) {
    lr[j] = log_ref(reference[j]);
    ln[j] = log_new(reference[j]);
  }
  out.weights = importance_weights(ln, lr);
  const double n = static_cast<double>(reference.size());
  if (out.weights.degenerate) {
    out.fallback = true;
    out.reason = "all importance weights are zero or non-finite";
    return out;
  }
  if (out.weights.ess / n < cfg.min_ess_fraction) {
    out.fallback = true;
    out.reason = "importance ESS/n below threshold";
    return out;
  }
  Rng rng = make_stream(cfg.seed, 0);
  const std::size_t m = cfg.draws ? cfg.draws : reference.size();
  const auto idx = resample_indices(out.weights.weights, m, rng);
  out.draws.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    State s = reference[idx[i]];
    Rng local = make_stream(cfg.seed, i + 1);
    refine(s, cfg.refine_iters, local);
    out.draws.push_back(std::move(s));
  }
  return out;
}

struct PopulationRefit {
  SampleTable samples;
  PosteriorSummary summary;
  ImportanceWeights weights;
  bool used_full_chain = false;
  std::string reason;
};

/// IRMCMC between two population posteriors over the same months, falling back to
/// run_chain on `target` (started from the reference chain's last state) when the
/// weights are unusable.
PopulationRefit irmcmc_refit_population(const std::vector<ChainState>& reference,
                                        const PosteriorModel& reference_model,
                                        const PosteriorModel& target, const IrmcmcConfig& cfg,
                                        const ChainConfig& fallback_chain);

/// Percentage of months whose estimate lies inside [lower, upper].
double coverage_report(std::span<const double> estimates, std::span<const double> lower,
                       std::span<const double> upper);
/// Same against the 95% bands of `<prefix>[t]`, t = 1..T, in a posterior summary.
double coverage_report(std::span<const double> estimates, const PosteriorSummary& summary,
                       const std::string& prefix = "total");

/// Runs fn(0..n-1) on up to `threads` workers. Each index owns its output slot, so
/// results are independent of scheduling.
void parallel_for_index(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace demodyn
