#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "demodyn/observation.hpp"
#include "demodyn/state_process.hpp"
#include "demodyn/types.hpp"

namespace demodyn {

/// Independent normal prior on one coefficient block.
struct BlockPrior {
  std::vector<double> mean;
  std::vector<double> sd;
};

struct CoefficientPriors {
  std::array<BlockPrior, kBlockCount> blocks;

  const BlockPrior& operator[](RateBlock b) const { return blocks[static_cast<std::size_t>(b)]; }
  BlockPrior& operator[](RateBlock b) { return blocks[static_cast<std::size_t>(b)]; }

  RateCoefficients means() const;
  double block_log_density(RateBlock b, std::span<const double> values) const;
  double log_density(const RateCoefficients& coefs) const;
  /// Throws ModelError when a block length or sd is invalid.
  void validate() const;
  /// Same mean vector with every sd set to `sd_fraction * |mean|` (floored at `sd_floor`).
  static CoefficientPriors around(const RateCoefficients& mean, double sd_fraction,
                                  double sd_floor);
  RateCoefficients sample(Rng& rng) const;
};

using GroundCounts = std::array<Count, kClassCount>;

/// Everything the posterior conditions on, aligned to months t = 1..T.
struct FitData {
  std::vector<CovariateRecord> covariates;         // covariates[t - 1]
  std::vector<std::optional<GroundCounts>> ground;  // ground[t - 1]; empty = not surveyed
  std::vector<AerialObservation> aerial;           // sorted by t, one per month at most
  InitialStateMeans initial_means;

  int months() const { return static_cast<int>(covariates.size()); }
  void validate() const;
};

/// One point of the joint sampling space.
struct ChainState {
  Trajectory trajectory;
  std::vector<std::array<double, kClassCount>> lambdas;  // lambdas[t - 1]
  std::vector<double> aerial_lambda;                    // per aerial observation
  std::vector<double> k_t;                              // per aerial observation
  RateCoefficients coefs;
  double sigma2 = 1.0;
};

/// Per-month counts that make the coefficient likelihood a sum of
/// k log p + (n - k) log(1 - p) terms.
struct RateStatistics {
  Count births = 0, breeders = 0;
  Count quarter_survivors = 0, quarter_pool = 0;
  Count half_survivors = 0, half_pool = 0;
  Count female_survivors = 0, female_pool = 0;
  Count male_survivors = 0, male_pool = 0;
  Count recruits_female = 0, recruits_male = 0;
};

std::vector<RateStatistics> rate_statistics(const Trajectory& trajectory);
/// Coefficient-dependent part of the transition log-likelihood for one month.
double rate_loglik(const VitalRates& rates, const RateStatistics& stats);
/// The terms of rate_loglik that depend on coefficient block `b`.
double rate_loglik(RateBlock b, const VitalRates& rates, const RateStatistics& stats);

class PosteriorModel {
 public:
  PosteriorModel(FitData data, CoefficientPriors priors, HyperParams hyper);

  const FitData& data() const { return data_; }
  const CoefficientPriors& priors() const { return priors_; }
  const HyperParams& hyper() const { return hyper_; }
  int months() const { return data_.months(); }

  std::vector<VitalRates> rates(const RateCoefficients& coefs) const;
  /// Index into data().aerial for month t, or -1.
  int aerial_index(int t) const { return aerial_at_[static_cast<std::size_t>(t)]; }

  struct Breakdown {
    double initial = 0, transition = 0, ground = 0, aerial = 0;
    double coef_prior = 0, sigma2_prior = 0, k_prior = 0;
    double total() const;
  };
  Breakdown breakdown(const ChainState& s) const;
  /// Sum of every factor of the joint posterior; -inf off support.
  double joint_log_density(const ChainState& s) const;
  /// Joint density with every ground intensity integrated out; ignores s.lambdas.
  double marginal_log_density(const ChainState& s) const;

  // Individual factors, used by the samplers and by the additivity tests.
  double transition_factor(const ChainState& s, int t, int term, const RateLogs& logs) const;
  double ground_factor(const ChainState& s, int t, int size_class) const;
  /// ground_factor less the latent-free Poisson term log p(obs | lambda).
  double ground_latent_factor(const ChainState& s, int t, int size_class) const;
  /// log p(obs | X) for the class with its intensity integrated out.
  double ground_marginal_factor(const ChainState& s, int t, int size_class) const;
  double aerial_factor(const ChainState& s, int t) const;
  double sigma2_prior(double sigma2) const;
  double k_prior(double k) const;

  /// Structurally valid starting point: expected-value projection of the
  /// initial means under `coefs`, intensities at the data.
  ChainState initial_state(const RateCoefficients& coefs) const;
  /// Chain state on a given path: intensities halfway between data and latent
  /// totals, K_t at its prior mean unless supplied.
  ChainState state_with(Trajectory trajectory, const RateCoefficients& coefs, double sigma2,
                        std::span<const double> k_t = {}) const;
  /// Resizes lambda / K containers of `s` to this model's data.
  void conform(ChainState& s) const;

 private:
  FitData data_;
  CoefficientPriors priors_;
  HyperParams hyper_;
  std::vector<int> aerial_at_;
};

}  // namespace demodyn
