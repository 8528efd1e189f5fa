#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "demodyn/mcmc.hpp"
#include "demodyn/model.hpp"
#include "demodyn/summary.hpp"

namespace demodyn {

struct ChainConfig {
  long n_iter = 2'000'000;  // total iterations, burn-in included
  long burn_in = 500'000;
  long thin = 100;
  int latent_step = 3;            // initial half-width d of the integer random walk
  double tmcmc_multiplier = 1.0;  // TMCMC scales a_i = multiplier * prior sd
  std::uint64_t seed = 1;
  bool adapt = true;              // tune proposal scales during burn-in only
  int adapt_every = 50;
  long trace_every = 100;
  bool keep_states = false;       // retain full chain states alongside the samples
  bool cohort_moves = true;       // add a shift along each cohort's age diagonal every sweep
  int cohort_max_length = 24;     // longest shifted path, in months
  bool birth_moves = true;        // move a birth with the mother and calf through later months
  bool collapse_lambda = true;    // latent moves see the ground counts with lambda integrated out

  void validate() const;
  long kept_draws() const;
};

struct AcceptanceReport {
  double latent = 0.0;
  double cohort = 0.0;
  double birth = 0.0;
  double lambda = 0.0;
  std::array<double, kBlockCount> blocks{};
  double sigma2 = 0.0;
  double k_t = 0.0;
  double aerial_lambda = 0.0;
};

struct SiteShift {
  int t = 0;
  int slot = 0;
  Count delta = 0;
};

/// Sites changed when `delta` births are added at month t0: the newborn slot, the calf
/// along q2, q3, ... for `juvenile_length` months, and the mother along af1, af2, ...
/// for `female_length` months (at most 11) with the same number leaving af12.
std::vector<SiteShift> birth_path(int t0, int juvenile_length, int female_length, Count delta);

/// Metropolis-within-Gibbs over the joint posterior of a PosteriorModel.
class Sampler {
 public:
  Sampler(const PosteriorModel& model, ChainState init, const ChainConfig& cfg, Rng rng);

  /// One cycle: latent counts, intensities, coefficient blocks, sigma^2, aerial terms.
  void iterate();

  /// Single-site sweep over every active slot and month: integer random walk on
  /// {-d..d} \ {0}, accepted on the factors that touch the site.
  void update_latent_counts();
  /// Adds one +-delta to a run of sites that follow a cohort through consecutive
  /// months (q2 -> ... -> h19, af_l -> af_l+1 -> ... -> af12, am -> am), with
  /// start slot and length drawn independently of the state.
  void update_cohorts();
  /// One birth_path proposal per month with lengths drawn independently of the state.
  void update_births();
  /// Exact conditional draws when lambda is collapsed out of the latent moves,
  /// log-scale random walk otherwise.
  void update_lambdas();
  /// TMCMC move on each coefficient block against the rate likelihood of the current path.
  void update_coefficients();
  void update_sigma2();
  void update_aerial();

  void set_adapting(bool on) { adapting_ = on; }
  /// Restricts latent updates to the flagged slots (all slots by default).
  void set_active_slots(const std::array<bool, kSlotCount>& active) { active_ = active; }

  const ChainState& state() const { return state_; }
  Rng& rng() { return rng_; }
  const PosteriorModel& model() const { return model_; }
  AcceptanceReport acceptance() const;

  /// Factor-restricted log-density of latent site (t, slot); exposed for tests.
  double latent_local_log_density(int t, int slot) const;
  /// Factors touching the cohort path of `length` months that starts at (t0, slot).
  double cohort_local_log_density(int t0, int slot, int length) const;
  /// Factors touched by any of the listed sites.
  double sites_local_log_density(std::span<const SiteShift> sites) const;
  /// Scales currently used by each TMCMC block.
  std::vector<double> block_scales(RateBlock b) const;

 private:
  void refresh_rates();
  double ground_term(int t, int c) const;
  void adapt_all();
  double coefficient_target(RateBlock b, std::span<const double> x,
                            const std::vector<RateStatistics>& stats) const;

  const PosteriorModel& model_;
  ChainState state_;
  ChainConfig cfg_;
  Rng rng_;
  bool adapting_ = false;
  long iteration_ = 0;
  int adapt_round_ = 0;

  std::array<bool, kSlotCount> active_{};
  std::vector<VitalRates> rates_;
  std::vector<RateLogs> logs_;

  std::array<AdaptiveScale, kSlotCount> latent_scale_;
  std::array<AdaptiveScale, 3> cohort_scale_;
  AdaptiveScale birth_scale_;
  std::vector<std::array<AdaptiveScale, kClassCount>> lambda_scale_;
  std::array<AdaptiveScale, kBlockCount> block_scale_;
  AdaptiveScale sigma2_scale_;
  std::vector<AdaptiveScale> k_scale_;
  std::vector<AdaptiveScale> aerial_lambda_scale_;

  struct Counter {
    long tried = 0, accepted = 0;
    void add(bool a) { ++tried; accepted += a ? 1 : 0; }
    double rate() const { return tried ? static_cast<double>(accepted) / static_cast<double>(tried) : 0.0; }
  };
  Counter latent_count_, cohort_count_, birth_count_, lambda_count_, sigma2_count_, k_count_, aerial_lambda_count_;
  std::array<Counter, kBlockCount> block_count_;
};

/// Slot a cohort occupies one month after `slot`, or -1 where its path ends.
int next_cohort_slot(int slot);

/// Names of the sampled scalars in SampleTable order.
std::vector<std::string> sample_names(const PosteriorModel& model);

struct ChainResult {
  SampleTable samples;  // post-burn-in, thinned: coefficients, sigma2, K_t, monthly class sizes
  SampleTable traces;   // log posterior, sigma2 and coefficients every trace_every iterations
  std::vector<ChainState> states;  // when cfg.keep_states
  PosteriorSummary summary;
  AcceptanceReport acceptance;
  ChainState final_state;
};

/// Runs the cyclic sampler from `init`. Throws ModelError if the starting point
/// has non-finite joint density.
ChainResult run_chain(const PosteriorModel& model, ChainState init, const ChainConfig& cfg);

/// Appends one draw of every sampled scalar to `out`; months without an aerial
/// survey take K_t from its prior for the ecosystem-wide prediction.
void record_draw(const PosteriorModel& model, const ChainState& s, Rng& rng,
                 std::vector<double>& out);

}  // namespace demodyn
