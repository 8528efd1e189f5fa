#pragma once

#include <array>
#include <span>
#include <vector>

#include "demodyn/distributions.hpp"
#include "demodyn/series.hpp"
#include "demodyn/types.hpp"

namespace demodyn {

/// Normal-prior means for the 32 slots at t = 0 (recruit slots start empty).
struct InitialStateMeans {
  std::array<double, kInitialSlotCount> mean{};
  double var = 20000.0;

  double class_mean(int size_class) const;
};

/// Latent path: `initial` is t = 0, `states[t - 1]` is month t = 1..T.
struct Trajectory {
  PopulationState initial;
  std::vector<PopulationState> states;

  int months() const { return static_cast<int>(states.size()); }
  /// State at month t in 0..T.
  const PopulationState& at(int t) const { return t == 0 ? initial : states[t - 1]; }
  PopulationState& at(int t) { return t == 0 ? initial : states[t - 1]; }
  bool operator==(const Trajectory&) const = default;
};

// Transition factors between consecutive months. Terms 0..31 share the index of
// the slot they generate; term 32 is the joint (NAF, NAM) recruitment draw.
inline constexpr int kRecruitTerm = kMaleSlot + 1;
inline constexpr int kTermCount = kRecruitTerm + 1;

constexpr int term_of_slot(int slot) { return slot >= kNewFemaleSlot ? kRecruitTerm : slot; }

/// Cached log-probabilities for one month's vital rates.
struct RateLogs {
  double birth_p, birth_q;
  double quarter_p, quarter_q;
  double half_p, half_q;
  double female_p, female_q;
  double male_p, male_q;
  double recruit_female, recruit_male, recruit_death;  // log(R_c s), log((1-R_c) s), log(1-s)

  static RateLogs from(const VitalRates& r);
};

/// Size of the pool each binomial term draws from (kRecruitTerm: H(t-1, 19)).
/// The newborn term draws from the same month's breeding pool.
Count term_pool(int term, const PopulationState& prev, const PopulationState& next);
double transition_term_log_pmf(int term, const PopulationState& prev,
                               const PopulationState& next, const RateLogs& logs);

/// One monthly step. Requires prev.newborn() <= prev.breeding_pool().
PopulationState sample_transition(const PopulationState& prev, const VitalRates& rates, Rng& rng);
/// Sum of all transition terms; -inf when `next` is outside the support.
double transition_log_pmf(const PopulationState& prev, const PopulationState& next,
                          const VitalRates& rates);

/// June class proportions averaged over years, times `aerial_total_t0`, spread
/// uniformly across the age slots of each class.
InitialStateMeans estimate_initial_means(const GroundSeries& ground, double aerial_total_t0,
                                         double init_var = 20000.0);
/// Class proportions (new, quarter, half, adult_f, adult_m) scaled to `total`.
InitialStateMeans initial_means_from_proportions(const std::array<double, kClassCount>& prop,
                                                 double total, double init_var = 20000.0);

/// Rounded, zero-truncated normal draw of every t = 0 slot. New_0 is capped at
/// the breeding pool AF_0(11) + AF_0(12).
PopulationState draw_time_zero(const InitialStateMeans& means, Rng& rng);
/// Log-mass of a t = 0 state under draw_time_zero.
double initial_log_density(const PopulationState& time_zero, const InitialStateMeans& means);
double initial_slot_log_density(int slot, const PopulationState& time_zero,
                                const InitialStateMeans& means);

struct InitialDraw {
  PopulationState time_zero;
  PopulationState first_month;
};
InitialDraw sample_initial_state(const InitialStateMeans& means, const VitalRates& first_rates,
                                 Rng& rng);

/// Fills npop_lag7 and apop_lag1 of covs[t-1] from totals[t - 7] and totals[t - 1];
/// `totals[0]` is t = 0 and pads lags reaching before the series.
void fill_density_covariates(std::span<CovariateRecord> covs, std::span<const double> totals);

struct SimulationOptions {
  /// Density covariates follow the simulated totals instead of the supplied values.
  bool density_feedback = true;
};

struct Simulation {
  Trajectory trajectory;
  std::vector<CovariateRecord> covariates;  // as used, density fields filled
  std::vector<VitalRates> rates;            // rates[t - 1] drives month t
};

/// Draws t = 0, then one transition per covariate month; T = 1 is the initial-state
/// draw of sample_initial_state alone.
Simulation simulate_trajectory(std::span<const CovariateRecord> covs, const RateCoefficients& coefs,
                               const HyperParams& hyper, const InitialStateMeans& means, Rng& rng,
                               const SimulationOptions& options = {});

}  // namespace demodyn
