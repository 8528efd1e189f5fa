#include "demodyn/state_process.hpp"

#include <algorithm>
#include <cmath>

#include "demodyn/vital_rates.hpp"

namespace demodyn {

namespace {

constexpr std::array<int, kClassCount> kClassSlotCount{1, kQuarterSlots, kHalfSlots, kCycleSlots,
                                                       1};
constexpr std::array<int, kClassCount> kClassFirstSlot{kNewbornSlot, kFirstQuarterSlot,
                                                       kFirstHalfSlot, kFirstFemaleSlot, kMaleSlot};

}  // namespace

double InitialStateMeans::class_mean(int size_class) const {
  double sum = 0.0;
  const int first = kClassFirstSlot[static_cast<std::size_t>(size_class)];
  for (int i = 0; i < kClassSlotCount[static_cast<std::size_t>(size_class)]; ++i)
    sum += mean[static_cast<std::size_t>(first + i)];
  return sum;
}

RateLogs RateLogs::from(const VitalRates& r) {
  RateLogs l{};
  l.birth_p = std::log(r.birth);
  l.birth_q = std::log1p(-r.birth);
  l.quarter_p = std::log(r.quarter);
  l.quarter_q = std::log1p(-r.quarter);
  l.half_p = std::log(r.half);
  l.half_q = std::log1p(-r.half);
  l.female_p = std::log(r.adult_female);
  l.female_q = std::log1p(-r.adult_female);
  l.male_p = std::log(r.adult_male);
  l.male_q = std::log1p(-r.adult_male);
  l.recruit_female = std::log(r.female_share) + l.female_p;
  l.recruit_male = std::log1p(-r.female_share) + l.female_p;
  l.recruit_death = l.female_q;
  return l;
}

Count term_pool(int term, const PopulationState& prev, const PopulationState& next) {
  if (term == kNewbornSlot) return next.breeding_pool();
  if (term == kRecruitTerm) return prev.half(19);
  if (term == quarter_slot(2)) return prev.newborn();
  if (term < kFirstHalfSlot) return prev.n[static_cast<std::size_t>(term - 1)];
  if (term == half_slot(7)) return prev.quarter(6);
  if (term < kFirstFemaleSlot) return prev.n[static_cast<std::size_t>(term - 1)];
  if (term == female_slot(1)) return prev.newborn();
  if (term == female_slot(4)) return prev.female(3) + prev.new_female();
  if (term == female_slot(12)) return prev.female(11) + prev.female(12) - prev.newborn();
  if (term < kMaleSlot) return prev.n[static_cast<std::size_t>(term - 1)];
  return prev.male() + prev.new_male();
}

double transition_term_log_pmf(int term, const PopulationState& prev,
                               const PopulationState& next, const RateLogs& logs) {
  const Count pool = term_pool(term, prev, next);
  if (term == kRecruitTerm) {
    const Count a = next.new_female();
    const Count b = next.new_male();
    const Count c = pool - a - b;
    if (a < 0 || b < 0 || c < 0) return kNegInf;
    double out = log_factorial(pool) - log_factorial(a) - log_factorial(b) - log_factorial(c);
    if (a > 0) out += static_cast<double>(a) * logs.recruit_female;
    if (b > 0) out += static_cast<double>(b) * logs.recruit_male;
    if (c > 0) out += static_cast<double>(c) * logs.recruit_death;
    return out;
  }
  const Count k = next.n[static_cast<std::size_t>(term)];
  switch (slot_class(term)) {
    case 0: return binomial_log_pmf(k, pool, logs.birth_p, logs.birth_q);
    case 1: return binomial_log_pmf(k, pool, logs.quarter_p, logs.quarter_q);
    case 2: return binomial_log_pmf(k, pool, logs.half_p, logs.half_q);
    case 3: return binomial_log_pmf(k, pool, logs.female_p, logs.female_q);
    default: return binomial_log_pmf(k, pool, logs.male_p, logs.male_q);
  }
}

PopulationState sample_transition(const PopulationState& prev, const VitalRates& r, Rng& rng) {
  for (Count c : prev.n) {
    if (c < 0) throw ModelError("sample_transition: negative count in previous state");
  }
  if (prev.newborn() > prev.breeding_pool()) {
    throw ModelError("sample_transition: newborns exceed the breeding pool of the previous month");
  }
  PopulationState next;
  next.quarter(2) = sample_binomial(rng, prev.newborn(), r.quarter);
  for (int k = 3; k <= 6; ++k) next.quarter(k) = sample_binomial(rng, prev.quarter(k - 1), r.quarter);
  next.half(7) = sample_binomial(rng, prev.quarter(6), r.half);
  for (int k = 8; k <= 19; ++k) next.half(k) = sample_binomial(rng, prev.half(k - 1), r.half);

  // (NAF, NAM, deaths) ~ Multinomial(H(t-1, 19); R_c s, (1 - R_c) s, 1 - s), drawn sequentially.
  const Count graduating = prev.half(19);
  const double p_female = r.female_share * r.adult_female;
  const double p_male = (1.0 - r.female_share) * r.adult_female;
  next.new_female() = sample_binomial(rng, graduating, p_female);
  const double rest = 1.0 - p_female;
  next.new_male() = rest > 0.0 ? sample_binomial(rng, graduating - next.new_female(),
                                                 std::min(1.0, p_male / rest))
                               : 0;

  next.male() = sample_binomial(rng, prev.male() + prev.new_male(), r.adult_male);
  next.female(1) = sample_binomial(rng, prev.newborn(), r.adult_female);
  for (int l = 2; l <= 11; ++l) {
    const Count pool = l == 4 ? prev.female(3) + prev.new_female() : prev.female(l - 1);
    next.female(l) = sample_binomial(rng, pool, r.adult_female);
  }
  next.female(12) = sample_binomial(rng, prev.breeding_pool() - prev.newborn(), r.adult_female);
  next.newborn() = sample_binomial(rng, next.breeding_pool(), r.birth);
  return next;
}

double transition_log_pmf(const PopulationState& prev, const PopulationState& next,
                          const VitalRates& rates) {
  const RateLogs logs = RateLogs::from(rates);
  double out = 0.0;
  for (int term = 0; term < kTermCount; ++term) {
    out += transition_term_log_pmf(term, prev, next, logs);
    if (out == kNegInf) return kNegInf;
  }
  return out;
}

InitialStateMeans initial_means_from_proportions(const std::array<double, kClassCount>& prop,
                                                 double total, double init_var) {
  InitialStateMeans means;
  means.var = init_var;
  for (int c = 0; c < kClassCount; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const double class_total = prop[ci] * total;
    for (int i = 0; i < kClassSlotCount[ci]; ++i)
      means.mean[static_cast<std::size_t>(kClassFirstSlot[ci] + i)] =
          class_total / kClassSlotCount[ci];
  }
  return means;
}

InitialStateMeans estimate_initial_means(const GroundSeries& ground, double aerial_total_t0,
                                         double init_var) {
  std::array<double, kClassCount> prop{};
  int years = 0;
  for (const auto& rec : ground.records) {
    if (rec.date.month != 6 || !rec.observed()) continue;
    const Count total = rec.total();
    if (total <= 0) continue;
    for (int c = 0; c < kClassCount; ++c)
      prop[static_cast<std::size_t>(c)] +=
          static_cast<double>((*rec.counts)[static_cast<std::size_t>(c)]) / static_cast<double>(total);
    ++years;
  }
  if (years == 0) throw ModelError("estimate_initial_means: no June ground record with animals");
  for (double& p : prop) p /= years;
  return initial_means_from_proportions(prop, aerial_total_t0, init_var);
}

PopulationState draw_time_zero(const InitialStateMeans& means, Rng& rng) {
  PopulationState s;
  for (int slot = 0; slot < kInitialSlotCount; ++slot)
    s.n[static_cast<std::size_t>(slot)] =
        sample_rounded_normal(rng, means.mean[static_cast<std::size_t>(slot)], means.var);
  s.newborn() = std::min(s.newborn(), s.breeding_pool());
  return s;
}

double initial_slot_log_density(int slot, const PopulationState& time_zero,
                                const InitialStateMeans& means) {
  if (slot >= kInitialSlotCount) return time_zero.n[static_cast<std::size_t>(slot)] == 0 ? 0.0 : kNegInf;
  const Count cap = slot == kNewbornSlot ? time_zero.breeding_pool() : Count{-1};
  return rounded_normal_log_mass(time_zero.n[static_cast<std::size_t>(slot)],
                                 means.mean[static_cast<std::size_t>(slot)], means.var, cap);
}

double initial_log_density(const PopulationState& time_zero, const InitialStateMeans& means) {
  double out = 0.0;
  for (int slot = 0; slot < kSlotCount; ++slot) {
    out += initial_slot_log_density(slot, time_zero, means);
    if (out == kNegInf) return kNegInf;
  }
  return out;
}

InitialDraw sample_initial_state(const InitialStateMeans& means, const VitalRates& first_rates,
                                 Rng& rng) {
  InitialDraw d;
  d.time_zero = draw_time_zero(means, rng);
  d.first_month = sample_transition(d.time_zero, first_rates, rng);
  return d;
}

void fill_density_covariates(std::span<CovariateRecord> covs, std::span<const double> totals) {
  if (totals.size() < covs.size()) throw ModelError("fill_density_covariates: totals too short");
  for (std::size_t t = 1; t <= covs.size(); ++t) {
    covs[t - 1].npop_lag7 = totals[t >= 7 ? t - 7 : 0];
    covs[t - 1].apop_lag1 = totals[t - 1];
  }
}

Simulation simulate_trajectory(std::span<const CovariateRecord> covs, const RateCoefficients& coefs,
                               const HyperParams& hyper, const InitialStateMeans& means, Rng& rng,
                               const SimulationOptions& options) {
  if (covs.empty()) throw ModelError("simulate_trajectory: need at least one month of covariates");
  Simulation sim;
  sim.covariates.assign(covs.begin(), covs.end());
  const std::size_t months = covs.size();
  sim.trajectory.initial = draw_time_zero(means, rng);
  sim.trajectory.states.reserve(months);
  sim.rates.reserve(months);
  std::vector<double> totals{static_cast<double>(sim.trajectory.initial.total())};
  for (std::size_t t = 1; t <= months; ++t) {
    CovariateRecord& cov = sim.covariates[t - 1];
    if (options.density_feedback) {
      cov.npop_lag7 = totals[t >= 7 ? t - 7 : 0];
      cov.apop_lag1 = totals[t - 1];
    }
    const VitalRates rates = adjusted_rates(cov, coefs, hyper);
    const PopulationState& prev = sim.trajectory.at(static_cast<int>(t) - 1);
    sim.trajectory.states.push_back(sample_transition(prev, rates, rng));
    sim.rates.push_back(rates);
    totals.push_back(static_cast<double>(sim.trajectory.states.back().total()));
  }
  return sim;
}

}  // namespace demodyn
