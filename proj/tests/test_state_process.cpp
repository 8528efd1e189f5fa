#include <cmath>
#include <vector>

#include "doctest.h"
#include "demodyn/state_process.hpp"
#include "demodyn/vital_rates.hpp"

using namespace demodyn;

namespace {

VitalRates unit_rates() { return {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}; }

PopulationState varied_state() {
  PopulationState s;
  for (int i = 0; i < kSlotCount; ++i) s.n[static_cast<std::size_t>(i)] = 10 + 3 * i;
  s.newborn() = 20;  // <= af11 + af12 = 49 + 52
  return s;
}

}  // namespace

TEST_CASE("empty population is absorbing") {
  Rng rng = make_stream(1);
  const PopulationState zero;
  const auto next = sample_transition(zero, VitalRates{0.4, 0.9, 0.9, 0.95, 0.94, 0.5}, rng);
  CHECK(next == zero);
  CHECK(transition_log_pmf(zero, zero, VitalRates{}) == 0.0);
}

TEST_CASE("unit survival shifts the age pipeline deterministically") {
  Rng rng = make_stream(2);
  const PopulationState prev = varied_state();
  const PopulationState next = sample_transition(prev, unit_rates(), rng);
  CHECK(next.quarter(2) == prev.newborn());
  for (int k = 3; k <= 6; ++k) CHECK(next.quarter(k) == prev.quarter(k - 1));
  CHECK(next.half(7) == prev.quarter(6));
  for (int k = 8; k <= 19; ++k) CHECK(next.half(k) == prev.half(k - 1));
  CHECK(next.new_female() == prev.half(19));
  CHECK(next.new_male() == 0);
  CHECK(next.male() == prev.male() + prev.new_male());
  CHECK(next.female(1) == prev.newborn());
  CHECK(next.female(4) == prev.female(3) + prev.new_female());
  CHECK(next.female(12) == prev.female(11) + prev.female(12) - prev.newborn());
  for (int l : {2, 3, 5, 6, 7, 8, 9, 10, 11}) CHECK(next.female(l) == prev.female(l - 1));
  CHECK(next.newborn() == next.breeding_pool());
  // females conserved: every adult female and recruit is still present
  CHECK(next.female_total() == prev.female_total() + prev.new_female());
  CHECK(transition_log_pmf(prev, next, unit_rates()) == 0.0);
}

TEST_CASE("transition log pmf: single slot and support") {
  PopulationState prev;
  prev.female(10) = 60;
  prev.female(11) = 40;
  VitalRates r{0.3, 0.5, 0.5, 1.0, 1.0, 0.5};
  PopulationState next;
  next.female(11) = 60;
  next.female(12) = 40;
  next.newborn() = 30;
  const double hand = log_choose(100, 30) + 30 * std::log(0.3) + 70 * std::log(0.7);
  CHECK(transition_log_pmf(prev, next, r) == doctest::Approx(hand).epsilon(1e-12));
  next.newborn() = 101;
  CHECK(transition_log_pmf(prev, next, r) == kNegInf);
  next.newborn() = 30;
  next.female(11) = 61;
  CHECK(transition_log_pmf(prev, next, r) == kNegInf);
}

TEST_CASE("breeding pool underflow is rejected") {
  Rng rng = make_stream(3);
  PopulationState bad;
  bad.newborn() = 5;
  bad.female(12) = 4;
  CHECK_THROWS_AS(sample_transition(bad, VitalRates{}, rng), ModelError);
  PopulationState neg;
  neg.male() = -1;
  CHECK_THROWS_AS(sample_transition(neg, VitalRates{}, rng), ModelError);
}

TEST_CASE("newborn moments from the breeding pool") {
  Rng rng = make_stream(4);
  PopulationState prev;
  prev.female(10) = 50;
  prev.female(11) = 50;
  const VitalRates r{0.3, 0.5, 0.5, 1.0, 1.0, 0.5};
  const int n = 100000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_transition(prev, r, rng).newborn());
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(std::abs(mean - 30.0) < 3.0 * std::sqrt(21.0 / n));
  CHECK(var == doctest::Approx(21.0).epsilon(0.03));
}

TEST_CASE("sampled transitions stay in the support") {
  Rng rng = make_stream(5);
  const VitalRates r{0.35, 0.9, 0.93, 0.96, 0.957, 0.55};
  PopulationState s = varied_state();
  for (int i = 0; i < 200; ++i) {
    const auto next = sample_transition(s, r, rng);
    CHECK(std::isfinite(transition_log_pmf(s, next, r)));
    // B leaves out recruits in transit, so the bound is on every slot.
    Count before = 0, after = 0;
    for (int i = 0; i < kSlotCount; ++i) {
      before += s.n[static_cast<std::size_t>(i)];
      after += next.n[static_cast<std::size_t>(i)];
    }
    CHECK(after <= before + next.newborn());
    s = next;
  }
}

TEST_CASE("initial means from June proportions") {
  GroundSeries g;
  g.records.push_back({{1990, 6}, std::array<Count, 5>{0, 0, 0, 100, 0}});
  auto one = estimate_initial_means(g, 5000.0);
  CHECK(one.class_mean(3) == doctest::Approx(5000.0));
  CHECK(one.class_mean(0) == 0.0);
  CHECK(one.mean[female_slot(1)] == doctest::Approx(5000.0 / 12.0));

  GroundSeries two;
  two.records.push_back({{1990, 6}, std::array<Count, 5>{20, 20, 20, 20, 20}});
  two.records.push_back({{1990, 7}, std::array<Count, 5>{90, 0, 0, 10, 0}});
  two.records.push_back({{1991, 6}, std::array<Count, 5>{15, 25, 10, 40, 10}});
  auto m = estimate_initial_means(two, 1000.0);
  CHECK(m.class_mean(3) == doctest::Approx(300.0));
  CHECK(m.class_mean(1) == doctest::Approx(225.0));
  for (int k = 2; k <= 6; ++k) CHECK(m.mean[quarter_slot(k)] == doctest::Approx(45.0));
  CHECK(m.var == 20000.0);

  GroundSeries none;
  none.records.push_back({{1990, 7}, std::array<Count, 5>{1, 1, 1, 1, 1}});
  CHECK_THROWS_AS(estimate_initial_means(none, 1000.0), ModelError);
}

TEST_CASE("initial-state draws") {
  InitialStateMeans means;
  means.mean.fill(500.0);
  means.mean[kNewbornSlot] = 0.0;
  Rng rng = make_stream(6);
  const int n = 100000;
  int zeros = 0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto st = draw_time_zero(means, rng);
    zeros += st.newborn() == 0 ? 1 : 0;
    s += static_cast<double>(st.male());
    CHECK(st.new_female() == 0);
  }
  CHECK(static_cast<double>(zeros) / n > 0.5);
  const double sd = std::sqrt(20000.0);
  CHECK(std::abs(s / n - 500.0) < 3.0 * sd / std::sqrt(n));

  means.var = 0.0;
  const auto fixed = draw_time_zero(means, rng);
  CHECK(fixed.male() == 500);
  CHECK(initial_log_density(fixed, means) == 0.0);
}

TEST_CASE("simulated trajectories") {
  std::vector<CovariateRecord> covs(12);
  for (int t = 0; t < 12; ++t) covs[static_cast<std::size_t>(t)].date = YearMonth{2000, 1}.plus(t);
  InitialStateMeans means;
  means.mean.fill(200.0);
  means.var = 100.0;
  HyperParams h;
  RateCoefficients c;
  c.birth[0] = -40.0;  // birth rate clamped to 1e-12
  Rng rng = make_stream(7);
  const auto sim = simulate_trajectory(covs, c, h, means, rng);
  CHECK(sim.trajectory.months() == 12);
  for (int t = 2; t <= 12; ++t) CHECK(sim.trajectory.at(t).newborn() == 0);
  for (int t = 1; t <= 12; ++t) CHECK(sim.covariates[t - 1].apop_lag1 ==
                                      static_cast<double>(sim.trajectory.at(t - 1).total()));

  Rng a = make_stream(8), b = make_stream(8);
  const auto one = simulate_trajectory(std::span(covs).first(1), c, h, means, a);
  CHECK(one.trajectory.months() == 1);
  const auto direct = sample_initial_state(means, adjusted_rates(covs[0], c, h), b);
  CHECK(one.trajectory.at(1) == direct.first_month);
}
