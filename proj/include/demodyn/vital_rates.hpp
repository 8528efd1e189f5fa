#pragma once

#include <span>

#include "demodyn/types.hpp"

namespace demodyn {

inline constexpr double kProbabilityClamp = 1e-12;

/// Logistic link, clamped to [1e-12, 1 - 1e-12] so log-densities stay finite.
double inv_logit(double x);
double clamp_probability(double p);

// Raw logit-linear rates. Each throws std::invalid_argument when the coefficient
// vector length does not match the model's term count.
double birth_rate(const CovariateRecord& cov, std::span<const double> g);
double quarter_survival(const CovariateRecord& cov, std::span<const double> g);
double halfyearling_survival(const CovariateRecord& cov, std::span<const double> g);
double adult_survival(const CovariateRecord& cov, std::span<const double> g,
                      AdultExtraTerm extra = AdultExtraTerm::kNone);
double adult_sex_ratio(const CovariateRecord& cov, std::span<const double> g);

/// Dry-season predation relief acts on mortality: s' = 1 - factor * (1 - s).
double reduce_predation(double survival, double factor);

/// Recomputes the fields of `r` driven by coefficient block `b`.
void update_block_rates(RateBlock b, const CovariateRecord& cov, const RateCoefficients& coefs,
                        const HyperParams& hyper, VitalRates& r);
/// Raw rates, then dry-season predation relief on s_q, s_h, s_a, then s_am = factor * s_af.
VitalRates adjusted_rates(const CovariateRecord& cov, const RateCoefficients& coefs,
                          const HyperParams& hyper);

}  // namespace demodyn
