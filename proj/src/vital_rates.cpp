#include "demodyn/vital_rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace demodyn {

namespace {

void require_length(std::span<const double> g, std::size_t n, const char* what) {
  if (g.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                " coefficients, got " + std::to_string(g.size()));
  }
}

double month_dummies(const CovariateRecord& cov, std::span<const double> g, int count) {
  double eta = 0.0;
  for (int k = 1; k <= count; ++k) eta += g[k - 1] * cov.delta(k);
  return eta;
}

}  // namespace

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double inv_logit(double x) {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  return clamp_probability(p);
}

double birth_rate(const CovariateRecord& cov, std::span<const double> g) {
  require_length(g, kBirthTerms, "birth_rate");
  const double m = cov.month();
  const double r = cov.rain_7_11;
  const double eta = g[0] + g[1] * m + g[2] * m * m + g[3] * m * m * m + g[4] * r +
                     g[5] * r * r + g[6] * cov.npop_lag7 + g[7] * cov.mintemp +
                     g[8] * cov.maxtemp;
  return inv_logit(eta);
}

double quarter_survival(const CovariateRecord& cov, std::span<const double> g) {
  require_length(g, kQuarterTerms, "quarter_survival");
  const double eta = month_dummies(cov, g, 12) + g[12] * cov.dry1 + g[13] * cov.mavrain_3_4;
  return inv_logit(eta);
}

double halfyearling_survival(const CovariateRecord& cov, std::span<const double> g) {
  require_length(g, kHalfTerms, "halfyearling_survival");
  return inv_logit(month_dummies(cov, g, 12) + g[12] * cov.earlywet1);
}

double adult_survival(const CovariateRecord& cov, std::span<const double> g,
                      AdultExtraTerm extra) {
  require_length(g, kAdultTerms, "adult_survival");
  double eta = month_dummies(cov, g, 2) + g[2] * cov.apop_lag1 + g[3] * cov.lagrain[4] +
               g[4] * cov.lagrain[5] + g[5] * cov.lagrain[6] + g[6] * cov.lagrain[7] +
               g[7] * cov.wet1;
  switch (extra) {
    case AdultExtraTerm::kNone: break;
    case AdultExtraTerm::kDry1: eta += g[8] * cov.dry1; break;
    case AdultExtraTerm::kLagRain8: eta += g[8] * cov.lagrain[8]; break;
    case AdultExtraTerm::kEarlyWet1: eta += g[8] * cov.earlywet1; break;
  }
  return inv_logit(eta);
}

double adult_sex_ratio(const CovariateRecord& cov, std::span<const double> g) {
  require_length(g, kSexRatioTerms, "adult_sex_ratio");
  const double eta = month_dummies(cov, g, 2) + g[2] * cov.wet1 + g[3] * cov.dry1 +
                     g[4] * cov.lagrain[0] + g[5] * cov.rain_7_11 + g[6] * cov.mintemp +
                     g[7] * cov.lagmin[2] + g[8] * cov.lagmax[1];
  return inv_logit(eta);
}

double reduce_predation(double survival, double factor) {
  return 1.0 - factor * (1.0 - survival);
}

void update_block_rates(RateBlock b, const CovariateRecord& cov, const RateCoefficients& coefs,
                        const HyperParams& hyper, VitalRates& r) {
  const bool dry = hyper.dry_month[static_cast<std::size_t>(cov.month())];
  const double f = hyper.dry_predation_factor;
  auto relieve = [&](double s) { return dry ? clamp_probability(reduce_predation(s, f)) : s; };
  switch (b) {
    case RateBlock::kBirth: r.birth = birth_rate(cov, coefs.birth); break;
    case RateBlock::kQuarter: r.quarter = relieve(quarter_survival(cov, coefs.quarter)); break;
    case RateBlock::kHalf: r.half = relieve(halfyearling_survival(cov, coefs.half)); break;
    case RateBlock::kAdult:
      r.adult_female = relieve(adult_survival(cov, coefs.adult, hyper.adult_extra));
      r.adult_male = clamp_probability(hyper.male_survival_factor * r.adult_female);
      break;
    case RateBlock::kSexRatio: r.female_share = adult_sex_ratio(cov, coefs.sex_ratio); break;
  }
}

VitalRates adjusted_rates(const CovariateRecord& cov, const RateCoefficients& coefs,
                          const HyperParams& hyper) {
  VitalRates r;
  for (int b = 0; b < kBlockCount; ++b) update_block_rates(static_cast<RateBlock>(b), cov, coefs, hyper, r);
  return r;
}

}  // namespace demodyn
