#include "demodyn/reference.hpp"

#include <vector>

namespace demodyn {

namespace {

// Typical magnitude of the covariate multiplying each coefficient; 0 marks an
// intercept or calendar dummy.
const std::array<std::vector<double>, kBlockCount>& typical_magnitudes() {
  static const std::array<std::vector<double>, kBlockCount> m{{
      {0, 6.5, 50, 400, 85, 7500, 3000, 14, 27},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 170, 85},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 380},
      {0, 0, 3000, 85, 85, 85, 85, 850, 170},
      {0, 0, 850, 170, 85, 85, 14, 14, 27},
  }};
  return m;
}

}  // namespace

RateCoefficients reference_coefficients() {
  RateCoefficients c;
  c.birth = {-0.98, 0.05, -0.004, 0.0, 0.004, -0.00001, -0.00005, 0.01, -0.01};
  const std::array<double, 12> quarter_season{2.1, 2.2, 2.3, 2.3, 2.2, 2.1, 2.0, 2.0, 2.0, 2.1, 2.2, 2.2};
  for (std::size_t k = 0; k < 12; ++k) {
    c.quarter[k] = quarter_season[k];
    c.half[k] = quarter_season[k] + 1.1;
  }
  c.quarter[12] = 0.001;
  c.quarter[13] = 0.002;
  c.half[12] = 0.0005;
  c.adult = {0.1, 0.1, -0.00003, 0.001, 0.001, 0.001, 0.001, 0.005, 0.0};
  c.sex_ratio = {0.05, -0.05, 0.0002, -0.0005, 0.0005, 0.0, 0.01, -0.01, -0.004};
  return c;
}

CoefficientPriors reference_priors(double dummy_sd, double effect_sd) {
  const RateCoefficients mean = reference_coefficients();
  CoefficientPriors p;
  const auto& mags = typical_magnitudes();
  for (int b = 0; b < kBlockCount; ++b) {
    const auto block = static_cast<RateBlock>(b);
    const auto values = mean.block(block);
    BlockPrior& bp = p[block];
    bp.mean.assign(values.begin(), values.end());
    bp.sd.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double m = mags[static_cast<std::size_t>(b)][i];
      bp.sd[i] = m > 0.0 ? effect_sd / m : dummy_sd;
    }
  }
  return p;
}

std::array<double, kClassCount> reference_class_proportions() {
  return {0.05, 0.12, 0.23, 0.38, 0.22};
}

}  // namespace demodyn
