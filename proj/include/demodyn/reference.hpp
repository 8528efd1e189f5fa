#pragma once

#include <array>

#include "demodyn/model.hpp"
#include "demodyn/types.hpp"

namespace demodyn {

/// Demonstration coefficients giving plausible monthly rates (breeding-pool birth
/// rate near 0.3, adult survival near 0.99) under synthetic_weather covariates and
/// a population of a few thousand.
RateCoefficients reference_coefficients();

/// Normal priors centred on reference_coefficients(). Intercepts and month dummies
/// get sd `dummy_sd`; covariate slopes get `effect_sd` divided by the covariate's
/// typical magnitude.
CoefficientPriors reference_priors(double dummy_sd = 0.25, double effect_sd = 0.1);

/// Class proportions (new, quarter, half, adult_f, adult_m) used to seed demonstrations.
std::array<double, kClassCount> reference_class_proportions();

}  // namespace demodyn
