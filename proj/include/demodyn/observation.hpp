#pragma once

#include <array>
#include <span>
#include <utility>

#include "demodyn/distributions.hpp"
#include "demodyn/types.hpp"

namespace demodyn {

struct GroundObservation {
  int t = 0;  // month index 1..T
  std::array<Count, kClassCount> counts{};
};

struct AerialObservation {
  int t = 0;
  Count total = 0;
  double se = 0.0;
};

/// Gamma(lambda | X^2 / sigma2, X / sigma2) + Poisson(obs | lambda) for one size class.
/// A class with X = 0 has zero intensity (obs > 0 is impossible) and lambda carries a
/// unit-exponential pseudo-prior.
double ground_class_loglik(Count latent, Count observed, double lambda, double sigma2);
/// Gamma layer only (the part that depends on the latent count).
double ground_class_gamma_term(Count latent, double lambda, double sigma2);
/// log p(obs | X) with lambda integrated out: negative binomial with mean X and
/// variance X + sigma2.
double ground_class_marginal(Count latent, Count observed, double sigma2);
/// Draw of lambda from its conditional given X and the count.
double sample_ground_lambda(Count latent, Count observed, double sigma2, Rng& rng);

/// Sum over the five size classes; throws std::invalid_argument unless every lambda > 0.
double ground_loglik(const PopulationState& state, const GroundObservation& obs,
                     std::span<const double> lambda, double sigma2);

/// Observed newborns inflated for animals missed in the field.
double corrected_newborns(Count observed_newborns, double factor = 1.7);

/// Gamma rate of the aerial intensity: K B / sigma_T^2 (consistent) or K B / sigma_T (paper).
double aerial_gamma_rate(double expected_total, double sigma_t, AerialRate mode);
double aerial_gamma_term(Count region_total, double k_t, double lambda_t, double sigma_t,
                         AerialRate mode = AerialRate::kConsistent);
/// Gamma(lambda_T | (K B)^2 / sigma_T^2, rate) + Poisson(T | lambda_T).
double aerial_loglik(Count region_total, double k_t, Count aerial_total, double lambda_t,
                     double sigma_t, AerialRate mode = AerialRate::kConsistent);

/// Scales an aerial estimate and its standard error by the sightability factor.
std::pair<double, double> apply_sightability(double estimate, double se, double factor = 1.3);

struct GroundDraw {
  std::array<double, kClassCount> lambda{};
  std::array<Count, kClassCount> counts{};
};
/// Forward draw of the observation layer for one month.
GroundDraw sample_ground_observation(const PopulationState& state, double sigma2, Rng& rng);

}  // namespace demodyn
