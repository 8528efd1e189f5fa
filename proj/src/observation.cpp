#include "demodyn/observation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace demodyn {

double ground_class_gamma_term(Count latent, double lambda, double sigma2) {
  if (latent < 0) return kNegInf;
  // An empty class has zero intensity; lambda then follows a unit-exponential
  // pseudo-prior so the joint stays proper when the class empties and refills.
  if (latent == 0) return lambda > 0.0 ? -lambda : kNegInf;
  const double x = static_cast<double>(latent);
  return gamma_log_pdf(lambda, x * x / sigma2, x / sigma2);
}

double ground_class_marginal(Count latent, Count observed, double sigma2) {
  if (latent < 0) return kNegInf;
  if (latent == 0) return observed > 0 ? kNegInf : 0.0;
  const double x = static_cast<double>(latent), y = static_cast<double>(observed);
  const double r = x * x / sigma2, b = x / sigma2;
  return std::lgamma(y + r) - std::lgamma(r) - log_factorial(observed) + r * std::log(b / (1.0 + b)) -
         y * std::log1p(b);
}

double sample_ground_lambda(Count latent, Count observed, double sigma2, Rng& rng) {
  if (latent <= 0) return std::exponential_distribution<double>(1.0)(rng);
  const double x = static_cast<double>(latent);
  return sample_gamma(rng, x * x / sigma2 + static_cast<double>(observed), x / sigma2 + 1.0);
}

double ground_class_loglik(Count latent, Count observed, double lambda, double sigma2) {
  if (latent == 0 && observed > 0) return kNegInf;
  if (latent == 0) return ground_class_gamma_term(0, lambda, sigma2);
  return ground_class_gamma_term(latent, lambda, sigma2) + poisson_log_pmf(observed, lambda);
}

double ground_loglik(const PopulationState& state, const GroundObservation& obs,
                     std::span<const double> lambda, double sigma2) {
  if (lambda.size() != kClassCount) throw std::invalid_argument("ground_loglik: need 5 intensities");
  for (double l : lambda)
    if (!(l > 0.0)) throw std::invalid_argument("ground_loglik: intensities must be positive");
  const auto x = state.class_totals();
  double out = 0.0;
  for (std::size_t i = 0; i < kClassCount; ++i)
    out += ground_class_loglik(x[i], obs.counts[i], lambda[i], sigma2);
  return out;
}

double corrected_newborns(Count observed_newborns, double factor) {
  return factor * static_cast<double>(observed_newborns);
}

double aerial_gamma_rate(double expected_total, double sigma_t, AerialRate mode) {
  return mode == AerialRate::kPaper ? expected_total / sigma_t
                                    : expected_total / (sigma_t * sigma_t);
}

double aerial_gamma_term(Count region_total, double k_t, double lambda_t, double sigma_t,
                         AerialRate mode) {
  const double mean = k_t * static_cast<double>(region_total);
  if (!(mean > 0.0)) return kNegInf;
  return gamma_log_pdf(lambda_t, mean * mean / (sigma_t * sigma_t),
                       aerial_gamma_rate(mean, sigma_t, mode));
}

double aerial_loglik(Count region_total, double k_t, Count aerial_total, double lambda_t,
                     double sigma_t, AerialRate mode) {
  if (!(k_t > 0.0 && k_t < 1.0)) return kNegInf;
  if (region_total <= 0) return (region_total == 0 && aerial_total == 0) ? 0.0 : kNegInf;
  return aerial_gamma_term(region_total, k_t, lambda_t, sigma_t, mode) +
         poisson_log_pmf(aerial_total, lambda_t);
}

std::pair<double, double> apply_sightability(double estimate, double se, double factor) {
  return {estimate * factor, se * factor};
}

GroundDraw sample_ground_observation(const PopulationState& state, double sigma2, Rng& rng) {
  GroundDraw d;
  const auto x = state.class_totals();
  for (std::size_t i = 0; i < kClassCount; ++i) {
    if (x[i] <= 0) continue;
    const double xi = static_cast<double>(x[i]);
    d.lambda[i] = sample_gamma(rng, xi * xi / sigma2, xi / sigma2);
    d.counts[i] = sample_poisson(rng, d.lambda[i]);
  }
  return d;
}

}  // namespace demodyn
