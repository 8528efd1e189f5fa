#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "demodyn/types.hpp"

namespace demodyn {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Independent stream for replicate `index` of a run seeded with `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t index = 0);

namespace detail {
inline constexpr Count kFactorialTableSize = Count{1} << 20;
extern const double* const log_factorial_table;
}  // namespace detail

/// log Gamma(x) for x > 0; Stirling series above 10.
double log_gamma(double x);

/// log(n!) from a precomputed table, falling back to lgamma for large n.
inline double log_factorial(Count n) {
  if (n < detail::kFactorialTableSize) return detail::log_factorial_table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}
double log_choose(Count n, Count k);

/// Binomial log-pmf with cached log p and log(1-p); -inf outside 0 <= k <= n.
double binomial_log_pmf(Count k, Count n, double log_p, double log_q);
double binomial_log_pmf(Count k, Count n, double p);
/// Three-cell multinomial log-pmf for (a, b, n - a - b).
double trinomial_log_pmf(Count a, Count b, Count n, double pa, double pb, double pc);
double poisson_log_pmf(Count k, double lambda);
/// Gamma log-density, rate parameterisation (mean shape / rate).
double gamma_log_pdf(double x, double shape, double rate);
double beta_log_pdf(double x, double a, double b);
double normal_log_pdf(double x, double mean, double sd);

/// log P(max(0, round(Z)) = k) for Z ~ Normal(mean, var). With `cap`, values at or
/// above the cap are folded onto it (mass P(round(Z) >= cap)). var == 0 is a point mass.
double rounded_normal_log_mass(Count k, double mean, double var, Count cap = -1);

Count sample_binomial(Rng& rng, Count n, double p);
Count sample_poisson(Rng& rng, double lambda);
double sample_gamma(Rng& rng, double shape, double rate);
double sample_beta(Rng& rng, double a, double b);
/// max(0, round(Normal(mean, var))).
Count sample_rounded_normal(Rng& rng, double mean, double var);

}  // namespace demodyn
