#include "demodyn/distributions.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace demodyn {

namespace {

std::vector<double> build_factorial_table() {
  std::vector<double> t(static_cast<std::size_t>(detail::kFactorialTableSize));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
  return t;
}

const std::vector<double> factorial_storage = build_factorial_table();

// log of the upper normal tail Q(z) = P(Z > z).
double log_upper_tail(double z) {
  const double q = 0.5 * std::erfc(z / std::numbers::sqrt2);
  if (q > 1e-300) return std::log(q);
  // Mills-ratio asymptote, accurate for the z > 37 range where erfc underflows.
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_lower_tail(double z) { return log_upper_tail(-z); }

// log(P(a < Z < b)) for standard normal Z with a < b; a or b may be infinite.
double log_interval_mass(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return 0.0;
  if (std::isinf(a)) return log_lower_tail(b);
  if (std::isinf(b)) return log_upper_tail(a);
  double mass;
  if (a > 0.0) {
    mass = 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  } else if (b < 0.0) {
    mass = 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  } else {
    mass = 1.0 - 0.5 * std::erfc(-a / std::numbers::sqrt2) -
           0.5 * std::erfc(b / std::numbers::sqrt2);
  }
  if (mass > 1e-300) return std::log(mass);
  // Far tail: midpoint density times the interval width.
  const double mid = 0.5 * (a + b);
  return -0.5 * mid * mid - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(b - a);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x6d6f6e74u};
  return Rng(seq);
}

namespace detail {
const double* const log_factorial_table = factorial_storage.data();
}

double log_gamma(double x) {
  if (x < 10.0) return std::lgamma(x);
  // Stirling series; the first omitted term is below 1e-16 relative for x >= 10.
  const double r = 1.0 / x, r2 = r * r;
  return (x - 0.5) * std::log(x) - x + 0.91893853320467274178 +
         r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

double log_choose(Count n, Count k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binomial_log_pmf(Count k, Count n, double log_p, double log_q) {
  if (k < 0 || n < 0 || k > n) return kNegInf;
  double out = log_choose(n, k);
  if (k > 0) out += static_cast<double>(k) * log_p;
  if (n - k > 0) out += static_cast<double>(n - k) * log_q;
  return out;
}

double binomial_log_pmf(Count k, Count n, double p) {
  return binomial_log_pmf(k, n, std::log(p), std::log1p(-p));
}

double trinomial_log_pmf(Count a, Count b, Count n, double pa, double pb, double pc) {
  const Count c = n - a - b;
  if (a < 0 || b < 0 || c < 0) return kNegInf;
  double out = log_factorial(n) - log_factorial(a) - log_factorial(b) - log_factorial(c);
  if (a > 0) out += static_cast<double>(a) * std::log(pa);
  if (b > 0) out += static_cast<double>(b) * std::log(pb);
  if (c > 0) out += static_cast<double>(c) * std::log(pc);
  return out;
}

double poisson_log_pmf(Count k, double lambda) {
  if (k < 0) return kNegInf;
  if (lambda <= 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(lambda) - lambda - log_factorial(k);
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (!(x > 0.0) || !(shape > 0.0) || !(rate > 0.0)) return kNegInf;
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double beta_log_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return log_gamma(a + b) - log_gamma(a) - log_gamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double rounded_normal_log_mass(Count k, double mean, double var, Count cap) {
  if (k < 0) return kNegInf;
  if (cap >= 0 && k > cap) return kNegInf;
  if (var <= 0.0) {
    Count target = std::max<Count>(0, static_cast<Count>(std::llround(mean)));
    if (cap >= 0) target = std::min(target, cap);
    return k == target ? 0.0 : kNegInf;
  }
  const double sd = std::sqrt(var);
  const double inf = std::numeric_limits<double>::infinity();
  const double lo = k == 0 ? -inf : (static_cast<double>(k) - 0.5 - mean) / sd;
  const double hi = (cap >= 0 && k == cap) ? inf : (static_cast<double>(k) + 0.5 - mean) / sd;
  return log_interval_mass(lo, hi);
}

Count sample_binomial(Rng& rng, Count n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<Count>(n, p)(rng);
}

Count sample_poisson(Rng& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  return std::poisson_distribution<Count>(lambda)(rng);
}

double sample_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double sample_beta(Rng& rng, double a, double b) {
  const double x = sample_gamma(rng, a, 1.0);
  const double y = sample_gamma(rng, b, 1.0);
  return x / (x + y);
}

Count sample_rounded_normal(Rng& rng, double mean, double var) {
  const double z = var > 0.0 ? std::normal_distribution<double>(mean, std::sqrt(var))(rng) : mean;
  return std::max<Count>(0, static_cast<Count>(std::llround(z)));
}

}  // namespace demodyn
