#include "demodyn/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace demodyn {

void SampleTable::add_row(long iteration, std::span<const double> values) {
  if (values.size() != names_.size()) throw std::invalid_argument("SampleTable: row width mismatch");
  iterations_.push_back(iteration);
  values_.insert(values_.end(), values.begin(), values.end());
}

std::vector<double> SampleTable::column(std::size_t col) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
  return out;
}

std::size_t SampleTable::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no sampled quantity named " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

const QuantitySummary& PosteriorSummary::get(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q;
  throw std::out_of_range("no summary for " + name);
}

double quantile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile_type7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_type7_sorted(values, p);
}

double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double m = sample_mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
    return s / static_cast<double>(n);
  };
  // Sum of consecutive-pair autocorrelations while positive and non-increasing.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

QuantitySummary summarize(const std::string& name, std::span<const double> draws) {
  QuantitySummary q;
  q.name = name;
  if (draws.empty()) return q;
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  q.mean = sample_mean(draws);
  q.sd = sample_sd(draws);
  q.lower = quantile_type7_sorted(sorted, 0.025);
  q.upper = quantile_type7_sorted(sorted, 0.975);
  q.ess = effective_sample_size(draws);
  return q;
}

PosteriorSummary posterior_summary(const SampleTable& samples) {
  PosteriorSummary s;
  s.quantities.reserve(samples.columns());
  for (std::size_t c = 0; c < samples.columns(); ++c) {
    const auto col = samples.column(c);
    s.quantities.push_back(summarize(samples.names()[c], col));
  }
  return s;
}

}  // namespace demodyn
