#pragma once

#include <span>
#include <string>
#include <vector>

namespace demodyn {

/// Rows of named scalar draws, stored row-major.
class SampleTable {
 public:
  SampleTable() = default;
  explicit SampleTable(std::vector<std::string> names) : names_(std::move(names)) {}

  const std::vector<std::string>& names() const { return names_; }
  std::size_t columns() const { return names_.size(); }
  std::size_t rows() const { return iterations_.size(); }
  const std::vector<long>& iterations() const { return iterations_; }

  void add_row(long iteration, std::span<const double> values);
  double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
  std::vector<double> column(std::size_t col) const;
  /// Column index by name; throws std::out_of_range when absent.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<long> iterations_;
  std::vector<double> values_;
};

struct QuantitySummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5% quantile
  double upper = 0.0;  // 97.5% quantile
  double ess = 0.0;
};

struct PosteriorSummary {
  std::vector<QuantitySummary> quantities;

  /// Throws std::out_of_range when `name` is not summarised.
  const QuantitySummary& get(const std::string& name) const;
};

/// Type-7 (linear interpolation) quantile of already sorted values.
double quantile_type7_sorted(std::span<const double> sorted, double p);
double quantile_type7(std::vector<double> values, double p);
double sample_mean(std::span<const double> x);
/// Unbiased (n - 1) standard deviation.
double sample_sd(std::span<const double> x);
/// Geyer initial monotone sequence effective sample size.
double effective_sample_size(std::span<const double> x);

QuantitySummary summarize(const std::string& name, std::span<const double> draws);
PosteriorSummary posterior_summary(const SampleTable& samples);

}  // namespace demodyn
