#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "demodyn/model.hpp"
#include "demodyn/sampler.hpp"
#include "demodyn/series.hpp"
#include "demodyn/summary.hpp"
#include "demodyn/validation.hpp"

namespace demodyn {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number formatting shared by every writer: 6 significant digits.
std::string format_number(double v);

/// Month as YYYY-MM; parse_year_month throws IoError on anything else.
std::string format_year_month(YearMonth d);
YearMonth parse_year_month(const std::string& text);

// Loaders check the header, report malformed rows as "<path>:<line>: ..." and
// throw IoError on an empty file.
GroundSeries load_ground(const std::filesystem::path& path);
AerialSeries load_aerial(const std::filesystem::path& path);
std::vector<WeatherRecord> load_weather(const std::filesystem::path& path);
/// load_weather followed by derive_covariates; dropped months go to `warnings`.
std::vector<CovariateRecord> load_covariates(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings = nullptr);
/// Units of one survey; the frame (Z, N) comes from the run configuration.
std::vector<SurveyUnit> load_units(const std::filesystem::path& path);

void write_ground(const std::filesystem::path& path, const GroundSeries& s);
void write_aerial(const std::filesystem::path& path, const AerialSeries& s);
void write_weather(const std::filesystem::path& path, const std::vector<WeatherRecord>& w);
void write_units(const std::filesystem::path& path, const std::vector<SurveyUnit>& units);

/// Long format: iteration,parameter,value.
void write_samples(const std::filesystem::path& path, const SampleTable& table);
/// parameter,mean,sd,lower,upper,ess
void write_summary(const std::filesystem::path& path, const PosteriorSummary& summary);
/// Fixed-width table of the same columns.
void print_summary(std::ostream& os, const PosteriorSummary& summary);

struct SurveyConfig {
  YearMonth date;
  std::filesystem::path units;
};

struct SimulateConfig {
  YearMonth start{1989, 7};
  int months = 174;
  double initial_total = 20000.0;
  std::array<double, kClassCount> proportions{0.05, 0.12, 0.23, 0.38, 0.22};
  double sigma2 = 100.0;
  int aerial_every = 12;  // aerial survey every n-th month, starting at month n
};

struct ValidateConfig {
  std::vector<SurveyConfig> surveys;
  double frame_area = 0.0;
  double frame_units = 0.0;
  int replicates = 10;
  double series_sigma2 = 100.0;
  TrackingMode tracking = TrackingMode::kPerMonth;
  long irmcmc_refine = 20;
  std::size_t irmcmc_draws = 0;
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against the config file
  std::filesystem::path covariates, ground, aerial;
  std::optional<YearMonth> start, end;  // fitted months; default: span of the ground series
  std::optional<double> initial_total;  // default: first aerial estimate
  CoefficientPriors priors;
  std::optional<RateCoefficients> coefficients;  // simulation truth / chain start
  HyperParams hyper;
  ChainConfig chain;
  SimulateConfig simulate;
  ValidateConfig validate;
  std::filesystem::path output = "out";
  unsigned threads = 1;

  /// Coefficients given in the config, else the prior means.
  RateCoefficients start_coefficients() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Throws IoError on missing files or inconsistent settings.
  void validate_for(const std::string& command) const;
};

/// JSON (comments allowed). Prior vector lengths must match the model's arities.
RunConfig load_run_config(const std::filesystem::path& path);

/// Reads a long-format samples CSV back into a table.
SampleTable load_samples(const std::filesystem::path& path);

}  // namespace demodyn
