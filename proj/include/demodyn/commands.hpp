#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "demodyn/io.hpp"

namespace demodyn {

/// Command-line settings that take precedence over the configuration file.
struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<long> burn_in;
  std::optional<AerialRate> aerial_rate;
  std::optional<std::filesystem::path> out;  // relative to the working directory
};

void apply_overrides(RunConfig& cfg, const CommandOverrides& o);

/// Observed data arranged for one fit, months 1..T with T = months.size().
struct FitInputs {
  FitData data;
  std::vector<YearMonth> months;
  std::vector<std::string> warnings;
};

/// Loads the configured files and aligns them on the fitted months. Density
/// covariates come from the observed ground totals, linearly interpolated over
/// unsurveyed months.
FitInputs prepare_fit_inputs(const RunConfig& cfg);

/// Each command writes its artifacts under cfg.output and returns 0 when all of
/// them were written with finite values; errors are thrown as IoError/ModelError.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_fit(const RunConfig& cfg, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& log);
int cmd_predict(const RunConfig& cfg, std::ostream& log);

/// Dispatches on "simulate", "fit", "validate" or "predict".
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace demodyn
