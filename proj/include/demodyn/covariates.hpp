#pragma once

#include <span>
#include <string>
#include <vector>

#include "demodyn/distributions.hpp"
#include "demodyn/series.hpp"
#include "demodyn/types.hpp"

namespace demodyn {

/// Months of history a covariate record needs (deepest lag is 11).
inline constexpr int kCovariateHistory = 11;

/// Seasons used by the rolling seasonal rainfall totals.
bool is_wet_month(int month);        // November..June
bool is_early_wet_month(int month);  // November..February
bool is_dry_month(int month);        // July..October

/// Derives lagged, moving-average and seasonal fields from raw monthly weather.
/// Records without 11 months of history are dropped; one warning is appended per
/// dropped month when `warnings` is given. Density fields are left at zero.
/// Throws ModelError on gaps or unsorted months.
std::vector<CovariateRecord> derive_covariates(std::span<const WeatherRecord> weather,
                                               std::vector<std::string>* warnings = nullptr);

/// Seasonal East-African style monthly weather for demonstrations and tests.
std::vector<WeatherRecord> synthetic_weather(YearMonth start, int months, Rng& rng);

}  // namespace demodyn
