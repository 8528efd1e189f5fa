#pragma once

#include <array>
#include <optional>
#include <vector>

#include "demodyn/types.hpp"

namespace demodyn {

/// One month of ground age/sex composition counts (new, quarter, half, adult_f, adult_m).
struct GroundRecord {
  YearMonth date;
  std::optional<std::array<Count, kClassCount>> counts;  // empty = month not surveyed

  bool observed() const { return counts.has_value(); }
  Count total() const;
  bool operator==(const GroundRecord&) const = default;
};

struct GroundSeries {
  std::vector<GroundRecord> records;  // strictly increasing dates

  void validate() const;
  bool operator==(const GroundSeries&) const = default;
};

struct AerialRecord {
  YearMonth date;
  double estimate = 0.0;
  double se = 0.0;
  bool operator==(const AerialRecord&) const = default;
};

struct AerialSeries {
  std::vector<AerialRecord> records;  // sorted by date

  void validate() const;
};

/// Raw monthly weather used to derive CovariateRecord fields.
struct WeatherRecord {
  YearMonth date;
  double rainfall_mm = 0.0;
  double tmin_c = 0.0;
  double tmax_c = 0.0;
};

}  // namespace demodyn
