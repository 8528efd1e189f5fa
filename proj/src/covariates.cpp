#include "demodyn/covariates.hpp"

#include <array>
#include <cmath>

namespace demodyn {

bool is_wet_month(int month) { return month >= 11 || month <= 6; }
bool is_early_wet_month(int month) { return month >= 11 || month <= 2; }
bool is_dry_month(int month) { return month >= 7 && month <= 10; }

std::vector<CovariateRecord> derive_covariates(std::span<const WeatherRecord> weather,
                                               std::vector<std::string>* warnings) {
  for (std::size_t i = 1; i < weather.size(); ++i)
    if (weather[i].date.serial() != weather[i - 1].date.serial() + 1)
      throw ModelError("weather series must be consecutive months");
  std::vector<CovariateRecord> out;
  for (std::size_t i = 0; i < weather.size(); ++i) {
    const YearMonth d = weather[i].date;
    if (i < static_cast<std::size_t>(kCovariateHistory)) {
      if (warnings)
        warnings->push_back("dropping " + std::to_string(d.year) + "-" + std::to_string(d.month) +
                            ": insufficient history for lag 11");
      continue;
    }
    CovariateRecord c;
    c.date = d;
    for (int l = 0; l <= kCovariateHistory; ++l) {
      const WeatherRecord& w = weather[i - static_cast<std::size_t>(l)];
      const auto li = static_cast<std::size_t>(l);
      c.lagrain[li] = w.rainfall_mm;
      c.lagmin[li] = w.tmin_c;
      c.lagmax[li] = w.tmax_c;
      const int m = w.date.month;
      if (is_wet_month(m)) c.wet1 += w.rainfall_mm;
      if (is_early_wet_month(m)) c.earlywet1 += w.rainfall_mm;
      if (is_dry_month(m)) c.dry1 += w.rainfall_mm;
    }
    c.mintemp = weather[i].tmin_c;
    c.maxtemp = weather[i].tmax_c;
    double s = 0.0;
    for (int l = 6; l <= 10; ++l) s += c.lagrain[static_cast<std::size_t>(l)];
    c.rain_7_11 = s / 5.0;
    c.mavrain_3_4 = 0.5 * (c.lagrain[3] + c.lagrain[4]);
    out.push_back(c);
  }
  return out;
}

std::vector<WeatherRecord> synthetic_weather(YearMonth start, int months, Rng& rng) {
  static constexpr std::array<double, 12> rain{90, 80, 130, 170, 120, 50, 30, 35, 45, 60, 110, 100};
  static constexpr std::array<double, 12> tmin{14.5, 14.8, 15.0, 15.2, 14.6, 13.2,
                                               12.5, 12.8, 13.4, 14.0, 14.4, 14.3};
  static constexpr std::array<double, 12> tmax{28.5, 29.0, 28.2, 26.5, 25.8, 25.5,
                                               25.0, 25.9, 27.4, 28.2, 27.0, 27.6};
  std::vector<WeatherRecord> out;
  out.reserve(static_cast<std::size_t>(months));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < months; ++i) {
    WeatherRecord w;
    w.date = start.plus(i);
    const auto m = static_cast<std::size_t>(w.date.month - 1);
    w.rainfall_mm = std::round(sample_gamma(rng, 4.0, 4.0 / rain[m]) * 10.0) / 10.0;
    w.tmin_c = std::round((tmin[m] + 0.6 * noise(rng)) * 10.0) / 10.0;
    w.tmax_c = std::round((tmax[m] + 0.8 * noise(rng)) * 10.0) / 10.0;
    out.push_back(w);
  }
  return out;
}

}  // namespace demodyn
