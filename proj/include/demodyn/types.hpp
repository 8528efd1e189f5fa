#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace demodyn {

using Count = std::int64_t;

// Latent slot layout of one monthly population state.
//   0        newborn (age < 1 month)
//   1..5     quarter-size, ages k-1..k months for k = 2..6
//   6..18    half-yearling, ages k-1..k months for k = 7..19
//   19..30   adult females that gave birth l months ago, l = 1..12 (12 = "12 or more")
//   31       adult males
//   32, 33   half-yearlings recruited this month as adult females / males
inline constexpr int kQuarterSlots = 5;
inline constexpr int kHalfSlots = 13;
inline constexpr int kCycleSlots = 12;

inline constexpr int kNewbornSlot = 0;
inline constexpr int kFirstQuarterSlot = 1;
inline constexpr int kFirstHalfSlot = kFirstQuarterSlot + kQuarterSlots;
inline constexpr int kFirstFemaleSlot = kFirstHalfSlot + kHalfSlots;
inline constexpr int kMaleSlot = kFirstFemaleSlot + kCycleSlots;
inline constexpr int kNewFemaleSlot = kMaleSlot + 1;
inline constexpr int kNewMaleSlot = kMaleSlot + 2;
inline constexpr int kSlotCount = kMaleSlot + 3;
// Slots that carry a normal prior at t = 0 (recruits in transit start empty).
inline constexpr int kInitialSlotCount = kMaleSlot + 1;

constexpr int quarter_slot(int age_month) { return kFirstQuarterSlot + age_month - 2; }
constexpr int half_slot(int age_month) { return kFirstHalfSlot + age_month - 7; }
constexpr int female_slot(int months_since_birth) {
  return kFirstFemaleSlot + months_since_birth - 1;
}

// Observed / modelled size classes: newborn, quarter, half-yearling, adult female, adult male.
enum class SizeClass : int { kNewborn = 0, kQuarter, kHalf, kFemale, kMale };
inline constexpr int kClassCount = 5;

/// Size class of a latent slot, or -1 for the recruit-in-transit slots.
constexpr int slot_class(int slot) {
  if (slot == kNewbornSlot) return 0;
  if (slot < kFirstHalfSlot) return 1;
  if (slot < kFirstFemaleSlot) return 2;
  if (slot < kMaleSlot) return 3;
  if (slot == kMaleSlot) return 4;
  return -1;
}

std::string slot_name(int slot);
const char* class_name(int size_class);

struct PopulationState {
  std::array<Count, kSlotCount> n{};

  Count& newborn() { return n[kNewbornSlot]; }
  Count newborn() const { return n[kNewbornSlot]; }
  Count& quarter(int age_month) { return n[quarter_slot(age_month)]; }
  Count quarter(int age_month) const { return n[quarter_slot(age_month)]; }
  Count& half(int age_month) { return n[half_slot(age_month)]; }
  Count half(int age_month) const { return n[half_slot(age_month)]; }
  Count& female(int months_since_birth) { return n[female_slot(months_since_birth)]; }
  Count female(int months_since_birth) const { return n[female_slot(months_since_birth)]; }
  Count& male() { return n[kMaleSlot]; }
  Count male() const { return n[kMaleSlot]; }
  Count& new_female() { return n[kNewFemaleSlot]; }
  Count new_female() const { return n[kNewFemaleSlot]; }
  Count& new_male() { return n[kNewMaleSlot]; }
  Count new_male() const { return n[kNewMaleSlot]; }

  Count quarter_total() const;
  Count half_total() const;
  Count female_total() const;
  /// Females able to conceive this month (last birth 11 or >= 12 months ago).
  Count breeding_pool() const { return female(11) + female(12); }
  /// Class totals (New, Q, H, F, AM).
  std::array<Count, kClassCount> class_totals() const;
  Count class_total(int size_class) const;
  /// Ground-survey-region total B = New + Q + H + F + AM.
  Count total() const;

  bool operator==(const PopulationState&) const = default;
};

/// Monthly clock: calendar year and month 1..12.
struct YearMonth {
  int year = 0;
  int month = 1;

  int serial() const { return year * 12 + (month - 1); }
  static YearMonth from_serial(int s) { return {s / 12, s % 12 + 1}; }
  YearMonth plus(int months) const { return from_serial(serial() + months); }
  auto operator<=>(const YearMonth&) const = default;
};

struct CovariateRecord {
  YearMonth date;
  double rain_7_11 = 0.0;    // mean rainfall over lags 6..10
  double npop_lag7 = 0.0;    // total population 7 months earlier
  double apop_lag1 = 0.0;    // total population 1 month earlier
  double mintemp = 0.0;
  double maxtemp = 0.0;
  std::array<double, 12> lagmin{};   // lagmin[l], l = 1..11 (index 0 = current month)
  std::array<double, 12> lagmax{};
  std::array<double, 12> lagrain{};  // lagrain[l], l = 0..11
  double wet1 = 0.0;
  double earlywet1 = 0.0;
  double dry1 = 0.0;
  double mavrain_3_4 = 0.0;

  int month() const { return date.month; }
  /// Calendar-month indicator.
  double delta(int k) const { return date.month == k ? 1.0 : 0.0; }
};

inline constexpr std::size_t kBirthTerms = 9;
inline constexpr std::size_t kQuarterTerms = 14;
inline constexpr std::size_t kHalfTerms = 13;
inline constexpr std::size_t kAdultTerms = 9;
inline constexpr std::size_t kSexRatioTerms = 9;

enum class RateBlock : int { kBirth = 0, kQuarter, kHalf, kAdult, kSexRatio };
inline constexpr int kBlockCount = 5;
const char* block_name(RateBlock b);
std::size_t block_size(RateBlock b);

struct RateCoefficients {
  std::array<double, kBirthTerms> birth{};
  std::array<double, kQuarterTerms> quarter{};
  std::array<double, kHalfTerms> half{};
  std::array<double, kAdultTerms> adult{};
  std::array<double, kSexRatioTerms> sex_ratio{};

  std::span<double> block(RateBlock b);
  std::span<const double> block(RateBlock b) const;
  bool operator==(const RateCoefficients&) const = default;
};

/// Realised monthly probabilities after seasonal adjustment.
struct VitalRates {
  double birth = 0.5;         // R_r
  double quarter = 0.5;       // s_q
  double half = 0.5;          // s_h
  double adult_female = 0.5;  // s_a (females)
  double adult_male = 0.5;    // s_a (males)
  double female_share = 0.5;  // R_c
};

enum class AerialRate { kConsistent, kPaper };

/// Optional covariate carried by the otherwise unused ninth adult-survival coefficient.
enum class AdultExtraTerm { kNone, kDry1, kLagRain8, kEarlyWet1 };

struct HyperParams {
  double sigma_t = 1906.42;
  double k_alpha = 5402.23;
  double k_beta = 4182.9;
  double init_var = 20000.0;
  double newborn_correction = 1.7;
  double dry_predation_factor = 0.7;
  double male_survival_factor = 0.997;
  double aerial_sightability = 1.3;
  double sigma2_shape = 50000.0;  // Gamma prior on sigma^2, rate parameterisation
  double sigma2_rate = 0.000001;
  AerialRate aerial_rate = AerialRate::kConsistent;
  AdultExtraTerm adult_extra = AdultExtraTerm::kNone;
  std::array<bool, 13> dry_month{false, false, false, false, false, false, false,
                                 true,  true,  true,  true,  false, false};

  void validate() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace demodyn
