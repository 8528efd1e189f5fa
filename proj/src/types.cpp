#include "demodyn/types.hpp"

#include <cmath>
#include <numeric>

namespace demodyn {

std::string slot_name(int slot) {
  if (slot == kNewbornSlot) return "new";
  if (slot < kFirstHalfSlot) return "q" + std::to_string(slot - kFirstQuarterSlot + 2);
  if (slot < kFirstFemaleSlot) return "h" + std::to_string(slot - kFirstHalfSlot + 7);
  if (slot < kMaleSlot) return "af" + std::to_string(slot - kFirstFemaleSlot + 1);
  if (slot == kMaleSlot) return "am";
  if (slot == kNewFemaleSlot) return "naf";
  if (slot == kNewMaleSlot) return "nam";
  throw std::out_of_range("slot index");
}

const char* class_name(int size_class) {
  static constexpr const char* kNames[] = {"new", "quarter", "halfyear", "adult_f", "adult_m"};
  if (size_class < 0 || size_class >= kClassCount) throw std::out_of_range("class index");
  return kNames[size_class];
}

Count PopulationState::quarter_total() const {
  return std::accumulate(n.begin() + kFirstQuarterSlot, n.begin() + kFirstHalfSlot, Count{0});
}

Count PopulationState::half_total() const {
  return std::accumulate(n.begin() + kFirstHalfSlot, n.begin() + kFirstFemaleSlot, Count{0});
}

Count PopulationState::female_total() const {
  return std::accumulate(n.begin() + kFirstFemaleSlot, n.begin() + kMaleSlot, Count{0});
}

std::array<Count, kClassCount> PopulationState::class_totals() const {
  return {newborn(), quarter_total(), half_total(), female_total(), male()};
}

Count PopulationState::class_total(int size_class) const {
  switch (size_class) {
    case 0: return newborn();
    case 1: return quarter_total();
    case 2: return half_total();
    case 3: return female_total();
    default: return male();
  }
}

Count PopulationState::total() const {
  return std::accumulate(n.begin(), n.begin() + kInitialSlotCount, Count{0});
}

const char* block_name(RateBlock b) {
  switch (b) {
    case RateBlock::kBirth: return "gamma_r";
    case RateBlock::kQuarter: return "gamma_q";
    case RateBlock::kHalf: return "gamma_y";
    case RateBlock::kAdult: return "gamma_a";
    case RateBlock::kSexRatio: return "gamma_s";
  }
  return "?";
}

std::size_t block_size(RateBlock b) {
  switch (b) {
    case RateBlock::kBirth: return kBirthTerms;
    case RateBlock::kQuarter: return kQuarterTerms;
    case RateBlock::kHalf: return kHalfTerms;
    case RateBlock::kAdult: return kAdultTerms;
    case RateBlock::kSexRatio: return kSexRatioTerms;
  }
  return 0;
}

std::span<double> RateCoefficients::block(RateBlock b) {
  switch (b) {
    case RateBlock::kBirth: return birth;
    case RateBlock::kQuarter: return quarter;
    case RateBlock::kHalf: return half;
    case RateBlock::kAdult: return adult;
    case RateBlock::kSexRatio: return sex_ratio;
  }
  throw std::out_of_range("rate block");
}

std::span<const double> RateCoefficients::block(RateBlock b) const {
  return const_cast<RateCoefficients*>(this)->block(b);
}

void HyperParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ModelError(std::string(what) + " must be positive");
  };
  positive(sigma_t, "sigma_t");
  positive(k_alpha, "k_alpha");
  positive(k_beta, "k_beta");
  positive(newborn_correction, "newborn_correction");
  positive(sigma2_shape, "sigma2_shape");
  positive(sigma2_rate, "sigma2_rate");
  positive(aerial_sightability, "aerial_sightability");
  if (!(init_var >= 0.0)) throw ModelError("init_var must be non-negative");
  if (!(dry_predation_factor > 0.0 && dry_predation_factor <= 1.0))
    throw ModelError("dry_predation_factor must lie in (0, 1]");
  if (!(male_survival_factor > 0.0 && male_survival_factor <= 1.0))
    throw ModelError("male_survival_factor must lie in (0, 1]");
  if (newborn_correction < 1.0 || aerial_sightability < 1.0)
    throw ModelError("correction factors must be >= 1");
}

}  // namespace demodyn
