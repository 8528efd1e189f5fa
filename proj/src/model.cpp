#include "demodyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "demodyn/vital_rates.hpp"

namespace demodyn {

namespace {

constexpr RateBlock kBlocks[] = {RateBlock::kBirth, RateBlock::kQuarter, RateBlock::kHalf,
                                 RateBlock::kAdult, RateBlock::kSexRatio};

Count expected_count(Count pool, double p) {
  if (pool <= 0) return 0;
  return std::clamp<Count>(static_cast<Count>(std::llround(static_cast<double>(pool) * p)), 0, pool);
}

// Rounded-expectation counterpart of sample_transition; always inside the support.
PopulationState project(const PopulationState& prev, const VitalRates& r) {
  PopulationState next;
  next.quarter(2) = expected_count(prev.newborn(), r.quarter);
  for (int k = 3; k <= 6; ++k) next.quarter(k) = expected_count(prev.quarter(k - 1), r.quarter);
  next.half(7) = expected_count(prev.quarter(6), r.half);
  for (int k = 8; k <= 19; ++k) next.half(k) = expected_count(prev.half(k - 1), r.half);
  const Count graduating = prev.half(19);
  next.new_female() = expected_count(graduating, r.female_share * r.adult_female);
  next.new_male() = std::min(graduating - next.new_female(),
                             expected_count(graduating, (1.0 - r.female_share) * r.adult_female));
  next.male() = expected_count(prev.male() + prev.new_male(), r.adult_male);
  next.female(1) = expected_count(prev.newborn(), r.adult_female);
  for (int l = 2; l <= 11; ++l) {
    const Count pool = l == 4 ? prev.female(3) + prev.new_female() : prev.female(l - 1);
    next.female(l) = expected_count(pool, r.adult_female);
  }
  next.female(12) = expected_count(prev.breeding_pool() - prev.newborn(), r.adult_female);
  next.newborn() = expected_count(next.breeding_pool(), r.birth);
  return next;
}

}  // namespace

RateCoefficients CoefficientPriors::means() const {
  RateCoefficients c;
  for (RateBlock b : kBlocks) {
    auto dst = c.block(b);
    const auto& src = (*this)[b].mean;
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return c;
}

double CoefficientPriors::block_log_density(RateBlock b, std::span<const double> values) const {
  const BlockPrior& p = (*this)[b];
  double out = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) out += normal_log_pdf(values[i], p.mean[i], p.sd[i]);
  return out;
}

double CoefficientPriors::log_density(const RateCoefficients& coefs) const {
  double out = 0.0;
  for (RateBlock b : kBlocks) out += block_log_density(b, coefs.block(b));
  return out;
}

void CoefficientPriors::validate() const {
  for (RateBlock b : kBlocks) {
    const BlockPrior& p = (*this)[b];
    const std::size_t n = block_size(b);
    if (p.mean.size() != n || p.sd.size() != n)
      throw ModelError(std::string("prior for ") + block_name(b) + " needs " + std::to_string(n) +
                       " means and sds");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(p.mean[i]) || !(p.sd[i] > 0.0) || !std::isfinite(p.sd[i]))
        throw ModelError(std::string("prior for ") + block_name(b) + ": invalid mean or sd");
    }
  }
}

CoefficientPriors CoefficientPriors::around(const RateCoefficients& mean, double sd_fraction,
                                            double sd_floor) {
  CoefficientPriors p;
  for (RateBlock b : kBlocks) {
    const auto values = mean.block(b);
    BlockPrior& bp = p[b];
    bp.mean.assign(values.begin(), values.end());
    bp.sd.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      bp.sd[i] = std::max(sd_floor, sd_fraction * std::abs(values[i]));
  }
  return p;
}

RateCoefficients CoefficientPriors::sample(Rng& rng) const {
  RateCoefficients c;
  for (RateBlock b : kBlocks) {
    auto dst = c.block(b);
    const BlockPrior& p = (*this)[b];
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = std::normal_distribution<double>(p.mean[i], p.sd[i])(rng);
  }
  return c;
}

void FitData::validate() const {
  const int n = months();
  if (n < 1) throw ModelError("fit data: no months");
  if (static_cast<int>(ground.size()) != n)
    throw ModelError("fit data: ground series must cover every covariate month");
  int last = 0;
  for (const auto& a : aerial) {
    if (a.t < 1 || a.t > n) throw ModelError("fit data: aerial survey outside the modelled months");
    if (a.t <= last) throw ModelError("fit data: aerial surveys must be sorted, one per month");
    if (a.total < 0) throw ModelError("fit data: negative aerial total");
    last = a.t;
  }
  for (double m : initial_means.mean)
    if (!(m >= 0.0)) throw ModelError("fit data: initial means must be non-negative");
}

std::vector<RateStatistics> rate_statistics(const Trajectory& traj) {
  std::vector<RateStatistics> out(static_cast<std::size_t>(traj.months()));
  for (int t = 1; t <= traj.months(); ++t) {
    const PopulationState& prev = traj.at(t - 1);
    const PopulationState& next = traj.at(t);
    RateStatistics& s = out[static_cast<std::size_t>(t - 1)];
    s.births = next.newborn();
    s.breeders = next.breeding_pool();
    s.quarter_survivors = next.quarter_total();
    s.quarter_pool = prev.newborn() + prev.quarter_total() - prev.quarter(6);
    s.half_survivors = next.half_total();
    s.half_pool = prev.quarter(6) + prev.half_total() - prev.half(19);
    s.female_survivors = next.female_total() + next.new_female() + next.new_male();
    s.female_pool = prev.female_total() + prev.new_female() + prev.half(19);
    s.male_survivors = next.male();
    s.male_pool = prev.male() + prev.new_male();
    s.recruits_female = next.new_female();
    s.recruits_male = next.new_male();
  }
  return out;
}

namespace {

double bernoulli_terms(Count k, Count n, double p) {
  double out = 0.0;
  if (k > 0) out += static_cast<double>(k) * std::log(p);
  if (n - k > 0) out += static_cast<double>(n - k) * std::log1p(-p);
  return out;
}

}  // namespace

double rate_loglik(RateBlock b, const VitalRates& r, const RateStatistics& s) {
  switch (b) {
    case RateBlock::kBirth: return bernoulli_terms(s.births, s.breeders, r.birth);
    case RateBlock::kQuarter: return bernoulli_terms(s.quarter_survivors, s.quarter_pool, r.quarter);
    case RateBlock::kHalf: return bernoulli_terms(s.half_survivors, s.half_pool, r.half);
    case RateBlock::kAdult:
      return bernoulli_terms(s.female_survivors, s.female_pool, r.adult_female) +
             bernoulli_terms(s.male_survivors, s.male_pool, r.adult_male);
    case RateBlock::kSexRatio:
      return bernoulli_terms(s.recruits_female, s.recruits_female + s.recruits_male, r.female_share);
  }
  return 0.0;
}

double rate_loglik(const VitalRates& r, const RateStatistics& s) {
  double out = 0.0;
  for (RateBlock b : kBlocks) out += rate_loglik(b, r, s);
  return out;
}

PosteriorModel::PosteriorModel(FitData data, CoefficientPriors priors, HyperParams hyper)
    : data_(std::move(data)), priors_(std::move(priors)), hyper_(hyper) {
  data_.validate();
  priors_.validate();
  hyper_.validate();
  aerial_at_.assign(static_cast<std::size_t>(data_.months()) + 1, -1);
  for (std::size_t j = 0; j < data_.aerial.size(); ++j)
    aerial_at_[static_cast<std::size_t>(data_.aerial[j].t)] = static_cast<int>(j);
}

std::vector<VitalRates> PosteriorModel::rates(const RateCoefficients& coefs) const {
  std::vector<VitalRates> out;
  out.reserve(data_.covariates.size());
  for (const auto& cov : data_.covariates) out.push_back(adjusted_rates(cov, coefs, hyper_));
  return out;
}

double PosteriorModel::Breakdown::total() const {
  return initial + transition + ground + aerial + coef_prior + sigma2_prior + k_prior;
}

double PosteriorModel::transition_factor(const ChainState& s, int t, int term,
                                         const RateLogs& logs) const {
  return transition_term_log_pmf(term, s.trajectory.at(t - 1), s.trajectory.at(t), logs);
}

double PosteriorModel::ground_factor(const ChainState& s, int t, int size_class) const {
  const auto& obs = data_.ground[static_cast<std::size_t>(t - 1)];
  if (!obs) return 0.0;
  const auto c = static_cast<std::size_t>(size_class);
  const Count latent = s.trajectory.at(t).class_total(size_class);
  return ground_class_loglik(latent, (*obs)[c], s.lambdas[static_cast<std::size_t>(t - 1)][c],
                             s.sigma2);
}

double PosteriorModel::ground_latent_factor(const ChainState& s, int t, int size_class) const {
  const auto& obs = data_.ground[static_cast<std::size_t>(t - 1)];
  if (!obs) return 0.0;
  const auto c = static_cast<std::size_t>(size_class);
  const Count latent = s.trajectory.at(t).class_total(size_class);
  if (latent == 0) return (*obs)[c] > 0 ? kNegInf : 0.0;
  return ground_class_gamma_term(latent, s.lambdas[static_cast<std::size_t>(t - 1)][c], s.sigma2);
}

double PosteriorModel::ground_marginal_factor(const ChainState& s, int t, int size_class) const {
  const auto& obs = data_.ground[static_cast<std::size_t>(t - 1)];
  if (!obs) return 0.0;
  return ground_class_marginal(s.trajectory.at(t).class_total(size_class),
                               (*obs)[static_cast<std::size_t>(size_class)], s.sigma2);
}

double PosteriorModel::aerial_factor(const ChainState& s, int t) const {
  const int j = aerial_index(t);
  if (j < 0) return 0.0;
  const auto ju = static_cast<std::size_t>(j);
  return aerial_loglik(s.trajectory.at(t).total(), s.k_t[ju], data_.aerial[ju].total,
                       s.aerial_lambda[ju], hyper_.sigma_t, hyper_.aerial_rate);
}

double PosteriorModel::sigma2_prior(double sigma2) const {
  return gamma_log_pdf(sigma2, hyper_.sigma2_shape, hyper_.sigma2_rate);
}

double PosteriorModel::k_prior(double k) const {
  return beta_log_pdf(k, hyper_.k_alpha, hyper_.k_beta);
}

PosteriorModel::Breakdown PosteriorModel::breakdown(const ChainState& s) const {
  Breakdown b;
  b.initial = initial_log_density(s.trajectory.initial, data_.initial_means);
  const auto all_rates = rates(s.coefs);
  for (int t = 1; t <= months(); ++t) {
    const RateLogs logs = RateLogs::from(all_rates[static_cast<std::size_t>(t - 1)]);
    for (int term = 0; term < kTermCount; ++term) b.transition += transition_factor(s, t, term, logs);
    for (int c = 0; c < kClassCount; ++c) b.ground += ground_factor(s, t, c);
    b.aerial += aerial_factor(s, t);
  }
  b.coef_prior = priors_.log_density(s.coefs);
  b.sigma2_prior = sigma2_prior(s.sigma2);
  for (double k : s.k_t) b.k_prior += k_prior(k);
  return b;
}

double PosteriorModel::joint_log_density(const ChainState& s) const {
  const double v = breakdown(s).total();
  return std::isnan(v) ? kNegInf : v;
}

double PosteriorModel::marginal_log_density(const ChainState& s) const {
  Breakdown b = breakdown(s);
  b.ground = 0.0;
  for (int t = 1; t <= months(); ++t)
    for (int c = 0; c < kClassCount; ++c) b.ground += ground_marginal_factor(s, t, c);
  const double v = b.total();
  return std::isnan(v) ? kNegInf : v;
}

void PosteriorModel::conform(ChainState& s) const {
  s.lambdas.resize(static_cast<std::size_t>(months()), {1.0, 1.0, 1.0, 1.0, 1.0});
  s.aerial_lambda.resize(data_.aerial.size(), 1.0);
  s.k_t.resize(data_.aerial.size(), hyper_.k_alpha / (hyper_.k_alpha + hyper_.k_beta));
}

ChainState PosteriorModel::initial_state(const RateCoefficients& coefs) const {
  Trajectory traj;
  PopulationState& t0 = traj.initial;
  for (int slot = 0; slot < kInitialSlotCount; ++slot) {
    const double m = data_.initial_means.mean[static_cast<std::size_t>(slot)];
    t0.n[static_cast<std::size_t>(slot)] = std::max<Count>(0, static_cast<Count>(std::llround(m)));
  }
  t0.newborn() = std::min(t0.newborn(), t0.breeding_pool());
  const auto all_rates = rates(coefs);
  for (int t = 1; t <= months(); ++t)
    traj.states.push_back(project(traj.at(t - 1), all_rates[static_cast<std::size_t>(t - 1)]));
  return state_with(std::move(traj), coefs, hyper_.sigma2_shape / hyper_.sigma2_rate);
}

ChainState PosteriorModel::state_with(Trajectory trajectory, const RateCoefficients& coefs,
                                      double sigma2, std::span<const double> k_t) const {
  if (trajectory.months() != months()) throw ModelError("state_with: trajectory length mismatch");
  ChainState s;
  s.trajectory = std::move(trajectory);
  s.coefs = coefs;
  s.sigma2 = sigma2;
  conform(s);
  if (!k_t.empty()) {
    if (k_t.size() != s.k_t.size()) throw ModelError("state_with: one K_t per aerial survey");
    std::copy(k_t.begin(), k_t.end(), s.k_t.begin());
  }
  for (int t = 1; t <= months(); ++t) {
    const auto& obs = data_.ground[static_cast<std::size_t>(t - 1)];
    if (!obs) continue;
    const auto x = s.trajectory.at(t).class_totals();
    for (std::size_t c = 0; c < kClassCount; ++c)
      s.lambdas[static_cast<std::size_t>(t - 1)][c] =
          std::max(0.5, 0.5 * static_cast<double>((*obs)[c] + x[c]));
  }
  for (std::size_t j = 0; j < data_.aerial.size(); ++j) {
    const double expected = s.k_t[j] * static_cast<double>(s.trajectory.at(data_.aerial[j].t).total());
    s.aerial_lambda[j] = std::max(0.5, 0.5 * (static_cast<double>(data_.aerial[j].total) + expected));
  }
  return s;
}

}  // namespace demodyn
