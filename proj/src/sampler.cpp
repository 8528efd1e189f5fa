#include "demodyn/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "demodyn/vital_rates.hpp"

namespace demodyn {

namespace {

constexpr RateBlock kBlocks[] = {RateBlock::kBirth, RateBlock::kQuarter, RateBlock::kHalf,
                                 RateBlock::kAdult, RateBlock::kSexRatio};

struct Children {
  std::array<int, 3> term{};
  int count = 0;
};

// Transition terms of month t + 1 whose pool contains slot s of month t.
constexpr Children children_of(int slot) {
  Children c;
  auto add = [&c](int term) { c.term[static_cast<std::size_t>(c.count++)] = term; };
  if (slot == kNewbornSlot) {
    add(quarter_slot(2));
    add(female_slot(1));
    add(female_slot(12));
  } else if (slot < kFirstFemaleSlot) {
    add(slot == half_slot(19) ? kRecruitTerm : slot + 1);
  } else if (slot < kMaleSlot) {
    const int l = slot - kFirstFemaleSlot + 1;
    add(l >= 11 ? female_slot(12) : slot + 1);
  } else if (slot == kMaleSlot || slot == kNewMaleSlot) {
    add(kMaleSlot);
  } else {
    add(female_slot(4));
  }
  return c;
}

constexpr std::array<Children, kSlotCount> kChildren = [] {
  std::array<Children, kSlotCount> out{};
  for (int s = 0; s < kSlotCount; ++s) out[static_cast<std::size_t>(s)] = children_of(s);
  return out;
}();

constexpr bool feeds_breeding_pool(int slot) {
  return slot == female_slot(11) || slot == female_slot(12);
}

// Cohort chains: juveniles, the female cycle, adult males.
constexpr int kCohortChains = 3;

double normal01(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

int next_cohort_slot(int slot) {
  if (slot >= kFirstQuarterSlot && slot < half_slot(19)) return slot + 1;
  if (slot >= kFirstFemaleSlot && slot < kMaleSlot) return std::min(slot + 1, female_slot(12));
  if (slot == kMaleSlot) return kMaleSlot;
  return -1;
}

void ChainConfig::validate() const {
  if (burn_in < 0 || n_iter <= burn_in)
    throw ModelError("chain config: need 0 <= burn_in < n_iter");
  if (thin < 1) throw ModelError("chain config: thin must be >= 1");
  if (latent_step < 1) throw ModelError("chain config: latent_step must be >= 1");
  if (!(tmcmc_multiplier > 0.0)) throw ModelError("chain config: TMCMC scales must be positive");
  if (cohort_max_length < 1) throw ModelError("chain config: cohort_max_length must be >= 1");
  if (trace_every < 1 || adapt_every < 1)
    throw ModelError("chain config: trace_every and adapt_every must be >= 1");
}

long ChainConfig::kept_draws() const { return (n_iter - burn_in - 1) / thin + 1; }

Sampler::Sampler(const PosteriorModel& model, ChainState init, const ChainConfig& cfg, Rng rng)
    : model_(model), state_(std::move(init)), cfg_(cfg), rng_(std::move(rng)) {
  model_.conform(state_);
  active_.fill(true);
  for (auto& s : latent_scale_) s = AdaptiveScale(cfg_.latent_step, 0.3);
  for (auto& s : cohort_scale_) s = AdaptiveScale(cfg_.latent_step, 0.3);
  birth_scale_ = AdaptiveScale(cfg_.latent_step, 0.3);

  const auto& data = model_.data();
  lambda_scale_.resize(static_cast<std::size_t>(model_.months()));
  for (int t = 1; t <= model_.months(); ++t) {
    const auto& obs = data.ground[static_cast<std::size_t>(t - 1)];
    for (std::size_t c = 0; c < kClassCount; ++c) {
      const double n = obs ? static_cast<double>((*obs)[c]) : 0.0;
      lambda_scale_[static_cast<std::size_t>(t - 1)][c] = AdaptiveScale(1.0 / std::sqrt(n + 1.0), 0.44);
    }
  }
  for (auto& s : block_scale_) s = AdaptiveScale(cfg_.tmcmc_multiplier, 0.3);
  sigma2_scale_ = AdaptiveScale(1.0 / std::sqrt(model_.hyper().sigma2_shape + 1.0), 0.44);
  for (const auto& a : data.aerial) {
    k_scale_.emplace_back(0.02, 0.44);
    aerial_lambda_scale_.emplace_back(1.0 / std::sqrt(static_cast<double>(a.total) + 1.0), 0.44);
  }
  refresh_rates();
}

void Sampler::refresh_rates() {
  rates_ = model_.rates(state_.coefs);
  logs_.resize(rates_.size());
  for (std::size_t i = 0; i < rates_.size(); ++i) logs_[i] = RateLogs::from(rates_[i]);
}

double Sampler::latent_local_log_density(int t, int slot) const {
  const int months = model_.months();
  double out = 0.0;
  if (t == 0) {
    const auto& means = model_.data().initial_means;
    out += initial_slot_log_density(slot, state_.trajectory.initial, means);
    if (feeds_breeding_pool(slot))
      out += initial_slot_log_density(kNewbornSlot, state_.trajectory.initial, means);
  } else {
    const RateLogs& logs = logs_[static_cast<std::size_t>(t - 1)];
    out += model_.transition_factor(state_, t, term_of_slot(slot), logs);
    if (feeds_breeding_pool(slot)) out += model_.transition_factor(state_, t, kNewbornSlot, logs);
    const int c = slot_class(slot);
    if (c >= 0) {
      out += ground_term(t, c);
      out += model_.aerial_factor(state_, t);
    }
  }
  if (t < months) {
    const Children& ch = kChildren[static_cast<std::size_t>(slot)];
    const RateLogs& next_logs = logs_[static_cast<std::size_t>(t)];
    for (int i = 0; i < ch.count; ++i)
      out += model_.transition_factor(state_, t + 1, ch.term[static_cast<std::size_t>(i)], next_logs);
  }
  return out;
}

double Sampler::ground_term(int t, int c) const {
  return cfg_.collapse_lambda ? model_.ground_marginal_factor(state_, t, c)
                              : model_.ground_latent_factor(state_, t, c);
}

double Sampler::cohort_local_log_density(int t0, int slot, int length) const {
  const int months = model_.months();
  const auto& means = model_.data().initial_means;
  double out = 0.0;
  int s = slot;
  for (int k = 0; k < length; ++k) {
    const int t = t0 + k;
    if (t == 0) {
      out += initial_slot_log_density(s, state_.trajectory.initial, means);
      if (feeds_breeding_pool(s)) out += initial_slot_log_density(kNewbornSlot, state_.trajectory.initial, means);
    } else {
      const RateLogs& logs = logs_[static_cast<std::size_t>(t - 1)];
      out += model_.transition_factor(state_, t, term_of_slot(s), logs);
      if (feeds_breeding_pool(s)) out += model_.transition_factor(state_, t, kNewbornSlot, logs);
      out += ground_term(t, slot_class(s));
      out += model_.aerial_factor(state_, t);
    }
    if (t == months) break;
    // Terms of the next month whose pool holds this site, less the next site's own term.
    const int next = k + 1 < length ? next_cohort_slot(s) : -1;
    const Children& ch = kChildren[static_cast<std::size_t>(s)];
    const RateLogs& next_logs = logs_[static_cast<std::size_t>(t)];
    for (int i = 0; i < ch.count; ++i) {
      const int term = ch.term[static_cast<std::size_t>(i)];
      if (term != next) out += model_.transition_factor(state_, t + 1, term, next_logs);
    }
    s = next;
  }
  return out;
}

std::vector<SiteShift> birth_path(int t0, int juvenile_length, int female_length, Count delta) {
  std::vector<SiteShift> out{{t0, kNewbornSlot, delta}};
  for (int k = 1, slot = quarter_slot(2); k <= juvenile_length && slot >= 0; ++k, slot = next_cohort_slot(slot))
    out.push_back({t0 + k, slot, delta});
  for (int k = 1; k <= std::min(female_length, 11); ++k) {
    out.push_back({t0 + k, female_slot(k), delta});
    out.push_back({t0 + k, female_slot(12), -delta});
  }
  return out;
}

double Sampler::sites_local_log_density(std::span<const SiteShift> sites) const {
  const int months = model_.months();
  std::vector<std::pair<int, int>> terms, ground;
  std::vector<int> aerial;
  for (const SiteShift& x : sites) {
    const int own = x.t == 0 ? x.slot : term_of_slot(x.slot);
    terms.emplace_back(x.t, own);
    if (feeds_breeding_pool(x.slot)) terms.emplace_back(x.t, kNewbornSlot);
    if (x.t > 0 && slot_class(x.slot) >= 0) {
      ground.emplace_back(x.t, slot_class(x.slot));
      aerial.push_back(x.t);
    }
    if (x.t < months) {
      const Children& ch = kChildren[static_cast<std::size_t>(x.slot)];
      for (int i = 0; i < ch.count; ++i) terms.emplace_back(x.t + 1, ch.term[static_cast<std::size_t>(i)]);
    }
  }
  auto dedupe = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(terms);
  dedupe(ground);
  dedupe(aerial);
  const auto& means = model_.data().initial_means;
  double out = 0.0;
  for (const auto& [t, term] : terms) {
    out += t == 0 ? initial_slot_log_density(term, state_.trajectory.initial, means)
                  : model_.transition_factor(state_, t, term, logs_[static_cast<std::size_t>(t - 1)]);
  }
  for (const auto& [t, c] : ground) out += ground_term(t, c);
  for (int t : aerial) out += model_.aerial_factor(state_, t);
  return out;
}

void Sampler::update_births() {
  const int months = model_.months();
  if (!active_[kNewbornSlot]) return;
  for (int t0 = 0; t0 < months; ++t0) {
    const int room = months - t0;
    const int juvenile = std::uniform_int_distribution<int>(1, std::min(room, half_slot(19) - kFirstQuarterSlot + 1))(rng_);
    const int female = std::uniform_int_distribution<int>(1, std::min(room, 11))(rng_);
    const long d = std::max<long>(1, std::lround(birth_scale_.value()));
    const long u = std::uniform_int_distribution<long>(0, 2 * d - 1)(rng_);
    const Count delta = u < d ? u - d : u - d + 1;
    const auto sites = birth_path(t0, juvenile, female, delta);
    bool feasible = true;
    for (const SiteShift& x : sites) {
      if (!active_[static_cast<std::size_t>(x.slot)] ||
          state_.trajectory.at(x.t).n[static_cast<std::size_t>(x.slot)] + x.delta < 0) {
        feasible = false;
        break;
      }
    }
    bool accepted = false;
    if (feasible) {
      auto apply = [&](Count sign) {
        for (const SiteShift& x : sites) state_.trajectory.at(x.t).n[static_cast<std::size_t>(x.slot)] += sign * x.delta;
      };
      const double before = sites_local_log_density(sites);
      apply(1);
      accepted = metropolis_accept(sites_local_log_density(sites) - before, rng_);
      if (!accepted) apply(-1);
    }
    birth_scale_.record(accepted);
    birth_count_.add(accepted);
  }
}

void Sampler::update_cohorts() {
  static constexpr std::array<std::pair<int, int>, kCohortChains> kStarts{
      {{kFirstQuarterSlot, half_slot(19)}, {female_slot(1), female_slot(12)}, {kMaleSlot, kMaleSlot}}};
  const int months = model_.months();
  for (int t0 = 0; t0 <= months; ++t0) {
    for (std::size_t chain = 0; chain < kCohortChains; ++chain) {
      const auto [lo, hi] = kStarts[chain];
      const int slot = std::uniform_int_distribution<int>(lo, hi)(rng_);
      // Path length: bounded by the series end and, for juveniles, by recruitment at h19.
      int room = std::min(cfg_.cohort_max_length, months - t0 + 1);
      if (chain == 0) room = std::min(room, half_slot(19) - slot + 1);
      const int length = std::uniform_int_distribution<int>(1, room)(rng_);
      AdaptiveScale& scale = cohort_scale_[chain];
      const long d = std::max<long>(1, std::lround(scale.value()));
      const long u = std::uniform_int_distribution<long>(0, 2 * d - 1)(rng_);
      const Count delta = u < d ? u - d : u - d + 1;

      bool feasible = true;
      for (int k = 0, s = slot; k < length; ++k, s = next_cohort_slot(s)) {
        if (!active_[static_cast<std::size_t>(s)] ||
            state_.trajectory.at(t0 + k).n[static_cast<std::size_t>(s)] + delta < 0) {
          feasible = false;
          break;
        }
      }
      if (!feasible) {
        scale.record(false);
        cohort_count_.add(false);
        continue;
      }
      auto shift = [&](Count by) {
        for (int k = 0, s = slot; k < length; ++k, s = next_cohort_slot(s))
          state_.trajectory.at(t0 + k).n[static_cast<std::size_t>(s)] += by;
      };
      const double before = cohort_local_log_density(t0, slot, length);
      shift(delta);
      const double after = cohort_local_log_density(t0, slot, length);
      const bool accepted = metropolis_accept(after - before, rng_);
      if (!accepted) shift(-delta);
      scale.record(accepted);
      cohort_count_.add(accepted);
    }
  }
}

void Sampler::update_latent_counts() {
  const int months = model_.months();
  for (int t = 0; t <= months; ++t) {
    PopulationState& st = state_.trajectory.at(t);
    const int slots = t == 0 ? kInitialSlotCount : kSlotCount;
    for (int slot = 0; slot < slots; ++slot) {
      if (!active_[static_cast<std::size_t>(slot)]) continue;
      AdaptiveScale& scale = latent_scale_[static_cast<std::size_t>(slot)];
      const long d = std::max<long>(1, std::lround(scale.value()));
      const long u = std::uniform_int_distribution<long>(0, 2 * d - 1)(rng_);
      const Count delta = u < d ? u - d : u - d + 1;
      Count& value = st.n[static_cast<std::size_t>(slot)];
      const Count old = value;
      if (old + delta < 0) {
        scale.record(false);
        latent_count_.add(false);
        continue;
      }
      const double before = latent_local_log_density(t, slot);
      value = old + delta;
      const double after = latent_local_log_density(t, slot);
      const bool accepted = metropolis_accept(after - before, rng_);
      if (!accepted) value = old;
      scale.record(accepted);
      latent_count_.add(accepted);
    }
  }
}

void Sampler::update_lambdas() {
  const auto& data = model_.data();
  for (int t = 1; t <= model_.months(); ++t) {
    const auto& obs = data.ground[static_cast<std::size_t>(t - 1)];
    if (!obs) continue;
    const auto x = state_.trajectory.at(t).class_totals();
    auto& lam = state_.lambdas[static_cast<std::size_t>(t - 1)];
    if (cfg_.collapse_lambda) {
      for (std::size_t c = 0; c < kClassCount; ++c) {
        lam[c] = sample_ground_lambda(x[c], (*obs)[c], state_.sigma2, rng_);
        lambda_count_.add(true);
      }
      continue;
    }
    for (std::size_t c = 0; c < kClassCount; ++c) {
      AdaptiveScale& scale = lambda_scale_[static_cast<std::size_t>(t - 1)][c];
      const double cur = lam[c];
      const double prop = cur * std::exp(scale.value() * normal01(rng_));
      const double lp_cur = ground_class_loglik(x[c], (*obs)[c], cur, state_.sigma2) + std::log(cur);
      const double lp_new = ground_class_loglik(x[c], (*obs)[c], prop, state_.sigma2) + std::log(prop);
      const bool accepted = prop > 0.0 && std::isfinite(prop) && metropolis_accept(lp_new - lp_cur, rng_);
      if (accepted) lam[c] = prop;
      scale.record(accepted);
      lambda_count_.add(accepted);
    }
  }
}

double Sampler::coefficient_target(RateBlock b, std::span<const double> x,
                                   const std::vector<RateStatistics>& stats) const {
  RateCoefficients coefs = state_.coefs;
  auto dst = coefs.block(b);
  std::copy(x.begin(), x.end(), dst.begin());
  double out = model_.priors().block_log_density(b, x);
  const auto& covs = model_.data().covariates;
  for (std::size_t i = 0; i < covs.size(); ++i) {
    VitalRates r = rates_[i];
    update_block_rates(b, covs[i], coefs, model_.hyper(), r);
    out += rate_loglik(b, r, stats[i]);
  }
  return out;
}

std::vector<double> Sampler::block_scales(RateBlock b) const {
  const auto& sd = model_.priors()[b].sd;
  std::vector<double> out(sd.size());
  const double m = block_scale_[static_cast<std::size_t>(b)].value();
  for (std::size_t i = 0; i < sd.size(); ++i) out[i] = m * sd[i];
  return out;
}

void Sampler::update_coefficients() {
  const auto stats = rate_statistics(state_.trajectory);
  for (RateBlock b : kBlocks) {
    const auto bi = static_cast<std::size_t>(b);
    auto current = state_.coefs.block(b);
    std::vector<double> x(current.begin(), current.end());
    const auto scales = block_scales(b);
    const double lp = coefficient_target(b, x, stats);
    const StepResult r = tmcmc_update_block(
        std::span<double>(x), lp,
        [&](std::span<const double> y) { return coefficient_target(b, y, stats); }, scales, rng_);
    if (r.accepted) std::copy(x.begin(), x.end(), current.begin());
    block_scale_[bi].record(r.accepted);
    block_count_[bi].add(r.accepted);
  }
  refresh_rates();
}

void Sampler::update_sigma2() {
  const auto& data = model_.data();
  std::vector<std::pair<std::array<Count, kClassCount>, std::size_t>> observed;
  for (int t = 1; t <= model_.months(); ++t)
    if (data.ground[static_cast<std::size_t>(t - 1)])
      observed.emplace_back(state_.trajectory.at(t).class_totals(), static_cast<std::size_t>(t - 1));
  auto target = [&](double s2) {
    double out = model_.sigma2_prior(s2) + std::log(s2);
    for (const auto& [x, i] : observed)
      for (std::size_t c = 0; c < kClassCount; ++c)
        out += ground_class_gamma_term(x[c], state_.lambdas[i][c], s2);
    return out;
  };
  const double cur = state_.sigma2;
  const double prop = cur * std::exp(sigma2_scale_.value() * normal01(rng_));
  const bool accepted = prop > 0.0 && std::isfinite(prop) && metropolis_accept(target(prop) - target(cur), rng_);
  if (accepted) state_.sigma2 = prop;
  sigma2_scale_.record(accepted);
  sigma2_count_.add(accepted);
}

void Sampler::update_aerial() {
  const auto& data = model_.data();
  const HyperParams& h = model_.hyper();
  for (std::size_t j = 0; j < data.aerial.size(); ++j) {
    const Count region = state_.trajectory.at(data.aerial[j].t).total();
    const Count observed = data.aerial[j].total;
    double& k = state_.k_t[j];
    double& lam = state_.aerial_lambda[j];

    auto k_target = [&](double kk) {
      return aerial_loglik(region, kk, observed, lam, h.sigma_t, h.aerial_rate) + model_.k_prior(kk) +
             std::log(kk) + std::log1p(-kk);
    };
    const double k_prop = 1.0 / (1.0 + std::exp(-(logit(k) + k_scale_[j].value() * normal01(rng_))));
    bool accepted = k_prop > 0.0 && k_prop < 1.0 && metropolis_accept(k_target(k_prop) - k_target(k), rng_);
    if (accepted) k = k_prop;
    k_scale_[j].record(accepted);
    k_count_.add(accepted);

    auto l_target = [&](double ll) {
      return aerial_loglik(region, k, observed, ll, h.sigma_t, h.aerial_rate) + std::log(ll);
    };
    const double l_prop = lam * std::exp(aerial_lambda_scale_[j].value() * normal01(rng_));
    accepted = l_prop > 0.0 && std::isfinite(l_prop) && metropolis_accept(l_target(l_prop) - l_target(lam), rng_);
    if (accepted) lam = l_prop;
    aerial_lambda_scale_[j].record(accepted);
    aerial_lambda_count_.add(accepted);
  }
}

void Sampler::adapt_all() {
  ++adapt_round_;
  for (auto& s : latent_scale_) s.adapt(adapt_round_);
  for (auto& s : cohort_scale_) s.adapt(adapt_round_);
  birth_scale_.adapt(adapt_round_);
  for (auto& row : lambda_scale_)
    for (auto& s : row) s.adapt(adapt_round_);
  for (auto& s : block_scale_) s.adapt(adapt_round_);
  sigma2_scale_.adapt(adapt_round_);
  for (auto& s : k_scale_) s.adapt(adapt_round_);
  for (auto& s : aerial_lambda_scale_) s.adapt(adapt_round_);
}

void Sampler::iterate() {
  ++iteration_;
  update_latent_counts();
  if (cfg_.cohort_moves) update_cohorts();
  if (cfg_.birth_moves) update_births();
  update_lambdas();
  update_coefficients();
  update_sigma2();
  update_aerial();
  if (adapting_ && iteration_ % cfg_.adapt_every == 0) adapt_all();
}

AcceptanceReport Sampler::acceptance() const {
  AcceptanceReport r;
  r.latent = latent_count_.rate();
  r.cohort = cohort_count_.rate();
  r.birth = birth_count_.rate();
  r.lambda = lambda_count_.rate();
  for (std::size_t b = 0; b < kBlockCount; ++b) r.blocks[b] = block_count_[b].rate();
  r.sigma2 = sigma2_count_.rate();
  r.k_t = k_count_.rate();
  r.aerial_lambda = aerial_lambda_count_.rate();
  return r;
}

std::vector<std::string> sample_names(const PosteriorModel& model) {
  std::vector<std::string> names;
  for (RateBlock b : kBlocks)
    for (std::size_t i = 1; i <= block_size(b); ++i)
      names.push_back(std::string(block_name(b)) + "[" + std::to_string(i) + "]");
  names.emplace_back("sigma2");
  for (const auto& a : model.data().aerial) names.push_back("k_t[" + std::to_string(a.t) + "]");
  for (int t = 1; t <= model.months(); ++t) {
    const std::string suffix = "[" + std::to_string(t) + "]";
    for (int c = 0; c < kClassCount; ++c) names.push_back(class_name(c) + suffix);
    names.push_back("total" + suffix);
    names.push_back("eco_total" + suffix);
  }
  return names;
}

void record_draw(const PosteriorModel& model, const ChainState& s, Rng& rng,
                 std::vector<double>& out) {
  for (RateBlock b : kBlocks) {
    const auto v = s.coefs.block(b);
    out.insert(out.end(), v.begin(), v.end());
  }
  out.push_back(s.sigma2);
  out.insert(out.end(), s.k_t.begin(), s.k_t.end());
  const HyperParams& h = model.hyper();
  for (int t = 1; t <= model.months(); ++t) {
    const PopulationState& st = s.trajectory.at(t);
    for (Count x : st.class_totals()) out.push_back(static_cast<double>(x));
    const double total = static_cast<double>(st.total());
    out.push_back(total);
    const int j = model.aerial_index(t);
    const double k = j >= 0 ? s.k_t[static_cast<std::size_t>(j)] : sample_beta(rng, h.k_alpha, h.k_beta);
    out.push_back(k * total);
  }
}

ChainResult run_chain(const PosteriorModel& model, ChainState init, const ChainConfig& cfg) {
  cfg.validate();
  model.conform(init);
  const double lp0 = model.joint_log_density(init);
  if (!std::isfinite(lp0)) throw ModelError("run_chain: non-finite joint density at initialization");

  Sampler sampler(model, std::move(init), cfg, make_stream(cfg.seed, 1));
  Rng predictive = make_stream(cfg.seed, 2);

  ChainResult result;
  result.samples = SampleTable(sample_names(model));
  std::vector<std::string> trace_names{"log_posterior", "sigma2"};
  for (RateBlock b : kBlocks)
    for (std::size_t i = 1; i <= block_size(b); ++i)
      trace_names.push_back(std::string(block_name(b)) + "[" + std::to_string(i) + "]");
  result.traces = SampleTable(trace_names);

  std::vector<double> row;
  auto trace = [&](long it) {
    row.clear();
    const ChainState& s = sampler.state();
    row.push_back(model.joint_log_density(s));
    row.push_back(s.sigma2);
    for (RateBlock b : kBlocks) {
      const auto v = s.coefs.block(b);
      row.insert(row.end(), v.begin(), v.end());
    }
    result.traces.add_row(it, row);
  };
  trace(0);

  for (long it = 1; it <= cfg.n_iter; ++it) {
    sampler.set_adapting(cfg.adapt && it <= cfg.burn_in);
    sampler.iterate();
    if (it > cfg.burn_in && (it - cfg.burn_in - 1) % cfg.thin == 0) {
      row.clear();
      record_draw(model, sampler.state(), predictive, row);
      result.samples.add_row(it, row);
      if (cfg.keep_states) result.states.push_back(sampler.state());
    }
    if (it % cfg.trace_every == 0) trace(it);
  }
  result.summary = posterior_summary(result.samples);
  result.acceptance = sampler.acceptance();
  result.final_state = sampler.state();
  return result;
}

}  // namespace demodyn
