#include "demodyn/validation.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace demodyn {

void SurveyUnits::validate() const {
  double total = 0.0;
  for (const auto& u : units) {
    if (!(u.area > 0.0)) throw ModelError("survey unit " + u.id + ": area must be positive");
    if (!(u.count >= 0.0)) throw ModelError("survey unit " + u.id + ": count must be non-negative");
    total += u.area;
  }
  if (total > frame_area * (1.0 + 1e-12))
    throw ModelError("survey units cover more than the frame area");
  if (frame_units < static_cast<double>(units.size()))
    throw ModelError("frame has fewer units than the sample");
}

long BootstrapPlan::selection_count(int replicate, std::size_t unit) const {
  const auto& sel = selections.at(static_cast<std::size_t>(replicate));
  return static_cast<long>(std::count(sel.begin(), sel.end(), unit));
}

std::vector<long> BootstrapPlan::unit_totals() const {
  std::vector<long> totals(n_units, 0);
  for (const auto& sel : selections)
    for (std::size_t i : sel) ++totals[i];
  return totals;
}

BootstrapPlan balanced_bootstrap(std::size_t n_units, int replicates, Rng& rng) {
  if (replicates <= 0) throw ModelError("balanced bootstrap: B must be positive");
  if (n_units == 0) throw ModelError("balanced bootstrap: no units");
  BootstrapPlan plan;
  plan.n_units = n_units;
  plan.replicates = replicates;
  std::vector<std::size_t> pooled;
  pooled.reserve(n_units * static_cast<std::size_t>(replicates));
  for (int b = 0; b < replicates; ++b)
    for (std::size_t i = 0; i < n_units; ++i) pooled.push_back(i);
  std::shuffle(pooled.begin(), pooled.end(), rng);
  plan.selections.resize(static_cast<std::size_t>(replicates));
  for (std::size_t b = 0; b < plan.selections.size(); ++b)
    plan.selections[b].assign(pooled.begin() + static_cast<std::ptrdiff_t>(b * n_units),
                              pooled.begin() + static_cast<std::ptrdiff_t>((b + 1) * n_units));
  return plan;
}

BootstrapPlan balanced_bootstrap(const SurveyUnits& units, int replicates, Rng& rng) {
  return balanced_bootstrap(units.size(), replicates, rng);
}

SurveyUnits bootstrap_sample(const SurveyUnits& units, const BootstrapPlan& plan, int replicate) {
  SurveyUnits out;
  out.frame_area = units.frame_area;
  out.frame_units = units.frame_units;
  for (std::size_t i : plan.selections.at(static_cast<std::size_t>(replicate)))
    out.units.push_back(units.units.at(i));
  return out;
}

RatioEstimate jolly_method2(const SurveyUnits& sample) {
  double sz = 0.0, sy = 0.0;
  for (const auto& u : sample.units) {
    sz += u.area;
    sy += u.count;
  }
  if (!(sz > 0.0)) throw ModelError("jolly_method2: total sampled area is zero");
  RatioEstimate r;
  r.ratio = sy / sz;
  r.estimate = sample.frame_area * r.ratio;
  const std::size_t n = sample.size();
  if (n < 2) return r;

  // Residuals d_i = y_i - R z_i have mean zero, and their sample variance equals
  // s_y^2 - 2 R s_zy + R^2 s_z^2.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& u : sample.units) {
    lo = std::min(lo, u.count / u.area);
    hi = std::max(hi, u.count / u.area);
  }
  if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) return r;
  double ss = 0.0;
  for (const auto& u : sample.units) {
    const double d = u.count - r.ratio * u.area;
    ss += d * d;
  }
  const double nn = static_cast<double>(n);
  const double big_n = sample.frame_units;
  const double var = big_n * (big_n - nn) / nn * ss / (nn - 1.0);
  r.se = std::sqrt(std::max(0.0, var));
  return r;
}

std::vector<double> interpolate_monthly(std::span<const std::pair<int, double>> anchors, int months) {
  if (anchors.size() < 2) throw ModelError("interpolation needs at least two survey anchors");
  std::vector<std::pair<int, double>> a(anchors.begin(), anchors.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out(static_cast<std::size_t>(months));
  std::size_t j = 0;
  for (int t = 1; t <= months; ++t) {
    double v;
    if (t <= a.front().first) {
      v = a.front().second;
    } else if (t >= a.back().first) {
      v = a.back().second;
    } else {
      while (a[j + 1].first < t) ++j;
      const auto [t0, v0] = a[j];
      const auto [t1, v1] = a[j + 1];
      v = t1 == t0 ? v1 : v0 + (v1 - v0) * static_cast<double>(t - t0) / static_cast<double>(t1 - t0);
    }
    out[static_cast<std::size_t>(t - 1)] = v;
  }
  return out;
}

namespace {

PopulationState rescale(const PopulationState& s, double factor) {
  PopulationState out;
  for (std::size_t i = 0; i < out.n.size(); ++i)
    out.n[i] = static_cast<Count>(std::llround(static_cast<double>(s.n[i]) * factor));
  out.newborn() = std::min(out.newborn(), out.breeding_pool());
  return out;
}

}  // namespace

SyntheticSeries generate_synthetic_series(std::span<const std::pair<int, double>> anchors,
                                          std::span<const CovariateRecord> covariates,
                                          const RateCoefficients& coefs, const HyperParams& hyper,
                                          const std::array<double, kClassCount>& proportions,
                                          double sigma2, Rng& rng, TrackingMode mode) {
  const int months = static_cast<int>(covariates.size());
  if (months < 1) throw ModelError("synthetic series: no covariate months");
  SyntheticSeries out;
  out.target = interpolate_monthly(anchors, months);
  const InitialStateMeans means =
      initial_means_from_proportions(proportions, out.target.front(), hyper.init_var);
  Simulation sim = simulate_trajectory(covariates, coefs, hyper, means, rng);
  out.trajectory = std::move(sim.trajectory);
  out.covariates = std::move(sim.covariates);
  if (mode == TrackingMode::kPerMonth) {
    for (int t = 1; t <= months; ++t) {
      PopulationState& st = out.trajectory.at(t);
      const double b = static_cast<double>(st.total());
      if (b > 0.0) st = rescale(st, out.target[static_cast<std::size_t>(t - 1)] / b);
    }
  }
  for (int t = 1; t <= months; ++t) {
    const GroundDraw g = sample_ground_observation(out.trajectory.at(t), sigma2, rng);
    out.ground.records.push_back({covariates[static_cast<std::size_t>(t - 1)].date, g.counts});
  }
  return out;
}

SimulatedObservations simulate_observations(const Trajectory& trajectory, double sigma2,
                                            const HyperParams& hyper,
                                            std::span<const int> aerial_months, Rng& rng,
                                            std::span<const int> missing) {
  SimulatedObservations out;
  const int months = trajectory.months();
  out.ground.resize(static_cast<std::size_t>(months));
  for (int t = 1; t <= months; ++t) {
    const GroundDraw g = sample_ground_observation(trajectory.at(t), sigma2, rng);
    if (std::find(missing.begin(), missing.end(), t) == missing.end())
      out.ground[static_cast<std::size_t>(t - 1)] = g.counts;
  }
  std::vector<int> am(aerial_months.begin(), aerial_months.end());
  std::sort(am.begin(), am.end());
  am.erase(std::unique(am.begin(), am.end()), am.end());
  for (int t : am) {
    if (t < 1 || t > months) throw ModelError("aerial survey month outside the trajectory");
    const double k = sample_beta(rng, hyper.k_alpha, hyper.k_beta);
    const double expected = k * static_cast<double>(trajectory.at(t).total());
    double lambda = 0.0;
    if (expected > 0.0) {
      const double shape = expected * expected / (hyper.sigma_t * hyper.sigma_t);
      lambda = sample_gamma(rng, shape, aerial_gamma_rate(expected, hyper.sigma_t, hyper.aerial_rate));
    }
    out.aerial.push_back({t, sample_poisson(rng, lambda), hyper.sigma_t});
    out.k_t.push_back(k);
  }
  return out;
}

ImportanceWeights importance_weights(std::span<const double> log_new, std::span<const double> log_ref) {
  if (log_new.size() != log_ref.size()) throw std::invalid_argument("importance weights: size mismatch");
  ImportanceWeights w;
  const std::size_t n = log_new.size();
  std::vector<double> lw(n, kNegInf);
  double top = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = log_new[j] - log_ref[j];
    if (std::isfinite(v)) {
      lw[j] = v;
      top = std::max(top, v);
    }
  }
  w.weights.assign(n, 0.0);
  if (!std::isfinite(top)) {
    w.degenerate = true;
    return w;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w.weights[j] = std::isfinite(lw[j]) ? std::exp(lw[j] - top) : 0.0;
    sum += w.weights[j];
  }
  double sq = 0.0;
  for (double& x : w.weights) {
    x /= sum;
    sq += x * x;
  }
  w.ess = 1.0 / sq;
  return w;
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t n, Rng& rng) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.empty() ? 0.0 : cdf.back();
  if (!(total > 0.0)) throw ModelError("resampling: weights sum to zero");
  std::uniform_real_distribution<double> u(0.0, total);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
    out[i] = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), weights.size() - 1);
  }
  return out;
}

PopulationRefit irmcmc_refit_population(const std::vector<ChainState>& reference,
                                        const PosteriorModel& reference_model,
                                        const PosteriorModel& target, const IrmcmcConfig& cfg,
                                        const ChainConfig& fallback_chain) {
  if (reference.empty()) throw ModelError("irmcmc: no reference states");
  ChainConfig refine_cfg = fallback_chain;
  refine_cfg.adapt = false;
  // With collapsed intensities the refinement redraws lambda, so the weights use the
  // lambda-free density.
  const bool collapsed = fallback_chain.collapse_lambda;
  auto log_ref = [&](const ChainState& s) {
    return collapsed ? reference_model.marginal_log_density(s) : reference_model.joint_log_density(s);
  };
  auto log_new = [&](ChainState s) {
    target.conform(s);
    return collapsed ? target.marginal_log_density(s) : target.joint_log_density(s);
  };
  auto refine = [&](ChainState& s, long iters, Rng& rng) {
    Sampler sampler(target, s, refine_cfg, std::move(rng));
    for (long i = 0; i < iters; ++i) sampler.iterate();
    s = sampler.state();
  };
  const auto ir = irmcmc_refit(reference, log_ref, log_new, refine, cfg);

  PopulationRefit out;
  out.weights = ir.weights;
  if (ir.fallback) {
    out.used_full_chain = true;
    out.reason = ir.reason;
    ChainState start = reference.back();
    target.conform(start);
    if (!std::isfinite(target.joint_log_density(start))) start = target.initial_state(start.coefs);
    ChainResult full = run_chain(target, start, fallback_chain);
    out.samples = std::move(full.samples);
    out.summary = std::move(full.summary);
    return out;
  }
  out.samples = SampleTable(sample_names(target));
  Rng predictive = make_stream(cfg.seed, ir.draws.size() + 1);
  std::vector<double> row;
  for (std::size_t i = 0; i < ir.draws.size(); ++i) {
    row.clear();
    record_draw(target, ir.draws[i], predictive, row);
    out.samples.add_row(static_cast<long>(i), row);
  }
  out.summary = posterior_summary(out.samples);
  return out;
}

double coverage_report(std::span<const double> estimates, std::span<const double> lower,
                       std::span<const double> upper) {
  if (estimates.empty()) throw ModelError("coverage: no estimates");
  if (lower.size() != estimates.size() || upper.size() != estimates.size())
    throw ModelError("coverage: band length mismatch");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (estimates[i] >= lower[i] && estimates[i] <= upper[i]) ++inside;
  return 100.0 * static_cast<double>(inside) / static_cast<double>(estimates.size());
}

double coverage_report(std::span<const double> estimates, const PosteriorSummary& summary,
                       const std::string& prefix) {
  std::vector<double> lo, hi;
  for (std::size_t t = 1; t <= estimates.size(); ++t) {
    const QuantitySummary& q = summary.get(prefix + "[" + std::to_string(t) + "]");
    lo.push_back(q.lower);
    hi.push_back(q.upper);
  }
  return coverage_report(estimates, lo, hi);
}

void parallel_for_index(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace demodyn
