#include "demodyn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

#include "demodyn/covariates.hpp"
#include "demodyn/reference.hpp"

namespace demodyn {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.resolve(cfg.output);
  fs::create_directories(dir);
  return dir;
}

std::vector<CovariateRecord> covariates_for(const RunConfig& cfg, YearMonth first, int months,
                                            std::vector<std::string>& warnings) {
  const auto all = load_covariates(cfg.resolve(cfg.covariates), &warnings);
  std::map<int, const CovariateRecord*> by_month;
  for (const auto& c : all) by_month[c.date.serial()] = &c;
  std::vector<CovariateRecord> out;
  out.reserve(static_cast<std::size_t>(months));
  for (int i = 0; i < months; ++i) {
    const YearMonth d = first.plus(i);
    const auto it = by_month.find(d.serial());
    if (it == by_month.end())
      throw IoError("no covariates for " + format_year_month(d) +
                    " (weather needs 11 earlier months of history)");
    out.push_back(*it->second);
  }
  return out;
}

bool finite_summary(const PosteriorSummary& s) {
  for (const auto& q : s.quantities)
    if (!std::isfinite(q.mean) || !std::isfinite(q.sd) || !std::isfinite(q.lower) || !std::isfinite(q.upper))
      return false;
  return true;
}

bool is_parameter(const std::string& name) {
  return name.rfind("gamma_", 0) == 0 || name == "sigma2" || name.rfind("k_t[", 0) == 0;
}

SampleTable parameter_columns(const SampleTable& all) {
  std::vector<std::size_t> keep;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < all.columns(); ++c)
    if (is_parameter(all.names()[c])) {
      keep.push_back(c);
      names.push_back(all.names()[c]);
    }
  SampleTable out(names);
  std::vector<double> row(keep.size());
  for (std::size_t r = 0; r < all.rows(); ++r) {
    for (std::size_t i = 0; i < keep.size(); ++i) row[i] = all.at(r, keep[i]);
    out.add_row(all.iterations()[r], row);
  }
  return out;
}

PosteriorSummary parameter_summary(const PosteriorSummary& s) {
  PosteriorSummary out;
  for (const auto& q : s.quantities)
    if (is_parameter(q.name)) out.quantities.push_back(q);
  return out;
}

std::string indexed(const std::string& name, int t) { return name + "[" + std::to_string(t) + "]"; }

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_trajectory(const fs::path& path, const std::vector<YearMonth>& months,
                      const PosteriorSummary& s) {
  auto out = open_csv(path);
  out << "year,month,class,mean,lower,upper\n";
  for (int t = 1; t <= static_cast<int>(months.size()); ++t) {
    const YearMonth d = months[static_cast<std::size_t>(t - 1)];
    auto row = [&](const std::string& label, const std::string& name) {
      const auto& q = s.get(indexed(name, t));
      out << d.year << ',' << d.month << ',' << label << ',' << format_number(q.mean) << ','
          << format_number(q.lower) << ',' << format_number(q.upper) << '\n';
    };
    for (int c = 0; c < kClassCount; ++c) row(class_name(c), class_name(c));
    row("total", "total");
  }
  finish(out, path);
}

void write_acceptance(std::ostream& os, const AcceptanceReport& a) {
  os << "acceptance rates\n";
  os << "  latent counts  " << format_number(a.latent) << '\n';
  os << "  cohort paths   " << format_number(a.cohort) << '\n';
  os << "  birth paths    " << format_number(a.birth) << '\n';
  os << "  lambda         " << format_number(a.lambda) << '\n';
  for (int b = 0; b < kBlockCount; ++b)
    os << "  " << block_name(static_cast<RateBlock>(b)) << std::string(15 - std::string(block_name(static_cast<RateBlock>(b))).size(), ' ')
       << format_number(a.blocks[static_cast<std::size_t>(b)]) << '\n';
  os << "  sigma2         " << format_number(a.sigma2) << '\n';
  os << "  k_t            " << format_number(a.k_t) << '\n';
  os << "  aerial lambda  " << format_number(a.aerial_lambda) << '\n';
}

ChainResult fit_chain(const RunConfig& cfg, const FitInputs& in, std::ostream& log) {
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  const PosteriorModel model(in.data, cfg.priors, cfg.hyper);
  const ChainState init = model.initial_state(cfg.start_coefficients());
  log << "fitting " << in.months.size() << " months (" << format_year_month(in.months.front()) << " to "
      << format_year_month(in.months.back()) << "), " << cfg.chain.n_iter << " iterations, burn-in "
      << cfg.chain.burn_in << ", thin " << cfg.chain.thin << '\n';
  return run_chain(model, init, cfg.chain);
}

}  // namespace

void apply_overrides(RunConfig& cfg, const CommandOverrides& o) {
  if (o.seed) cfg.chain.seed = *o.seed;
  if (o.iters) cfg.chain.n_iter = *o.iters;
  if (o.burn_in) cfg.chain.burn_in = *o.burn_in;
  if (o.aerial_rate) cfg.hyper.aerial_rate = *o.aerial_rate;
  if (o.out) cfg.output = fs::absolute(*o.out);
}

FitInputs prepare_fit_inputs(const RunConfig& cfg) {
  FitInputs in;
  GroundSeries ground = load_ground(cfg.resolve(cfg.ground));
  if (ground.records.empty()) throw IoError("ground series has no records");
  const YearMonth start = cfg.start.value_or(ground.records.front().date);
  const YearMonth end = cfg.end.value_or(ground.records.back().date);
  if (end < start) throw IoError("fit.end is before fit.start");
  const int T = end.serial() - start.serial() + 1;
  for (int i = 0; i < T; ++i) in.months.push_back(start.plus(i));

  in.data.covariates = covariates_for(cfg, start, T, in.warnings);
  in.data.ground.assign(static_cast<std::size_t>(T), std::nullopt);
  GroundSeries in_range;
  std::vector<std::pair<int, double>> anchors;
  for (const auto& r : ground.records) {
    const int t = r.date.serial() - start.serial() + 1;
    if (t < 1 || t > T) continue;
    in_range.records.push_back(r);
    if (!r.counts) continue;
    in.data.ground[static_cast<std::size_t>(t - 1)] = *r.counts;
    anchors.emplace_back(t, static_cast<double>(r.total()));
  }
  if (anchors.empty()) throw IoError("no observed ground months inside the fitted span");

  std::vector<double> totals(static_cast<std::size_t>(T) + 1);
  if (anchors.size() == 1) {
    std::fill(totals.begin(), totals.end(), anchors.front().second);
  } else {
    const auto monthly = interpolate_monthly(anchors, T);
    std::copy(monthly.begin(), monthly.end(), totals.begin() + 1);
    totals[0] = monthly.front();
  }
  fill_density_covariates(in.data.covariates, totals);

  std::optional<double> first_aerial;
  if (!cfg.aerial.empty()) {
    const AerialSeries aerial = load_aerial(cfg.resolve(cfg.aerial));
    if (!aerial.records.empty()) first_aerial = aerial.records.front().estimate;
    int last_t = 0;
    for (const auto& a : aerial.records) {
      const int t = a.date.serial() - start.serial() + 1;
      if (t < 1 || t > T) continue;
      if (t == last_t) throw IoError("two aerial surveys in " + format_year_month(a.date));
      last_t = t;
      in.data.aerial.push_back({t, static_cast<Count>(std::llround(a.estimate)), a.se});
    }
  }
  const std::optional<double> total0 = cfg.initial_total ? cfg.initial_total : first_aerial;
  if (!total0) throw IoError("fit.initial_total is required when no aerial survey is given");
  in.data.initial_means = estimate_initial_means(in_range, *total0, cfg.hyper.init_var);
  in.data.validate();
  return in;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const SimulateConfig& sc = cfg.simulate;
  std::vector<std::string> warnings;
  const auto covs = covariates_for(cfg, sc.start, sc.months, warnings);
  const InitialStateMeans means =
      initial_means_from_proportions(sc.proportions, sc.initial_total, cfg.hyper.init_var);
  Rng rng = make_stream(cfg.chain.seed, 0);
  const Simulation sim = simulate_trajectory(covs, cfg.start_coefficients(), cfg.hyper, means, rng);
  std::vector<int> aerial_months;
  if (sc.aerial_every > 0)
    for (int t = sc.aerial_every; t <= sc.months; t += sc.aerial_every) aerial_months.push_back(t);
  const SimulatedObservations obs = simulate_observations(sim.trajectory, sc.sigma2, cfg.hyper, aerial_months, rng);

  GroundSeries ground;
  for (int t = 1; t <= sc.months; ++t)
    ground.records.push_back({sc.start.plus(t - 1), obs.ground[static_cast<std::size_t>(t - 1)]});
  AerialSeries aerial;
  for (const auto& a : obs.aerial)
    aerial.records.push_back({sc.start.plus(a.t - 1), static_cast<double>(a.total), a.se});

  const fs::path dir = output_dir(cfg);
  write_ground(dir / "ground.csv", ground);
  write_aerial(dir / "aerial.csv", aerial);
  {
    const fs::path path = dir / "truth.csv";
    auto out = open_csv(path);
    out << "year,month,new,quarter,halfyear,adult_f,adult_m,total,k_t\n";
    for (int t = 1; t <= sc.months; ++t) {
      const YearMonth d = sc.start.plus(t - 1);
      const PopulationState& s = sim.trajectory.at(t);
      out << d.year << ',' << d.month;
      for (Count c : s.class_totals()) out << ',' << c;
      out << ',' << s.total() << ',';
      const auto it = std::find(aerial_months.begin(), aerial_months.end(), t);
      if (it == aerial_months.end()) out << "NA";
      else out << format_number(obs.k_t[static_cast<std::size_t>(it - aerial_months.begin())]);
      out << '\n';
    }
    finish(out, path);
  }
  log << "simulated " << sc.months << " months from " << format_year_month(sc.start) << ", B_0 = "
      << sim.trajectory.initial.total() << ", B_T = " << sim.trajectory.states.back().total() << ", "
      << aerial.records.size() << " aerial surveys\n";
  log << "wrote ground.csv, aerial.csv, truth.csv to " << dir.string() << '\n';
  return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const FitInputs in = prepare_fit_inputs(cfg);
  const ChainResult res = fit_chain(cfg, in, log);
  const fs::path dir = output_dir(cfg);
  write_samples(dir / "samples.csv", parameter_columns(res.samples));
  write_samples(dir / "traces.csv", res.traces);
  write_summary(dir / "summary.csv", res.summary);
  write_trajectory(dir / "trajectory.csv", in.months, res.summary);
  const PosteriorSummary params = parameter_summary(res.summary);
  {
    const fs::path path = dir / "summary.txt";
    auto out = open_csv(path);
    out << "draws kept: " << res.samples.rows() << "\n\n";
    write_acceptance(out, res.acceptance);
    out << '\n';
    print_summary(out, params);
    finish(out, path);
  }
  write_acceptance(log, res.acceptance);
  print_summary(log, params);
  log << "wrote samples.csv, traces.csv, summary.csv, summary.txt, trajectory.csv to " << dir.string() << '\n';
  if (!finite_summary(res.summary)) {
    log << "error: non-finite posterior summary\n";
    return 3;
  }
  return 0;
}

int cmd_predict(const RunConfig& cfg, std::ostream& log) {
  const FitInputs in = prepare_fit_inputs(cfg);
  const ChainResult res = fit_chain(cfg, in, log);
  const fs::path dir = output_dir(cfg);
  const int T = static_cast<int>(in.months.size());
  {
    const fs::path path = dir / "predictions.csv";
    auto out = open_csv(path);
    out << "year,month,region_mean,region_lower,region_upper,eco_mean,eco_lower,eco_upper\n";
    for (int t = 1; t <= T; ++t) {
      const YearMonth d = in.months[static_cast<std::size_t>(t - 1)];
      const auto& b = res.summary.get(indexed("total", t));
      const auto& e = res.summary.get(indexed("eco_total", t));
      out << d.year << ',' << d.month << ',' << format_number(b.mean) << ',' << format_number(b.lower) << ','
          << format_number(b.upper) << ',' << format_number(e.mean) << ',' << format_number(e.lower) << ','
          << format_number(e.upper) << '\n';
    }
    finish(out, path);
  }
  int inside = 0;
  {
    const fs::path path = dir / "aerial_comparison.csv";
    auto out = open_csv(path);
    out << "year,month,estimate,se,corrected_estimate,corrected_se,eco_mean,eco_lower,eco_upper,inside\n";
    for (const auto& a : in.data.aerial) {
      const YearMonth d = in.months[static_cast<std::size_t>(a.t - 1)];
      const auto [ce, cse] = apply_sightability(static_cast<double>(a.total), a.se, cfg.hyper.aerial_sightability);
      const auto& e = res.summary.get(indexed("eco_total", a.t));
      const bool in_band = static_cast<double>(a.total) >= e.lower && static_cast<double>(a.total) <= e.upper;
      inside += in_band ? 1 : 0;
      out << d.year << ',' << d.month << ',' << a.total << ',' << format_number(a.se) << ','
          << format_number(ce) << ',' << format_number(cse) << ',' << format_number(e.mean) << ','
          << format_number(e.lower) << ',' << format_number(e.upper) << ',' << (in_band ? 1 : 0) << '\n';
    }
    finish(out, path);
  }
  log << "aerial surveys inside the predicted 95% band: " << inside << " of " << in.data.aerial.size() << '\n';
  log << "wrote predictions.csv, aerial_comparison.csv to " << dir.string() << '\n';
  if (!finite_summary(res.summary)) {
    log << "error: non-finite posterior summary\n";
    return 3;
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const ValidateConfig& vc = cfg.validate;
  const fs::path dir = output_dir(cfg);

  YearMonth start, end;
  if (cfg.start && cfg.end) {
    start = *cfg.start;
    end = *cfg.end;
  } else {
    const GroundSeries g = load_ground(cfg.resolve(cfg.ground));
    if (g.records.empty()) throw IoError("ground series has no records");
    start = cfg.start.value_or(g.records.front().date);
    end = cfg.end.value_or(g.records.back().date);
  }
  if (end < start) throw IoError("fit.end is before fit.start");
  const int T = end.serial() - start.serial() + 1;
  std::vector<std::string> warnings;
  const auto covs = covariates_for(cfg, start, T, warnings);

  // Bootstrap replicates of every survey and their ratio estimates.
  const std::size_t S = vc.surveys.size();
  const auto B = static_cast<std::size_t>(vc.replicates);
  std::vector<std::vector<RatioEstimate>> estimates(S);
  std::vector<int> survey_t(S);
  {
    auto plan_out = open_csv(dir / "bootstrap_plan.csv");
    plan_out << "survey,replicate,unit_id,selected\n";
    auto est_out = open_csv(dir / "jolly_estimates.csv");
    est_out << "survey,date,replicate,ratio,estimate,se\n";
    for (std::size_t s = 0; s < S; ++s) {
      const SurveyConfig& sv = vc.surveys[s];
      survey_t[s] = sv.date.serial() - start.serial() + 1;
      if (survey_t[s] < 1 || survey_t[s] > T)
        throw IoError("survey " + format_year_month(sv.date) + " lies outside the fitted months");
      if (s > 0 && survey_t[s] <= survey_t[s - 1]) throw IoError("validate.surveys must be in date order");
      SurveyUnits units{load_units(cfg.resolve(sv.units)), vc.frame_area, vc.frame_units};
      units.validate();
      Rng rng = make_stream(cfg.chain.seed, 1000 + s);
      const BootstrapPlan plan = balanced_bootstrap(units, vc.replicates, rng);
      for (int b = 0; b < vc.replicates; ++b) {
        for (std::size_t u = 0; u < units.size(); ++u)
          plan_out << s + 1 << ',' << b + 1 << ',' << units.units[u].id << ',' << plan.selection_count(b, u) << '\n';
        const RatioEstimate e = jolly_method2(bootstrap_sample(units, plan, b));
        estimates[s].push_back(e);
        est_out << s + 1 << ',' << format_year_month(sv.date) << ',' << b + 1 << ',' << format_number(e.ratio)
                << ',' << format_number(e.estimate) << ',' << format_number(e.se) << '\n';
      }
    }
    finish(plan_out, dir / "bootstrap_plan.csv");
    finish(est_out, dir / "jolly_estimates.csv");
  }

  // One synthetic ground series per bootstrap replicate.
  std::vector<SyntheticSeries> series(B);
  std::vector<FitData> data(B);
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<std::pair<int, double>> anchors;
    for (std::size_t s = 0; s < S; ++s) anchors.emplace_back(survey_t[s], estimates[s][b].estimate);
    Rng rng = make_stream(cfg.chain.seed, 2000 + b);
    series[b] = generate_synthetic_series(anchors, covs, cfg.start_coefficients(), cfg.hyper,
                                          cfg.simulate.proportions, vc.series_sigma2, rng, vc.tracking);
    for (int t = 1; t <= T; ++t) series[b].ground.records[static_cast<std::size_t>(t - 1)].date = start.plus(t - 1);
    write_ground(dir / ("synthetic_ground_" + std::to_string(b + 1) + ".csv"), series[b].ground);
    data[b].covariates = series[b].covariates;
    for (const auto& r : series[b].ground.records) data[b].ground.push_back(r.counts);
    data[b].initial_means = estimate_initial_means(series[b].ground, series[b].target.front(), cfg.hyper.init_var);
  }

  std::vector<PosteriorModel> models;
  models.reserve(B);
  for (std::size_t b = 0; b < B; ++b) models.emplace_back(data[b], cfg.priors, cfg.hyper);

  // Full chain on the first series; IRMCMC from its draws for the rest.
  ChainConfig ref_cfg = cfg.chain;
  ref_cfg.keep_states = true;
  log << "reference fit on series 1: " << ref_cfg.n_iter << " iterations\n";
  ChainResult ref = run_chain(models[0], models[0].initial_state(cfg.start_coefficients()), ref_cfg);

  struct Outcome {
    PosteriorSummary summary;
    std::string method;
    double ess = 0.0;
    std::string reason;
  };
  std::vector<Outcome> outcome(B);
  outcome[0] = {ref.summary, "full", static_cast<double>(ref.samples.rows()), ""};
  std::mutex log_mutex;
  parallel_for_index(B - 1, cfg.threads, [&](std::size_t i) {
    const std::size_t b = i + 1;
    IrmcmcConfig ir;
    ir.draws = vc.irmcmc_draws;
    ir.refine_iters = vc.irmcmc_refine;
    ir.seed = cfg.chain.seed + 7919 * b;
    ChainConfig fb = cfg.chain;
    fb.seed = cfg.chain.seed + b;
    PopulationRefit r = irmcmc_refit_population(ref.states, models[0], models[b], ir, fb);
    outcome[b] = {std::move(r.summary), r.used_full_chain ? "full" : "irmcmc", r.weights.ess, r.reason};
    std::lock_guard<std::mutex> lock(log_mutex);
    log << "series " << b + 1 << ": " << outcome[b].method
        << (outcome[b].reason.empty() ? "" : " (" + outcome[b].reason + ")") << '\n';
  });
  ref.states.clear();

  const fs::path cov_path = dir / "coverage.csv";
  auto out = open_csv(cov_path);
  out << "series,method,importance_ess,coverage_target,coverage_truth\n";
  double pooled_target = 0.0, pooled_truth = 0.0;
  bool finite = true;
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> truth;
    for (int t = 1; t <= T; ++t) truth.push_back(static_cast<double>(series[b].trajectory.at(t).total()));
    const double ct = coverage_report(series[b].target, outcome[b].summary);
    const double cu = coverage_report(truth, outcome[b].summary);
    pooled_target += ct;
    pooled_truth += cu;
    finite = finite && finite_summary(outcome[b].summary);
    out << b + 1 << ',' << outcome[b].method << ',' << format_number(outcome[b].ess) << ',' << format_number(ct)
        << ',' << format_number(cu) << '\n';
    log << "series " << b + 1 << " coverage of bootstrap totals " << format_number(ct) << "%, of generating totals "
        << format_number(cu) << "%\n";
  }
  out << "all,pooled,NA," << format_number(pooled_target / static_cast<double>(B)) << ','
      << format_number(pooled_truth / static_cast<double>(B)) << '\n';
  finish(out, cov_path);
  log << "wrote bootstrap_plan.csv, jolly_estimates.csv, synthetic_ground_*.csv, coverage.csv to " << dir.string()
      << '\n';
  return finite ? 0 : 3;
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  cfg.validate_for(command);
  if (command == "simulate") return cmd_simulate(cfg, log);
  if (command == "fit") return cmd_fit(cfg, log);
  if (command == "validate") return cmd_validate(cfg, log);
  if (command == "predict") return cmd_predict(cfg, log);
  throw IoError("unknown command '" + command + "'");
}

}  // namespace demodyn
