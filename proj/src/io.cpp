#include "demodyn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "demodyn/covariates.hpp"
#include "demodyn/reference.hpp"

namespace demodyn {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

std::string where(const fs::path& path, int line) { return path.string() + ":" + std::to_string(line); }

std::vector<Row> read_csv(const fs::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Row> rows;
  std::string line;
  int n = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!saw_header) {
      if (fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw IoError(where(path, n) + ": expected header " + want);
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw IoError(where(path, n) + ": expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    rows.push_back({n, std::move(fields)});
  }
  if (!saw_header) throw IoError(path.string() + ": empty file");
  return rows;
}

double parse_double(const std::string& s, const fs::path& path, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw IoError(where(path, line) + ": not a number: '" + s + "'");
  return v;
}

long long parse_integer(const std::string& s, const fs::path& path, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw IoError(where(path, line) + ": not an integer: '" + s + "'");
  return v;
}

int parse_month(const std::string& s, const fs::path& path, int line) {
  const long long m = parse_integer(s, path, line);
  if (m < 1 || m > 12) throw IoError(where(path, line) + ": month must be 1..12");
  return static_cast<int>(m);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

bool is_na(const std::string& s) { return s.empty() || s == "NA"; }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_year_month(YearMonth d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", d.year, d.month);
  return buf;
}

YearMonth parse_year_month(const std::string& text) {
  const std::string s = trim(text);
  const auto dash = s.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= s.size())
    throw IoError("bad date '" + text + "', expected YYYY-MM");
  char* end = nullptr;
  const long y = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + dash) throw IoError("bad date '" + text + "', expected YYYY-MM");
  const char* ms = s.c_str() + dash + 1;
  const long m = std::strtol(ms, &end, 10);
  if (end != s.c_str() + s.size() || m < 1 || m > 12)
    throw IoError("bad date '" + text + "', expected YYYY-MM");
  return {static_cast<int>(y), static_cast<int>(m)};
}

GroundSeries load_ground(const fs::path& path) {
  const auto rows =
      read_csv(path, {"year", "month", "new", "quarter", "halfyear", "adult_f", "adult_m"});
  GroundSeries s;
  for (const auto& r : rows) {
    GroundRecord rec;
    rec.date = {static_cast<int>(parse_integer(r.fields[0], path, r.line)), parse_month(r.fields[1], path, r.line)};
    const auto na = std::count_if(r.fields.begin() + 2, r.fields.end(), is_na);
    if (na == kClassCount) {
      s.records.push_back(rec);
      continue;
    }
    if (na > 0) throw IoError(where(path, r.line) + ": a month is either fully counted or fully NA");
    std::array<Count, kClassCount> c{};
    for (std::size_t k = 0; k < kClassCount; ++k) {
      c[k] = parse_integer(r.fields[k + 2], path, r.line);
      if (c[k] < 0) throw IoError(where(path, r.line) + ": counts must be non-negative");
    }
    rec.counts = c;
    if (!s.records.empty() && rec.date <= s.records.back().date)
      throw IoError(where(path, r.line) + ": months must be strictly increasing");
    s.records.push_back(rec);
  }
  for (std::size_t i = 1; i < s.records.size(); ++i)
    if (s.records[i].date <= s.records[i - 1].date)
      throw IoError(path.string() + ": months must be strictly increasing");
  return s;
}

AerialSeries load_aerial(const fs::path& path) {
  const auto rows = read_csv(path, {"date", "estimate", "se"});
  AerialSeries s;
  for (const auto& r : rows) {
    AerialRecord a;
    try {
      a.date = parse_year_month(r.fields[0]);
    } catch (const IoError& e) {
      throw IoError(where(path, r.line) + ": " + e.what());
    }
    a.estimate = parse_double(r.fields[1], path, r.line);
    a.se = parse_double(r.fields[2], path, r.line);
    if (a.estimate < 0.0 || a.se < 0.0)
      throw IoError(where(path, r.line) + ": estimate and se must be non-negative");
    if (!s.records.empty() && a.date < s.records.back().date)
      throw IoError(where(path, r.line) + ": surveys must be sorted by date");
    s.records.push_back(a);
  }
  return s;
}

std::vector<WeatherRecord> load_weather(const fs::path& path) {
  const auto rows = read_csv(path, {"year", "month", "rainfall_mm", "tmin_c", "tmax_c"});
  std::vector<WeatherRecord> out;
  for (const auto& r : rows) {
    WeatherRecord w;
    w.date = {static_cast<int>(parse_integer(r.fields[0], path, r.line)), parse_month(r.fields[1], path, r.line)};
    w.rainfall_mm = parse_double(r.fields[2], path, r.line);
    w.tmin_c = parse_double(r.fields[3], path, r.line);
    w.tmax_c = parse_double(r.fields[4], path, r.line);
    if (w.rainfall_mm < 0.0) throw IoError(where(path, r.line) + ": rainfall must be non-negative");
    if (!out.empty() && w.date.serial() != out.back().date.serial() + 1)
      throw IoError(where(path, r.line) + ": weather months must be consecutive");
    out.push_back(w);
  }
  return out;
}

std::vector<CovariateRecord> load_covariates(const fs::path& path, std::vector<std::string>* warnings) {
  return derive_covariates(load_weather(path), warnings);
}

std::vector<SurveyUnit> load_units(const fs::path& path) {
  const auto rows = read_csv(path, {"unit_id", "area_km2", "count"});
  std::vector<SurveyUnit> out;
  for (const auto& r : rows) {
    SurveyUnit u{r.fields[0], parse_double(r.fields[1], path, r.line), parse_double(r.fields[2], path, r.line)};
    if (!(u.area > 0.0)) throw IoError(where(path, r.line) + ": area must be positive");
    if (u.count < 0.0) throw IoError(where(path, r.line) + ": count must be non-negative");
    out.push_back(u);
  }
  if (out.empty()) throw IoError(path.string() + ": no survey units");
  return out;
}

void write_ground(const fs::path& path, const GroundSeries& s) {
  auto out = open_out(path);
  out << "year,month,new,quarter,halfyear,adult_f,adult_m\n";
  for (const auto& r : s.records) {
    out << r.date.year << ',' << r.date.month;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      out << ',';
      if (r.counts) out << (*r.counts)[k];
      else out << "NA";
    }
    out << '\n';
  }
  check_written(out, path);
}

void write_aerial(const fs::path& path, const AerialSeries& s) {
  auto out = open_out(path);
  out << "date,estimate,se\n";
  for (const auto& a : s.records)
    out << format_year_month(a.date) << ',' << format_number(a.estimate) << ',' << format_number(a.se) << '\n';
  check_written(out, path);
}

void write_weather(const fs::path& path, const std::vector<WeatherRecord>& w) {
  auto out = open_out(path);
  out << "year,month,rainfall_mm,tmin_c,tmax_c\n";
  for (const auto& r : w)
    out << r.date.year << ',' << r.date.month << ',' << format_number(r.rainfall_mm) << ','
        << format_number(r.tmin_c) << ',' << format_number(r.tmax_c) << '\n';
  check_written(out, path);
}

void write_units(const fs::path& path, const std::vector<SurveyUnit>& units) {
  auto out = open_out(path);
  out << "unit_id,area_km2,count\n";
  for (const auto& u : units) out << u.id << ',' << format_number(u.area) << ',' << format_number(u.count) << '\n';
  check_written(out, path);
}

void write_samples(const fs::path& path, const SampleTable& table) {
  auto out = open_out(path);
  out << "iteration,parameter,value\n";
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t c = 0; c < table.columns(); ++c)
      out << table.iterations()[r] << ',' << table.names()[c] << ',' << format_number(table.at(r, c)) << '\n';
  check_written(out, path);
}

SampleTable load_samples(const fs::path& path) {
  const auto rows = read_csv(path, {"iteration", "parameter", "value"});
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows)
    if (index.emplace(r.fields[1], names.size()).second) names.push_back(r.fields[1]);
  SampleTable table(names);
  std::vector<double> row(names.size());
  std::size_t filled = 0;
  long current = 0;
  for (const auto& r : rows) {
    const long it = static_cast<long>(parse_integer(r.fields[0], path, r.line));
    if (filled == 0) current = it;
    if (it != current) throw IoError(where(path, r.line) + ": incomplete draw for iteration " + std::to_string(current));
    row[index.at(r.fields[1])] = parse_double(r.fields[2], path, r.line);
    if (++filled == names.size()) {
      table.add_row(current, row);
      filled = 0;
    }
  }
  if (filled != 0) throw IoError(path.string() + ": trailing incomplete draw");
  return table;
}

void write_summary(const fs::path& path, const PosteriorSummary& summary) {
  auto out = open_out(path);
  out << "parameter,mean,sd,lower,upper,ess\n";
  for (const auto& q : summary.quantities)
    out << q.name << ',' << format_number(q.mean) << ',' << format_number(q.sd) << ','
        << format_number(q.lower) << ',' << format_number(q.upper) << ',' << format_number(q.ess) << '\n';
  check_written(out, path);
}

void print_summary(std::ostream& os, const PosteriorSummary& summary) {
  os << std::left << std::setw(18) << "parameter" << std::right << std::setw(14) << "mean"
     << std::setw(14) << "sd" << std::setw(14) << "2.5%" << std::setw(14) << "97.5%" << std::setw(10)
     << "ess" << '\n';
  for (const auto& q : summary.quantities)
    os << std::left << std::setw(18) << q.name << std::right << std::setw(14) << format_number(q.mean)
       << std::setw(14) << format_number(q.sd) << std::setw(14) << format_number(q.lower)
       << std::setw(14) << format_number(q.upper) << std::setw(10) << format_number(q.ess) << '\n';
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw IoError("config: '" + section + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw IoError("config: unknown key '" + k + "' in " + section);
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw IoError(std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
}

std::vector<double> read_vector(const json& j, const std::string& what, std::size_t n) {
  if (!j.is_array()) throw IoError("config: " + what + " must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw IoError("config: " + what + " must hold numbers");
    v.push_back(x.get<double>());
  }
  if (v.size() != n)
    throw IoError("config: " + what + " needs " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  return v;
}

RateBlock block_from_name(const std::string& name) {
  for (int b = 0; b < kBlockCount; ++b)
    if (name == block_name(static_cast<RateBlock>(b))) return static_cast<RateBlock>(b);
  throw IoError("config: unknown coefficient block '" + name + "'");
}

AerialRate parse_aerial_rate(const std::string& s) {
  if (s == "consistent") return AerialRate::kConsistent;
  if (s == "paper") return AerialRate::kPaper;
  throw IoError("config: aerial_rate must be 'paper' or 'consistent'");
}

AdultExtraTerm parse_adult_extra(const std::string& s) {
  if (s == "none") return AdultExtraTerm::kNone;
  if (s == "dry1") return AdultExtraTerm::kDry1;
  if (s == "lagrain8") return AdultExtraTerm::kLagRain8;
  if (s == "earlywet1") return AdultExtraTerm::kEarlyWet1;
  throw IoError("config: adult_extra must be none, dry1, lagrain8 or earlywet1");
}

YearMonth read_date(const json& j, const char* key) {
  if (!j.at(key).is_string()) throw IoError(std::string("config: '") + key + "' must be a YYYY-MM string");
  return parse_year_month(j.at(key).get<std::string>());
}

}  // namespace

RateCoefficients RunConfig::start_coefficients() const {
  return coefficients ? *coefficients : priors.means();
}

fs::path RunConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void RunConfig::validate_for(const std::string& command) const {
  auto need = [&](const fs::path& p, const char* what) {
    if (p.empty()) throw IoError(std::string("config: data.") + what + " is required for " + command);
    if (!fs::exists(resolve(p))) throw IoError("config: " + std::string(what) + " file not found: " + resolve(p).string());
  };
  need(covariates, "covariates");
  if (command == "fit" || command == "predict") {
    need(ground, "ground");
    if (!aerial.empty()) need(aerial, "aerial");
  }
  if (command == "validate") {
    if (validate.surveys.size() < 2) throw IoError("config: validate needs at least two surveys");
    for (const auto& s : validate.surveys)
      if (!fs::exists(resolve(s.units))) throw IoError("config: units file not found: " + resolve(s.units).string());
    if (!(validate.frame_area > 0.0) || !(validate.frame_units > 0.0))
      throw IoError("config: validate.frame_area and frame_units must be positive");
    if (validate.replicates < 1) throw IoError("config: validate.replicates must be >= 1");
    if (ground.empty() && (!start || !end)) throw IoError("config: validate needs fit.start and fit.end or a ground file");
  }
  if (command == "simulate" && simulate.months < 1) throw IoError("config: simulate.months must be >= 1");
  try {
    priors.validate();
    hyper.validate();
    chain.validate();
  } catch (const ModelError& e) {
    throw IoError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  check_keys(j, {"data", "fit", "priors", "coefficients", "hyper", "chain", "simulate", "validate", "output", "threads"}, "config");
  RunConfig c;
  c.base_dir = fs::absolute(path).parent_path();
  c.priors = reference_priors();

  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d, {"covariates", "ground", "aerial"}, "data");
    std::string s;
    if (d.contains("covariates")) c.covariates = d["covariates"].get<std::string>();
    if (d.contains("ground")) c.ground = d["ground"].get<std::string>();
    if (d.contains("aerial")) c.aerial = d["aerial"].get<std::string>();
  }
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f, {"start", "end", "initial_total"}, "fit");
    if (f.contains("start")) c.start = read_date(f, "start");
    if (f.contains("end")) c.end = read_date(f, "end");
    if (f.contains("initial_total") && !f["initial_total"].is_null()) c.initial_total = f["initial_total"].get<double>();
  }
  if (j.contains("priors")) {
    const json& p = j["priors"];
    check_keys(p, {"gamma_r", "gamma_q", "gamma_y", "gamma_a", "gamma_s"}, "priors");
    for (const auto& [name, v] : p.items()) {
      const RateBlock b = block_from_name(name);
      check_keys(v, {"mean", "sd"}, "priors." + name);
      if (!v.contains("mean") || !v.contains("sd")) throw IoError("config: priors." + name + " needs mean and sd");
      c.priors[b].mean = read_vector(v["mean"], "priors." + name + ".mean", block_size(b));
      c.priors[b].sd = read_vector(v["sd"], "priors." + name + ".sd", block_size(b));
    }
  }
  if (j.contains("coefficients")) {
    const json& p = j["coefficients"];
    check_keys(p, {"gamma_r", "gamma_q", "gamma_y", "gamma_a", "gamma_s"}, "coefficients");
    RateCoefficients rc = c.priors.means();
    for (const auto& [name, v] : p.items()) {
      const RateBlock b = block_from_name(name);
      const auto vals = read_vector(v, "coefficients." + name, block_size(b));
      std::copy(vals.begin(), vals.end(), rc.block(b).begin());
    }
    c.coefficients = rc;
  }
  if (j.contains("hyper")) {
    const json& h = j["hyper"];
    check_keys(h, {"sigma_t", "k_alpha", "k_beta", "init_var", "newborn_correction", "dry_predation_factor",
                   "male_survival_factor", "aerial_sightability", "sigma2_shape", "sigma2_rate", "aerial_rate",
                   "adult_extra", "dry_months"},
               "hyper");
    read_if(h, "sigma_t", c.hyper.sigma_t);
    read_if(h, "k_alpha", c.hyper.k_alpha);
    read_if(h, "k_beta", c.hyper.k_beta);
    read_if(h, "init_var", c.hyper.init_var);
    read_if(h, "newborn_correction", c.hyper.newborn_correction);
    read_if(h, "dry_predation_factor", c.hyper.dry_predation_factor);
    read_if(h, "male_survival_factor", c.hyper.male_survival_factor);
    read_if(h, "aerial_sightability", c.hyper.aerial_sightability);
    read_if(h, "sigma2_shape", c.hyper.sigma2_shape);
    read_if(h, "sigma2_rate", c.hyper.sigma2_rate);
    if (h.contains("aerial_rate")) c.hyper.aerial_rate = parse_aerial_rate(h["aerial_rate"].get<std::string>());
    if (h.contains("adult_extra")) c.hyper.adult_extra = parse_adult_extra(h["adult_extra"].get<std::string>());
    if (h.contains("dry_months")) {
      c.hyper.dry_month.fill(false);
      for (const auto& m : h["dry_months"]) {
        const int mm = m.get<int>();
        if (mm < 1 || mm > 12) throw IoError("config: dry_months must be 1..12");
        c.hyper.dry_month[static_cast<std::size_t>(mm)] = true;
      }
    }
  }
  if (j.contains("chain")) {
    const json& ch = j["chain"];
    check_keys(ch, {"n_iter", "burn_in", "thin", "latent_step", "tmcmc_multiplier", "seed", "adapt",
                    "adapt_every", "trace_every", "cohort_moves", "cohort_max_length", "birth_moves",
                    "collapse_lambda"},
               "chain");
    read_if(ch, "n_iter", c.chain.n_iter);
    read_if(ch, "burn_in", c.chain.burn_in);
    read_if(ch, "thin", c.chain.thin);
    read_if(ch, "latent_step", c.chain.latent_step);
    read_if(ch, "tmcmc_multiplier", c.chain.tmcmc_multiplier);
    read_if(ch, "seed", c.chain.seed);
    read_if(ch, "adapt", c.chain.adapt);
    read_if(ch, "adapt_every", c.chain.adapt_every);
    read_if(ch, "trace_every", c.chain.trace_every);
    read_if(ch, "cohort_moves", c.chain.cohort_moves);
    read_if(ch, "cohort_max_length", c.chain.cohort_max_length);
    read_if(ch, "birth_moves", c.chain.birth_moves);
    read_if(ch, "collapse_lambda", c.chain.collapse_lambda);
  }
  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    check_keys(s, {"start", "months", "initial_total", "proportions", "sigma2", "aerial_every"}, "simulate");
    if (s.contains("start")) c.simulate.start = read_date(s, "start");
    read_if(s, "months", c.simulate.months);
    read_if(s, "initial_total", c.simulate.initial_total);
    if (s.contains("proportions")) {
      const auto v = read_vector(s["proportions"], "simulate.proportions", kClassCount);
      std::copy(v.begin(), v.end(), c.simulate.proportions.begin());
    }
    read_if(s, "sigma2", c.simulate.sigma2);
    read_if(s, "aerial_every", c.simulate.aerial_every);
  }
  if (j.contains("validate")) {
    const json& v = j["validate"];
    check_keys(v, {"surveys", "frame_area", "frame_units", "replicates", "series_sigma2", "tracking", "irmcmc"}, "validate");
    if (v.contains("surveys"))
      for (const auto& s : v["surveys"]) {
        check_keys(s, {"date", "units"}, "validate.surveys[]");
        c.validate.surveys.push_back({read_date(s, "date"), s.at("units").get<std::string>()});
      }
    read_if(v, "frame_area", c.validate.frame_area);
    read_if(v, "frame_units", c.validate.frame_units);
    read_if(v, "replicates", c.validate.replicates);
    read_if(v, "series_sigma2", c.validate.series_sigma2);
    if (v.contains("tracking")) {
      const auto t = v["tracking"].get<std::string>();
      if (t == "per_month") c.validate.tracking = TrackingMode::kPerMonth;
      else if (t == "initial_scale") c.validate.tracking = TrackingMode::kInitialScale;
      else throw IoError("config: validate.tracking must be per_month or initial_scale");
    }
    if (v.contains("irmcmc")) {
      const json& ir = v["irmcmc"];
      check_keys(ir, {"refine_iters", "draws"}, "validate.irmcmc");
      read_if(ir, "refine_iters", c.validate.irmcmc_refine);
      read_if(ir, "draws", c.validate.irmcmc_draws);
    }
  }
  if (j.contains("output")) c.output = j["output"].get<std::string>();
  read_if(j, "threads", c.threads);
  if (c.threads == 0) c.threads = 1;
  return c;
}

}  // namespace demodyn
