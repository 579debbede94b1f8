#pragma once

// Config-driven experiment runs, CSV persistence and the summaries computed
// from invariant-deviation series (order tables and growth fits).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "plmm/boussinesq.hpp"
#include "plmm/errors.hpp"
#include "plmm/integrator.hpp"
#include "plmm/lmm_catalog.hpp"
#include "plmm/nls.hpp"
#include "plmm/spectral_grid.hpp"

namespace plmm {

// Flat key = value configuration ------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

inline double parse_double(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  // accept simple fractions such as 9/11
  if (auto slash = t.find('/'); slash != std::string::npos && slash > 0)
    return parse_double(key, t.substr(0, slash)) / parse_double(key, t.substr(slash + 1));
  if (t == "pi") return std::numbers::pi;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  return v;
}

}  // namespace detail

/// Key/value pairs read from a TOML-like flat file. Lines are `key = value`,
/// `#` starts a comment, lists are comma separated and may be bracketed.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') continue;  // section headers are ignored
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      cfg.values_[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string str(const std::string& key, std::optional<std::string> fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + key + "'");
    }
    return detail::unquote(it->second);
  }

  double num(const std::string& key, std::optional<double> fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + key + "'");
    }
    return detail::parse_double(key, it->second);
  }

  std::vector<double> list(const std::string& key, std::optional<std::vector<double>> fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + key + "'");
    }
    std::string body = detail::trim(it->second);
    if (!body.empty() && body.front() == '[') body = body.substr(1);
    if (!body.empty() && body.back() == ']') body.pop_back();
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!detail::trim(item).empty()) out.push_back(detail::parse_double(key, item));
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true/false");
  }

 private:
  std::map<std::string, std::string> values_;
};

// Experiment description ---------------------------------------------------------

enum class ModelKind { Nls, Boussinesq };
enum class Scenario { Soliton, PerturbedSoliton, BbSolitary, Gaussian };

struct ExperimentConfig {
  std::string name = "run";
  ModelKind model = ModelKind::Nls;
  Scenario scenario = Scenario::Soliton;
  PLMMethod method = method_by_name("SPLMM2");
  std::vector<double> dts;
  double l_i = -128.0;
  double l_s = 128.0;
  std::size_t n = 2048;
  double t_end = 100.0;
  std::size_t record_every = 1;
  /// When set, overrides record_every with round(record_interval / dt).
  std::optional<double> record_interval;
  StartingProcedure start;
  double blowup_threshold = 1e6;
  std::vector<double> snapshot_times;
  std::filesystem::path output_dir = "out";

  // NLS
  double sigma_exp = 1.0;
  double soliton_a = 1.0;
  double soliton_speed = 1.0;
  double x0 = -40.0;
  double theta0 = std::numbers::pi / 4.0;
  double a1 = 1.0;
  double a2 = 1.0;

  // Boussinesq
  double theta_sq = 9.0 / 11.0;
  double beta = std::sqrt(3.0) / 2.0;
  double gauss_a = 1.2;
  double gauss_b = 6.42e-2;
  double gauss_c = 0.87;

  std::size_t record_every_for(double dt) const {
    if (!record_interval) return record_every;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(*record_interval / dt)));
  }

  SpectralGrid grid() const { return make_grid(l_i, l_s, n); }
  SolitonParams soliton_params() const {
    return SolitonParams::from_a(soliton_a, soliton_speed, x0, theta0);
  }
};

inline ExperimentConfig to_experiment(const KeyValueConfig& kv, const std::string& default_name = "run") {
  ExperimentConfig c;
  c.name = kv.str("name", default_name);

  const auto model = kv.str("model");
  if (model == "nls") c.model = ModelKind::Nls;
  else if (model == "boussinesq") c.model = ModelKind::Boussinesq;
  else throw ConfigError("unknown model '" + model + "'");

  const auto scen = kv.str("scenario");
  if (scen == "soliton") c.scenario = Scenario::Soliton;
  else if (scen == "perturbed_soliton") c.scenario = Scenario::PerturbedSoliton;
  else if (scen == "bb_solitary") c.scenario = Scenario::BbSolitary;
  else if (scen == "gaussian") c.scenario = Scenario::Gaussian;
  else throw ConfigError("unknown scenario '" + scen + "'");
  const bool nls_scen = c.scenario == Scenario::Soliton || c.scenario == Scenario::PerturbedSoliton;
  if (nls_scen != (c.model == ModelKind::Nls))
    throw ConfigError("scenario '" + scen + "' does not belong to model '" + model + "'");

  const auto method = kv.str("method");
  if (method == "custom") {
    c.method = make_method(GeneratingPair(kv.list("rho_p"), kv.list("sigma_p")),
                           GeneratingPair(kv.list("rho_q"), kv.list("sigma_q")),
                           kv.str("method_name", "custom"));
  } else {
    try {
      c.method = method_by_name(method);
    } catch (const UnknownMethod&) {
      throw ConfigError("unknown method '" + method + "'");
    }
  }
  if (kv.flag("swap_partitions", false)) c.method = swapped(c.method);

  c.dts = kv.list("dt");
  if (c.dts.empty()) throw ConfigError("dt list is empty");
  for (double dt : c.dts)
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");

  c.l_i = kv.num("l_i", c.l_i);
  c.l_s = kv.num("l_s", c.l_s);
  const double n = kv.num("N", static_cast<double>(c.n));
  if (n < 0 || n != std::floor(n)) throw ConfigError("N must be a nonnegative integer");
  c.n = static_cast<std::size_t>(n);
  try {
    (void)c.grid();
  } catch (const BadGrid& e) {
    throw ConfigError(e.what());
  }

  c.t_end = kv.num("T", c.t_end);
  if (!(c.t_end > 0.0)) throw ConfigError("T must be positive");
  const double re = kv.num("record_every", 1.0);
  if (re < 1.0) throw ConfigError("record_every must be >= 1");
  c.record_every = static_cast<std::size_t>(re);
  if (kv.has("record_interval")) c.record_interval = kv.num("record_interval");

  const auto start = kv.str("start", "exact");
  if (start == "exact") c.start.kind = StartKind::ExactNodal;
  else if (start == "midpoint") c.start.kind = StartKind::ImplicitMidpoint;
  else if (start == "rk") c.start.kind = StartKind::ReferenceRK;
  else throw ConfigError("unknown start '" + start + "'");
  c.start.target_order = static_cast<int>(kv.num("start_order", c.method.order + 2));
  const bool has_exact = c.scenario == Scenario::Soliton || c.scenario == Scenario::BbSolitary;
  if (c.start.kind == StartKind::ExactNodal && !has_exact)
    throw ConfigError("start = exact needs a scenario with an exact solution");

  c.blowup_threshold = kv.num("blowup_threshold", c.blowup_threshold);
  c.snapshot_times = kv.list("snapshot_times", std::vector<double>{});
  c.output_dir = kv.str("output", c.output_dir.string());

  c.sigma_exp = kv.num("sigma", c.sigma_exp);
  c.soliton_a = kv.num("a", c.soliton_a);
  c.soliton_speed = kv.num("speed", c.soliton_speed);
  c.x0 = kv.num("x0", c.x0);
  c.theta0 = kv.num("theta0", c.theta0);
  c.a1 = kv.num("A1", c.a1);
  c.a2 = kv.num("A2", c.a2);

  c.theta_sq = kv.num("theta_sq", c.theta_sq);
  if (kv.has("beta")) c.beta = kv.num("beta");
  else if (kv.has("c_s")) c.beta = beta_from_speed(kv.num("c_s"));
  c.gauss_a = kv.num("gauss_A", c.gauss_a);
  c.gauss_b = kv.num("gauss_B", c.gauss_b);
  c.gauss_c = kv.num("gauss_C", c.gauss_c);

  // Validate the wave parameters eagerly so a bad config fails before any run.
  try {
    if (c.model == ModelKind::Nls) {
      if (!(c.soliton_params().a() > 0.0)) throw BadParams("soliton a must be positive");
    } else {
      const auto p = bona_smith_params(c.theta_sq);
      if (c.scenario == Scenario::BbSolitary) (void)SolitaryWaveBB(c.beta, p, c.x0);
      if (c.scenario == Scenario::Gaussian && !(c.gauss_b > 0.0)) throw BadParams("gauss_B must be positive");
    }
  } catch (const BadParams& e) {
    throw ConfigError(e.what());
  }
  return c;
}

// Deviation series -----------------------------------------------------------------

/// The content of one run's CSV: |I(t) - I(t0)| per invariant and the
/// solution error, sampled at the recorded times.
struct DeviationSeries {
  std::string method;
  double dt = 0.0;
  std::vector<std::string> names;
  std::vector<double> t;
  std::vector<std::vector<double>> dev;  // dev[i][k]: invariant i at t[k]
  std::vector<double> sol_err;
  bool truncated = false;
  double truncation_time = std::numeric_limits<double>::quiet_NaN();

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw Error("no invariant named '" + name + "'");
  }
};

inline DeviationSeries to_series(const IntegrationResult& r, std::vector<std::string> names,
                                 std::string method, double dt) {
  DeviationSeries s;
  s.method = std::move(method);
  s.dt = dt;
  s.names = std::move(names);
  s.dev.assign(s.names.size(), {});
  for (const auto& rec : r.records) {
    s.t.push_back(rec.t);
    for (std::size_t i = 0; i < s.names.size(); ++i) s.dev[i].push_back(std::abs(rec.deviations[i]));
    s.sol_err.push_back(rec.sol_err);
  }
  s.truncated = r.truncated;
  s.truncation_time = r.truncation_time;
  return s;
}

namespace detail {
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_csv(std::ostream& out, const DeviationSeries& s, const std::string& meta = {}) {
  out << "# method=" << s.method << " dt=" << detail::fmt17(s.dt);
  if (!meta.empty()) out << ' ' << meta;
  out << '\n';
  out << 't';
  for (const auto& n : s.names) out << ",dev_" << n;
  out << ",sol_err_max\n";
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    out << detail::fmt17(s.t[k]);
    for (const auto& col : s.dev) out << ',' << detail::fmt17(col[k]);
    out << ',' << detail::fmt17(s.sol_err[k]) << '\n';
  }
  if (s.truncated) out << "# truncated t=" << detail::fmt17(s.truncation_time) << '\n';
}

inline DeviationSeries read_csv(std::istream& in) {
  DeviationSeries s;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "method") s.method = val;
        else if (key == "dt") s.dt = detail::parse_double("dt", val);
        else if (key == "t" && line.rfind("# truncated", 0) == 0) {
          s.truncated = true;
          s.truncation_time = detail::parse_double("t", val);
        }
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(detail::trim(cell));
    if (!header) {
      if (cells.size() < 3 || cells.front() != "t" || cells.back() != "sol_err_max")
        throw Error("unexpected CSV header: " + line);
      for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
        if (cells[i].rfind("dev_", 0) != 0) throw Error("unexpected CSV column " + cells[i]);
        s.names.push_back(cells[i].substr(4));
      }
      s.dev.assign(s.names.size(), {});
      header = true;
      continue;
    }
    if (cells.size() != s.names.size() + 2) throw Error("ragged CSV row: " + line);
    auto num = [](const std::string& c) {
      return c == "nan" ? std::numeric_limits<double>::quiet_NaN() : detail::parse_double("cell", c);
    };
    s.t.push_back(num(cells[0]));
    for (std::size_t i = 0; i < s.names.size(); ++i) s.dev[i].push_back(num(cells[i + 1]));
    s.sol_err.push_back(num(cells.back()));
  }
  if (!header) throw Error("CSV has no header row");
  return s;
}

inline DeviationSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

// Summaries --------------------------------------------------------------------------

struct OrderRow {
  double dt = 0.0;
  std::vector<double> deviation;  // per invariant
  std::vector<double> order;      // log2 ratio to the previous (larger) dt; NaN on the first row
};

/// Empirical orders from deviations at a common probe time. Needs at least
/// three runs; they are sorted by decreasing dt and consecutive dt values
/// must halve.
inline std::vector<OrderRow> order_table(std::vector<DeviationSeries> runs, double t_probe) {
  if (runs.size() < 3) throw Error("order_table needs at least three runs");
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.dt > b.dt; });
  std::vector<OrderRow> rows;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& s = runs[r];
    if (s.names != runs.front().names) throw Error("runs monitor different invariants");
    if (r > 0 && std::abs(runs[r - 1].dt / s.dt - 2.0) > 1e-6)
      throw Error("dt values must form a ratio-2 ladder");
    std::size_t best = s.t.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      const double gap = std::abs(s.t[k] - t_probe);
      if (gap < best_gap) {
        best_gap = gap;
        best = k;
      }
    }
    if (best == s.t.size() || best_gap > 0.5 * s.dt + 1e-12 * std::abs(t_probe))
      throw MissingProbe("t = " + detail::fmt17(t_probe) + " not recorded for dt = " +
                         detail::fmt17(s.dt));
    OrderRow row;
    row.dt = s.dt;
    for (const auto& col : s.dev) row.deviation.push_back(col[best]);
    for (std::size_t i = 0; i < row.deviation.size(); ++i) {
      row.order.push_back(r == 0 ? std::numeric_limits<double>::quiet_NaN()
                                 : std::log2(rows.back().deviation[i] / row.deviation[i]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Least-squares slope of log(deviation) against log(t) over [t_a, t_b] for
/// one invariant. Exact zeros are skipped; fewer than two usable points is an
/// error.
inline double growth_fit(const DeviationSeries& s, std::size_t column, double t_a, double t_b) {
  if (!(t_b > t_a) || !(t_a > 0.0)) throw DegenerateWindow("window must satisfy 0 < t_a < t_b");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    if (s.t[k] < t_a || s.t[k] > t_b) continue;
    const double d = s.dev[column][k];
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const double x = std::log(s.t[k]), y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw DegenerateWindow("fewer than two positive deviations in window");
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (!(den > 0.0)) throw DegenerateWindow("window spans a single time");
  return (nn * sxy - sx * sy) / den;
}

/// Largest deviation of one invariant over [t_a, t_b].
inline double max_deviation(const DeviationSeries& s, std::size_t column, double t_a, double t_b) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.t.size(); ++k)
    if (s.t[k] >= t_a && s.t[k] <= t_b) m = std::max(m, s.dev[column][k]);
  return m;
}

// Running experiments -------------------------------------------------------------

struct RunOutput {
  double dt = 0.0;
  std::filesystem::path csv;
  std::vector<std::filesystem::path> profiles;
  DeviationSeries series;
};

namespace detail {

inline std::string dt_tag(double dt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

template <PartitionedModel M>
IntegrationResult run_model(const ExperimentConfig& c, const M& model, const PartitionedState& init,
                            double dt, const ExactSolution& exact) {
  IntegrateOptions opt;
  opt.dt = dt;
  opt.t_end = c.t_end;
  opt.record_every = c.record_every_for(dt);
  opt.blowup_threshold = c.blowup_threshold;
  opt.snapshot_times = c.snapshot_times;
  return integrate(c.method, c.start, model, init, opt, exact);
}

}  // namespace detail

/// Integrates one (method, dt) pair of a config and returns its series.
inline std::pair<DeviationSeries, IntegrationResult> run_single(const ExperimentConfig& c, double dt) {
  const SpectralGrid grid = c.grid();
  IntegrationResult result;
  std::vector<std::string> names;
  if (c.model == ModelKind::Nls) {
    const NlsModel model(grid, c.sigma_exp);
    const auto params = c.soliton_params();
    ExactSolution exact;
    if (c.scenario == Scenario::Soliton)
      exact = [&](double t) { return soliton(params, c.sigma_exp, grid, t); };
    NlsState init = soliton(params, c.sigma_exp, grid, 0.0);
    if (c.scenario == Scenario::PerturbedSoliton) init = perturb(init, c.a1, c.a2);
    result = detail::run_model(c, model, init, dt, exact);
    names = NlsModel::invariant_names();
  } else {
    const auto params = bona_smith_params(c.theta_sq);
    const BoussinesqModel model(grid, params);
    ExactSolution exact;
    BoussinesqState init;
    if (c.scenario == Scenario::BbSolitary) {
      exact = [&](double t) { return solitary_wave_bb(c.beta, params, c.x0, grid, t); };
      init = exact(0.0);
    } else {
      init = gaussian_data(c.gauss_a, c.gauss_b, c.gauss_c, c.x0, grid);
    }
    result = detail::run_model(c, model, init, dt, exact);
    names = BoussinesqModel::invariant_names();
  }
  auto series = to_series(result, names, c.method.name, dt);
  return {std::move(series), std::move(result)};
}

/// Runs every dt of the config (concurrently) and writes one CSV per run plus
/// profile CSVs for the requested snapshot times. Output goes to
/// c.output_dir unless the PLMM_OUTPUT_DIR environment variable is set.
inline std::vector<RunOutput> run(const ExperimentConfig& c) {
  std::filesystem::path dir = c.output_dir;
  if (const char* env = std::getenv("PLMM_OUTPUT_DIR"); env && *env) dir = env;
  std::filesystem::create_directories(dir);

  auto one = [&c, dir](double dt) {
    auto [series, result] = run_single(c, dt);
    RunOutput out;
    out.dt = dt;
    const std::string stem = c.name + "_" + c.method.name + "_dt" + detail::dt_tag(dt);
    out.csv = dir / (stem + ".csv");
    {
      std::ofstream f(out.csv);
      std::string meta = std::string("model=") + (c.model == ModelKind::Nls ? "nls" : "boussinesq") +
                         " N=" + std::to_string(c.n) + " l=" + detail::fmt17(c.l_s - c.l_i);
      write_csv(f, series, meta);
    }
    const SpectralGrid grid = c.grid();
    const bool nls = c.model == ModelKind::Nls;
    for (const auto& snap : result.snapshots) {
      const auto path = dir / (stem + "_profile_t" + detail::dt_tag(snap.t) + ".csv");
      std::ofstream f(path);
      f << "# t=" << detail::fmt17(snap.t) << '\n' << (nls ? "x,p,q\n" : "x,eta,w\n");
      for (std::size_t j = 0; j < grid.size(); ++j)
        f << detail::fmt17(grid.nodes()[j]) << ',' << detail::fmt17(snap.p[j]) << ','
          << detail::fmt17(snap.q[j]) << '\n';
      out.profiles.push_back(path);
    }
    out.series = std::move(series);
    return out;
  };

  std::vector<std::future<RunOutput>> jobs;
  const bool parallel = std::thread::hardware_concurrency() > 1 && c.dts.size() > 1;
  for (double dt : c.dts)
    jobs.push_back(std::async(parallel ? std::launch::async : std::launch::deferred, one, dt));
  std::vector<RunOutput> outs;
  for (auto& j : jobs) outs.push_back(j.get());
  return outs;
}

}  // namespace plmm
