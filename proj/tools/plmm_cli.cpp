// Command-line front end: run experiment configs, scan linear stability, and
// summarize deviation CSVs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "plmm/experiment.hpp"
#include "plmm/stability.hpp"

namespace {

constexpr int kValidationError = 2;
constexpr int kTruncated = 3;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_run(const std::vector<std::string>& configs) {
  bool truncated = false;
  for (const auto& path : configs) {
    const auto cfg = plmm::to_experiment(plmm::KeyValueConfig::load(path),
                                         std::filesystem::path(path).stem().string());
    for (const auto& out : plmm::run(cfg)) {
      std::cout << out.csv.string();
      if (out.series.truncated) {
        truncated = true;
        std::cout << "  (blow-up at t = " << out.series.truncation_time << ")";
      }
      std::cout << '\n';
      for (const auto& p : out.profiles) std::cout << p.string() << '\n';
    }
  }
  return truncated ? kTruncated : 0;
}

int cmd_stability(const std::string& name, double z_max, double tol, double step) {
  const auto method = plmm::method_by_name(name);
  const auto scan = plmm::scan_stability(method, z_max, step);
  std::cout << "# method=" << name << " z_star=" << fmt(plmm::imaginary_axis_interval(method, tol, z_max, step))
            << " tol=" << fmt(tol) << '\n'
            << "z,max_modulus\n";
  for (std::size_t i = 0; i < scan.z_values.size(); ++i)
    std::cout << fmt(scan.z_values[i]) << ',' << fmt(scan.max_moduli[i]) << '\n';
  return 0;
}

int cmd_order(const std::vector<std::string>& csvs, double t_probe) {
  std::vector<plmm::DeviationSeries> runs;
  for (const auto& c : csvs) runs.push_back(plmm::read_csv(c));
  const auto names = runs.front().names;
  const auto rows = plmm::order_table(std::move(runs), t_probe);
  std::cout << "# t_probe=" << fmt(t_probe) << "\ndt";
  for (const auto& n : names) std::cout << ",dev_" << n << ",order_" << n;
  std::cout << '\n';
  for (const auto& r : rows) {
    std::cout << fmt(r.dt);
    for (std::size_t i = 0; i < names.size(); ++i) std::cout << ',' << fmt(r.deviation[i]) << ',' << fmt(r.order[i]);
    std::cout << '\n';
  }
  return 0;
}

int cmd_growth(const std::string& csv, const std::vector<double>& window, const std::string& invariant) {
  const auto s = plmm::read_csv(csv);
  std::cout << "invariant,slope\n";
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    if (!invariant.empty() && s.names[i] != invariant) continue;
    std::cout << s.names[i] << ',' << fmt(plmm::growth_fit(s, i, window[0], window[1])) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned linear multistep experiments"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  auto* run = app.add_subcommand("run", "Integrate every dt of one or more configs and write CSVs");
  run->add_option("config", configs, "Config files")->required()->check(CLI::ExistingFile);

  std::string method;
  double z_max = 2.0, tol = 1e-10, step = 1e-3;
  auto* stab = app.add_subcommand("stability", "Max root modulus on the imaginary axis as CSV");
  stab->add_option("method", method, "Method name")->required();
  stab->add_option("--zmax", z_max, "Largest z scanned")->check(CLI::PositiveNumber);
  stab->add_option("--tol", tol, "Unit-modulus tolerance")->check(CLI::NonNegativeNumber);
  stab->add_option("--step", step, "Scan spacing")->check(CLI::PositiveNumber);

  std::vector<std::string> csvs;
  double t_probe = 0.0;
  auto* order = app.add_subcommand("order", "Empirical orders at a probe time from a dt ladder");
  order->add_option("csv", csvs, "Deviation CSVs")->required()->check(CLI::ExistingFile);
  order->add_option("--t", t_probe, "Probe time")->required();

  std::string csv, invariant;
  std::vector<double> window;
  auto* growth = app.add_subcommand("growth", "Log-log slope of deviations over a time window");
  growth->add_option("csv", csv, "Deviation CSV")->required()->check(CLI::ExistingFile);
  growth->add_option("--window", window, "t_a t_b")->required()->expected(2);
  growth->add_option("--invariant", invariant, "Only this invariant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (*run) return cmd_run(configs);
    if (*stab) return cmd_stability(method, z_max, tol, step);
    if (*order) return cmd_order(csvs, t_probe);
    if (*growth) return cmd_growth(csv, window, invariant);
  } catch (const plmm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
