#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ridgebounds/bounds.hpp"
#include "ridgebounds/errors.hpp"
#include "ridgebounds/experiments.hpp"
#include "ridgebounds/io.hpp"
#include "ridgebounds/verify.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ridgebounds;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int cmd_bounds(const std::string& config_path, std::optional<int> k_flag,
               std::optional<double> b_flag, const std::string& format,
               const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const json config_json = load_json(config_path);
  const ExperimentConfig config = io::config_from_json(config_json);
  const Spectrum spec = config.spectrum();
  const SignalSpec sig = config.resolve_signal(spec);

  std::vector<BoundReport> reports;
  for (double lambda : config.lambda_grid) {
    int k = 0;
    std::optional<CapMode> cap_mode;
    if (k_flag) {
      k = *k_flag;
      if (config.ratio_interval) cap_mode = *config.ratio_interval;
    } else {
      const double b = b_flag.value_or(2.0);
      const auto k_star = select_k_star(spec, lambda, config.n, b);
      if (!k_star) {
        throw DomainError(
            "no k in range has rho_k > b at this lambda (effective rank "
            "precondition of the split rule)");
      }
      k = *k_star;
      cap_mode = CapKStar{b};
    }
    reports.push_back(
        make_bound_report(spec, sig, config.n, lambda, k, config.constants, cap_mode));
  }

  fs::create_directories(out_dir);
  if (format == "csv") {
    std::string csv = io::bound_report_csv_header() + "\n";
    for (const auto& r : reports) csv += io::bound_report_csv_row(r) + "\n";
    write_file(fs::path(out_dir) / "bounds.csv", csv);
  } else {
    json rows = json::array();
    for (const auto& r : reports) rows.push_back(io::bound_report_to_json(r));
    const json envelope = io::output_envelope(config_json, std::move(rows),
                                              elapsed_seconds(start), config.base_seed);
    write_file(fs::path(out_dir) / "bounds.json", envelope.dump(2) + "\n");
  }
  std::cout << "wrote bound report for " << reports.size() << " lambda values to "
            << out_dir << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads, std::optional<std::uint64_t> seed_flag) {
  const auto start = std::chrono::steady_clock::now();
  const json config_json = load_json(config_path);
  ExperimentConfig config = io::config_from_json(config_json);
  if (seed_flag) config.base_seed = *seed_flag;

  const SweepResult sweep = run_sweep(config, threads);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "sweep.csv", io::sweep_csv(sweep));
  const json envelope =
      io::output_envelope(io::config_to_json(config),
                          io::sweep_summary_json(sweep, config),
                          elapsed_seconds(start), config.base_seed);
  write_file(fs::path(out_dir) / "summary.json", envelope.dump(2) + "\n");
  std::cout << "wrote sweep artifacts to " << out_dir;
  if (sweep.lambda_opt) std::cout << " (lambda_opt = " << *sweep.lambda_opt << ")";
  std::cout << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int samples) {
  const verify::SuiteResult result = verify::run_suite(suite, seed, samples);
  std::cout << verify::to_json(result).dump(2) << "\n";
  return result.all_passed() ? kExitOk : kExitVerifyFailed;
}

int cmd_regimes(const std::string& regime, int n, const std::string& out_dir,
                int threads, std::optional<std::uint64_t> seed_flag) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  if (regime == "exp") {
    const double gamma = std::pow(static_cast<double>(n), -1.0 / 3.0);
    config = preset_exponential_decay(gamma, n);
  } else if (regime == "spiked") {
    config = preset_spiked_negative(4, 40 * n, 500.0, 1.0, n, 1.0);
  } else if (regime == "negative") {
    config = preset_spiked_negative(4, 40 * n, 500.0, 1.0, n, 100.0);
  } else {
    throw CLI::ValidationError("--regime", "must be one of exp|spiked|negative");
  }
  if (seed_flag) config.base_seed = *seed_flag;

  const SweepResult sweep = run_sweep(config, threads);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "sweep.csv", io::sweep_csv(sweep));

  json verdict;
  verdict["regime"] = regime;
  verdict["n"] = n;
  verdict["lambda_opt"] = sweep.lambda_opt ? json(*sweep.lambda_opt) : json(nullptr);
  if (sweep.lambda_opt) {
    const bool negative = *sweep.lambda_opt < 0.0;
    double zero_mean = std::numeric_limits<double>::quiet_NaN();
    double zero_se = 0.0;
    double opt_mean = std::numeric_limits<double>::quiet_NaN();
    double opt_se = 0.0;
    for (const auto& agg : sweep.per_lambda) {
      if (agg.lambda == 0.0 && agg.available) {
        zero_mean = agg.mean_mse;
        zero_se = agg.se_mean_mse;
      }
      if (agg.lambda == *sweep.lambda_opt && agg.available) {
        opt_mean = agg.mean_mse;
        opt_se = agg.se_mean_mse;
      }
    }
    const double gap = zero_mean - opt_mean;
    const double combined = std::sqrt(zero_se * zero_se + opt_se * opt_se);
    verdict["mean_mse_at_zero"] = zero_mean;
    verdict["mean_mse_at_opt"] = opt_mean;
    verdict["gap_in_se"] = combined > 0.0 ? gap / combined : 0.0;
    verdict["lambda_opt_negative"] =
        negative && std::isfinite(gap) && gap > 3.0 * combined;
  } else {
    verdict["lambda_opt_negative"] = false;
  }
  const json envelope =
      io::output_envelope(io::config_to_json(config),
                          json{{"verdict", verdict},
                               {"summary", io::sweep_summary_json(sweep, config)}},
                          elapsed_seconds(start), config.base_seed);
  write_file(fs::path(out_dir) / "regime.json", envelope.dump(2) + "\n");
  std::cout << envelope["results"]["verdict"].dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ridge regression bound evaluation and synthetic experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string format = "json";
  int threads = 0;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> k_flag;
  std::optional<double> b_flag;

  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate closed-form bound reports");
  bounds_cmd->add_option("--config", config_path, "JSON config path")->required();
  auto* k_opt = bounds_cmd->add_option("--k", k_flag, "fixed split index k");
  auto* b_opt = bounds_cmd->add_option("--b", b_flag, "k* threshold b (default 2)");
  k_opt->excludes(b_opt);
  bounds_cmd->add_option("--format", format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  bounds_cmd->add_option("--out", out_dir, "output directory");

  auto* simulate_cmd = app.add_subcommand("simulate", "run a seeded Monte Carlo sweep");
  simulate_cmd->add_option("--config", config_path, "JSON config path")->required();
  simulate_cmd->add_option("--out", out_dir, "output directory");
  simulate_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  simulate_cmd->add_option("--seed", seed_flag, "override base seed");

  std::string suite;
  std::uint64_t verify_seed = 7;
  int samples = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd
      ->add_option("--suite", suite,
                   "dual_primal|identity|variance_mc|ratio_caps|concentration")
      ->required();
  verify_cmd->add_option("--seed", verify_seed, "suite seed");
  verify_cmd->add_option("--samples", samples, "sample count override");

  std::string regime;
  int regime_n = 200;
  auto* regimes_cmd = app.add_subcommand("regimes", "run a regime preset sweep");
  regimes_cmd->add_option("--regime", regime, "exp|spiked|negative")->required();
  regimes_cmd->add_option("--n", regime_n, "sample size");
  regimes_cmd->add_option("--out", out_dir, "output directory");
  regimes_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  regimes_cmd->add_option("--seed", seed_flag, "override base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds_cmd->parsed()) {
      return cmd_bounds(config_path, k_flag, b_flag, format, out_dir);
    }
    if (simulate_cmd->parsed()) {
      return cmd_simulate(config_path, out_dir, threads, seed_flag);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(suite, verify_seed, samples);
    }
    return cmd_regimes(regime, regime_n, out_dir, threads, seed_flag);
  } catch (const ridgebounds::NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << " (min eigenvalue " << e.min_eigenvalue()
              << ")\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
