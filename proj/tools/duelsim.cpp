// Command-line front end: simulate, power, ltr-sample, report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "duelsim/duelsim.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> replications) {
  duelsim::RunPlan plan;
  try {
    plan = duelsim::load_run_config(config_path, {seed, replications});
  } catch (const duelsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const duelsim::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto manifest = duelsim::simulate_to_directory(plan, out_dir);
    std::cout << "wrote " << plan.conditions.size() << " conditions to " << out_dir << " (digest "
              << manifest.config_digest << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "simulation failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_power(double w, double power, double alpha) {
  if (!(w > 0.0)) {
    std::cerr << "error: --effect-w must be positive\n";
    return kExitConfig;
  }
  try {
    const std::uint64_t m = duelsim::required_sample_size({w, power, alpha, 1});
    std::cout << "effect_w=" << duelsim::format_number(w) << " power=" << duelsim::format_number(power)
              << " alpha=" << duelsim::format_number(alpha) << "\n";
    std::cout << "m=" << m << "\n";
    for (std::size_t k : {3u, 5u})
      std::cout << "s(k=" << k << ")=" << duelsim::horizon_for_condition(m, duelsim::pair_count(k), 10) << "\n";
  } catch (const duelsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}

int cmd_ltr_sample(const std::string& matrix_path, std::size_t size, const std::string& mode_text,
                   std::uint64_t seed) {
  const auto mode = duelsim::parse_condorcet_mode(mode_text);
  if (!mode) {
    std::cerr << "error: --mode must be condorcet, non-condorcet or any\n";
    return kExitConfig;
  }
  duelsim::PreferenceMatrix full = duelsim::zero_effect_matrix(2);
  try {
    full = duelsim::load_matrix({matrix_path, std::nullopt});
  } catch (const duelsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    duelsim::Rng rng(duelsim::splitmix64(seed));
    const auto sub = duelsim::sample_submatrix(full, {size, *mode, std::nullopt}, rng);
    const auto winners = duelsim::analyze_winners(sub.matrix);
    const auto cond = duelsim::ltr_condition(sub.matrix, 1);
    std::cout << "indices:";
    for (auto i : sub.indices) std::cout << ' ' << i;
    std::cout << "\ncondorcet: " << (winners.condorcet ? std::to_string(sub.indices[*winners.condorcet]) : "none")
              << "\nmatrix:\n";
    for (duelsim::Arm i = 0; i < sub.matrix.size(); ++i) {
      for (duelsim::Arm j = 0; j < sub.matrix.size(); ++j)
        std::cout << (j ? "," : "") << duelsim::format_number(sub.matrix.at(i, j));
      std::cout << '\n';
    }
    std::cout << "min_effect_pair: " << sub.indices[cond.min_effect_pair.first] << "-"
              << sub.indices[cond.min_effect_pair.second] << " (w=" << duelsim::format_number(cond.min_effect_w)
              << ")\nhorizon(x1): " << cond.horizon << "\n";
  } catch (const duelsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir, const std::string& format_text) {
  const auto format = duelsim::parse_report_format(format_text);
  if (!format) {
    std::cerr << "error: --format must be csv, json or svg\n";
    return kExitConfig;
  }
  std::vector<duelsim::MetricsRow> rows;
  try {
    rows = duelsim::load_metrics_dir(in_dir);
  } catch (const duelsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const std::filesystem::path target = out_dir.empty() ? std::filesystem::path(in_dir) / "report" : std::filesystem::path(out_dir);
    const auto written = duelsim::write_report(rows, target, *format);
    std::cout << "wrote " << written.size() << " files to " << target.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dueling-bandit adaptive experiment simulator"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Run all conditions of a config file");
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  simulate->add_option("--config", config_path, "JSON run configuration")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seed, "Override base_seed");
  simulate->add_option("--replications", replications, "Override replications");

  auto* power = app.add_subcommand("power", "Participants per pair for a target power");
  double effect_w = 0.0;
  double target = 0.8;
  double alpha = 0.05;
  power->add_option("--effect-w", effect_w, "Cohen's w")->required();
  power->add_option("--power", target, "Target power");
  power->add_option("--alpha", alpha, "Significance level");

  auto* ltr = app.add_subcommand("ltr-sample", "Sample a ranker submatrix");
  std::string matrix_path;
  std::size_t size = 3;
  std::string mode = "condorcet";
  std::uint64_t ltr_seed = 1;
  ltr->add_option("--matrix", matrix_path, "Preference matrix CSV")->required();
  ltr->add_option("--size", size, "Submatrix size")->check(CLI::IsMember({3, 5}));
  ltr->add_option("--mode", mode, "condorcet | non-condorcet | any");
  ltr->add_option("--seed", ltr_seed, "Random seed");

  auto* report = app.add_subcommand("report", "Render figure analogues from metrics CSVs");
  std::string in_dir;
  std::string report_out;
  std::string format = "svg";
  report->add_option("--in", in_dir, "Directory written by simulate")->required();
  report->add_option("--format", format, "csv | json | svg");
  report->add_option("--out", report_out, "Output directory (default <in>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*simulate) return cmd_simulate(config_path, out_dir, seed, replications);
  if (*power) return cmd_power(effect_w, target, alpha);
  if (*ltr) return cmd_ltr_sample(matrix_path, size, mode, ltr_seed);
  if (*report) return cmd_report(in_dir, report_out, format);
  return kExitConfig;
}
