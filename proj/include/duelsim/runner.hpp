#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duelsim/config.hpp"
#include "duelsim/engine.hpp"
#include "duelsim/report.hpp"

namespace duelsim {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs every condition of `plan` and writes <condition_id>.csv per
/// condition, summary.json and manifest.json into `out_dir`.
inline RunManifest simulate_to_directory(const RunPlan& plan, const std::filesystem::path& out_dir,
                                         std::size_t workers = 0) {
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.config_digest = config_digest(plan.conditions);
  manifest.base_seed = plan.settings.base_seed;
  manifest.started = utc_timestamp();

  nlohmann::ordered_json summary;
  summary["config_digest"] = manifest.config_digest;
  summary["base_seed"] = plan.settings.base_seed;
  summary["conditions"] = nlohmann::ordered_json::array();
  for (const ExperimentConfig& c : plan.conditions) {
    const AggregateReport report = run_condition(c, workers);
    const auto path = out_dir / (c.id() + ".csv");
    atomic_write(path, metrics_csv(metrics_rows(report)));
    manifest.outputs.push_back(path.filename().string());
    summary["conditions"].push_back(report_json(report));
  }
  atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
  manifest.outputs.push_back("summary.json");
  manifest.finished = utc_timestamp();
  atomic_write(out_dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace duelsim
