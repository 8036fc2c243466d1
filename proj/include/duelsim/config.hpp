#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duelsim/engine.hpp"
#include "duelsim/errors.hpp"
#include "duelsim/ltr.hpp"

namespace duelsim {

// A run file is a JSON object:
//
//   {
//     "base_seed": 20201, "replications": 500, "alpha_explore": 0.6,
//     "significance_alpha": 0.05, "horizon_multiplier": 10,
//     "checkpoint_count": 20, "target_power": 0.8,
//     "grid": {"arms": [3, 5], "effect_w": [0, 0.1, 0.3, 0.5],
//              "policies": ["dts", "uniform"], "require_condorcet": true},
//     "ltr": [{"matrix": "data/ltr_example_matrix.csv", "size": 3,
//              "mode": "condorcet", "indices": [4, 17, 90],
//              "multiplier": 1, "policies": ["dts", "uniform"]}]
//   }
//
// Every top-level key is optional; "grid" and "ltr" each add conditions.
// Relative matrix paths resolve against the config file's directory.

struct RunOverrides {
  std::optional<std::uint64_t> base_seed;
  std::optional<std::size_t> replications;
};

struct RunPlan {
  RunSettings settings;
  std::vector<ExperimentConfig> conditions;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "has the wrong type");
  }
}

inline std::uint64_t get_count(const json& obj, const std::string& key, const std::string& path,
                               std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path, "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::vector<Policy> get_policies(const json& obj, const std::string& path) {
  std::vector<Policy> out;
  if (!obj.contains("policies")) return {Policy::dts, Policy::uniform};
  const json& list = obj.at("policies");
  if (!list.is_array() || list.empty()) throw ConfigError(path, "must be a nonempty array");
  for (const json& v : list) {
    if (!v.is_string()) throw ConfigError(path, "entries must be strings");
    const auto p = parse_policy(v.get<std::string>());
    if (!p) throw ConfigError(path, "unknown policy '" + v.get<std::string>() + "'");
    out.push_back(*p);
  }
  return out;
}

}  // namespace detail

inline RunPlan parse_run_config(const nlohmann::json& root, const std::filesystem::path& base_dir = {},
                                const RunOverrides& overrides = {}) {
  using detail::get_count;
  using detail::get_field;
  if (!root.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  detail::reject_unknown(root, "",
                         {"base_seed", "replications", "alpha_explore", "significance_alpha", "horizon_multiplier",
                          "checkpoint_count", "target_power", "grid", "ltr"});
  RunPlan plan;
  RunSettings& s = plan.settings;
  s.base_seed = get_count(root, "base_seed", "base_seed", s.base_seed);
  s.replications = get_count(root, "replications", "replications", s.replications);
  s.alpha_explore = get_field<double>(root, "alpha_explore", "alpha_explore", s.alpha_explore);
  s.significance_alpha = get_field<double>(root, "significance_alpha", "significance_alpha", s.significance_alpha);
  s.horizon_multiplier = get_count(root, "horizon_multiplier", "horizon_multiplier", s.horizon_multiplier);
  s.checkpoint_count = get_count(root, "checkpoint_count", "checkpoint_count", s.checkpoint_count);
  s.target_power = get_field<double>(root, "target_power", "target_power", s.target_power);
  if (overrides.base_seed) s.base_seed = *overrides.base_seed;
  if (overrides.replications) s.replications = *overrides.replications;

  if (s.replications < 1) throw ConfigError("replications", "must be at least 1");
  if (s.checkpoint_count < 1) throw ConfigError("checkpoint_count", "must be at least 1");
  if (!(s.alpha_explore > 0.5)) throw ConfigError("alpha_explore", "must exceed 0.5");
  if (!(s.significance_alpha > 0.0 && s.significance_alpha < 1.0))
    throw ConfigError("significance_alpha", "must lie in (0, 1)");
  if (!(s.target_power > 0.0 && s.target_power < 1.0)) throw ConfigError("target_power", "must lie in (0, 1)");
  if (s.horizon_multiplier < 1) throw ConfigError("horizon_multiplier", "must be at least 1");

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    if (!g.is_object()) throw ConfigError("grid", "must be an object");
    detail::reject_unknown(g, "grid", {"arms", "effect_w", "policies", "require_condorcet"});
    const auto arms = get_field<std::vector<std::size_t>>(g, "arms", "grid.arms", {3, 5});
    const auto effects = get_field<std::vector<double>>(g, "effect_w", "grid.effect_w", {0.0, 0.1, 0.3, 0.5});
    RunSettings gs = s;
    gs.require_condorcet = get_field<bool>(g, "require_condorcet", "grid.require_condorcet", true);
    auto grid = build_condition_grid(arms, effects, detail::get_policies(g, "grid.policies"), gs);
    plan.conditions.insert(plan.conditions.end(), grid.begin(), grid.end());
  }

  if (root.contains("ltr")) {
    const auto& list = root.at("ltr");
    if (!list.is_array()) throw ConfigError("ltr", "must be an array");
    std::map<std::string, std::shared_ptr<const PreferenceMatrix>> cache;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "ltr[" + std::to_string(i) + "]";
      const auto& e = list[i];
      if (!e.is_object()) throw ConfigError(path, "must be an object");
      detail::reject_unknown(e, path, {"matrix", "expected_size", "size", "mode", "indices", "multiplier", "policies"});
      if (!e.contains("matrix")) throw ConfigError(path + ".matrix", "is required");
      const std::string matrix_field = get_field<std::string>(e, "matrix", path + ".matrix", "");
      std::filesystem::path matrix_path = matrix_field;
      if (matrix_path.is_relative() && !base_dir.empty()) matrix_path = base_dir / matrix_path;

      LtrEnvironment env;
      env.matrix_path = matrix_field;
      std::optional<std::size_t> expected;
      if (e.contains("expected_size")) expected = get_count(e, "expected_size", path + ".expected_size", 0);
      const std::string key = matrix_path.string();
      if (!cache.count(key)) {
        try {
          cache[key] = std::make_shared<const PreferenceMatrix>(load_matrix({key, expected}));
        } catch (const Error& err) {
          throw ConfigError(path + ".matrix", err.what());
        }
      }
      env.matrix = cache[key];
      env.submatrix.size = get_count(e, "size", path + ".size", 3);
      const std::string mode = get_field<std::string>(e, "mode", path + ".mode", "condorcet");
      const auto parsed_mode = parse_condorcet_mode(mode);
      if (!parsed_mode) throw ConfigError(path + ".mode", "must be condorcet, non-condorcet or any");
      env.submatrix.mode = *parsed_mode;
      if (e.contains("indices") && !e.at("indices").is_null())
        env.submatrix.indices = get_field<std::vector<Arm>>(e, "indices", path + ".indices", {});
      try {
        env.submatrix.validate(env.matrix->size());
      } catch (const Error& err) {
        throw ConfigError(path, err.what());
      }
      RunSettings ls = s;
      ls.horizon_multiplier = get_count(e, "multiplier", path + ".multiplier", 1);
      if (ls.horizon_multiplier < 1 || ls.horizon_multiplier > 10)
        throw ConfigError(path + ".multiplier", "must lie in [1, 10]");
      for (Policy p : detail::get_policies(e, path + ".policies"))
        plan.conditions.push_back(build_ltr_condition(ls, p, env));
    }
  }

  if (plan.conditions.empty()) throw ConfigError("grid", "config defines no conditions");
  std::set<std::string> ids;
  for (const auto& c : plan.conditions) {
    c.validate();
    if (!ids.insert(c.id()).second) throw ConfigError("conditions", "duplicate condition '" + c.id() + "'");
  }
  return plan;
}

inline RunPlan load_run_config(const std::filesystem::path& path, const RunOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(root, path.parent_path(), overrides);
}

}  // namespace duelsim
