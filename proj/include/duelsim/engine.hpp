#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "duelsim/errors.hpp"
#include "duelsim/ltr.hpp"
#include "duelsim/policies.hpp"
#include "duelsim/preference.hpp"
#include "duelsim/random.hpp"
#include "duelsim/stats.hpp"

namespace duelsim {

enum class Policy { uniform, dts };

inline std::string to_string(Policy p) { return p == Policy::dts ? "dts" : "uniform"; }

inline std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "dts") return Policy::dts;
  if (s == "uniform") return Policy::uniform;
  return std::nullopt;
}

/// Synthetic condition: every pair differs by `delta_level` with random
/// orientation, or all pairs tie when `zero_effect` is set.
struct SyntheticEnvironment {
  std::size_t k = 3;
  double delta_level = 0.15;
  bool zero_effect = false;
  bool require_condorcet = true;
};

/// Submatrices of a loaded ranker matrix.
struct LtrEnvironment {
  std::shared_ptr<const PreferenceMatrix> matrix;
  std::string matrix_path;
  SubmatrixSpec submatrix;
};

using Environment = std::variant<SyntheticEnvironment, LtrEnvironment>;

// Shortest decimal text that round-trips, e.g. 0.3 -> "0.3".
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

struct ExperimentConfig {
  Policy policy = Policy::uniform;
  Environment environment = SyntheticEnvironment{};
  std::uint64_t horizon = 1;
  std::size_t replications = 500;
  std::vector<std::uint64_t> checkpoints{1};
  std::uint64_t base_seed = 20201;
  double alpha_explore = kDefaultAlphaExplore;
  double significance_alpha = kDefaultSignificance;
  std::uint64_t horizon_multiplier = 10;

  std::size_t arms() const {
    if (const auto* s = std::get_if<SyntheticEnvironment>(&environment)) return s->k;
    return std::get<LtrEnvironment>(environment).submatrix.size;
  }

  bool is_synthetic() const { return std::holds_alternative<SyntheticEnvironment>(environment); }

  /// Identifies the environment, independent of policy; DTS and uniform runs
  /// of the same environment share it.
  std::string environment_id() const {
    if (const auto* s = std::get_if<SyntheticEnvironment>(&environment)) {
      std::string id = "syn-k" + std::to_string(s->k) + "-w" +
                       (s->zero_effect ? std::string("0") : format_number(cohens_w_from_delta(s->delta_level)));
      if (!s->zero_effect && !s->require_condorcet) id += "-any";
      return id;
    }
    const auto& l = std::get<LtrEnvironment>(environment);
    std::string id = "ltr-s" + std::to_string(l.submatrix.size) + "-" + to_string(l.submatrix.mode);
    if (l.submatrix.indices) {
      id += "-i";
      for (std::size_t i = 0; i < l.submatrix.indices->size(); ++i)
        id += (i ? "." : "") + std::to_string((*l.submatrix.indices)[i]);
    }
    return id + "-x" + std::to_string(horizon_multiplier);
  }

  std::string id() const { return environment_id() + "-" + to_string(policy); }

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon", "must be at least 1");
    if (replications < 1) throw ConfigError("replications", "must be at least 1");
    if (checkpoints.empty()) throw ConfigError("checkpoints", "must not be empty");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      if (checkpoints[i] < 1 || checkpoints[i] > horizon)
        throw ConfigError("checkpoints", "each checkpoint must lie in [1, horizon]");
      if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
        throw ConfigError("checkpoints", "must be strictly increasing");
    }
    if (checkpoints.back() != horizon) throw ConfigError("checkpoints", "last checkpoint must equal the horizon");
    if (!(alpha_explore > 0.5)) throw ConfigError("alpha_explore", "must exceed 0.5");
    if (!(significance_alpha > 0.0 && significance_alpha < 1.0))
      throw ConfigError("significance_alpha", "must lie in (0, 1)");
    if (horizon_multiplier < 1) throw ConfigError("horizon_multiplier", "must be at least 1");
    if (const auto* s = std::get_if<SyntheticEnvironment>(&environment)) {
      if (s->k < 2) throw ConfigError("k", "must be at least 2");
      if (!s->zero_effect && !(s->delta_level > 0.0 && s->delta_level <= 0.5))
        throw ConfigError("delta", "must lie in (0, 0.5]");
    } else {
      const auto& l = std::get<LtrEnvironment>(environment);
      if (!l.matrix) throw ConfigError("matrix", "LTR environment has no matrix loaded");
      if (horizon_multiplier > 10) throw ConfigError("horizon_multiplier", "LTR multiplier must lie in [1, 10]");
      try {
        l.submatrix.validate(l.matrix->size());
      } catch (const Error& e) {
        throw ConfigError("submatrix", e.what());
      }
    }
  }
};

/// `count` evenly spaced participant indices ending at the horizon.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon, std::uint64_t count = 20) {
  if (horizon < 1 || count < 1) throw DomainError("checkpoint schedule needs horizon, count >= 1");
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 1; i <= count; ++i) {
    // round(i * horizon / count), half up
    const std::uint64_t t = std::max<std::uint64_t>(1, (2 * i * horizon + count) / (2 * count));
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

struct PairCounts {
  std::uint64_t wins_lo = 0;  // wins of the lower-index arm
  std::uint64_t wins_hi = 0;
  std::uint64_t total() const noexcept { return wins_lo + wins_hi; }
};

/// Snapshot of one replication after `t` participants.
struct CheckpointMetrics {
  std::uint64_t t = 0;
  std::vector<PairCounts> pair_counts;  // lexicographic pair order
  std::vector<PairTestResult> pair_tests;
  double cum_strong_regret = 0.0;
  std::uint64_t condorcet_assigned = 0;
};

struct ReplicationResult {
  std::vector<CheckpointMetrics> checkpoints;
  std::vector<Arm> environment_indices;  // LTR rankers, empty for synthetic
  bool has_condorcet = false;
  bool zero_effect = false;
  double min_effect_w = 0.0;
};

/// Runs the participant loop on a fixed matrix with the given stream.
inline std::vector<CheckpointMetrics> simulate(const ExperimentConfig& config, const PreferenceMatrix& p, Rng& rng) {
  const std::size_t k = p.size();
  if (k != config.arms())
    throw ConfigMismatch("matrix has " + std::to_string(k) + " arms, config expects " + std::to_string(config.arms()));
  const WinnerAnalysis winners = analyze_winners(p);
  const Arm ref = winners.reference_arm;
  const std::vector<ArmPair> pairs = all_pairs(k);

  std::vector<PairCounts> counts(pairs.size());
  std::optional<DtsState> dts;
  DtsScratch scratch;
  if (config.policy == Policy::dts) dts.emplace(k, config.alpha_explore);

  std::vector<CheckpointMetrics> out;
  out.reserve(config.checkpoints.size());
  auto next = config.checkpoints.begin();
  double regret = 0.0;
  std::uint64_t assigned = 0;

  for (std::uint64_t t = 1; t <= config.horizon; ++t) {
    const ArmPair pair = dts ? dts_select(*dts, rng, scratch) : uniform_select(k, rng);
    const Arm winner = sample_duel(p, pair.first, pair.second, uniform01(rng));
    if (dts) dts->record(pair, winner);
    PairCounts& c = counts[pair_index(pair.first, pair.second, k)];
    ++(winner == pair.lo() ? c.wins_lo : c.wins_hi);
    regret += step_strong_regret(p, ref, pair.first, pair.second);
    if (winners.condorcet && pair.contains(*winners.condorcet)) ++assigned;

    if (next != config.checkpoints.end() && *next == t) {
      CheckpointMetrics m;
      m.t = t;
      m.pair_counts = counts;
      m.pair_tests.reserve(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i)
        m.pair_tests.push_back(pair_test(counts[i].wins_lo, counts[i].wins_hi, config.significance_alpha, pairs[i]));
      m.cum_strong_regret = regret;
      m.condorcet_assigned = assigned;
      out.push_back(std::move(m));
      ++next;
    }
  }
  return out;
}

/// One replication on a caller-supplied matrix, with the stream derived from
/// (base_seed, condition id, replication_index).
inline std::vector<CheckpointMetrics> run_replication(const ExperimentConfig& config, const PreferenceMatrix& p,
                                                      std::uint64_t replication_index) {
  config.validate();
  Rng rng(stream_seed(config.base_seed, config.id(), replication_index));
  return simulate(config, p, rng);
}

/// One replication including environment generation: the matrix (fresh
/// orientation or a resampled submatrix) is drawn first from the replication
/// stream, then the participant loop continues on the same stream.
inline ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t replication_index) {
  Rng rng(stream_seed(config.base_seed, config.id(), replication_index));
  ReplicationResult out;
  auto finish = [&](const PreferenceMatrix& p) {
    out.has_condorcet = analyze_winners(p).condorcet.has_value();
    double min_w = 1.0;
    bool zero = true;
    for (const ArmPair& pr : all_pairs(p.size())) {
      const double w = cohens_w_from_delta(delta(p, pr.first, pr.second));
      min_w = std::min(min_w, w);
      zero = zero && w == 0.0;
    }
    out.min_effect_w = min_w;
    out.zero_effect = zero;
    out.checkpoints = simulate(config, p, rng);
  };
  if (const auto* s = std::get_if<SyntheticEnvironment>(&config.environment)) {
    if (s->zero_effect)
      finish(zero_effect_matrix(s->k));
    else
      finish(generate_effect_matrix(s->k, s->delta_level, s->require_condorcet, rng));
  } else {
    const auto& l = std::get<LtrEnvironment>(config.environment);
    Submatrix sub = sample_submatrix(*l.matrix, l.submatrix, rng);
    out.environment_indices = sub.indices;
    finish(sub.matrix);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct CheckpointSummary {
  std::uint64_t t = 0;
  double mean_power = 0.0;
  std::vector<double> pair_power;
  double mean_cum_regret = 0.0;
  double regret_q10 = 0.0;
  double regret_median = 0.0;
  double regret_q90 = 0.0;
  std::optional<double> condorcet_prop;  // replications with a Condorcet winner
  std::optional<double> per_pair_fpr;    // zero-effect conditions only
  std::optional<double> family_fpr;
};

struct AggregateReport {
  std::string condition_id;
  std::string environment_id;
  Policy policy = Policy::uniform;
  std::size_t k = 0;
  std::optional<double> effect_w;
  bool zero_effect = false;
  std::uint64_t horizon = 0;
  std::size_t replications = 0;
  std::vector<ArmPair> pairs;
  std::vector<CheckpointSummary> checkpoints;
  std::vector<double> final_pair_power;
  std::vector<double> final_regret;               // one per replication
  std::vector<double> condorcet_proportions;      // final, one per Condorcet replication
  std::optional<double> condorcet_prop_mean;
  std::optional<double> condorcet_prop_median;
};

// Linear-interpolation quantile of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Folds replication results, taken in replication-index order, into a report.
inline AggregateReport aggregate(const ExperimentConfig& config, const std::vector<ReplicationResult>& reps) {
  if (reps.empty()) throw EmptyInput("no replications to aggregate");
  AggregateReport r;
  r.condition_id = config.id();
  r.environment_id = config.environment_id();
  r.policy = config.policy;
  r.k = config.arms();
  r.horizon = config.horizon;
  r.replications = reps.size();
  r.pairs = all_pairs(r.k);
  r.zero_effect = std::all_of(reps.begin(), reps.end(), [](const ReplicationResult& x) { return x.zero_effect; });
  if (const auto* s = std::get_if<SyntheticEnvironment>(&config.environment)) {
    r.effect_w = s->zero_effect ? 0.0 : cohens_w_from_delta(s->delta_level);
  } else {
    double sum = 0.0;
    for (const auto& x : reps) sum += x.min_effect_w;
    r.effect_w = sum / static_cast<double>(reps.size());
  }

  std::vector<std::vector<PairTestResult>> tests(reps.size());
  std::vector<double> regrets(reps.size());
  for (std::size_t c = 0; c < config.checkpoints.size(); ++c) {
    CheckpointSummary s;
    s.t = config.checkpoints[c];
    double prop_sum = 0.0;
    std::size_t prop_n = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const CheckpointMetrics& m = reps[i].checkpoints.at(c);
      tests[i] = m.pair_tests;
      regrets[i] = m.cum_strong_regret;
      if (reps[i].has_condorcet) {
        prop_sum += static_cast<double>(m.condorcet_assigned) / static_cast<double>(m.t);
        ++prop_n;
      }
    }
    const PowerSummary power = aggregate_power(tests);
    s.mean_power = power.mean;
    s.pair_power = power.per_pair;
    double regret_sum = 0.0;
    for (double v : regrets) regret_sum += v;
    s.mean_cum_regret = regret_sum / static_cast<double>(regrets.size());
    s.regret_q10 = quantile(regrets, 0.1);
    s.regret_median = quantile(regrets, 0.5);
    s.regret_q90 = quantile(regrets, 0.9);
    if (prop_n > 0) s.condorcet_prop = prop_sum / static_cast<double>(prop_n);
    if (r.zero_effect) {
      const FprSummary fpr = aggregate_fpr(tests);
      s.per_pair_fpr = fpr.per_pair_fpr;
      s.family_fpr = fpr.family_wise_fpr;
    }
    r.checkpoints.push_back(std::move(s));
  }
  r.final_pair_power = r.checkpoints.back().pair_power;
  r.final_regret = regrets;
  for (const auto& x : reps)
    if (x.has_condorcet) {
      const CheckpointMetrics& m = x.checkpoints.back();
      r.condorcet_proportions.push_back(static_cast<double>(m.condorcet_assigned) / static_cast<double>(m.t));
    }
  if (!r.condorcet_proportions.empty()) {
    double sum = 0.0;
    for (double v : r.condorcet_proportions) sum += v;
    r.condorcet_prop_mean = sum / static_cast<double>(r.condorcet_proportions.size());
    r.condorcet_prop_median = quantile(r.condorcet_proportions, 0.5);
  }
  return r;
}

/// Worker count: DUELSIM_WORKERS if set and positive, else the hardware
/// concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("DUELSIM_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs all replications of one condition on `workers` threads. Results are
/// stored by replication index, so the report does not depend on scheduling.
inline AggregateReport run_condition(const ExperimentConfig& config, std::size_t workers = 0) {
  config.validate();
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, config.replications);

  std::vector<ReplicationResult> results(config.replications);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < config.replications; i = next++) {
      try {
        results[i] = run_replication(config, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.replications;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(config, results);
}

// ---------------------------------------------------------------------------
// Condition construction
// ---------------------------------------------------------------------------

/// Settings shared by every condition of a run.
struct RunSettings {
  std::size_t replications = 500;
  std::uint64_t base_seed = 20201;
  double alpha_explore = kDefaultAlphaExplore;
  double significance_alpha = kDefaultSignificance;
  std::uint64_t horizon_multiplier = 10;
  std::uint64_t checkpoint_count = 20;
  double target_power = 0.8;
  bool require_condorcet = true;
};

inline ExperimentConfig make_config(const RunSettings& settings, Policy policy, Environment env, std::uint64_t horizon) {
  ExperimentConfig c;
  c.policy = policy;
  c.environment = std::move(env);
  c.horizon = horizon;
  c.replications = settings.replications;
  c.checkpoints = default_checkpoints(horizon, settings.checkpoint_count);
  c.base_seed = settings.base_seed;
  c.alpha_explore = settings.alpha_explore;
  c.significance_alpha = settings.significance_alpha;
  c.horizon_multiplier = settings.horizon_multiplier;
  return c;
}

/// Participants per pair for the target power at effect size w.
inline std::uint64_t participants_per_pair(double w, const RunSettings& settings) {
  return required_sample_size(PowerSpec{w, settings.target_power, settings.significance_alpha, 1});
}

/// Cartesian product policy x arms x effect size. Nonzero effects use
/// s = multiplier * m(w) * C(k, 2); zero effect borrows m(0.3).
inline std::vector<ExperimentConfig> build_condition_grid(const std::vector<std::size_t>& arms,
                                                          const std::vector<double>& effect_ws,
                                                          const std::vector<Policy>& policies,
                                                          const RunSettings& settings = {}) {
  if (arms.empty() || effect_ws.empty() || policies.empty())
    throw ConfigError("grid", "arms, effect sizes and policies must be nonempty");
  std::vector<ExperimentConfig> out;
  for (Policy policy : policies)
    for (std::size_t k : arms)
      for (double w : effect_ws) {
        if (k < 2) throw ConfigError("grid.arms", "arm counts must be at least 2");
        if (!(w >= 0.0 && w < 1.0)) throw ConfigError("grid.effect_w", "effect sizes must lie in [0, 1)");
        SyntheticEnvironment env;
        env.k = k;
        env.zero_effect = w == 0.0;
        env.delta_level = w / 2.0;
        env.require_condorcet = settings.require_condorcet;
        const std::uint64_t m = participants_per_pair(w == 0.0 ? 0.3 : w, settings);
        out.push_back(make_config(settings, policy, env,
                                  horizon_for_condition(m, pair_count(k), settings.horizon_multiplier)));
      }
  return out;
}

/// An LTR condition: horizon C(size, 2) * m(0.1) * multiplier.
inline ExperimentConfig build_ltr_condition(const RunSettings& settings, Policy policy, LtrEnvironment env) {
  if (settings.horizon_multiplier < 1 || settings.horizon_multiplier > 10)
    throw ConfigError("horizon_multiplier", "LTR multiplier must lie in [1, 10]");
  const std::uint64_t horizon =
      horizon_for_condition(ltr_base_sample_size(), pair_count(env.submatrix.size), settings.horizon_multiplier);
  return make_config(settings, policy, std::move(env), horizon);
}

}  // namespace duelsim
