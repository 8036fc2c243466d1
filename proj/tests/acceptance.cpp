// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "duelsim/duelsim.hpp"
#include "test_support.hpp"

using namespace duelsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("info " + what); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int failures = 0;

void report(int number, const std::string& title, const Verdict& v, double seconds) {
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << number << ": " << title << " (" << fmt(seconds, 1)
            << " s)\n";
  for (const auto& n : v.notes) std::cout << "        " << n << "\n";
  std::cout.flush();
  if (!v.pass) ++failures;
}

template <typename F>
void run(int number, const std::string& title, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(number, title, v, secs);
}

// P(X >= x) for X ~ Binomial(n, p), summed in log space.
double binomial_upper_tail(std::uint64_t x, std::uint64_t n, double p) {
  if (x == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double total = 0.0;
  for (std::uint64_t i = x; i <= n; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                            static_cast<double>(i) * std::log(p) + static_cast<double>(n - i) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

std::optional<std::uint64_t> first_reaching(const AggregateReport& r, double threshold) {
  for (const auto& c : r.checkpoints)
    if (c.mean_power >= threshold) return c.t;
  return std::nullopt;
}

std::string t_text(const std::optional<std::uint64_t>& t) { return t ? std::to_string(*t) : "never"; }

// Strictly earlier, where "never" is later than any checkpoint.
bool strictly_earlier(const std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b) {
  if (!a) return false;
  return !b || *a < *b;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// The synthetic grid at R = 500, shared by criteria 2 to 6.
class Grid {
 public:
  Grid() {
    RunSettings s;
    s.replications = 500;
    for (const auto& c : build_condition_grid({3, 5}, {0.0, 0.1, 0.3, 0.5}, {Policy::uniform, Policy::dts}, s))
      configs_.emplace(c.id(), c);
  }

  const AggregateReport& get(std::size_t k, const std::string& w, Policy p) {
    const std::string id = "syn-k" + std::to_string(k) + "-w" + w + "-" + to_string(p);
    auto it = reports_.find(id);
    if (it == reports_.end()) it = reports_.emplace(id, run_condition(configs_.at(id))).first;
    return it->second;
  }

 private:
  std::map<std::string, ExperimentConfig> configs_;
  std::map<std::string, AggregateReport> reports_;
};

const std::vector<std::string> kNonzero = {"0.1", "0.3", "0.5"};

// ---------------------------------------------------------------------------

void criterion1(Verdict& v) {
  const std::vector<std::pair<double, std::uint64_t>> expected = {{0.1, 785}, {0.3, 88}, {0.5, 32}};
  const double critical = chi_square_critical(0.05, 1);
  constexpr int sims = 1'000'000;
  for (const auto& [w, m_expected] : expected) {
    const std::uint64_t m = required_sample_size({w, 0.8, 0.05, 1});
    v.check(m == m_expected, "w=" + fmt(w, 1) + ": m=" + std::to_string(m) + " (expected " +
                                 std::to_string(m_expected) + ")");

    // Power oracle for the chi-squared model: under the alternative the df=1
    // statistic is (Z + sqrt(lambda))^2 with lambda = m w^2.
    std::mt19937_64 rng(1000 + m);
    std::normal_distribution<double> z;
    const double shift = std::sqrt(static_cast<double>(m) * w * w);
    int rejects = 0;
    for (int i = 0; i < sims; ++i) {
      const double x = z(rng) + shift;
      rejects += x * x > critical;
    }
    const double power = static_cast<double>(rejects) / sims;
    v.check(std::abs(power - 0.8) <= 0.01,
            "w=" + fmt(w, 1) + ": Monte Carlo power of the chi-squared test at m=" + std::to_string(m) + " is " +
                fmt(power) + " (0.80 +- 0.01, " + std::to_string(sims) + " simulations)");

    // Exact binomial duel outcomes at the same m, for reference.
    std::binomial_distribution<std::uint64_t> wins(m, 0.5 + w / 2.0);
    int significant = 0;
    for (int i = 0; i < sims; ++i) {
      const std::uint64_t a = wins(rng);
      significant += pair_test(a, m - a).significant;
    }
    v.info("w=" + fmt(w, 1) + ": power on simulated duels (discrete binomial counts) is " +
           fmt(static_cast<double>(significant) / sims));
  }
}

void criterion2(Verdict& v, Grid& grid) {
  double fpr[2];
  for (int i = 0; i < 2; ++i) {
    const std::size_t k = i == 0 ? 3 : 5;
    const auto& r = grid.get(k, "0", Policy::uniform);
    fpr[i] = *r.checkpoints.back().per_pair_fpr;
    v.check(std::abs(fpr[i] - 0.05) <= 0.015, "k=" + std::to_string(k) + ", horizon " + std::to_string(r.horizon) +
                                                  ": per-pair FPR " + fmt(fpr[i]) + " (0.05 +- 0.015)");
    v.info("k=" + std::to_string(k) + ": family-wise FPR " + fmt(*r.checkpoints.back().family_fpr));
  }
  v.check(std::abs(fpr[0] - fpr[1]) <= 0.02, "|FPR(k=3) - FPR(k=5)| = " + fmt(std::abs(fpr[0] - fpr[1])) + " (<= 0.02)");
}

void criterion3(Verdict& v, Grid& grid) {
  for (std::size_t k : {3u, 5u}) {
    const auto& u = grid.get(k, "0", Policy::uniform);
    const auto& d = grid.get(k, "0", Policy::dts);
    const double fu = *u.checkpoints.back().per_pair_fpr;
    const double fd = *d.checkpoints.back().per_pair_fpr;
    const std::uint64_t n = d.replications * d.pairs.size();
    const auto x = static_cast<std::uint64_t>(std::llround(fd * static_cast<double>(n)));
    const double p = binomial_upper_tail(x, n, fu);
    v.check(fd > fu && p < 0.05, "k=" + std::to_string(k) + ": DTS per-pair FPR " + fmt(fd) + " vs uniform " + fmt(fu) +
                                     ", one-sided binomial p = " + fmt(p, 6) + " (n = " + std::to_string(n) + ")");
    v.info("k=" + std::to_string(k) + ": family-wise FPR DTS " + fmt(*d.checkpoints.back().family_fpr) +
           " vs uniform " + fmt(*u.checkpoints.back().family_fpr));
  }
}

void criterion4(Verdict& v, Grid& grid) {
  for (std::size_t k : {3u, 5u})
    for (const std::string w : {"0.3", "0.5"}) {
      const auto& u = grid.get(k, w, Policy::uniform);
      const auto& d = grid.get(k, w, Policy::dts);
      const auto tu = first_reaching(u, 0.8), td = first_reaching(d, 0.8);
      const std::string label = "k=" + std::to_string(k) + ", w=" + w;
      v.check(strictly_earlier(tu, td),
              label + ": first t with mean power >= 0.8: uniform " + t_text(tu) + ", DTS " + t_text(td));
      const double pu = u.checkpoints.back().mean_power, pd = d.checkpoints.back().mean_power;
      v.check(pu >= pd, label + ": final mean power uniform " + fmt(pu) + " >= DTS " + fmt(pd));
    }
}

void criterion5(Verdict& v, Grid& grid) {
  for (std::size_t k : {3u, 5u})
    for (const std::string& w : kNonzero) {
      const double ru = grid.get(k, w, Policy::uniform).checkpoints.back().mean_cum_regret;
      const double rd = grid.get(k, w, Policy::dts).checkpoints.back().mean_cum_regret;
      const std::string label = "k=" + std::to_string(k) + ", w=" + w;
      v.check(rd < ru, label + ": mean regret at horizon DTS " + fmt(rd, 2) + " < uniform " + fmt(ru, 2));
      if (w != "0.1")
        v.check(rd < 0.5 * ru, label + ": DTS/uniform regret ratio " + fmt(rd / ru) + " (< 0.5)");
    }
}

void criterion6(Verdict& v, Grid& grid) {
  for (std::size_t k : {3u, 5u})
    for (const std::string& w : kNonzero) {
      const auto& u = grid.get(k, w, Policy::uniform);
      const double prop = *u.condorcet_prop_mean;
      const double target = 2.0 / static_cast<double>(k);
      v.check(std::abs(prop - target) <= 0.02, "uniform k=" + std::to_string(k) + ", w=" + w +
                                                   ": mean Condorcet proportion " + fmt(prop) + " (2/k = " +
                                                   fmt(target) + " +- 0.02)");
    }
  const auto& d = grid.get(3, "0.5", Policy::dts);
  v.check(*d.condorcet_prop_median > 0.9, "DTS k=3, w=0.5, horizon " + std::to_string(d.horizon) +
                                              ": median Condorcet proportion " + fmt(*d.condorcet_prop_median) +
                                              " (> 0.9)");
}

void criterion7(Verdict& v) {
  const std::string path = std::string(DUELSIM_DATA_DIR) + "/ltr_example_matrix.csv";
  auto matrix = std::make_shared<const PreferenceMatrix>(load_matrix({path, 136}));

  Rng rng(stream_seed(20201, "ltr-acceptance", 0));
  std::size_t bad = 0;
  for (int i = 0; i < 10'000; ++i) {
    const std::size_t size = i % 2 ? 5 : 3;
    const auto sub = sample_submatrix(*matrix, {size, CondorcetMode::condorcet, std::nullopt}, rng);
    if (!testing_support::brute_force_winners(sub.matrix).condorcet) ++bad;
  }
  v.check(bad == 0, "10000 condorcet-mode draws (sizes 3 and 5): " + std::to_string(bad) + " without a Condorcet winner");

  RunSettings s;
  s.replications = 200;
  s.horizon_multiplier = 1;
  LtrEnvironment env;
  env.matrix = matrix;
  env.matrix_path = path;
  env.submatrix = {3, CondorcetMode::condorcet, std::nullopt};

  // Each replication draws its own Condorcet 3-ranker submatrix.
  const auto u = run_condition(build_ltr_condition(s, Policy::uniform, env));
  const auto d = run_condition(build_ltr_condition(s, Policy::dts, env));
  const double ru = u.checkpoints.back().mean_cum_regret, rd = d.checkpoints.back().mean_cum_regret;
  v.check(rd < ru, "mean regret at horizon " + std::to_string(u.horizon) + ": DTS " + fmt(rd, 2) + " < uniform " +
                       fmt(ru, 2));
  const auto tu = first_reaching(u, 0.8), td = first_reaching(d, 0.8);
  v.check(strictly_earlier(tu, td), "first t with mean power >= 0.8: uniform " + t_text(tu) + ", DTS " + t_text(td));

  // One fixed submatrix, for comparison.
  env.submatrix.indices = sample_submatrix(*matrix, {3, CondorcetMode::condorcet, std::nullopt}, rng).indices;
  const auto& idx = *env.submatrix.indices;
  const auto cond = ltr_condition(matrix->restrict_to(idx), 1);
  const auto fu = run_condition(build_ltr_condition(s, Policy::uniform, env));
  const auto fd = run_condition(build_ltr_condition(s, Policy::dts, env));
  v.info("fixed rankers " + std::to_string(idx[0]) + ", " + std::to_string(idx[1]) + ", " + std::to_string(idx[2]) +
         " (minimum pairwise w " + fmt(cond.min_effect_w) + "): regret DTS " +
         fmt(fd.checkpoints.back().mean_cum_regret, 2) + ", uniform " + fmt(fu.checkpoints.back().mean_cum_regret, 2) +
         "; first t with power >= 0.8 uniform " + t_text(first_reaching(fu, 0.8)) + ", DTS " +
         t_text(first_reaching(fd, 0.8)));
}

void criterion8(Verdict& v) {
  const double sf = chi_square_sf(3.841459, 1);
  v.check(std::abs(sf - 0.05) <= 1e-6, "chi_square_sf(3.841459, 1) = " + fmt(sf, 9));
  const auto t = pair_test(60, 40);
  v.check(t.statistic == 4.0, "pair_test(60, 40) statistic = " + fmt(t.statistic, 12));
  v.check(std::abs(t.p_value - 0.0455003) <= 1e-6, "pair_test(60, 40) p = " + fmt(t.p_value, 9));
  const double power = 1.0 - noncentral_chi2_cdf(3.841459, 1, 7.849);
  v.check(std::abs(power - 0.80) <= 0.005, "1 - F(3.841459; 1, 7.849) = " + fmt(power, 6));
}

int run_cli(const std::string& args, const std::string& workers) {
  const std::string cmd = "DUELSIM_WORKERS=" + workers + " \"" + DUELSIM_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion9(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "duelsim_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({"base_seed": 99, "replications": 40, "checkpoint_count": 10,
    "grid": {"arms": [3, 5], "effect_w": [0, 0.3, 0.5], "policies": ["dts", "uniform"]}})";
  const int a = run_cli("simulate --config " + config.string() + " --out " + (dir / "one").string(), "1");
  const int b = run_cli("simulate --config " + config.string() + " --out " + (dir / "four").string(), "4");
  v.check(a == 0 && b == 0, "both runs exit 0 (workers 1 and 4)");
  std::size_t compared = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(dir / "one")) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    identical += read_file(e.path()) == read_file(dir / "four" / e.path().filename());
  }
  v.check(compared == 12 && identical == compared,
          std::to_string(identical) + " of " + std::to_string(compared) + " CSV files byte-identical");
  fs::remove_all(dir);
}

void criterion10(Verdict& v) {
  Rng rng(20201);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 5);
    const auto p = testing_support::random_matrix(k, rng);
    const auto fast = analyze_winners(p), slow = testing_support::brute_force_winners(p);
    if (fast.condorcet != slow.condorcet || fast.copeland_scores != slow.copeland_scores ||
        fast.copeland_winners != slow.copeland_winners || fast.reference_arm != slow.reference_arm)
      ++mismatches;
  }
  v.check(mismatches == 0, "analyze_winners vs brute force, 1000 matrices with k <= 6: " +
                               std::to_string(mismatches) + " mismatches");

  constexpr int cases = 10'000;
  std::size_t violations = 0;
  for (int i = 0; i < cases; ++i) {
    const std::size_t k = 2 + uniform_index(rng, 5);
    const auto p = generate_effect_matrix(k, 0.05 * static_cast<double>(1 + uniform_index(rng, 5)), true, rng);
    const Arm ref = analyze_winners(p).reference_arm;
    for (Arm m = 0; m < k; ++m)
      for (Arm n = 0; n < k; ++n)
        if (m != n && (std::abs(p.at(m, n) + p.at(n, m) - 1.0) > 1e-9 || step_strong_regret(p, ref, m, n) < 0.0))
          ++violations;
  }
  v.check(violations == 0, "complement and nonnegative Condorcet regret over " + std::to_string(cases) +
                               " generated matrices: " + std::to_string(violations) + " violations");

  violations = 0;
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t a = uniform_index(rng, 400), b = uniform_index(rng, 400);
    const auto ab = pair_test(a, b), ba = pair_test(b, a);
    if (ab.statistic != ba.statistic || ab.p_value != ba.p_value || ab.p_value < 0.0 || ab.p_value > 1.0) ++violations;
  }
  v.check(violations == 0, "pair_test symmetry and range over " + std::to_string(cases) + " count pairs: " +
                               std::to_string(violations) + " violations");

  violations = 0;
  for (int i = 0; i < cases; ++i) {
    const std::size_t k = 2 + uniform_index(rng, 5);
    DtsState s(k);
    const std::size_t steps = uniform_index(rng, 50);
    for (std::size_t t = 0; t < steps; ++t) {
      const ArmPair pr = dts_select(s, rng);
      if (pr.first == pr.second) ++violations;
      dts_update(s, pr, uniform01(rng) < 0.5 ? pr.first : pr.second);
    }
    std::uint64_t total = 0;
    for (Arm a = 0; a < k; ++a)
      for (Arm b = 0; b < k; ++b) total += s.wins(a, b);
    if (total != s.duels() || s.duels() != steps) ++violations;
  }
  v.check(violations == 0, "DTS counter conservation and no self-duels over " + std::to_string(cases) +
                               " runs: " + std::to_string(violations) + " violations");

  violations = 0;
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t horizon = 1 + uniform_index(rng, 10'000);
    const auto c = default_checkpoints(horizon, 1 + uniform_index(rng, 40));
    if (c.back() != horizon || !std::is_sorted(c.begin(), c.end()) ||
        std::adjacent_find(c.begin(), c.end()) != c.end())
      ++violations;
  }
  v.check(violations == 0, "checkpoint schedules over " + std::to_string(cases) + " horizons: " +
                               std::to_string(violations) + " violations");

  violations = 0;
  for (int i = 0; i < 200; ++i) {
    ExperimentConfig c;
    c.policy = i % 2 ? Policy::dts : Policy::uniform;
    const std::size_t k = 2 + uniform_index(rng, 4);
    c.environment = SyntheticEnvironment{k, 0.05 * static_cast<double>(1 + uniform_index(rng, 5)), false, true};
    c.horizon = 100 + uniform_index(rng, 500);
    c.replications = 1;
    c.checkpoints = default_checkpoints(c.horizon, 10);
    const auto r = run_replication(c, static_cast<std::uint64_t>(i));
    double previous = 0.0;
    for (const auto& m : r.checkpoints) {
      std::uint64_t total = 0;
      for (const auto& pc : m.pair_counts) total += pc.total();
      if (total != m.t || m.condorcet_assigned > m.t || m.cum_strong_regret < previous - 1e-12) ++violations;
      previous = m.cum_strong_regret;
    }
  }
  v.check(violations == 0, "duel conservation and monotone regret over 200 simulated replications: " +
                               std::to_string(violations) + " violations");
}

}  // namespace

int main() {
  std::cout << "duelsim acceptance suite (workers: " << default_workers() << ")\n\n";
  Grid grid;
  run(1, "sample-size calibration", criterion1);
  run(2, "null calibration, uniform", [&](Verdict& v) { criterion2(v, grid); });
  run(3, "DTS type-I inflation", [&](Verdict& v) { criterion3(v, grid); });
  run(4, "power ordering", [&](Verdict& v) { criterion4(v, grid); });
  run(5, "regret ordering", [&](Verdict& v) { criterion5(v, grid); });
  run(6, "Condorcet allocation", [&](Verdict& v) { criterion6(v, grid); });
  run(7, "LTR protocol", criterion7);
  run(8, "numerical golden values", criterion8);
  run(9, "determinism across worker counts", criterion9);
  run(10, "oracle and property suites", criterion10);
  std::cout << "\n" << (10 - failures) << " of 10 criteria passed\n";
  return failures == 0 ? 0 : 1;
}
