#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duelsim/errors.hpp"
#include "duelsim/random.hpp"

namespace duelsim {

using Arm = std::size_t;

/// Two distinct arms presented together to one participant.
struct ArmPair {
  Arm first = 0;
  Arm second = 1;

  bool contains(Arm a) const noexcept { return first == a || second == a; }
  Arm lo() const noexcept { return first < second ? first : second; }
  Arm hi() const noexcept { return first < second ? second : first; }
  friend bool operator==(const ArmPair&, const ArmPair&) = default;
};

/// One observed comparison: participant index t (1-based) saw `first` vs
/// `second` and preferred `winner`.
struct DuelOutcome {
  std::size_t t = 1;
  Arm first = 0;
  Arm second = 1;
  Arm winner = 0;
};

inline constexpr double kComplementTolerance = 1e-9;

inline std::size_t pair_count(std::size_t k) noexcept { return k * (k - 1) / 2; }

// Position of unordered pair {i, j} in lexicographic order (0,1), (0,2), ...
inline std::size_t pair_index(Arm i, Arm j, std::size_t k) noexcept {
  if (i > j) std::swap(i, j);
  return i * k - i * (i + 1) / 2 + (j - i - 1);
}

inline std::vector<ArmPair> all_pairs(std::size_t k) {
  std::vector<ArmPair> pairs;
  pairs.reserve(pair_count(k));
  for (Arm i = 0; i < k; ++i)
    for (Arm j = i + 1; j < k; ++j) pairs.push_back({i, j});
  return pairs;
}

/// Stationary pairwise win probabilities over k arms: at(m, n) is the
/// probability that arm m is preferred to arm n. Immutable once built.
class PreferenceMatrix {
 public:
  /// Validates a square table of probabilities. The diagonal is overwritten
  /// with 0.5; off-diagonal entries must satisfy p[m][n] + p[n][m] = 1 to
  /// within `tolerance`.
  static PreferenceMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                    double tolerance = kComplementTolerance) {
    const std::size_t k = rows.size();
    if (k < 2) throw ShapeError("preference matrix needs at least 2 arms, got " + std::to_string(k));
    PreferenceMatrix out;
    out.k_ = k;
    out.p_.assign(k * k, 0.5);
    for (std::size_t m = 0; m < k; ++m) {
      if (rows[m].size() != k)
        throw ShapeError("row " + std::to_string(m) + " has " + std::to_string(rows[m].size()) +
                         " entries, expected " + std::to_string(k));
      for (std::size_t n = 0; n < k; ++n) {
        const double v = rows[m][n];
        if (!(v >= 0.0 && v <= 1.0))
          throw RangeError("entry (" + std::to_string(m) + "," + std::to_string(n) +
                           ") = " + std::to_string(v) + " outside [0,1]");
        if (m != n) out.p_[m * k + n] = v;
      }
    }
    for (std::size_t m = 0; m < k; ++m)
      for (std::size_t n = m + 1; n < k; ++n) {
        double& mn = out.p_[m * k + n];
        double& nm = out.p_[n * k + m];
        if (std::abs(mn + nm - 1.0) > tolerance)
          throw ComplementViolation("p[" + std::to_string(m) + "][" + std::to_string(n) +
                                    "] + p[" + std::to_string(n) + "][" + std::to_string(m) +
                                    "] != 1");
        // Derive the smaller entry from the larger; 1 - x is exact for
        // x >= 0.5, which makes delta(m, n) == -delta(n, m) bit for bit.
        if (mn >= 0.5)
          nm = 1.0 - mn;
        else
          mn = 1.0 - nm;
      }
    return out;
  }

  std::size_t size() const noexcept { return k_; }

  double at(Arm m, Arm n) const noexcept { return p_[m * k_ + n]; }

  std::span<const double> row(Arm m) const noexcept { return {p_.data() + m * k_, k_}; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(k_);
    for (Arm m = 0; m < k_; ++m) out[m].assign(row(m).begin(), row(m).end());
    return out;
  }

  /// The matrix induced on `arms`, in the given order.
  PreferenceMatrix restrict_to(std::span<const Arm> arms) const {
    if (arms.size() < 2) throw ShapeError("restriction needs at least 2 arms");
    PreferenceMatrix out;
    out.k_ = arms.size();
    out.p_.assign(out.k_ * out.k_, 0.5);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      if (arms[a] >= k_) throw IndexError("arm " + std::to_string(arms[a]) + " out of range");
      for (std::size_t b = 0; b < arms.size(); ++b)
        if (a != b) {
          if (arms[a] == arms[b]) throw IndexError("repeated arm in restriction");
          out.p_[a * out.k_ + b] = at(arms[a], arms[b]);
        }
    }
    return out;
  }

 private:
  PreferenceMatrix() = default;

  std::size_t k_ = 0;
  std::vector<double> p_;
};

inline PreferenceMatrix new_preference_matrix(const std::vector<std::vector<double>>& entries) {
  return PreferenceMatrix::from_rows(entries);
}

namespace detail {
inline void check_distinct_arms(const PreferenceMatrix& p, Arm m, Arm n) {
  if (m >= p.size() || n >= p.size())
    throw IndexError("arm index out of range for k=" + std::to_string(p.size()));
  if (m == n) throw IndexError("self-duel on arm " + std::to_string(m));
}
}  // namespace detail

/// Difference measure: p(m beats n) - 0.5.
inline double delta(const PreferenceMatrix& p, Arm m, Arm n) {
  detail::check_distinct_arms(p, m, n);
  return p.at(m, n) - 0.5;
}

/// Bernoulli duel outcome from a uniform draw u in [0, 1).
inline Arm sample_duel(const PreferenceMatrix& p, Arm m, Arm n, double u) {
  detail::check_distinct_arms(p, m, n);
  return u < p.at(m, n) ? m : n;
}

struct WinnerAnalysis {
  std::optional<Arm> condorcet;
  std::vector<double> copeland_scores;
  std::vector<Arm> copeland_winners;
  // Arm against which strong regret is measured: the Condorcet winner when
  // one exists, otherwise the lowest-index Copeland winner.
  Arm reference_arm = 0;
};

inline WinnerAnalysis analyze_winners(const PreferenceMatrix& p) {
  const std::size_t k = p.size();
  std::vector<std::size_t> wins(k, 0);
  for (Arm i = 0; i < k; ++i)
    for (Arm j = 0; j < k; ++j)
      if (i != j && p.at(i, j) > 0.5) ++wins[i];

  WinnerAnalysis out;
  out.copeland_scores.resize(k);
  std::size_t best = 0;
  for (Arm i = 0; i < k; ++i) {
    out.copeland_scores[i] = static_cast<double>(wins[i]) / static_cast<double>(k - 1);
    best = std::max(best, wins[i]);
  }
  for (Arm i = 0; i < k; ++i)
    if (wins[i] == best) out.copeland_winners.push_back(i);
  // Beating all k-1 opponents is possible for at most one arm.
  if (best == k - 1) out.condorcet = out.copeland_winners.front();
  out.reference_arm = out.copeland_winners.front();
  return out;
}

/// Strong regret of presenting (m, n) relative to the reference arm.
inline double step_strong_regret(const PreferenceMatrix& p, Arm ref, Arm m, Arm n) {
  detail::check_distinct_arms(p, m, n);
  if (ref >= p.size()) throw IndexError("reference arm out of range");
  const double dm = ref == m ? 0.0 : p.at(ref, m) - 0.5;
  const double dn = ref == n ? 0.0 : p.at(ref, n) - 0.5;
  return dm + dn;
}

inline PreferenceMatrix zero_effect_matrix(std::size_t k) {
  if (k < 2) throw ShapeError("zero-effect matrix needs k >= 2");
  return PreferenceMatrix::from_rows(std::vector<std::vector<double>>(k, std::vector<double>(k, 0.5)));
}

/// Every pair differs by the same `delta_level`; which arm of each pair wins is
/// a fair coin. With `require_condorcet`, whole orientations are redrawn until
/// one arm beats all others.
inline PreferenceMatrix generate_effect_matrix(std::size_t k, double delta_level, bool require_condorcet,
                                               Rng& rng, std::size_t max_attempts = 10000) {
  if (k < 2) throw ShapeError("effect matrix needs k >= 2");
  if (!(delta_level > 0.0 && delta_level <= 0.5))
    throw DomainError("delta level must lie in (0, 0.5]");
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.5));
  const std::size_t attempts = require_condorcet ? max_attempts : 1;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    std::vector<std::size_t> wins(k, 0);
    for (Arm i = 0; i < k; ++i)
      for (Arm j = i + 1; j < k; ++j) {
        const bool i_wins = uniform01(rng) < 0.5;
        rows[i][j] = i_wins ? 0.5 + delta_level : 0.5 - delta_level;
        rows[j][i] = 1.0 - rows[i][j];
        ++wins[i_wins ? i : j];
      }
    if (!require_condorcet) return PreferenceMatrix::from_rows(rows);
    for (std::size_t w : wins)
      if (w == k - 1) return PreferenceMatrix::from_rows(rows);
  }
  throw AttemptsExhausted("no Condorcet orientation found in " + std::to_string(max_attempts) +
                          " attempts");
}

}  // namespace duelsim
