#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "duelsim/errors.hpp"
#include "duelsim/preference.hpp"
#include "duelsim/random.hpp"

namespace duelsim {

/// Uniformly random unordered pair, presented in random order.
inline ArmPair uniform_select(std::size_t k, Rng& rng) {
  const std::size_t idx = uniform_index(rng, pair_count(k));
  // Walk rows of the lexicographic pair layout to recover (i, j).
  Arm i = 0;
  std::size_t offset = idx;
  while (offset >= k - 1 - i) {
    offset -= k - 1 - i;
    ++i;
  }
  const Arm j = i + 1 + offset;
  if (uniform01(rng) < 0.5) return {i, j};
  return {j, i};
}

inline constexpr double kDefaultAlphaExplore = 0.6;

/// Posterior memory of Double Thompson Sampling: wins(i, j) counts duels in
/// which i beat j, duels() the number of duels recorded so far.
class DtsState {
 public:
  explicit DtsState(std::size_t k, double alpha_explore = kDefaultAlphaExplore)
      : k_(k), alpha_explore_(alpha_explore), wins_(k * k, 0) {
    if (k < 2) throw ShapeError("DTS needs at least 2 arms");
    if (!(alpha_explore > 0.5)) throw DomainError("alpha_explore must exceed 0.5");
  }

  std::size_t arms() const noexcept { return k_; }
  double alpha_explore() const noexcept { return alpha_explore_; }
  std::uint64_t duels() const noexcept { return t_; }
  std::uint64_t wins(Arm i, Arm j) const noexcept { return wins_[i * k_ + j]; }
  std::uint64_t comparisons(Arm i, Arm j) const noexcept { return wins(i, j) + wins(j, i); }

  // Mean of the Beta(wins(i, j) + 1, wins(j, i) + 1) posterior.
  double posterior_mean(Arm i, Arm j) const noexcept {
    return (static_cast<double>(wins(i, j)) + 1.0) / (static_cast<double>(comparisons(i, j)) + 2.0);
  }

  void record(const ArmPair& pair, Arm winner) {
    if (pair.first >= k_ || pair.second >= k_ || pair.first == pair.second)
      throw IndexError("invalid pair for DTS update");
    if (!pair.contains(winner))
      throw InvalidWinner("winner " + std::to_string(winner) + " not in presented pair");
    const Arm loser = winner == pair.first ? pair.second : pair.first;
    ++wins_[winner * k_ + loser];
    ++t_;
  }

  // Direct count seeding, used to set up posterior states in tests and tools.
  void set_wins(Arm i, Arm j, std::uint64_t count) {
    if (i >= k_ || j >= k_ || i == j) throw IndexError("invalid pair for set_wins");
    t_ = t_ - wins_[i * k_ + j] + count;
    wins_[i * k_ + j] = count;
  }

 private:
  std::size_t k_;
  double alpha_explore_;
  std::uint64_t t_ = 0;
  std::vector<std::uint64_t> wins_;
};

struct ConfidenceBounds {
  double upper = 1.0;
  double lower = 0.0;
};

namespace detail {
inline ConfidenceBounds bounds_at(const DtsState& s, Arm i, Arm j, double log_t) {
  const std::uint64_t n = s.comparisons(i, j);
  if (n == 0) return {1.0, 0.0};
  const double nd = static_cast<double>(n);
  const double mean = static_cast<double>(s.wins(i, j)) / nd;
  const double radius = std::sqrt(s.alpha_explore() * log_t / nd);
  return {mean + radius, mean - radius};
}
}  // namespace detail

/// Confidence bounds on p(i beats j) at time t = duels(). Unclamped.
inline ConfidenceBounds dts_bounds(const DtsState& s, Arm i, Arm j) {
  if (i >= s.arms() || j >= s.arms() || i == j) throw IndexError("dts_bounds needs distinct arms in range");
  const double t = static_cast<double>(s.duels());
  return detail::bounds_at(s, i, j, t > 0.0 ? std::log(t) : 0.0);
}

/// Posterior sample theta(i, j) ~ Beta(wins(i, j) + 1, wins(j, i) + 1) for
/// every pair with at least one arm flagged in `rows`, with theta(j, i) set to
/// 1 - theta(i, j). Unsampled entries stay 0.5. `theta` is k*k, row-major.
inline void dts_sample_theta(const DtsState& s, Rng& rng, const std::vector<char>& rows, std::vector<double>& theta) {
  const std::size_t k = s.arms();
  theta.assign(k * k, 0.5);
  for (Arm i = 0; i < k; ++i)
    for (Arm j = i + 1; j < k; ++j) {
      if (!rows[i] && !rows[j]) continue;
      const double th = sample_beta(rng, static_cast<double>(s.wins(i, j)) + 1.0,
                                    static_cast<double>(s.wins(j, i)) + 1.0);
      theta[i * k + j] = th;
      theta[j * k + i] = 1.0 - th;
    }
}

/// Reusable buffers so the per-participant selection does not allocate.
struct DtsScratch {
  std::vector<std::size_t> optimistic_wins;
  std::vector<Arm> candidates;
  std::vector<double> theta;
  std::vector<char> in_candidates;
};

/// Picks the next pair with Double Thompson Sampling.
///
/// Phase one restricts the first arm to the Copeland winners of the upper
/// confidence bounds, then picks among them by the Copeland score of one
/// posterior sample. Phase two samples each arm's posterior against the first
/// arm and takes the best among those not already confidently beaten by it.
/// The first arm is never its own opponent. Bounds use ln(duels() + 1).
inline ArmPair dts_select(const DtsState& s, Rng& rng, DtsScratch& scratch) {
  const std::size_t k = s.arms();
  const double log_t = std::log(static_cast<double>(s.duels()) + 1.0);

  auto& score = scratch.optimistic_wins;
  score.assign(k, 0);
  for (Arm i = 0; i < k; ++i)
    for (Arm j = i + 1; j < k; ++j) {
      const ConfidenceBounds b = detail::bounds_at(s, i, j, log_t);
      // Bounds for (j, i) mirror those for (i, j) around 0.5.
      if (b.upper > 0.5) ++score[i];
      if (1.0 - b.lower > 0.5) ++score[j];
    }
  std::size_t best = 0;
  for (std::size_t v : score) best = std::max(best, v);
  auto& candidates = scratch.candidates;
  candidates.clear();
  for (Arm i = 0; i < k; ++i)
    if (score[i] == best) candidates.push_back(i);

  Arm first = candidates.front();
  if (candidates.size() > 1) {
    // Posterior sample theta(i, j) for every pair touching a candidate;
    // theta(j, i) = 1 - theta(i, j). Pairs outside the candidate rows never
    // influence the choice, so they are not drawn.
    auto& theta = scratch.theta;
    auto& in_c = scratch.in_candidates;
    in_c.assign(k, 0);
    for (Arm c : candidates) in_c[c] = 1;
    dts_sample_theta(s, rng, in_c, theta);
    std::size_t top = 0;
    std::size_t ties = 0;
    for (Arm c : candidates) {
      std::size_t wins = 0;
      for (Arm j = 0; j < k; ++j)
        if (j != c && theta[c * k + j] > 0.5) ++wins;
      if (ties == 0 || wins > top) {
        top = wins;
        first = c;
        ties = 1;
      } else if (wins == top) {
        ++ties;
        if (uniform_index(rng, ties) == 0) first = c;
      }
    }
  }

  // Phase two: opponents not confidently beaten by `first`.
  candidates.clear();
  for (Arm i = 0; i < k; ++i) {
    if (i == first) continue;
    if (detail::bounds_at(s, i, first, log_t).lower <= 0.5) candidates.push_back(i);
  }
  if (candidates.empty()) {
    Arm other = uniform_index(rng, k - 1);
    if (other >= first) ++other;
    return {first, other};
  }
  if (candidates.size() == 1) return {first, candidates.front()};

  Arm second = candidates.front();
  double top = -1.0;
  std::size_t ties = 0;
  for (Arm i : candidates) {
    const double th = sample_beta(rng, static_cast<double>(s.wins(i, first)) + 1.0,
                                  static_cast<double>(s.wins(first, i)) + 1.0);
    if (ties == 0 || th > top) {
      top = th;
      second = i;
      ties = 1;
    } else if (th == top) {
      ++ties;
      if (uniform_index(rng, ties) == 0) second = i;
    }
  }
  return {first, second};
}

inline ArmPair dts_select(const DtsState& s, Rng& rng) {
  DtsScratch scratch;
  return dts_select(s, rng, scratch);
}

inline void dts_update(DtsState& s, const ArmPair& pair, Arm winner) { s.record(pair, winner); }

}  // namespace duelsim
