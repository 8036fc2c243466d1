#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "duelsim/errors.hpp"
#include "duelsim/preference.hpp"

namespace duelsim {

inline constexpr double kDefaultSignificance = 0.05;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

namespace detail {

// Lower regularized gamma P(a, x) by its power series; converges fast for
// x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by Lentz's continued fraction; used for
// x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma function Q(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("regularized_gamma_q needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Regularized lower incomplete gamma function P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("regularized_gamma_p needs a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_fraction(a, x);
}

/// Upper tail of the central chi-squared distribution.
inline double chi_square_sf(double x, int df) {
  if (df < 1) throw DomainError("chi-squared needs df >= 1");
  if (!(x >= 0.0)) throw DomainError("chi-squared statistic must be nonnegative");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

inline double chi_square_cdf(double x, int df) {
  if (df < 1) throw DomainError("chi-squared needs df >= 1");
  if (!(x >= 0.0)) throw DomainError("chi-squared statistic must be nonnegative");
  return regularized_gamma_p(0.5 * df, 0.5 * x);
}

/// Critical value c with chi_square_sf(c, df) = alpha, by bisection.
inline double chi_square_critical(double alpha, int df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (chi_square_sf(hi, df) > alpha) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi_square_sf(mid, df) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// CDF of the noncentral chi-squared distribution as a Poisson(lambda/2)
/// mixture of central chi-squared CDFs with df + 2j degrees of freedom. The
/// sum stops once the unvisited Poisson mass is below 1e-12.
inline double noncentral_chi2_cdf(double x, int df, double lambda) {
  if (df < 1) throw DomainError("noncentral chi-squared needs df >= 1");
  if (!(x >= 0.0)) throw DomainError("noncentral chi-squared needs x >= 0");
  if (!(lambda >= 0.0)) throw DomainError("noncentrality must be nonnegative");
  if (lambda == 0.0) return chi_square_cdf(x, df);
  const double half = 0.5 * lambda;
  double cdf = 0.0;
  double mass = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double weight = std::exp(-half + j * std::log(half) - std::lgamma(j + 1.0));
    mass += weight;
    cdf += weight * chi_square_cdf(x, df + 2 * j);
    if (j > half && 1.0 - mass < 1e-12) break;
  }
  return cdf;
}

// ---------------------------------------------------------------------------
// Pairwise test
// ---------------------------------------------------------------------------

struct PairTestResult {
  ArmPair pair;
  std::uint64_t n = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// Two-cell chi-squared goodness-of-fit test of a pair's duel outcomes
/// against a fair coin, df = 1, no continuity correction. No duels means no
/// evidence: p = 1.
inline PairTestResult pair_test(std::uint64_t wins_ij, std::uint64_t wins_ji,
                                double alpha = kDefaultSignificance, ArmPair pair = {}) {
  PairTestResult r;
  r.pair = pair;
  r.n = wins_ij + wins_ji;
  if (r.n == 0) return r;
  const double expected = 0.5 * static_cast<double>(r.n);
  const double a = static_cast<double>(wins_ij) - expected;
  const double b = static_cast<double>(wins_ji) - expected;
  r.statistic = (a * a + b * b) / expected;
  r.p_value = chi_square_sf(r.statistic, 1);
  r.significant = r.p_value < alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Effect size and sample size
// ---------------------------------------------------------------------------

/// Cohen's w of a two-cell test against p = 0.5 when the true win
/// probability is 0.5 + delta.
inline double cohens_w_from_delta(double delta) {
  if (!(std::abs(delta) <= 0.5)) throw DomainError("|delta| must not exceed 0.5");
  return 2.0 * std::abs(delta);
}

struct PowerSpec {
  double effect_w = 0.3;
  double target_power = 0.8;
  double alpha = kDefaultSignificance;
  int df = 1;

  void validate() const {
    if (!(effect_w >= 0.0)) throw DomainError("effect_w must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(target_power > 0.0 && target_power < 1.0)) throw DomainError("target power must lie in (0, 1)");
    if (df < 1) throw DomainError("df must be at least 1");
  }
};

/// Power of the chi-squared test with `participants` observations.
inline double chi_square_power(const PowerSpec& spec, std::uint64_t participants) {
  const double critical = chi_square_critical(spec.alpha, spec.df);
  const double lambda = static_cast<double>(participants) * spec.effect_w * spec.effect_w;
  return 1.0 - noncentral_chi2_cdf(critical, spec.df, lambda);
}

/// Smallest participant count m whose noncentral chi-squared power with
/// noncentrality m * w^2 reaches the target.
inline std::uint64_t required_sample_size(const PowerSpec& spec) {
  spec.validate();
  if (spec.effect_w == 0.0) throw DomainError("zero effect size needs an unbounded sample");
  const double critical = chi_square_critical(spec.alpha, spec.df);
  const double w2 = spec.effect_w * spec.effect_w;
  auto reaches = [&](std::uint64_t m) {
    return 1.0 - noncentral_chi2_cdf(critical, spec.df, static_cast<double>(m) * w2) >= spec.target_power;
  };
  std::uint64_t hi = 1;
  while (!reaches(hi)) {
    if (hi > (std::uint64_t{1} << 50)) throw DomainError("sample size search diverged");
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;  // lo fails (or is 0), hi succeeds
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Total participants s = multiplier * m * n_pairs.
inline std::uint64_t horizon_for_condition(std::uint64_t m, std::uint64_t n_pairs, std::uint64_t multiplier) {
  if (m < 1 || n_pairs < 1 || multiplier < 1) throw DomainError("horizon inputs must be positive");
  return multiplier * m * n_pairs;
}

// ---------------------------------------------------------------------------
// Aggregation across replications
// ---------------------------------------------------------------------------

struct PowerSummary {
  std::vector<double> per_pair;
  double mean = 0.0;
};

/// Each element of `replications` holds one replication's tests, one per
/// pair, in the same pair order.
inline PowerSummary aggregate_power(std::span<const std::vector<PairTestResult>> replications) {
  if (replications.empty()) throw EmptyInput("aggregate_power needs at least one replication");
  const std::size_t pairs = replications.front().size();
  if (pairs == 0) throw EmptyInput("aggregate_power needs at least one pair");
  PowerSummary out;
  out.per_pair.assign(pairs, 0.0);
  for (const auto& rep : replications) {
    if (rep.size() != pairs) throw ShapeError("replications disagree on pair count");
    for (std::size_t p = 0; p < pairs; ++p)
      if (rep[p].significant) out.per_pair[p] += 1.0;
  }
  const double r = static_cast<double>(replications.size());
  for (double& v : out.per_pair) {
    v /= r;
    out.mean += v;
  }
  out.mean /= static_cast<double>(pairs);
  return out;
}

struct FprSummary {
  std::vector<double> per_pair;  // significance rate of each pair
  double per_pair_fpr = 0.0;     // pooled over all (replication, pair) tests
  double family_wise_fpr = 0.0;  // replications with any significant pair
};

inline FprSummary aggregate_fpr(std::span<const std::vector<PairTestResult>> replications) {
  const PowerSummary rates = aggregate_power(replications);
  FprSummary out;
  out.per_pair = rates.per_pair;
  out.per_pair_fpr = rates.mean;
  std::size_t any = 0;
  for (const auto& rep : replications) {
    for (const auto& test : rep)
      if (test.significant) {
        ++any;
        break;
      }
  }
  out.family_wise_fpr = static_cast<double>(any) / static_cast<double>(replications.size());
  return out;
}

}  // namespace duelsim
