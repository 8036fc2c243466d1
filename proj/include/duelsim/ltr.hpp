#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "duelsim/errors.hpp"
#include "duelsim/preference.hpp"
#include "duelsim/random.hpp"
#include "duelsim/stats.hpp"

namespace duelsim {

// Empirical matrices carry rounding noise; pairs whose complement is off by
// at most this much are repaired to the midpoint.
inline constexpr double kFileComplementTolerance = 0.01;

// Participants per pair for 80% power at w = 0.1, alpha = 0.05.
inline std::uint64_t ltr_base_sample_size() {
  static const std::uint64_t m = required_sample_size(PowerSpec{0.1, 0.8, 0.05, 1});
  return m;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view token) {
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Parses comma-separated rows of probabilities. A first line whose first
/// token is not numeric is treated as a header and skipped. Near-complement
/// pairs are repaired to the midpoint; the diagonal becomes 0.5.
inline PreferenceMatrix parse_matrix(std::istream& in, std::optional<std::size_t> expected_size = std::nullopt) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto tokens = detail::split_commas(view);
    if (first_content) {
      first_content = false;
      if (!detail::parse_double(tokens.front())) continue;  // header
    }
    std::vector<double> row;
    row.reserve(tokens.size());
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const auto v = detail::parse_double(tokens[c]);
      if (!v)
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                         ": not a number: '" + std::string(tokens[c]) + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(row.size()) +
                       " values, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file has no data rows");
  const std::size_t k = rows.size();
  if (rows.front().size() != k)
    throw ParseError("matrix is " + std::to_string(k) + "x" + std::to_string(rows.front().size()) +
                     ", expected square");
  if (expected_size && *expected_size != k)
    throw SizeMismatch("matrix has " + std::to_string(k) + " rows, expected " + std::to_string(*expected_size));

  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (!(rows[i][j] >= 0.0 && rows[i][j] <= 1.0))
        throw RangeError("entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]");
  for (std::size_t i = 0; i < k; ++i) {
    rows[i][i] = 0.5;
    for (std::size_t j = i + 1; j < k; ++j) {
      const double gap = rows[i][j] + rows[j][i] - 1.0;
      if (std::abs(gap) > kFileComplementTolerance)
        throw ComplementViolation("entries (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") deviate from complement by " + std::to_string(gap));
      rows[i][j] = (rows[i][j] + 1.0 - rows[j][i]) / 2.0;
      rows[j][i] = 1.0 - rows[i][j];
    }
  }
  return PreferenceMatrix::from_rows(rows);
}

inline PreferenceMatrix parse_matrix(std::string_view text, std::optional<std::size_t> expected_size = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_matrix(in, expected_size);
}

struct RankerMatrixFile {
  std::string path;
  std::optional<std::size_t> expected_size;
};

inline PreferenceMatrix load_matrix(const RankerMatrixFile& file) {
  std::ifstream in(file.path);
  if (!in) throw ParseError("cannot open matrix file '" + file.path + "'");
  return parse_matrix(in, file.expected_size);
}

enum class CondorcetMode { condorcet, non_condorcet, any };

inline std::string to_string(CondorcetMode mode) {
  switch (mode) {
    case CondorcetMode::condorcet: return "condorcet";
    case CondorcetMode::non_condorcet: return "non-condorcet";
    case CondorcetMode::any: return "any";
  }
  return "any";
}

inline std::optional<CondorcetMode> parse_condorcet_mode(std::string_view s) {
  if (s == "condorcet") return CondorcetMode::condorcet;
  if (s == "non-condorcet" || s == "non_condorcet") return CondorcetMode::non_condorcet;
  if (s == "any") return CondorcetMode::any;
  return std::nullopt;
}

struct SubmatrixSpec {
  std::size_t size = 3;
  CondorcetMode mode = CondorcetMode::condorcet;
  std::optional<std::vector<Arm>> indices;

  void validate(std::size_t matrix_size) const {
    if (size < 2 || size > matrix_size)
      throw DomainError("submatrix size " + std::to_string(size) + " not in [2, " + std::to_string(matrix_size) + "]");
    if (indices) {
      if (indices->size() != size) throw DomainError("explicit indices do not match submatrix size");
      std::vector<Arm> sorted = *indices;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw IndexError("explicit indices must be distinct");
      if (sorted.back() >= matrix_size) throw IndexError("explicit index out of range");
    }
  }
};

struct Submatrix {
  std::vector<Arm> indices;
  PreferenceMatrix matrix;
};

inline bool matches_mode(const PreferenceMatrix& p, CondorcetMode mode) {
  if (mode == CondorcetMode::any) return true;
  const bool has = analyze_winners(p).condorcet.has_value();
  return mode == CondorcetMode::condorcet ? has : !has;
}

/// Draws `spec.size` distinct rankers uniformly (returned in ascending order)
/// until the induced matrix matches the requested Condorcet mode.
inline Submatrix sample_submatrix(const PreferenceMatrix& p, const SubmatrixSpec& spec, Rng& rng,
                                  std::size_t max_attempts = 10000) {
  spec.validate(p.size());
  if (spec.indices) {
    PreferenceMatrix sub = p.restrict_to(*spec.indices);
    if (!matches_mode(sub, spec.mode))
      throw ModeMismatch("explicit indices do not form a " + to_string(spec.mode) + " submatrix");
    return {*spec.indices, std::move(sub)};
  }
  std::vector<Arm> all(p.size());
  std::iota(all.begin(), all.end(), Arm{0});
  std::vector<Arm> chosen(spec.size);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    // Selection sampling (Knuth's algorithm S): each subset equally likely.
    std::size_t needed = spec.size;
    std::size_t filled = 0;
    for (std::size_t i = 0; i < all.size() && needed > 0; ++i) {
      if (uniform_index(rng, all.size() - i) < needed) {
        chosen[filled++] = all[i];
        --needed;
      }
    }
    PreferenceMatrix sub = p.restrict_to(chosen);
    if (matches_mode(sub, spec.mode)) return {chosen, std::move(sub)};
  }
  throw AttemptsExhausted("no " + to_string(spec.mode) + " submatrix found in " + std::to_string(max_attempts) +
                          " attempts");
}

struct LtrCondition {
  std::uint64_t horizon = 0;
  ArmPair min_effect_pair;
  double min_effect_w = 0.0;
  std::vector<double> pair_effects;  // w for each pair, lexicographic order
  bool zero_effect = false;
};

/// Sample size C(size, 2) * m(w = 0.1), scaled by `multiplier` in [1, 10].
inline LtrCondition ltr_condition(const PreferenceMatrix& sub, std::uint64_t multiplier) {
  if (multiplier < 1 || multiplier > 10) throw DomainError("LTR multiplier must lie in [1, 10]");
  const std::size_t k = sub.size();
  LtrCondition out;
  out.horizon = horizon_for_condition(ltr_base_sample_size(), pair_count(k), multiplier);
  out.min_effect_w = 2.0;
  for (const ArmPair& pr : all_pairs(k)) {
    const double w = cohens_w_from_delta(delta(sub, pr.first, pr.second));
    out.pair_effects.push_back(w);
    if (w < out.min_effect_w) {
      out.min_effect_w = w;
      out.min_effect_pair = pr;
    }
  }
  out.zero_effect = std::all_of(out.pair_effects.begin(), out.pair_effects.end(), [](double w) { return w == 0.0; });
  return out;
}

}  // namespace duelsim
