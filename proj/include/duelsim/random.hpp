#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace duelsim {

// One random stream per replication. mt19937_64's output sequence is fixed by
// the standard, so raw draws are reproducible across toolchains.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for the stream of replication `replication` of condition `condition_id`.
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::string_view condition_id,
                                 std::uint64_t replication) noexcept {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ fnv1a64(condition_id));
  return splitmix64(h ^ splitmix64(replication + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n) noexcept {
  const std::uint64_t range = n;
  std::uint64_t x = rng();
  __uint128_t product = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = rng();
      product = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::size_t>(product >> 64);
}

// Beta(a, b) via the ratio of two gamma variates.
inline double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace duelsim
