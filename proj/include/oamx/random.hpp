#pragma once

// Seeded random streams and a Poisson sampler that give identical draws on
// every conforming standard library.
//
// Stream rule: sub-stream k of seed s is std::mt19937_64 seeded with
//   splitmix64(splitmix64(s) ^ splitmix64(k + 0x9E3779B97F4A7C15)).
// Uniforms take the top 53 bits of a 64-bit draw, so no std distribution
// (whose algorithms are implementation-defined) is ever used.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "oamx/errors.hpp"

namespace oamx {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a, used to derive named seeds ("bootstrap/S", "record/3", ...).
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x9E3779B97F4A7C15ull));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  return substream_seed(seed, hash_label(label));
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index) : engine_(substream_seed(seed, index)) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; only the cosine branch is used.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

// Sequential-search inversion; one uniform per draw.
inline std::int64_t poisson_inversion(double mean, RandomStream& rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p <= 0.0 && static_cast<double>(k) > mean) break;
  }
  return k;
}

// Hormann's transformed rejection with squeeze (PTRS), valid for mean >= 10.
inline std::int64_t poisson_ptrs(double mean, RandomStream& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::int64_t>(k);
  }
}

}  // namespace detail

inline constexpr double kPoissonInversionLimit = 30.0;

inline std::int64_t sample_poisson(double mean, RandomStream& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("Poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < kPoissonInversionLimit) return detail::poisson_inversion(mean, rng);
  return detail::poisson_ptrs(mean, rng);
}

// One draw from Poisson(expected) on sub-stream `index` of `seed`.
inline std::int64_t sample_counts(double expected, std::uint64_t seed, std::uint64_t index = 0) {
  RandomStream rng(seed, index);
  return sample_poisson(expected, rng);
}

}  // namespace oamx
