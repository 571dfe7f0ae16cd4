#pragma once

// Seeded Gaussian streams for experiments and fixtures.
//
// Uniforms come from a counter-based source: uniform k is the SplitMix64
// finalizer applied to mix(seed) + k * golden-gamma, so element i of a stream
// can be produced without generating elements 0..i-1 and the output depends
// on nothing but (seed, index). Normals use the cosine branch of Box-Muller on
// uniforms 2k and 2k+1.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ranges>
#include <utility>

#include "copsum/error.hpp"

namespace copsum::streamgen {

struct StreamConfig {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double rho = 0.0;
};

struct TriStreamConfig {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double rho12 = 0.0;
  double rho23 = 0.0;
  double rho13 = 0.0;
};

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterSource {
 public:
  explicit constexpr CounterSource(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

  /// Uniform on (0, 1]: 53 random bits, offset by one ulp-step to avoid 0.
  double uniform(std::uint64_t k) const noexcept {
    const std::uint64_t bits = splitmix64(key_ + (k + 1) * 0x9E3779B97F4A7C15ULL) >> 11;
    return static_cast<double>(bits + 1) * 0x1.0p-53;
  }

  double normal(std::uint64_t k) const noexcept {
    const double radius = std::sqrt(-2.0 * std::log(uniform(2 * k)));
    return radius * std::cos(2.0 * std::numbers::pi * uniform(2 * k + 1));
  }

 private:
  std::uint64_t key_;
};

inline void validate(const StreamConfig& cfg) {
  if (!(cfg.rho >= -1.0 && cfg.rho <= 1.0)) throw input_domain_error("rho must lie in [-1, 1]");
}

/// Rejects correlation triples that are out of range or not positive semi-definite.
inline void validate(const TriStreamConfig& cfg) {
  for (double r : {cfg.rho12, cfg.rho23, cfg.rho13})
    if (!(r >= -1.0 && r <= 1.0)) throw input_domain_error("correlations must lie in [-1, 1]");
  const double det = 1.0 + 2.0 * cfg.rho12 * cfg.rho23 * cfg.rho13 - cfg.rho12 * cfg.rho12 -
                     cfg.rho23 * cfg.rho23 - cfg.rho13 * cfg.rho13;
  if (det < -1e-12) throw input_domain_error("correlation matrix is not positive semi-definite");
}

/// Element i of a bivariate stream with standard normal marginals and correlation rho.
class GaussianPair {
 public:
  explicit GaussianPair(const StreamConfig& cfg) : src_(cfg.seed), rho_(cfg.rho), tail_(std::sqrt(1.0 - cfg.rho * cfg.rho)) {
    validate(cfg);
  }

  std::pair<double, double> operator()(std::uint64_t i) const {
    const double z1 = src_.normal(2 * i);
    const double z2 = src_.normal(2 * i + 1);
    return {z1, rho_ * z1 + tail_ * z2};
  }

 private:
  CounterSource src_;
  double rho_;
  double tail_;
};

/// Element i of a trivariate Gaussian stream, built from a (semi-definite
/// safe) Cholesky factor of the correlation matrix.
class GaussianTriple {
 public:
  explicit GaussianTriple(const TriStreamConfig& cfg) : src_(cfg.seed) {
    validate(cfg);
    l21_ = cfg.rho12;
    l22_ = std::sqrt(std::max(0.0, 1.0 - l21_ * l21_));
    l31_ = cfg.rho13;
    l32_ = l22_ > 0.0 ? (cfg.rho23 - l21_ * l31_) / l22_ : 0.0;
    l33_ = std::sqrt(std::max(0.0, 1.0 - l31_ * l31_ - l32_ * l32_));
  }

  std::array<double, 3> operator()(std::uint64_t i) const {
    const double z1 = src_.normal(3 * i);
    const double z2 = src_.normal(3 * i + 1);
    const double z3 = src_.normal(3 * i + 2);
    return {z1, l21_ * z1 + l22_ * z2, l31_ * z1 + l32_ * z2 + l33_ * z3};
  }

 private:
  CounterSource src_;
  double l21_, l22_, l31_, l32_, l33_;
};

/// Lazy range of cfg.n pairs.
inline auto gaussian_pair_stream(const StreamConfig& cfg) {
  return std::views::iota(std::uint64_t{0}, cfg.n) | std::views::transform(GaussianPair(cfg));
}

/// Lazy range of cfg.n triples.
inline auto gaussian_tri_stream(const TriStreamConfig& cfg) {
  return std::views::iota(std::uint64_t{0}, cfg.n) | std::views::transform(GaussianTriple(cfg));
}

}  // namespace copsum::streamgen
