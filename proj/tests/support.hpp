#pragma once

// Seeded stream generators and brute-force rank oracles shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "copsum/copula.hpp"
#include "copsum/gk.hpp"
#include "copsum/oracle.hpp"

namespace copsum::testing {

enum class Shape { normal, uniform, ties, sorted, reversed };

inline constexpr Shape all_shapes[] = {Shape::normal, Shape::uniform, Shape::ties, Shape::sorted, Shape::reversed};

inline std::vector<double> make_stream(Shape shape, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> xs(n);
  switch (shape) {
    case Shape::normal: {
      std::normal_distribution<double> d;
      for (auto& x : xs) x = d(rng);
      break;
    }
    case Shape::uniform: {
      std::uniform_real_distribution<double> d(-5.0, 5.0);
      for (auto& x : xs) x = d(rng);
      break;
    }
    case Shape::ties: {
      std::uniform_int_distribution<int> d(0, 19);
      for (auto& x : xs) x = static_cast<double>(d(rng));
      break;
    }
    case Shape::sorted:
      for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);
      break;
    case Shape::reversed:
      for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(n - i);
      break;
  }
  return xs;
}

/// Pairs with a given dependence: x2 = rho x1 + sqrt(1 - rho^2) z, optionally
/// rounded to a coarse grid to create ties.
inline std::vector<std::pair<double, double>> make_pairs(std::size_t n, double rho, std::uint64_t seed,
                                                         bool ties = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<std::pair<double, double>> out(n);
  for (auto& [a, b] : out) {
    a = d(rng);
    b = rho * a + std::sqrt(1.0 - rho * rho) * d(rng);
    if (ties) {
      a = std::round(a * 4.0);
      b = std::round(b * 4.0);
    }
  }
  return out;
}

/// Ranks that value v may occupy in the sorted stream: [#{x < v} + 1, #{x <= v}].
inline std::pair<count_t, count_t> rank_range(const std::vector<double>& sorted, double v) {
  const auto lo = static_cast<count_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  const auto hi = static_cast<count_t>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  return {lo + 1, hi};
}

/// Distance from rank r to the nearest rank v may hold (0 when r is inside).
inline double rank_distance(const std::vector<double>& sorted, double v, count_t r) {
  const auto [lo, hi] = rank_range(sorted, v);
  if (lo > hi) return 1e300;  // v is not in the stream at all
  if (r < lo) return static_cast<double>(lo - r);
  if (r > hi) return static_cast<double>(r - hi);
  return 0.0;
}

inline double exact_cdf(const std::vector<double>& sorted, double y) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), y) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

inline QuantileSummary summarize(const std::vector<double>& xs, double eps) {
  QuantileSummary s(eps);
  const auto period = static_cast<count_t>(std::floor(1.0 / (2.0 * eps)));
  for (double x : xs) {
    s.insert(x);
    if (s.count() % period == 0) s.compress(s.count());
  }
  return s;
}

inline QuantileSummary exact_summary(double eps, double first, double last) {
  QuantileSummary s(eps);
  for (double v = first; v <= last; v += 1.0) s.insert(v);
  return s;
}

inline std::vector<double> grid(double lo, double hi, std::size_t k) {
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return g;
}

inline void check_alignment(const CopulaSummary& cs) {
  if (cs.subs().size() != cs.s1().size()) throw std::logic_error("subsummaries not aligned with S1");
  count_t total = 0;
  for (const auto& s : cs.subs()) total += s.count();
  if (total != cs.n() || cs.s1().count() != cs.n()) throw std::logic_error("counts not conserved");
}

/// The 5 eps query bound restated for data with ties.
///
/// On tied data the empirical copula jumps by whole tie blocks, so a summary
/// answer whose ranks are off by eps n can sit a full block away. The envelope
/// moves both rank levels by eps n, resolves each boundary tie block in the
/// least and most favourable way, and keeps the 3 eps inverse-query slack:
///   lo = #{x1 <  x1~[ceil(r1 - eps n)], x2 <= x2~[ceil(r2 - eps n)]} / n - 3 eps
///   hi = #{x1 <= x1~[floor(r1 + eps n)], x2 <= x2~[floor(r2 + eps n)]} / n + 3 eps.
/// On distinct values it lies inside the 5 eps band around the oracle.
struct TieEnvelope {
  std::vector<double> x1, x2, s1, s2;

  explicit TieEnvelope(const std::vector<std::pair<double, double>>& pts) {
    for (const auto& [a, b] : pts) {
      x1.push_back(a);
      x2.push_back(b);
    }
    s1 = x1;
    s2 = x2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
  }

  std::pair<double, double> operator()(double u1, double u2, double eps) const {
    const auto n = static_cast<double>(x1.size());
    const auto r1 = static_cast<double>(std::max<count_t>(1, ceil_rank(u1, x1.size())));
    const auto r2 = static_cast<double>(std::max<count_t>(1, ceil_rank(u2, x2.size())));
    const auto at = [&](const std::vector<double>& s, double k) { return s[static_cast<std::size_t>(k) - 1]; };
    double lo = 0.0;
    const double k1 = std::ceil(r1 - eps * n);
    const double k2 = std::ceil(r2 - eps * n);
    if (k1 >= 1.0 && k2 >= 1.0) {
      const double a = at(s1, k1);
      const double y = at(s2, k2);
      for (std::size_t i = 0; i < x1.size(); ++i) lo += x1[i] < a && x2[i] <= y;
    }
    const double a = at(s1, std::min(n, std::floor(r1 + eps * n)));
    const double y = at(s2, std::min(n, std::floor(r2 + eps * n)));
    double hi = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) hi += x1[i] <= a && x2[i] <= y;
    return {lo / n - 3.0 * eps, hi / n + 3.0 * eps};
  }
};

}  // namespace copsum::testing
