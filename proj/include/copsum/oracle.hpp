#pragma once

// Exact in-memory reference for the empirical copula and its factored form.
// Everything here stores the data it is asked about; it is the ground truth
// the streaming summaries are measured against, not a production path.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copsum/error.hpp"
#include "copsum/numeric.hpp"

namespace copsum::oracle {

inline constexpr std::size_t default_capacity = 1'000'000;

/// Column-major buffer of d-dimensional points, capped at `capacity` rows.
class DataBuffer {
 public:
  explicit DataBuffer(std::size_t dims = 2, std::size_t capacity = default_capacity)
      : columns_(dims), capacity_(capacity) {
    if (dims < 1) throw config_error("data buffer needs at least one column");
  }

  void push_back(std::span<const double> point) {
    if (point.size() != columns_.size()) throw input_domain_error("point dimension does not match buffer");
    if (size() >= capacity_) throw config_error("oracle buffer capacity exceeded");
    for (double x : point) require_finite(x, "buffered value");
    for (std::size_t k = 0; k < columns_.size(); ++k) columns_[k].push_back(point[k]);
  }

  void push_back(double x1, double x2) {
    const double p[2] = {x1, x2};
    push_back(std::span<const double>(p, 2));
  }

  std::size_t dims() const noexcept { return columns_.size(); }
  std::size_t size() const noexcept { return columns_.front().size(); }
  bool empty() const noexcept { return size() == 0; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::span<const double> column(std::size_t k) const { return columns_.at(k); }

 private:
  std::vector<std::vector<double>> columns_;
  std::size_t capacity_;
};

namespace detail {

inline void require_rows(std::size_t n, const char* what) {
  if (n == 0) throw empty_query_error(std::string(what) + " on empty data");
}

// ceil(u n)-th order statistic, selected without a full sort.
inline double order_statistic(std::span<const double> col, double u) {
  std::vector<double> tmp(col.begin(), col.end());
  const count_t r = std::max<count_t>(1, ceil_rank(u, tmp.size()));
  auto nth = tmp.begin() + static_cast<std::ptrdiff_t>(r - 1);
  std::nth_element(tmp.begin(), nth, tmp.end());
  return *nth;
}

}  // namespace detail

/// ceil(u n)-th order statistic of `col`; u = 0 maps to the minimum.
inline double empirical_inverse_cdf(std::span<const double> col, double u) {
  require_unit(u, "quantile level");
  detail::require_rows(col.size(), "inverse cdf");
  return detail::order_statistic(col, u);
}

/// Fraction of `col` that is <= y.
inline double empirical_cdf(std::span<const double> col, double y) {
  detail::require_rows(col.size(), "cdf");
  const auto c = static_cast<count_t>(std::count_if(col.begin(), col.end(), [y](double x) { return x <= y; }));
  return static_cast<double>(c) / static_cast<double>(col.size());
}

/// n1 = #{ j : x1_j <= ceil(u1 n)-th order statistic of x1 }.
inline count_t n1_exact(const DataBuffer& buf, double u1, std::size_t col_a = 0) {
  require_unit(u1, "u1");
  detail::require_rows(buf.size(), "n1");
  if (u1 == 0.0) return 0;
  const auto a = buf.column(col_a);
  const double t1 = detail::order_statistic(a, u1);
  return static_cast<count_t>(std::count_if(a.begin(), a.end(), [t1](double x) { return x <= t1; }));
}

/// Empirical copula as the mean product of indicators. C(0, .) = C(., 0) = 0.
inline double empirical_copula(const DataBuffer& buf, double u1, double u2, std::size_t col_a = 0,
                               std::size_t col_b = 1) {
  require_unit(u1, "u1");
  require_unit(u2, "u2");
  detail::require_rows(buf.size(), "empirical copula");
  if (u1 == 0.0 || u2 == 0.0) return 0.0;
  const auto a = buf.column(col_a);
  const auto b = buf.column(col_b);
  const double t1 = detail::order_statistic(a, u1);
  const double t2 = detail::order_statistic(b, u2);
  count_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hits += (a[i] <= t1 && b[i] <= t2) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

/// Same quantity written as (n1 / n) * F_{n1,(2)}(F^{-1}_{n,(2)}(u2)). The
/// product is formed as one ratio of integer counts so the result is
/// bit-identical to `empirical_copula`.
inline double empirical_copula_factored(const DataBuffer& buf, double u1, double u2, std::size_t col_a = 0,
                                        std::size_t col_b = 1) {
  require_unit(u1, "u1");
  require_unit(u2, "u2");
  detail::require_rows(buf.size(), "empirical copula");
  if (u1 == 0.0 || u2 == 0.0) return 0.0;
  const auto a = buf.column(col_a);
  const auto b = buf.column(col_b);
  const double t1 = detail::order_statistic(a, u1);
  std::vector<double> selected;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] <= t1) selected.push_back(b[i]);
  const auto n1 = static_cast<count_t>(selected.size());
  const double t2 = detail::order_statistic(b, u2);
  const auto below = static_cast<count_t>(
      std::count_if(selected.begin(), selected.end(), [t2](double x) { return x <= t2; }));
  const auto n = static_cast<count_t>(a.size());
  return static_cast<double>(n1 * below) / static_cast<double>(n * n1);
}

/// Sorted copy of one column: O(log n) empirical cdf and inverse cdf.
class SortedColumn {
 public:
  SortedColumn() = default;
  explicit SortedColumn(std::span<const double> col) : sorted_(col.begin(), col.end()) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const noexcept { return sorted_.size(); }

  /// #{x <= y}
  count_t count_le(double y) const {
    return static_cast<count_t>(std::upper_bound(sorted_.begin(), sorted_.end(), y) - sorted_.begin());
  }

  double cdf(double y) const {
    detail::require_rows(sorted_.size(), "cdf");
    return static_cast<double>(count_le(y)) / static_cast<double>(sorted_.size());
  }

  double quantile(double u) const {
    require_unit(u, "quantile level");
    detail::require_rows(sorted_.size(), "inverse cdf");
    const count_t r = std::max<count_t>(1, ceil_rank(u, sorted_.size()));
    return sorted_[r - 1];
  }

 private:
  std::vector<double> sorted_;
};

/// Empirical copula of a fixed bivariate sample, evaluated by 2-D dominance
/// counting: a Fenwick tree whose nodes hold the sorted second-coordinate
/// ranks of their range. Each evaluation is O(log^2 n); values agree exactly
/// with `empirical_copula` on the same sample.
class ExactCopula {
 public:
  ExactCopula() = default;

  ExactCopula(std::span<const double> a, std::span<const double> b) : a_(a), b_(b) {
    if (a.size() != b.size()) throw input_domain_error("copula columns differ in length");
    const std::size_t n = a.size();
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) { return a[x] < a[y]; });
    // Points in first-coordinate order; node k covers positions (k - lowbit(k), k].
    tree_.assign(n + 1, {});
    for (std::size_t pos = 1; pos <= n; ++pos) {
      const auto r2 = static_cast<std::uint32_t>(b_.count_le(b[order[pos - 1]]));
      for (std::size_t k = pos; k <= n; k += k & (~k + 1)) tree_[k].push_back(r2);
    }
    for (auto& node : tree_) std::sort(node.begin(), node.end());
  }

  std::size_t size() const noexcept { return a_.size(); }

  /// #{i : a_i <= t1, b_i <= t2} where t1, t2 are the ceil(u n)-th order statistics.
  count_t count(double u1, double u2) const {
    require_unit(u1, "u1");
    require_unit(u2, "u2");
    detail::require_rows(a_.size(), "empirical copula");
    if (u1 == 0.0 || u2 == 0.0) return 0;
    const count_t prefix = a_.count_le(a_.quantile(u1));
    const count_t limit = b_.count_le(b_.quantile(u2));
    count_t total = 0;
    for (std::size_t k = prefix; k > 0; k -= k & (~k + 1)) {
      const auto& node = tree_[k];
      total += static_cast<count_t>(std::upper_bound(node.begin(), node.end(), limit) - node.begin());
    }
    return total;
  }

  double operator()(double u1, double u2) const {
    return static_cast<double>(count(u1, u2)) / static_cast<double>(a_.size());
  }

  const SortedColumn& first() const noexcept { return a_; }
  const SortedColumn& second() const noexcept { return b_; }

 private:
  SortedColumn a_;
  SortedColumn b_;
  std::vector<std::vector<std::uint32_t>> tree_;
};

}  // namespace copsum::oracle
