#pragma once

// Greenwald-Khanna style epsilon-approximate quantile summary.
//
// A summary is a value-sorted list of tuples (v, g, delta). With r_min(v_0) = 0,
//   r_min(v_i) = r_min(v_{i-1}) + g_i,   r_max(v_i) = r_min(v_i) + delta_i
// bound the rank v_i held in the summarized stream. Compression keeps
// g_i + delta_i <= 2 * epsilon * count for every tuple after the first, which
// is what lets quantile and rank queries answer within epsilon * count.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copsum/error.hpp"
#include "copsum/numeric.hpp"

namespace copsum {

template <std::floating_point T>
struct BasicGkTuple {
  T value;
  count_t g;
  count_t delta;

  friend bool operator==(const BasicGkTuple&, const BasicGkTuple&) = default;
};

struct RankBounds {
  count_t r_min;
  count_t r_max;

  friend bool operator==(const RankBounds&, const RankBounds&) = default;
};

/// Validates an epsilon for any summary in this library: it must lie in (0, 0.5).
inline void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw config_error("epsilon must lie in (0, 0.5)");
}

/// Largest g + delta a non-first tuple may carry in a summary of `count` elements.
/// Single-element tuples are always admissible, so the bound never drops below 1.
inline double band_limit(double epsilon, count_t count) {
  return std::max(1.0, 2.0 * epsilon * static_cast<double>(count));
}

namespace detail {

/// A maximal run [first, last] of tuples to collapse into tuple `last`.
struct BandRun {
  std::size_t first;
  std::size_t last;
  count_t g_sum;
};

// Greedy right-to-left band search. The first tuple is never absorbed; a run
// m..j qualifies while sum(g_m..g_j) + delta_j < band. Runs come out in
// descending order and never overlap.
template <std::floating_point T>
std::vector<BandRun> band_runs(std::span<const BasicGkTuple<T>> t, double band) {
  std::vector<BandRun> runs;
  if (t.size() < 3) return runs;
  std::size_t j = t.size() - 1;
  while (j >= 2) {
    count_t sum = t[j].g;
    std::size_t m = j;
    while (m >= 2 && static_cast<double>(sum + t[m - 1].g + t[j].delta) < band) {
      sum += t[m - 1].g;
      --m;
    }
    if (m < j) runs.push_back({m, j, sum});
    j = m - 1;
  }
  return runs;
}

}  // namespace detail

template <std::floating_point T>
class BasicQuantileSummary {
 public:
  using value_type = T;
  using tuple_type = BasicGkTuple<T>;

  explicit BasicQuantileSummary(double epsilon) : epsilon_(epsilon) { require_epsilon(epsilon); }

  /// Adopts a tuple list verbatim. Throws config_error when the list is not
  /// well formed (see `structure_error`); the g + delta band is not checked.
  static BasicQuantileSummary from_tuples(double epsilon, std::vector<tuple_type> tuples) {
    auto s = adopt(epsilon, std::move(tuples));
    if (auto why = s.structure_error()) throw config_error(*why);
    return s;
  }

  /// Adopts a tuple list without any validation.
  static BasicQuantileSummary adopt(double epsilon, std::vector<tuple_type> tuples) {
    BasicQuantileSummary s(epsilon);
    count_t total = 0;
    for (const auto& t : tuples) total += t.g;
    s.tuples_ = std::move(tuples);
    s.count_ = total;
    return s;
  }

  /// Summary holding exactly the one element x, i.e. {(x, 1, 0)}.
  static BasicQuantileSummary singleton(double epsilon, T x) {
    BasicQuantileSummary s(epsilon);
    s.insert(x);
    return s;
  }

  double epsilon() const noexcept { return epsilon_; }
  count_t count() const noexcept { return count_; }
  std::size_t size() const noexcept { return tuples_.size(); }
  bool empty() const noexcept { return tuples_.empty(); }
  std::span<const tuple_type> tuples() const noexcept { return tuples_; }
  const tuple_type& front() const { return tuples_.front(); }
  const tuple_type& back() const { return tuples_.back(); }

  /// True for the {(v, 1, 0)} shape that merge treats as a plain insert.
  bool is_singleton() const noexcept {
    return tuples_.size() == 1 && tuples_[0].g == 1 && tuples_[0].delta == 0;
  }

  /// Inserts x and returns the position of its new tuple. Equal values go
  /// after the existing ones.
  std::size_t insert(T x) {
    require_finite(static_cast<double>(x), "inserted value");
    const auto pos = static_cast<std::size_t>(
        std::upper_bound(tuples_.begin(), tuples_.end(), x,
                         [](T v, const tuple_type& t) { return v < t.value; }) -
        tuples_.begin());
    count_t delta = 0;
    if (pos != 0 && pos != tuples_.size()) delta = tuples_[pos].g + tuples_[pos].delta - 1;
    tuples_.insert(tuples_.begin() + static_cast<std::ptrdiff_t>(pos), tuple_type{x, 1, delta});
    ++count_;
    return pos;
  }

  /// One band-merging pass against a stream of `n` elements.
  void compress(count_t n) { apply_runs(detail::band_runs<T>(tuples_, 2.0 * epsilon_ * static_cast<double>(n))); }

  /// Collapses each run into its last tuple (runs in descending order, as
  /// produced by detail::band_runs).
  void apply_runs(std::span<const detail::BandRun> runs) {
    if (runs.empty()) return;
    std::vector<tuple_type> out;
    out.reserve(tuples_.size());
    std::size_t next = 0;
    for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
      out.insert(out.end(), tuples_.begin() + static_cast<std::ptrdiff_t>(next),
                 tuples_.begin() + static_cast<std::ptrdiff_t>(it->first));
      out.push_back({tuples_[it->last].value, it->g_sum, tuples_[it->last].delta});
      next = it->last + 1;
    }
    out.insert(out.end(), tuples_.begin() + static_cast<std::ptrdiff_t>(next), tuples_.end());
    tuples_ = std::move(out);
  }

  /// Value whose rank is within epsilon * count of ceil(u * count). u = 0 is
  /// read as the smallest rank.
  T quantile(double u) const {
    require_unit(u, "quantile level");
    if (empty()) throw empty_query_error("quantile query on an empty summary");
    const count_t n = count_;
    const count_t r = std::max<count_t>(1, ceil_rank(u, n));
    const auto slack = static_cast<count_t>(std::floor(epsilon_ * static_cast<double>(n)));
    if (r + slack >= n) return tuples_.back().value;
    const count_t limit = r + slack;
    count_t r_min = 0;
    for (std::size_t j = 0; j < tuples_.size(); ++j) {
      r_min += tuples_[j].g;
      if (r_min + tuples_[j].delta > limit) return tuples_[j == 0 ? 0 : j - 1].value;
    }
    return tuples_.back().value;
  }

  /// Approximate fraction of summarized elements that are <= y.
  double inverse(T y) const { return static_cast<double>(inverse_rank(y)) / static_cast<double>(count_); }

  /// Approximate number of summarized elements that are <= y.
  count_t inverse_rank(T y) const {
    if (std::isnan(static_cast<double>(y))) throw input_domain_error("inverse query value must not be NaN");
    if (empty()) throw empty_query_error("inverse query on an empty summary");
    if (y >= tuples_.back().value) return count_;
    if (y < tuples_.front().value) return 0;
    const auto i = static_cast<std::size_t>(
        std::upper_bound(tuples_.begin(), tuples_.end(), y,
                         [](T v, const tuple_type& t) { return v < t.value; }) -
        tuples_.begin()) - 1;
    count_t r_min = 0;
    for (std::size_t k = 0; k <= i; ++k) r_min += tuples_[k].g;
    return r_min + tuples_[i].delta;
  }

  /// Describes the first structural defect, if any: unsorted or non-finite
  /// values, g = 0, or a non-zero delta on the first tuple.
  std::optional<std::string> structure_error() const {
    for (std::size_t i = 0; i < tuples_.size(); ++i) {
      const auto& t = tuples_[i];
      const std::string at = "tuple " + std::to_string(i + 1);
      if (!std::isfinite(static_cast<double>(t.value))) return at + ": non-finite value";
      if (t.g < 1) return at + ": g must be >= 1";
      if (i == 0 && t.delta != 0) return at + ": first tuple must have delta = 0";
      if (i > 0 && t.value < tuples_[i - 1].value) return at + ": values out of order";
    }
    return std::nullopt;
  }

  /// First tuple (after the first) whose g + delta exceeds band_limit(epsilon, count).
  std::optional<std::string> band_error() const {
    const double limit = band_limit(epsilon_, count_);
    for (std::size_t i = 1; i < tuples_.size(); ++i) {
      if (static_cast<double>(tuples_[i].g + tuples_[i].delta) > limit)
        return "tuple " + std::to_string(i + 1) + ": g + delta exceeds 2*epsilon*count";
    }
    return std::nullopt;
  }

  friend bool operator==(const BasicQuantileSummary&, const BasicQuantileSummary&) = default;

 private:
  double epsilon_;
  std::vector<tuple_type> tuples_;
  count_t count_ = 0;
};

using GkTuple = BasicGkTuple<double>;
using QuantileSummary = BasicQuantileSummary<double>;

/// Per-tuple rank bounds (prefix sums of g, plus delta).
template <std::floating_point T>
std::vector<RankBounds> ranks(const BasicQuantileSummary<T>& s) {
  std::vector<RankBounds> out;
  out.reserve(s.size());
  count_t r_min = 0;
  for (const auto& t : s.tuples()) {
    r_min += t.g;
    out.push_back({r_min, r_min + t.delta});
  }
  return out;
}

/// Inverse of `ranks`: recovers (g, delta) from rank bounds.
template <std::floating_point T>
std::vector<BasicGkTuple<T>> tuples_from_ranks(std::span<const T> values, std::span<const RankBounds> rb) {
  std::vector<BasicGkTuple<T>> out;
  out.reserve(values.size());
  count_t prev = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.push_back({values[k], rb[k].r_min - prev, rb[k].r_max - rb[k].r_min});
    prev = rb[k].r_min;
  }
  return out;
}

template <std::floating_point T>
T quantile_query(const BasicQuantileSummary<T>& s, double u) {
  return s.quantile(u);
}

template <std::floating_point T>
double inverse_query(const BasicQuantileSummary<T>& s, T y) {
  return s.inverse(y);
}

/// Union of two summaries that stays epsilon-approximate for the pooled stream.
///
/// A summary of shape {(v, 1, 0)} is inserted into the other one. Otherwise the
/// value-sorted union gets rank bounds from the neighbours in the opposite
/// summary; on equal values, tuples of `a` sort before tuples of `b`.
template <std::floating_point T>
BasicQuantileSummary<T> merge(const BasicQuantileSummary<T>& a, const BasicQuantileSummary<T>& b) {
  if (a.epsilon() != b.epsilon()) throw config_error("cannot merge summaries with different epsilon");
  if (b.empty()) return a;
  if (a.empty()) return b;
  if (b.is_singleton()) {
    auto out = a;
    out.insert(b.front().value);
    return out;
  }
  if (a.is_singleton()) {
    auto out = b;
    out.insert(a.front().value);
    return out;
  }

  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const auto ta = a.tuples();
  const auto tb = b.tuples();
  std::vector<T> values;
  std::vector<RankBounds> bounds;
  values.reserve(ta.size() + tb.size());
  bounds.reserve(ta.size() + tb.size());

  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < ta.size() || ib < tb.size()) {
    const bool take_a = ib == tb.size() || (ia < ta.size() && ta[ia].value <= tb[ib].value);
    // `self` is the emitted tuple, `other` the summary it is ranked against;
    // `o` indexes the first not-yet-emitted tuple of `other`.
    const auto& self_rank = take_a ? ra[ia] : rb[ib];
    const auto& other_rank = take_a ? rb : ra;
    const std::size_t o = take_a ? ib : ia;
    RankBounds m{self_rank.r_min, self_rank.r_max};
    if (o > 0) m.r_min += other_rank[o - 1].r_min;
    if (o < other_rank.size())
      m.r_max += other_rank[o].r_max - 1;
    else
      m.r_max += other_rank[o - 1].r_max;
    values.push_back(take_a ? ta[ia].value : tb[ib].value);
    bounds.push_back(m);
    if (take_a)
      ++ia;
    else
      ++ib;
  }
  return BasicQuantileSummary<T>::adopt(a.epsilon(), tuples_from_ranks<T>(values, bounds));
}

/// Left fold of `merge`.
template <std::floating_point T>
BasicQuantileSummary<T> merge_many(std::span<const BasicQuantileSummary<T>> parts) {
  if (parts.empty()) throw config_error("merge_many needs at least one summary");
  auto acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = merge(acc, parts[i]);
  return acc;
}

template <std::floating_point T>
BasicQuantileSummary<T> merge_many(const std::vector<BasicQuantileSummary<T>>& parts) {
  return merge_many(std::span<const BasicQuantileSummary<T>>(parts));
}

/// Read-only snapshot of a summary with precomputed rank tables. Answers the
/// same quantile and inverse queries as the source summary in O(log L).
template <std::floating_point T>
class BasicFrozenSummary {
 public:
  explicit BasicFrozenSummary(const BasicQuantileSummary<T>& s)
      : epsilon_(s.epsilon()), count_(s.count()) {
    values_.reserve(s.size());
    r_max_.reserve(s.size());
    running_max_.reserve(s.size());
    count_t r_min = 0;
    count_t best = 0;
    for (const auto& t : s.tuples()) {
      r_min += t.g;
      values_.push_back(t.value);
      r_max_.push_back(r_min + t.delta);
      best = std::max(best, r_min + t.delta);
      running_max_.push_back(best);
    }
  }

  count_t count() const noexcept { return count_; }
  bool empty() const noexcept { return values_.empty(); }

  T quantile(double u) const {
    require_unit(u, "quantile level");
    if (empty()) throw empty_query_error("quantile query on an empty summary");
    const count_t r = std::max<count_t>(1, ceil_rank(u, count_));
    const auto slack = static_cast<count_t>(std::floor(epsilon_ * static_cast<double>(count_)));
    if (r + slack >= count_) return values_.back();
    const auto it = std::upper_bound(running_max_.begin(), running_max_.end(), r + slack);
    if (it == running_max_.end()) return values_.back();
    const auto j = static_cast<std::size_t>(it - running_max_.begin());
    return values_[j == 0 ? 0 : j - 1];
  }

  count_t inverse_rank(T y) const {
    if (std::isnan(static_cast<double>(y))) throw input_domain_error("inverse query value must not be NaN");
    if (empty()) throw empty_query_error("inverse query on an empty summary");
    if (y >= values_.back()) return count_;
    if (y < values_.front()) return 0;
    const auto i = static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), y) - values_.begin()) - 1;
    return r_max_[i];
  }

  double inverse(T y) const { return static_cast<double>(inverse_rank(y)) / static_cast<double>(count_); }

 private:
  double epsilon_;
  count_t count_;
  std::vector<T> values_;
  std::vector<count_t> r_max_;
  std::vector<count_t> running_max_;
};

using FrozenSummary = BasicFrozenSummary<double>;

}  // namespace copsum
