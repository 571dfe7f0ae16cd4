#pragma once

// Bivariate copula summary.
//
// One quantile summary S1 tracks the first components. Each S1 tuple owns a
// subsummary of the second components of the points folded into that tuple,
// so subsummaries 1..E together describe the points whose first component is
// at most v_E. The copula query combines a quantile query on S1, a quantile
// query on the merge of all subsummaries and a rank query on the merge of the
// first E of them; the answer is within 5 * epsilon of the empirical copula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "copsum/error.hpp"
#include "copsum/gk.hpp"
#include "copsum/numeric.hpp"

namespace copsum {

enum class Component { first = 1, second = 2 };

/// How often the band-merging pass runs.
enum class CombineSchedule {
  periodic,      ///< every floor(1 / (2 epsilon)) inserts
  every_insert,  ///< after each insert; smaller summaries, slower ingestion
};

struct CopulaQueryResult {
  double value = 0.0;
  count_t n_hat1 = 0;
  std::size_t E = 0;  ///< 1-based index of the covering S1 tuple
  double error_bound = 0.0;
  bool degenerate = false;  ///< n_hat1 == 0; value is 0 by convention
};

/// Space accounting with a fixed model: 24 bytes per tuple plus 16 bytes of
/// bookkeeping per summary (S1 and each subsummary).
struct SizeReport {
  static constexpr std::uint64_t bytes_per_tuple = 24;
  static constexpr std::uint64_t bytes_per_summary = 16;

  std::size_t L = 0;
  std::size_t s1_tuples = 0;
  std::size_t total_tuples = 0;
  std::vector<std::size_t> sub_lengths;
  std::uint64_t bytes = 0;
};

namespace detail {

// Shared tail of the copula query: P1 = merge of subsummaries 1..E, P2 = merge
// of all of them. Works on QuantileSummary and FrozenSummary alike.
template <class Summary>
CopulaQueryResult finish_query(const Summary& p1, const Summary& p2, std::size_t E, count_t n, double epsilon,
                               double u2) {
  CopulaQueryResult out;
  out.E = E;
  out.error_bound = 5.0 * epsilon;
  out.n_hat1 = p1.count();
  if (out.n_hat1 == 0) {
    out.degenerate = true;
    return out;
  }
  if (u2 == 0.0) return out;
  const double q = p2.quantile(u2);
  // (n_hat1 / n) * (r / n_hat1) == r / n
  out.value = static_cast<double>(p1.inverse_rank(q)) / static_cast<double>(n);
  return out;
}

inline std::size_t covering_index(std::span<const GkTuple> s1, double q) {
  return static_cast<std::size_t>(
      std::upper_bound(s1.begin(), s1.end(), q, [](double v, const GkTuple& t) { return v < t.value; }) -
      s1.begin());
}

}  // namespace detail

class CopulaSummary {
 public:
  explicit CopulaSummary(double epsilon, CombineSchedule schedule = CombineSchedule::periodic)
      : epsilon_(epsilon), schedule_(schedule), s1_(epsilon) {
    require_epsilon(epsilon);
    period_ = schedule == CombineSchedule::every_insert
                  ? 1
                  : static_cast<count_t>(std::floor(1.0 / (2.0 * epsilon)));
    if (period_ < 1) throw config_error("combine period must be at least 1");
  }

  /// Rebuilds a summary from its parts. Throws config_error when the parts
  /// are not aligned or their counts disagree with n.
  static CopulaSummary from_parts(double epsilon, count_t n, QuantileSummary s1,
                                  std::vector<QuantileSummary> subs,
                                  CombineSchedule schedule = CombineSchedule::periodic) {
    CopulaSummary cs(epsilon, schedule);
    if (s1.epsilon() != epsilon) throw config_error("S1 epsilon differs from summary epsilon");
    if (s1.size() != subs.size()) throw config_error("subsummary count differs from S1 length");
    if (s1.count() != n) throw config_error("S1 count differs from n");
    count_t total = 0;
    for (const auto& sub : subs) {
      if (sub.epsilon() != epsilon) throw config_error("subsummary epsilon differs from summary epsilon");
      if (sub.empty()) throw config_error("empty subsummary");
      total += sub.count();
    }
    if (total != n) throw config_error("subsummary counts do not add up to n");
    cs.n_ = n;
    cs.s1_ = std::move(s1);
    cs.subs_ = std::move(subs);
    return cs;
  }

  double epsilon() const noexcept { return epsilon_; }
  count_t n() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  count_t combine_period() const noexcept { return period_; }
  CombineSchedule schedule() const noexcept { return schedule_; }
  const QuantileSummary& s1() const noexcept { return s1_; }
  std::span<const QuantileSummary> subs() const noexcept { return subs_; }
  std::size_t L() const noexcept { return s1_.size(); }

  void insert(double x1, double x2) {
    require_finite(x1, "x1");
    require_finite(x2, "x2");
    const std::size_t pos = s1_.insert(x1);
    subs_.insert(subs_.begin() + static_cast<std::ptrdiff_t>(pos), QuantileSummary::singleton(epsilon_, x2));
    ++n_;
    if (n_ % period_ == 0) combine();
  }

  /// Band-merges S1; the subsummaries of each merged run are merged and then
  /// compressed against their own count.
  void combine() {
    const auto runs = detail::band_runs<double>(s1_.tuples(), 2.0 * epsilon_ * static_cast<double>(n_));
    for (const auto& run : runs) {
      const auto first = subs_.begin() + static_cast<std::ptrdiff_t>(run.first);
      const auto last = subs_.begin() + static_cast<std::ptrdiff_t>(run.last) + 1;
      auto merged = merge_many(std::span<const QuantileSummary>(&*first, static_cast<std::size_t>(last - first)));
      merged.compress(merged.count());
      *first = std::move(merged);
      subs_.erase(first + 1, last);
    }
    s1_.apply_runs(runs);
  }

  /// 1-based index of the last S1 tuple whose value is <= the S1 quantile at u1.
  std::size_t select_E(double u1) const {
    if (empty()) throw empty_query_error("copula query on an empty summary");
    return detail::covering_index(s1_.tuples(), s1_.quantile(u1));
  }

  /// Number of points held by subsummaries 1..E.
  count_t n_hat1(std::size_t E) const {
    if (E < 1 || E > subs_.size()) throw index_error("E out of range");
    count_t total = 0;
    for (std::size_t i = 0; i < E; ++i) total += subs_[i].count();
    return total;
  }

  CopulaQueryResult query(double u1, double u2) const {
    require_unit(u1, "u1");
    require_unit(u2, "u2");
    if (empty()) throw empty_query_error("copula query on an empty summary");
    if (u1 == 0.0) return {0.0, 0, 0, 5.0 * epsilon_, true};
    const std::size_t E = select_E(u1);
    const auto p1 = merge_many(subs().first(E));
    const auto p2 = merge_many(subs());
    return detail::finish_query(p1, p2, E, n_, epsilon_, u2);
  }

  double marginal_quantile(Component c, double u) const {
    if (empty()) throw empty_query_error("marginal query on an empty summary");
    return c == Component::first ? s1_.quantile(u) : merge_many(subs()).quantile(u);
  }

  double marginal_cdf(Component c, double y) const {
    if (empty()) throw empty_query_error("marginal query on an empty summary");
    return c == Component::first ? s1_.inverse(y) : merge_many(subs()).inverse(y);
  }

  SizeReport size_report() const {
    SizeReport r;
    r.L = s1_.size();
    r.s1_tuples = s1_.size();
    r.total_tuples = s1_.size();
    r.sub_lengths.reserve(subs_.size());
    for (const auto& sub : subs_) {
      r.sub_lengths.push_back(sub.size());
      r.total_tuples += sub.size();
    }
    r.bytes = SizeReport::bytes_per_tuple * r.total_tuples + SizeReport::bytes_per_summary * (1 + subs_.size());
    return r;
  }

  friend bool operator==(const CopulaSummary& a, const CopulaSummary& b) {
    return a.epsilon_ == b.epsilon_ && a.n_ == b.n_ && a.s1_ == b.s1_ && a.subs_ == b.subs_;
  }

 private:
  double epsilon_;
  CombineSchedule schedule_;
  count_t period_ = 1;
  count_t n_ = 0;
  QuantileSummary s1_;
  std::vector<QuantileSummary> subs_;
};

/// Immutable snapshot of a CopulaSummary with every prefix merge
/// M(S2_1..S2_E) precomputed. Gives the same answers as the summary's own
/// queries at a fraction of the cost, which matters when one snapshot is
/// queried thousands of times (vine pseudo-observations, query grids).
class CopulaView {
 public:
  explicit CopulaView(const CopulaSummary& cs) : epsilon_(cs.epsilon()), n_(cs.n()), s1_(cs.s1()) {
    s1_tuples_.assign(cs.s1().tuples().begin(), cs.s1().tuples().end());
    const auto subs = cs.subs();
    prefix_.reserve(subs.size());
    if (subs.empty()) return;
    QuantileSummary acc = subs.front();
    prefix_.emplace_back(acc);
    for (std::size_t i = 1; i < subs.size(); ++i) {
      acc = merge(acc, subs[i]);
      prefix_.emplace_back(acc);
    }
  }

  double epsilon() const noexcept { return epsilon_; }
  count_t n() const noexcept { return n_; }

  std::size_t select_E(double u1) const {
    if (n_ == 0) throw empty_query_error("copula query on an empty summary");
    return detail::covering_index(s1_tuples_, s1_.quantile(u1));
  }

  CopulaQueryResult query(double u1, double u2) const {
    require_unit(u1, "u1");
    require_unit(u2, "u2");
    if (n_ == 0) throw empty_query_error("copula query on an empty summary");
    if (u1 == 0.0) return {0.0, 0, 0, 5.0 * epsilon_, true};
    const std::size_t E = select_E(u1);
    return detail::finish_query(prefix_[E - 1], prefix_.back(), E, n_, epsilon_, u2);
  }

  double operator()(double u1, double u2) const { return query(u1, u2).value; }

  double marginal_quantile(Component c, double u) const {
    if (n_ == 0) throw empty_query_error("marginal query on an empty summary");
    return c == Component::first ? s1_.quantile(u) : prefix_.back().quantile(u);
  }

  double marginal_cdf(Component c, double y) const {
    if (n_ == 0) throw empty_query_error("marginal query on an empty summary");
    return c == Component::first ? s1_.inverse(y) : prefix_.back().inverse(y);
  }

 private:
  double epsilon_;
  count_t n_;
  FrozenSummary s1_;
  std::vector<GkTuple> s1_tuples_;
  std::vector<FrozenSummary> prefix_;
};

}  // namespace copsum
