#pragma once

// D-vine pair-copula construction over bivariate copula summaries.
//
// Adjacent pairs (i, i+1) are modelled over the whole stream by a pair model;
// every conditional pair copula is an exact empirical copula of pseudo-data
// derived from the trailing n_query points. DVine is generic over the pair
// model so the streaming version and its exact reference share one recursion.
//
// Indices in ConditioningSet and DVine::edge are 1-based (variables 1..d).

#include <algorithm>
#include <cstddef>
#include <deque>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "copsum/copula.hpp"
#include "copsum/error.hpp"
#include "copsum/numeric.hpp"
#include "copsum/oracle.hpp"

namespace copsum {

struct VineSpec {
  std::size_t d = 3;
  std::size_t n_query = 1000;
  std::size_t grid_m = 100;
  double epsilon = 0.05;

  void validate() const {
    if (d < 2) throw config_error("vine dimension must be at least 2");
    if (n_query < 2) throw config_error("n_query must be at least 2");
    if (grid_m < 2) throw config_error("grid_m must be at least 2");
  }
};

struct ConditioningSet {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<std::size_t> w;

  friend bool operator==(const ConditioningSet&, const ConditioningSet&) = default;
};

/// All D-vine edges, tree by tree: j = 1..d-1, i = 1..d-j, w = {i+1, ..., i+j-1}.
inline std::vector<ConditioningSet> conditioning_sets(std::size_t d) {
  if (d < 2) throw config_error("vine dimension must be at least 2");
  std::vector<ConditioningSet> out;
  out.reserve(d * (d - 1) / 2);
  for (std::size_t j = 1; j < d; ++j) {
    for (std::size_t i = 1; i + j <= d; ++i) {
      ConditioningSet cs{i, j, {}};
      for (std::size_t k = i + 1; k < i + j; ++k) cs.w.push_back(k);
      out.push_back(std::move(cs));
    }
  }
  return out;
}

/// Trapezoid rule for the integral of C(t, v) over t in [0, u_upper] on m panels.
template <class Copula>
double h_integral(const Copula& c, double u_upper, double v, std::size_t m) {
  require_unit(u_upper, "u_upper");
  require_unit(v, "v");
  if (m < 2) throw config_error("h_integral needs at least 2 panels");
  if (u_upper == 0.0) return 0.0;
  const double md = static_cast<double>(m);
  double sum = 0.5 * (c(0.0, v) + c(u_upper, v));
  for (std::size_t k = 1; k < m; ++k) sum += c(u_upper * (static_cast<double>(k) / md), v);
  return sum * (u_upper / md);
}

/// Integral of C(u, t) over t in [0, v_upper]: the h-function in the other direction.
template <class Copula>
double h_integral_second(const Copula& c, double u, double v_upper, std::size_t m) {
  return h_integral([&c](double t, double w) { return c(w, t); }, v_upper, u, m);
}

/// Pair model backed by a streaming CopulaSummary. Queries go through a
/// CopulaView snapshot taken by freeze().
class SummaryPairModel {
 public:
  explicit SummaryPairModel(const VineSpec& spec, CombineSchedule schedule = CombineSchedule::periodic)
      : summary_(spec.epsilon, schedule) {}

  void insert(double a, double b) { summary_.insert(a, b); }
  void freeze() { view_.emplace(summary_); }

  double cdf_first(double x) const { return view().marginal_cdf(Component::first, x); }
  double cdf_second(double x) const { return view().marginal_cdf(Component::second, x); }
  double quantile_first(double u) const { return view().marginal_quantile(Component::first, u); }
  double quantile_second(double u) const { return view().marginal_quantile(Component::second, u); }
  double copula(double u1, double u2) const { return view()(u1, u2); }

  const CopulaSummary& summary() const noexcept { return summary_; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(summary_.n()); }

 private:
  const CopulaView& view() const {
    if (!view_) throw state_error("pair model queried before freeze");
    return *view_;
  }

  CopulaSummary summary_;
  std::optional<CopulaView> view_;
};

/// Pair model that keeps every observation: exact marginals and exact
/// empirical copula. Desk-scale reference for SummaryPairModel.
class ExactPairModel {
 public:
  explicit ExactPairModel(const VineSpec&) {}

  void insert(double a, double b) {
    require_finite(a, "x1");
    require_finite(b, "x2");
    a_.push_back(a);
    b_.push_back(b);
  }
  void freeze() {
    if (a_.empty()) throw insufficient_data_error("pair model has no data");
    copula_ = oracle::ExactCopula(a_, b_);
  }

  double cdf_first(double x) const { return copula_.first().cdf(x); }
  double cdf_second(double x) const { return copula_.second().cdf(x); }
  double quantile_first(double u) const { return copula_.first().quantile(u); }
  double quantile_second(double u) const { return copula_.second().quantile(u); }
  double copula(double u1, double u2) const { return copula_(u1, u2); }

  std::span<const double> first_data() const noexcept { return a_; }
  std::span<const double> second_data() const noexcept { return b_; }
  std::size_t count() const noexcept { return a_.size(); }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
  oracle::ExactCopula copula_;
};

/// Maps pseudo-observations through the marginal quantiles of variable i (as
/// the first component of `lo`) and variable i+j (as the second component of
/// `hi`). Pseudo-observations are clamped to [0, 1] first.
template <class PairModel>
oracle::DataBuffer pseudo_data(const PairModel& lo, const PairModel& hi, std::span<const double> first,
                               std::span<const double> second) {
  if (first.size() != second.size()) throw input_domain_error("pseudo-observation columns differ in length");
  oracle::DataBuffer buf(2, std::max<std::size_t>(first.size(), 1));
  for (std::size_t k = 0; k < first.size(); ++k)
    buf.push_back(lo.quantile_first(clamp_unit(first[k])), hi.quantile_second(clamp_unit(second[k])));
  return buf;
}

/// Exact empirical copula of a bivariate buffer.
inline oracle::ExactCopula conditional_copula(const oracle::DataBuffer& buf) {
  if (buf.empty()) throw insufficient_data_error("conditional copula on an empty buffer");
  if (buf.dims() != 2) throw input_domain_error("conditional copula needs a bivariate buffer");
  return oracle::ExactCopula(buf.column(0), buf.column(1));
}

template <class PairModel>
class DVine {
 public:
  /// One vine edge (i, j) connecting variables i and i+j given w_{i,j}.
  struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<double> first;     ///< pseudo-observations u_{i|w}, one per buffered point
    std::vector<double> second;    ///< pseudo-observations u_{i+j|w}
    std::vector<double> forward;   ///< h outputs passed up as u_{i|w, i+j} (empty on the top tree)
    std::vector<double> backward;  ///< h outputs passed up as u_{i+j|w, i}
    oracle::DataBuffer data{2, 1};  ///< pseudo-data (j >= 2 only)
    oracle::ExactCopula copula;     ///< conditional copula (j >= 2 only)
  };

  /// Extra arguments are forwarded to every pair model constructor.
  template <class... Args>
  explicit DVine(VineSpec spec, const Args&... pair_args) : spec_(spec) {
    spec_.validate();
    pairs_.reserve(spec_.d - 1);
    for (std::size_t p = 0; p + 1 < spec_.d; ++p) pairs_.emplace_back(spec_, pair_args...);
  }

  const VineSpec& spec() const noexcept { return spec_; }
  std::size_t dims() const noexcept { return spec_.d; }
  std::size_t count() const noexcept { return n_; }
  bool built() const noexcept { return built_; }
  std::size_t buffered() const noexcept { return buffer_.size(); }

  /// Adjacent pair model for variables (p, p+1), 1-based.
  const PairModel& pair(std::size_t p) const {
    if (p < 1 || p >= spec_.d) throw index_error("pair index out of range");
    return pairs_[p - 1];
  }

  void insert(std::span<const double> x) {
    if (x.size() != spec_.d) throw input_domain_error("point dimension does not match the vine");
    for (double v : x) require_finite(v, "vine input");
    for (std::size_t p = 0; p + 1 < spec_.d; ++p) pairs_[p].insert(x[p], x[p + 1]);
    buffer_.emplace_back(x.begin(), x.end());
    if (buffer_.size() > spec_.n_query) buffer_.pop_front();
    ++n_;
    built_ = false;
  }

  /// Steps (1)-(3): freezes the pair models and builds every conditional
  /// layer from the trailing buffer. Call again after further inserts.
  void build() {
    if (buffer_.empty()) throw insufficient_data_error("vine has no buffered points");
    for (auto& p : pairs_) p.freeze();
    const std::size_t d = spec_.d;
    const std::size_t nb = buffer_.size();
    edges_.assign(d - 1, {});
    for (std::size_t j = 1; j < d; ++j) {
      auto& level = edges_[j - 1];
      level.resize(d - j);
      for (std::size_t i = 0; i + j < d; ++i) {
        Edge& e = level[i];
        e.i = i + 1;
        e.j = j;
        if (j == 1) {
          e.first.resize(nb);
          e.second.resize(nb);
          for (std::size_t k = 0; k < nb; ++k) {
            e.first[k] = clamp_unit(pairs_[i].cdf_first(buffer_[k][i]));
            e.second[k] = clamp_unit(pairs_[i].cdf_second(buffer_[k][i + 1]));
          }
        } else {
          e.first = edges_[j - 2][i].forward;
          e.second = edges_[j - 2][i + 1].backward;
          e.data = pseudo_data(pairs_[i], pairs_[i + j - 1], e.first, e.second);
          e.copula = conditional_copula(e.data);
        }
        if (j + 1 < d) {
          e.forward.resize(nb);
          e.backward.resize(nb);
          for (std::size_t k = 0; k < nb; ++k) {
            e.forward[k] = forward_h(e, e.first[k], e.second[k]);
            e.backward[k] = backward_h(e, e.first[k], e.second[k]);
          }
        }
      }
    }
    built_ = true;
  }

  /// Edge (i, j), 1-based, of the built model.
  const Edge& edge(std::size_t i, std::size_t j) const {
    require_built();
    if (j < 1 || j >= spec_.d || i < 1 || i + j > spec_.d) throw index_error("vine edge out of range");
    return edges_[j - 1][i - 1];
  }

  /// Step (4): product of all pair-copula factors at the point u.
  double evaluate(std::span<const double> u) const {
    require_built();
    if (u.size() != spec_.d) throw input_domain_error("query dimension does not match the vine");
    for (double x : u) require_unit(x, "vine query coordinate");
    const std::size_t d = spec_.d;
    std::vector<double> first(u.begin(), u.end() - 1);
    std::vector<double> second(u.begin() + 1, u.end());
    std::vector<double> fwd;
    std::vector<double> bwd;
    double product = 1.0;
    for (std::size_t j = 1; j < d; ++j) {
      const auto& level = edges_[j - 1];
      fwd.assign(level.size(), 0.0);
      bwd.assign(level.size(), 0.0);
      for (std::size_t i = 0; i < level.size(); ++i) {
        product *= clamp_unit(copula_at(level[i], first[i], second[i]));
        if (j + 1 < d) {
          fwd[i] = forward_h(level[i], first[i], second[i]);
          bwd[i] = backward_h(level[i], first[i], second[i]);
        }
      }
      if (j + 1 < d) {
        first.assign(fwd.begin(), fwd.end() - 1);
        second.assign(bwd.begin() + 1, bwd.end());
      }
    }
    return clamp_unit(product);
  }

  double evaluate(std::initializer_list<double> u) const { return evaluate(std::span<const double>(u.begin(), u.size())); }

 private:
  void require_built() const {
    if (!built_) throw state_error("vine model is not built; call build() after inserting");
  }

  double copula_at(const Edge& e, double u1, double u2) const {
    return e.j == 1 ? pairs_[e.i - 1].copula(u1, u2) : e.copula(u1, u2);
  }

  double forward_h(const Edge& e, double u1, double u2) const {
    auto c = [this, &e](double a, double b) { return copula_at(e, a, b); };
    return clamp_unit(h_integral(c, u1, u2, spec_.grid_m));
  }

  double backward_h(const Edge& e, double u1, double u2) const {
    auto c = [this, &e](double a, double b) { return copula_at(e, a, b); };
    return clamp_unit(h_integral_second(c, u1, u2, spec_.grid_m));
  }

  VineSpec spec_;
  std::vector<PairModel> pairs_;
  std::deque<std::vector<double>> buffer_;
  std::vector<std::vector<Edge>> edges_;
  std::size_t n_ = 0;
  bool built_ = false;
};

using SummaryVine = DVine<SummaryPairModel>;
using ExactVine = DVine<ExactPairModel>;

/// First-level pseudo-observations of pair (i, i+1), 1-based: the h outputs
/// u_{i|i+1} and u_{i+1|i} for every buffered point.
template <class PairModel>
std::pair<std::span<const double>, std::span<const double>> pseudo_observations(const DVine<PairModel>& vine,
                                                                                std::size_t i) {
  if (vine.dims() < 3) throw config_error("pseudo-observations need a vine of dimension 3 or more");
  const auto& e = vine.edge(i, 1);
  return {e.forward, e.backward};
}

inline double vine_evaluate_summary(const SummaryVine& vine, std::span<const double> u) { return vine.evaluate(u); }
inline double vine_evaluate_exact(const ExactVine& vine, std::span<const double> u) { return vine.evaluate(u); }

}  // namespace copsum
