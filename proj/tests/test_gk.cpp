#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "copsum/gk.hpp"
#include "support.hpp"

namespace {

using copsum::count_t;
using copsum::GkTuple;
using copsum::QuantileSummary;
using copsum::RankBounds;
using namespace copsum::testing;

std::vector<GkTuple> tuples_of(const QuantileSummary& s) { return {s.tuples().begin(), s.tuples().end()}; }

TEST(GkInsert, IntoEmpty) {
  QuantileSummary s(0.1);
  s.insert(5.0);
  EXPECT_EQ(tuples_of(s), (std::vector<GkTuple>{{5.0, 1, 0}}));
  EXPECT_EQ(s.count(), 1u);
}

TEST(GkInsert, BelowMinimumPrepends) {
  auto s = QuantileSummary::from_tuples(0.1, {{1.0, 1, 0}, {2.0, 1, 0}});
  s.insert(0.0);
  EXPECT_EQ(tuples_of(s), (std::vector<GkTuple>{{0.0, 1, 0}, {1.0, 1, 0}, {2.0, 1, 0}}));
}

TEST(GkInsert, AscendingStreamAppends) {
  QuantileSummary s(0.1);
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.insert(x);
  EXPECT_EQ(tuples_of(s), (std::vector<GkTuple>{{1, 1, 0}, {2, 1, 0}, {3, 1, 0}, {4, 1, 0}}));
  EXPECT_EQ(s.count(), 4u);
}

TEST(GkInsert, InteriorTupleTakesNeighbourUncertainty) {
  auto s = QuantileSummary::from_tuples(0.1, {{1.0, 1, 0}, {5.0, 3, 2}});
  EXPECT_EQ(s.insert(3.0), 1u);
  EXPECT_EQ(s.tuples()[1], (GkTuple{3.0, 1, 4}));
}

TEST(GkInsert, EqualValuesGoAfterExisting) {
  auto s = QuantileSummary::from_tuples(0.1, {{1.0, 1, 0}, {2.0, 1, 0}, {3.0, 1, 0}});
  EXPECT_EQ(s.insert(2.0), 2u);
  EXPECT_EQ(s.insert(1.0), 1u);
}

TEST(GkInsert, RejectsNonFinite) {
  QuantileSummary s(0.1);
  EXPECT_THROW(s.insert(std::nan("")), copsum::input_domain_error);
  EXPECT_THROW(s.insert(INFINITY), copsum::input_domain_error);
  EXPECT_THROW(s.insert(-INFINITY), copsum::input_domain_error);
  EXPECT_TRUE(s.empty());
}

TEST(GkEpsilon, DomainIsOpenInterval) {
  EXPECT_THROW(QuantileSummary(0.0), copsum::config_error);
  EXPECT_THROW(QuantileSummary(0.5), copsum::config_error);
  EXPECT_THROW(QuantileSummary(std::nan("")), copsum::config_error);
  EXPECT_NO_THROW(QuantileSummary(0.4999));
}

TEST(GkRanks, Examples) {
  auto a = QuantileSummary::from_tuples(0.1, {{1, 1, 0}, {2, 1, 0}});
  EXPECT_EQ(copsum::ranks(a), (std::vector<RankBounds>{{1, 1}, {2, 2}}));
  auto b = QuantileSummary::from_tuples(0.1, {{1, 1, 0}, {3, 2, 1}});
  EXPECT_EQ(copsum::ranks(b), (std::vector<RankBounds>{{1, 1}, {3, 4}}));
  auto c = QuantileSummary::from_tuples(0.1, {{7, 4, 0}});
  EXPECT_EQ(copsum::ranks(c), (std::vector<RankBounds>{{4, 4}}));
}

TEST(GkRanks, BijectionWithTupleEncoding) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<count_t> gd(1, 50), dd(0, 30);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<GkTuple> t;
    double v = 0.0;
    const int L = len(rng);
    for (int k = 0; k < L; ++k) {
      v += static_cast<double>(gd(rng) % 3);
      t.push_back({v, gd(rng), k == 0 ? 0 : dd(rng)});
    }
    const auto s = QuantileSummary::from_tuples(0.1, t);
    const auto rb = copsum::ranks(s);
    std::vector<double> values;
    for (const auto& x : t) values.push_back(x.value);
    ASSERT_EQ(copsum::tuples_from_ranks<double>(values, rb), t);
    for (std::size_t k = 0; k < rb.size(); ++k) {
      ASSERT_EQ(rb[k].r_max - rb[k].r_min, t[k].delta);
      ASSERT_EQ(rb[k].r_min - (k == 0 ? 0 : rb[k - 1].r_min), t[k].g);
    }
  }
}

TEST(GkCompress, MergesTrailingBand) {
  // Largest admissible epsilon below 0.5 gives the band 2 * eps * 4 ~ 4.
  auto s = QuantileSummary::from_tuples(0.4999, {{1, 1, 0}, {2, 1, 0}, {3, 1, 0}, {4, 1, 0}});
  s.compress(4);
  EXPECT_EQ(tuples_of(s), (std::vector<GkTuple>{{1, 1, 0}, {4, 3, 0}}));
  EXPECT_EQ(s.count(), 4u);
}

TEST(GkCompress, ShortSummariesUnchanged) {
  auto s = QuantileSummary::from_tuples(0.4999, {{1, 1, 0}, {2, 5, 0}});
  const auto before = s;
  s.compress(1000);
  EXPECT_EQ(s, before);
}

TEST(GkCompress, TinyBandUnchanged) {
  auto s = exact_summary(0.01, 1, 40);
  const auto before = s;
  s.compress(40);  // 2 * eps * n = 0.8 < 1
  EXPECT_EQ(s, before);
}

TEST(GkCompress, BandInvariantAfterEveryPass) {
  for (double eps : {0.01, 0.05, 0.1, 0.25}) {
    for (auto shape : all_shapes) {
      const auto xs = make_stream(shape, 3000, 17);
      QuantileSummary s(eps);
      const auto period = static_cast<count_t>(std::floor(1.0 / (2.0 * eps)));
      for (double x : xs) {
        s.insert(x);
        if (s.count() % period == 0) {
          s.compress(s.count());
          ASSERT_FALSE(s.band_error()) << *s.band_error();
          ASSERT_FALSE(s.structure_error());
        }
      }
    }
  }
}

TEST(GkQuantile, Singleton) {
  auto s = QuantileSummary::singleton(0.1, 7.0);
  EXPECT_EQ(s.quantile(1.0), 7.0);
  EXPECT_EQ(s.quantile(0.0), 7.0);
}

TEST(GkQuantile, MidpointOfOneToHundred) {
  const auto s = summarize(make_stream(Shape::sorted, 100, 0), 0.1);  // values 0..99
  const double q = s.quantile(0.5) + 1.0;                               // shift to 1..100
  EXPECT_GE(q, 40.0);
  EXPECT_LE(q, 60.0);
}

TEST(GkQuantile, ExactSummaryMatchesOrderStatistic) {
  const auto s = exact_summary(0.05, 1, 10);
  EXPECT_EQ(s.quantile(0.5), 5.0);
  EXPECT_EQ(s.quantile(0.55), 6.0);
  EXPECT_EQ(s.quantile(0.1), 1.0);
}

TEST(GkQuantile, EmptyThrows) {
  QuantileSummary s(0.1);
  EXPECT_THROW(s.quantile(0.5), copsum::empty_query_error);
  EXPECT_THROW(s.inverse(0.5), copsum::empty_query_error);
}

TEST(GkQuantile, RankWithinEpsilonN) {
  for (double eps : {0.01, 0.05, 0.1}) {
    for (auto shape : all_shapes) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto xs = make_stream(shape, 4000, seed);
        const auto s = summarize(xs, eps);
        auto sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        const double tol = eps * static_cast<double>(xs.size());
        for (int k = 1; k <= 100; ++k) {
          const double u = k / 100.0;
          const count_t r = copsum::ceil_rank(u, xs.size());
          ASSERT_LE(rank_distance(sorted, s.quantile(u), r), tol) << "eps=" << eps << " u=" << u;
        }
      }
    }
  }
}

TEST(GkQuantile, ExtremesRetained) {
  for (auto shape : all_shapes) {
    const auto xs = make_stream(shape, 5000, 3);
    const auto s = summarize(xs, 0.05);
    EXPECT_EQ(s.front().value, *std::min_element(xs.begin(), xs.end()));
    EXPECT_EQ(s.back().value, *std::max_element(xs.begin(), xs.end()));
    EXPECT_EQ(s.quantile(1.0), s.back().value);
  }
}

TEST(GkInverse, Boundaries) {
  const auto s = exact_summary(0.1, 1, 100);
  EXPECT_EQ(s.inverse(0.5), 0.0);
  EXPECT_EQ(s.inverse(1000.0), 1.0);
  EXPECT_THROW(s.inverse(std::nan("")), copsum::input_domain_error);
}

TEST(GkInverse, OneToHundredAtThirtyPointFive) {
  std::vector<double> xs;
  for (int v = 1; v <= 100; ++v) xs.push_back(v);
  const auto s = summarize(xs, 0.1);
  const double f = s.inverse(30.5);
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 0.6);
  EXPECT_NEAR(f, 0.30, 0.3);
}

TEST(GkInverse, WithinThreeEpsilon) {
  for (double eps : {0.01, 0.05, 0.1}) {
    for (auto shape : all_shapes) {
      const auto xs = make_stream(shape, 4000, 5);
      const auto s = summarize(xs, eps);
      auto sorted = xs;
      std::sort(sorted.begin(), sorted.end());
      std::mt19937_64 rng(99);
      std::uniform_real_distribution<double> pick(sorted.front() - 1.0, sorted.back() + 1.0);
      for (int k = 0; k < 300; ++k) {
        const double y = k % 2 ? pick(rng) : sorted[static_cast<std::size_t>(rng() % sorted.size())];
        ASSERT_LE(std::abs(s.inverse(y) - exact_cdf(sorted, y)), 3.0 * eps + 1e-12) << "y=" << y;
      }
    }
  }
}

TEST(GkMerge, WithEmptyIsIdentity) {
  const auto s = summarize(make_stream(Shape::normal, 500, 1), 0.05);
  const QuantileSummary empty(0.05);
  EXPECT_EQ(copsum::merge(s, empty), s);
  EXPECT_EQ(copsum::merge(empty, s), s);
}

TEST(GkMerge, SingletonIsInserted) {
  const auto a = QuantileSummary::singleton(0.1, 1.0);
  const auto b = QuantileSummary::from_tuples(0.1, {{2, 1, 0}, {3, 1, 0}});
  EXPECT_EQ(tuples_of(copsum::merge(a, b)), (std::vector<GkTuple>{{1, 1, 0}, {2, 1, 0}, {3, 1, 0}}));
  EXPECT_EQ(tuples_of(copsum::merge(b, a)), (std::vector<GkTuple>{{1, 1, 0}, {2, 1, 0}, {3, 1, 0}}));
}

TEST(GkMerge, EpsilonMismatchThrows) {
  EXPECT_THROW(copsum::merge(QuantileSummary(0.1), QuantileSummary(0.2)), copsum::config_error);
}

TEST(GkMerge, ExactHalvesGiveExactRanks) {
  const auto m = copsum::merge(exact_summary(0.05, 1, 10), exact_summary(0.05, 11, 20));
  ASSERT_EQ(m.size(), 20u);
  const auto rb = copsum::ranks(m);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(m.tuples()[k].value, static_cast<double>(k + 1));
    EXPECT_EQ(rb[k], (RankBounds{k + 1, k + 1}));
  }
}

TEST(GkMergeMany, Examples) {
  const auto s = summarize(make_stream(Shape::uniform, 300, 4), 0.05);
  EXPECT_EQ(copsum::merge_many(std::vector<QuantileSummary>{s}), s);
  EXPECT_EQ(copsum::merge_many(std::vector<QuantileSummary>{s, QuantileSummary(0.05), QuantileSummary(0.05)}), s);
  EXPECT_THROW(copsum::merge_many(std::vector<QuantileSummary>{}), copsum::config_error);

  const auto m = copsum::merge_many(
      std::vector<QuantileSummary>{exact_summary(0.05, 1, 5), exact_summary(0.05, 6, 10), exact_summary(0.05, 11, 15)});
  const auto rb = copsum::ranks(m);
  ASSERT_EQ(rb.size(), 15u);
  for (std::size_t k = 0; k < 15; ++k) EXPECT_EQ(rb[k], (RankBounds{k + 1, k + 1}));
  EXPECT_EQ(m.count(), 15u);
}

TEST(GkMerge, PreservesEpsilonApproximation) {
  for (double eps : {0.02, 0.05, 0.1}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      std::vector<QuantileSummary> parts;
      std::vector<double> pooled;
      for (int p = 0; p < 5; ++p) {
        const auto shape = all_shapes[(seed + p) % 5];
        const auto xs = make_stream(shape, 200 + 300 * p, seed * 10 + p);
        parts.push_back(summarize(xs, eps));
        pooled.insert(pooled.end(), xs.begin(), xs.end());
      }
      auto m = copsum::merge_many(parts);
      ASSERT_EQ(m.count(), pooled.size());
      std::sort(pooled.begin(), pooled.end());
      const double tol = eps * static_cast<double>(pooled.size());
      for (int pass = 0; pass < 2; ++pass) {
        ASSERT_FALSE(m.structure_error());
        ASSERT_FALSE(m.band_error()) << *m.band_error();
        for (int k = 1; k <= 100; ++k) {
          const double u = k / 100.0;
          ASSERT_LE(rank_distance(pooled, m.quantile(u), copsum::ceil_rank(u, pooled.size())), tol);
        }
        for (double y : grid(pooled.front(), pooled.back(), 101))
          ASSERT_LE(std::abs(m.inverse(y) - exact_cdf(pooled, y)), 3.0 * eps + 1e-12);
        m.compress(m.count());  // second pass: the merged summary recompressed
      }
    }
  }
}

TEST(FrozenSummary, AgreesWithSource) {
  for (auto shape : all_shapes) {
    const auto xs = make_stream(shape, 3000, 8);
    const auto s = summarize(xs, 0.03);
    const copsum::FrozenSummary f(s);
    EXPECT_EQ(f.count(), s.count());
    for (int k = 0; k <= 1000; ++k) ASSERT_EQ(f.quantile(k / 1000.0), s.quantile(k / 1000.0));
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (double y : grid(sorted.front() - 1, sorted.back() + 1, 500)) ASSERT_EQ(f.inverse_rank(y), s.inverse_rank(y));
    for (double y : sorted) ASSERT_EQ(f.inverse_rank(y), s.inverse_rank(y));
  }
}

TEST(GkStructure, DetectsDefects) {
  EXPECT_THROW(QuantileSummary::from_tuples(0.1, {{2, 1, 0}, {1, 1, 0}}), copsum::config_error);
  EXPECT_THROW(QuantileSummary::from_tuples(0.1, {{1, 1, 1}}), copsum::config_error);
  EXPECT_THROW(QuantileSummary::from_tuples(0.1, {{1, 1, 0}, {2, 0, 0}}), copsum::config_error);
  const auto wide = QuantileSummary::adopt(0.1, {{1, 1, 0}, {2, 1, 0}, {3, 1, 5}});
  EXPECT_TRUE(wide.band_error().has_value());
}

}  // namespace
