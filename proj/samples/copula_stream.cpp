// Summarize a correlated Gaussian stream and compare a few copula values with
// the exact empirical copula, then evaluate a trivariate D-vine.

#include <cmath>
#include <cstdio>

#include "copsum/copsum.hpp"

int main() {
  using namespace copsum;

  const double eps = 0.05;
  CopulaSummary summary(eps);
  oracle::DataBuffer exact;
  for (const auto& [x1, x2] : streamgen::gaussian_pair_stream({20'000, 7, -0.8})) {
    summary.insert(x1, x2);
    exact.push_back(x1, x2);
  }

  const auto size = summary.size_report();
  std::printf("n=%llu  L=%zu  tuples=%zu  bytes=%llu\n", static_cast<unsigned long long>(summary.n()), size.L,
              size.total_tuples, static_cast<unsigned long long>(size.bytes));

  const CopulaView view(summary);
  for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto r = view.query(u, u);
    const double truth = oracle::empirical_copula(exact, u, u);
    std::printf("C(%.1f,%.1f): summary %.4f  exact %.4f  |diff| %.4f  (bound %.2f)\n", u, u, r.value, truth,
                std::abs(r.value - truth), r.error_bound);
  }

  // Round trip through the checkpoint format.
  const auto restored = deserialize(serialize(summary));
  std::printf("checkpoint round trip %s\n", restored == summary ? "identical" : "DIFFERENT");

  SummaryVine vine(VineSpec{3, 500, 100, eps});
  for (const auto& x : streamgen::gaussian_tri_stream({20'000, 11, 0.5, 0.5, 0.0})) vine.insert(x);
  vine.build();
  for (double u2 : {0.1, 0.9}) std::printf("vine C(0.5,%.1f,0.5) = %.4f\n", u2, vine.evaluate({0.5, u2, 0.5}));
}
