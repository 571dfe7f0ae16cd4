#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "copsum/copula_io.hpp"
#include "support.hpp"

namespace {

using copsum::CopulaSummary;
using copsum::deserialize;
using copsum::serialize;

CopulaSummary sample(std::size_t n, double eps = 0.05, std::uint64_t seed = 3) {
  CopulaSummary cs(eps);
  for (const auto& [a, b] : copsum::testing::make_pairs(n, 0.4, seed)) cs.insert(a, b);
  return cs;
}

std::string replace_line(const std::string& text, std::size_t lineno, const std::string& with) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  for (std::size_t k = 1; std::getline(in, line); ++k) out << (k == lineno ? with : line) << '\n';
  return out.str();
}

TEST(CopulaIo, RoundTripIsIdentity) {
  for (std::size_t n : {1u, 2u, 17u, 1000u, 20000u}) {
    const auto cs = sample(n);
    const auto text = serialize(cs);
    const auto back = deserialize(text);
    EXPECT_EQ(back, cs);
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(CopulaIo, EmptySummaryRoundTrips) {
  const CopulaSummary cs(0.125);
  const auto text = serialize(cs);
  EXPECT_EQ(text, "copsum 1 epsilon=0.125 n=0 L=0\nS1 0\n");
  EXPECT_EQ(deserialize(text), cs);
}

TEST(CopulaIo, HeaderLayout) {
  CopulaSummary cs(0.1);
  cs.insert(0.1, -2.5);
  cs.insert(3.0, 1e-300);
  EXPECT_EQ(serialize(cs), "copsum 1 epsilon=0.1 n=2 L=2\nS1 2\n0.1 1 0\n3 1 0\nSUB 1 1\n-2.5 1 0\nSUB 2 1\n1e-300 1 0\n");
}

TEST(CopulaIo, TamperedCountIsInvariantViolation) {
  const auto text = serialize(sample(500));
  const auto bad = replace_line(text, 1, "copsum 1 epsilon=0.05 n=501 L=" + std::to_string(sample(500).L()));
  EXPECT_THROW(deserialize(bad), copsum::invariant_error);

  // A g field that no longer adds up.
  std::string g_bad = text;
  const auto pos = g_bad.find("SUB 1 ");
  const auto line_end = g_bad.find('\n', g_bad.find('\n', pos) + 1);
  const auto tuple_start = g_bad.find('\n', pos) + 1;
  g_bad.replace(tuple_start, line_end - tuple_start, "-99 7 0");
  EXPECT_THROW(deserialize(g_bad), copsum::invariant_error);
}

TEST(CopulaIo, UnsortedTuplesAreInvariantViolation) {
  const std::string text = "copsum 1 epsilon=0.1 n=2 L=2\nS1 2\n3 1 0\n0.1 1 0\nSUB 1 1\n1 1 0\nSUB 2 1\n2 1 0\n";
  try {
    deserialize(text);
    FAIL() << "expected invariant_error";
  } catch (const copsum::invariant_error& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CopulaIo, VersionAndHeaderErrors) {
  const auto text = serialize(sample(50));
  EXPECT_THROW(deserialize(replace_line(text, 1, "copsum 2 epsilon=0.05 n=50 L=3")), copsum::format_error);
  EXPECT_THROW(deserialize(replace_line(text, 1, "copula 1 epsilon=0.05 n=50 L=3")), copsum::format_error);
  EXPECT_THROW(deserialize(replace_line(text, 1, "copsum 1 epsilon=0.7 n=50 L=3")), copsum::format_error);
  EXPECT_THROW(deserialize(replace_line(text, 1, "copsum 1 epsilon=abc n=50 L=3")), copsum::format_error);
  EXPECT_THROW(deserialize(""), copsum::format_error);
}

TEST(CopulaIo, MalformedBodyNamesTheLine) {
  const auto text = serialize(sample(50));
  try {
    deserialize(replace_line(text, 3, "1.0 x 0"));
    FAIL() << "expected format_error";
  } catch (const copsum::invariant_error&) {
    FAIL() << "malformed text must not be reported as an invariant violation";
  } catch (const copsum::format_error& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(deserialize(text.substr(0, text.size() - 8)), copsum::format_error);
  EXPECT_THROW(deserialize(text + "extra\n"), copsum::format_error);
  EXPECT_THROW(deserialize(replace_line(text, 3, "nan 1 0")), copsum::format_error);
}

TEST(CopulaIo, ContinueAfterReloadMatchesUninterrupted) {
  const auto pts = copsum::testing::make_pairs(1000, -0.3, 12);
  for (double eps : {0.01, 0.05, 0.1}) {
    for (std::size_t cut : {0u, 1u, 250u, 500u, 999u, 1000u}) {
      CopulaSummary whole(eps);
      CopulaSummary first(eps);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        whole.insert(pts[k].first, pts[k].second);
        if (k < cut) first.insert(pts[k].first, pts[k].second);
      }
      auto resumed = deserialize(serialize(first));
      for (std::size_t k = cut; k < pts.size(); ++k) resumed.insert(pts[k].first, pts[k].second);
      ASSERT_EQ(resumed, whole) << "eps=" << eps << " cut=" << cut;
    }
  }
}

}  // namespace
