#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "copsum/error.hpp"

namespace copsum {

using count_t = std::uint64_t;

/// Rank of level u among n items: the smallest r with fl(r / n) >= u.
///
/// Comparing against the correctly rounded fraction r / n rather than the
/// exact binary product u * n makes a level written as k / n map to rank k,
/// so decimal levels such as 0.1 or 0.07 never pick up a spurious extra rank
/// from representation error. Monotone in u; u is expected in [0, 1].
inline count_t ceil_rank(double u, count_t n) {
  if (!(u > 0.0) || n == 0) return 0;
  const double nd = static_cast<double>(n);
  const auto reaches = [&](count_t r) { return static_cast<double>(r) / nd >= u; };
  const double c = std::ceil(u * nd);
  count_t r = c >= nd ? n : static_cast<count_t>(c);
  while (r > 0 && reaches(r - 1)) --r;
  while (r < n && !reaches(r)) ++r;
  return r;
}

/// Rejects NaN and infinities.
inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw input_domain_error(std::string(what) + " must be finite");
}

/// Rejects anything outside the closed unit interval (NaN included).
inline void require_unit(double u, const char* what) {
  if (!(u >= 0.0 && u <= 1.0)) throw input_domain_error(std::string(what) + " must lie in [0, 1]");
}

inline double clamp_unit(double u) { return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u); }

/// Shortest decimal text that parses back to the identical double.
inline std::string format_real(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw input_domain_error("cannot format value");
  return std::string(buf, end);
}

/// Parses the whole of `text` as a double; returns false on any leftover input.
inline bool parse_real(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline bool parse_count(std::string_view text, count_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && !text.empty();
}

}  // namespace copsum
