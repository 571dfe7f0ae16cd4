#pragma once

// Line-oriented text format for CopulaSummary checkpoints:
//
//   copsum 1 epsilon=<decimal> n=<int> L=<int>
//   S1 <L>
//   <v> <g> <delta>            (L lines)
//   SUB <i> <L_i>              (for i = 1..L, each followed by L_i tuple lines)
//   <w> <g> <delta>
//
// Decimals use the shortest text that round-trips, so a load reproduces every
// double bit for bit.

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "copsum/copula.hpp"
#include "copsum/error.hpp"
#include "copsum/numeric.hpp"

namespace copsum {

inline constexpr int summary_format_version = 1;

namespace detail {

inline void write_tuples(std::ostream& os, const QuantileSummary& s) {
  for (const auto& t : s.tuples()) os << format_real(t.value) << ' ' << t.g << ' ' << t.delta << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::size_t line() const noexcept { return line_; }

  bool next(std::vector<std::string_view>& tokens) {
    if (!std::getline(is_, buf_)) return false;
    ++line_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    tokens.clear();
    std::string_view rest(buf_);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto end = rest.find(' ');
      tokens.push_back(rest.substr(0, end));
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    return true;
  }

  std::vector<std::string_view> expect(const char* what) {
    std::vector<std::string_view> tokens;
    if (!next(tokens)) throw format_error(std::string("unexpected end of input, expected ") + what, line_ + 1);
    return tokens;
  }

 private:
  std::istream& is_;
  std::string buf_;
  std::size_t line_ = 0;
};

inline count_t parse_count_field(std::string_view tok, std::string_view key, std::size_t line) {
  count_t v = 0;
  if (tok.substr(0, key.size()) != key || !parse_count(tok.substr(key.size()), v))
    throw format_error("expected " + std::string(key) + "<int>", line);
  return v;
}

inline QuantileSummary read_tuples(LineReader& in, double epsilon, count_t len, std::size_t section_line) {
  std::vector<GkTuple> tuples;
  tuples.reserve(static_cast<std::size_t>(std::min<count_t>(len, 1u << 16)));
  for (count_t k = 0; k < len; ++k) {
    const auto tok = in.expect("a tuple line");
    GkTuple t{};
    if (tok.size() != 3 || !parse_real(tok[0], t.value) || !parse_count(tok[1], t.g) || !parse_count(tok[2], t.delta))
      throw format_error("expected '<value> <g> <delta>'", in.line());
    if (!std::isfinite(t.value)) throw format_error("non-finite tuple value", in.line());
    tuples.push_back(t);
  }
  auto s = QuantileSummary::adopt(epsilon, std::move(tuples));
  if (auto why = s.structure_error()) throw invariant_error(*why, section_line);
  if (auto why = s.band_error()) throw invariant_error(*why, section_line);
  return s;
}

}  // namespace detail

inline void write_summary(std::ostream& os, const CopulaSummary& cs) {
  os << "copsum " << summary_format_version << " epsilon=" << format_real(cs.epsilon()) << " n=" << cs.n()
     << " L=" << cs.L() << '\n';
  os << "S1 " << cs.L() << '\n';
  detail::write_tuples(os, cs.s1());
  const auto subs = cs.subs();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    os << "SUB " << (i + 1) << ' ' << subs[i].size() << '\n';
    detail::write_tuples(os, subs[i]);
  }
}

/// Parses a checkpoint. Throws format_error for malformed text or an unknown
/// version, and invariant_error when the text parses but describes an
/// inconsistent summary (counts that do not add up, unsorted tuples, ...).
inline CopulaSummary read_summary(std::istream& is, CombineSchedule schedule = CombineSchedule::periodic) {
  detail::LineReader in(is);
  auto head = in.expect("header");
  if (head.size() != 5 || head[0] != "copsum") throw format_error("not a copula summary header", in.line());
  count_t version = 0;
  if (!parse_count(head[1], version)) throw format_error("bad version field", in.line());
  if (version != summary_format_version)
    throw format_error("unsupported format version " + std::string(head[1]), in.line());
  double epsilon = 0.0;
  if (head[2].substr(0, 8) != "epsilon=" || !parse_real(head[2].substr(8), epsilon))
    throw format_error("expected epsilon=<decimal>", in.line());
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw format_error("epsilon must lie in (0, 0.5)", in.line());
  const count_t n = detail::parse_count_field(head[3], "n=", in.line());
  const count_t L = detail::parse_count_field(head[4], "L=", in.line());

  auto s1_head = in.expect("S1 section");
  count_t s1_len = 0;
  if (s1_head.size() != 2 || s1_head[0] != "S1" || !parse_count(s1_head[1], s1_len))
    throw format_error("expected 'S1 <L>'", in.line());
  if (s1_len != L) throw invariant_error("S1 length differs from header L", in.line());
  const std::size_t s1_line = in.line();
  QuantileSummary s1 = detail::read_tuples(in, epsilon, s1_len, s1_line);
  if (s1.count() != n) throw invariant_error("S1 counts sum to " + std::to_string(s1.count()) + ", header says n=" + std::to_string(n), s1_line);

  std::vector<QuantileSummary> subs;
  subs.reserve(static_cast<std::size_t>(std::min<count_t>(L, 1u << 16)));
  count_t total = 0;
  for (count_t i = 1; i <= L; ++i) {
    auto sub_head = in.expect("SUB section");
    count_t index = 0;
    count_t len = 0;
    if (sub_head.size() != 3 || sub_head[0] != "SUB" || !parse_count(sub_head[1], index) ||
        !parse_count(sub_head[2], len))
      throw format_error("expected 'SUB <i> <L_i>'", in.line());
    if (index != i) throw format_error("subsummary index out of sequence", in.line());
    if (len == 0) throw invariant_error("empty subsummary", in.line());
    const std::size_t line = in.line();
    subs.push_back(detail::read_tuples(in, epsilon, len, line));
    total += subs.back().count();
  }
  if (total != n) throw invariant_error("subsummary counts sum to " + std::to_string(total) + ", header says n=" + std::to_string(n), 1);

  std::vector<std::string_view> extra;
  while (in.next(extra))
    if (!extra.empty()) throw format_error("trailing content after last subsummary", in.line());

  return CopulaSummary::from_parts(epsilon, n, std::move(s1), std::move(subs), schedule);
}

inline std::string serialize(const CopulaSummary& cs) {
  std::ostringstream os;
  write_summary(os, cs);
  return os.str();
}

inline CopulaSummary deserialize(std::string_view text, CombineSchedule schedule = CombineSchedule::periodic) {
  std::istringstream is{std::string(text)};
  return read_summary(is, schedule);
}

}  // namespace copsum
