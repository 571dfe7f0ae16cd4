#pragma once

// copsum command-line front end. run() is callable in-process so tests can
// drive it with their own streams.
//
// Exit codes: 0 ok, 1 usage, 2 I/O or malformed input, 3 invariant violation
// in a loaded checkpoint.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "copsum/copsum.hpp"

namespace copsum::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_io = 2;
inline constexpr int exit_invariant = 3;

class io_error : public error {
 public:
  using error::error;
};

class usage_error : public error {
 public:
  using error::error;
};

/// Shortest round-trip text, with ".0" appended to integral values so every
/// real column reads as a real.
inline std::string real_text(double x) {
  std::string s = format_real(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV row into at most `max` trimmed fields; returns the field count
// (which may exceed `max`, signalling extra columns).
inline std::size_t split_row(std::string_view line, std::string_view* fields, std::size_t max) {
  std::size_t count = 0;
  while (true) {
    const auto comma = line.find(',');
    if (count < max) fields[count] = trim(line.substr(0, comma));
    ++count;
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return count;
}

/// Output sink that is either stdout or a file opened for writing.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) {
    if (path == "-") {
      os_ = &out;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw io_error("cannot open '" + path + "' for writing");
      os_ = &file_;
    }
  }

  std::ostream& stream() { return *os_; }

  void finish(const std::string& path) {
    os_->flush();
    if (!*os_) throw io_error("write to '" + path + "' failed");
  }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

inline CopulaSummary load_summary(const std::string& path, CombineSchedule schedule = CombineSchedule::periodic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint '" + path + "'");
  return read_summary(in, schedule);
}

// Writes next to the target and renames, so a crash never leaves a torn checkpoint.
inline void save_summary(const std::string& path, const CopulaSummary& cs) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp + "' for writing");
    write_summary(out, cs);
    out.flush();
    if (!out) throw io_error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot replace '" + path + "': " + ec.message());
}

inline std::vector<double> unit_grid(std::size_t k) {
  std::vector<double> g;
  for (std::size_t i = 1; i <= k; ++i) g.push_back(static_cast<double>(i) / static_cast<double>(k));
  return g;
}

// k evenly spaced points from 0.05 to 0.95.
inline std::vector<double> interior_grid(std::size_t k) {
  if (k == 1) return {0.5};
  std::vector<double> g;
  for (std::size_t i = 0; i < k; ++i) g.push_back(0.05 + 0.9 * static_cast<double>(i) / static_cast<double>(k - 1));
  return g;
}

inline std::string pseudo_table_path(const std::string& out) {
  constexpr std::string_view ext = ".csv";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
    return out.substr(0, out.size() - ext.size()) + "_pseudo.csv";
  return out + "_pseudo.csv";
}

}  // namespace detail

/// Feeds every "x1,x2" row of `in` into `cs`. A first line that does not
/// parse as numbers is taken as a header; blank lines are skipped. Returns the
/// number of rows ingested. Throws format_error with the 1-based line number.
inline count_t ingest_stream(std::istream& in, CopulaSummary& cs) {
  std::string line;
  std::size_t lineno = 0;
  count_t rows = 0;
  std::string_view fields[2];
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const std::size_t nf = detail::split_row(body, fields, 2);
    double x1 = 0.0;
    double x2 = 0.0;
    const bool numeric = nf == 2 && parse_real(fields[0], x1) && parse_real(fields[1], x2);
    if (!numeric) {
      if (lineno == 1 && rows == 0) continue;
      throw format_error(nf == 2 ? "expected two numbers" : "expected 2 columns, found " + std::to_string(nf), lineno);
    }
    if (!std::isfinite(x1) || !std::isfinite(x2)) throw format_error("non-finite value", lineno);
    cs.insert(x1, x2);
    ++rows;
  }
  if (in.bad()) throw io_error("read error");
  return rows;
}

namespace detail {

struct GenArgs {
  count_t n = 0;
  std::uint64_t seed = 0;
  double rho = 0.0;
  std::optional<double> rho12, rho23, rho13;
  std::string out;
};

inline void cmd_gen(const GenArgs& a, std::ostream& out) {
  Sink sink(a.out, out);
  auto& os = sink.stream();
  if (a.rho12 || a.rho23 || a.rho13) {
    const streamgen::TriStreamConfig cfg{a.n, a.seed, a.rho12.value_or(0.0), a.rho23.value_or(0.0),
                                         a.rho13.value_or(0.0)};
    os << "x1,x2,x3\n";
    for (const auto& [x1, x2, x3] : streamgen::gaussian_tri_stream(cfg))
      os << real_text(x1) << ',' << real_text(x2) << ',' << real_text(x3) << '\n';
  } else {
    const streamgen::StreamConfig cfg{a.n, a.seed, a.rho};
    os << "x1,x2\n";
    for (const auto& [x1, x2] : streamgen::gaussian_pair_stream(cfg)) os << real_text(x1) << ',' << real_text(x2) << '\n';
  }
  sink.finish(a.out);
}

struct IngestArgs {
  std::optional<double> epsilon;
  std::string in;
  std::string checkpoint;
  bool every_insert = false;
  bool resume = false;
};

inline void cmd_ingest(const IngestArgs& a, std::istream& stdin_stream, std::ostream& err) {
  const auto schedule = a.every_insert ? CombineSchedule::every_insert : CombineSchedule::periodic;
  std::optional<CopulaSummary> cs;
  if (a.resume && std::filesystem::exists(a.checkpoint)) {
    cs.emplace(load_summary(a.checkpoint, schedule));
    if (a.epsilon && *a.epsilon != cs->epsilon())
      throw usage_error("--epsilon " + real_text(*a.epsilon) + " differs from checkpoint epsilon " +
                        real_text(cs->epsilon()));
  } else {
    if (!a.epsilon) throw usage_error("--epsilon is required unless resuming from an existing checkpoint");
    if (!(*a.epsilon > 0.0 && *a.epsilon < 0.5)) throw usage_error("--epsilon must lie in (0, 0.5)");
    cs.emplace(*a.epsilon, schedule);
  }
  count_t rows = 0;
  if (a.in == "-") {
    rows = ingest_stream(stdin_stream, *cs);
  } else {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw io_error("cannot open input '" + a.in + "'");
    rows = ingest_stream(in, *cs);
  }
  save_summary(a.checkpoint, *cs);
  err << "ingested " << rows << " rows; n=" << cs->n() << " L=" << cs->L()
      << " tuples=" << cs->size_report().total_tuples << '\n';
}

struct QueryArgs {
  std::string summary;
  std::optional<double> u1, u2;
  std::size_t grid = 0;
};

inline void cmd_query(const QueryArgs& a, std::ostream& out) {
  if (a.grid == 0 && (!a.u1 || !a.u2)) throw usage_error("query needs --u1 and --u2, or --grid K");
  for (auto u : {a.u1, a.u2})
    if (u && !(*u >= 0.0 && *u <= 1.0)) throw usage_error("--u1 and --u2 must lie in [0, 1]");
  const CopulaSummary cs = load_summary(a.summary);
  if (cs.empty()) throw io_error("checkpoint holds no data");
  const CopulaView view(cs);
  out << "u1,u2,value,n_hat1,E,bound\n";
  auto row = [&](double u1, double u2) {
    const auto r = view.query(u1, u2);
    out << real_text(u1) << ',' << real_text(u2) << ',' << real_text(r.value) << ',' << r.n_hat1 << ',' << r.E << ','
        << real_text(r.error_bound) << '\n';
  };
  if (a.grid > 0) {
    const auto g = unit_grid(a.grid);
    for (double u1 : g)
      for (double u2 : g) row(u1, u2);
  } else {
    row(*a.u1, *a.u2);
  }
}

struct BenchmarkArgs {
  double epsilon = 0.05;
  double rho = -0.8;
  count_t n = 0;
  std::uint64_t seed = 1;
  count_t stride = 100;
  bool with_oracle = false;
  count_t oracle_cap = 500'000;
  bool every_insert = false;
  std::string prefix;
};

inline void cmd_benchmark(const BenchmarkArgs& a, std::ostream& err) {
  if (!(a.epsilon > 0.0 && a.epsilon < 0.5)) throw usage_error("--epsilon must lie in (0, 0.5)");
  if (a.stride == 0) throw usage_error("--stride must be positive");
  bool oracle_on = a.with_oracle;
  if (oracle_on && a.n > a.oracle_cap) {
    err << "warning: n=" << a.n << " exceeds the oracle cap " << a.oracle_cap << "; error trace disabled\n";
    oracle_on = false;
  }
  CopulaSummary cs(a.epsilon, a.every_insert ? CombineSchedule::every_insert : CombineSchedule::periodic);
  std::unique_ptr<oracle::DataBuffer> exact;
  if (oracle_on) exact = std::make_unique<oracle::DataBuffer>(2, static_cast<std::size_t>(a.n));

  Sink size_out(a.prefix + "_size.csv", std::cout);
  Sink time_out(a.prefix + "_time.csv", std::cout);
  std::optional<Sink> error_out;
  if (oracle_on) error_out.emplace(a.prefix + "_error.csv", std::cout);
  size_out.stream() << "n,tuples,bytes\n";
  time_out.stream() << "n,seconds\n";
  if (error_out) error_out->stream() << "n,abs_error,bound\n";

  constexpr double probe = 0.7;
  double worst = 0.0;
  double total_seconds = 0.0;
  count_t i = 0;
  auto clock_start = std::chrono::steady_clock::now();
  for (const auto& [x1, x2] : streamgen::gaussian_pair_stream({a.n, a.seed, a.rho})) {
    cs.insert(x1, x2);
    if (exact) exact->push_back(x1, x2);
    ++i;
    if (i % a.stride != 0 && i != a.n) continue;
    const auto now = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(now - clock_start).count();
    total_seconds += seconds;
    const auto rep = cs.size_report();
    size_out.stream() << i << ',' << rep.total_tuples << ',' << rep.bytes << '\n';
    time_out.stream() << i << ',' << real_text(seconds) << '\n';
    if (error_out) {
      const double e = std::abs(cs.query(probe, probe).value - oracle::empirical_copula(*exact, probe, probe));
      worst = std::max(worst, e);
      error_out->stream() << i << ',' << real_text(e) << ',' << real_text(5.0 * a.epsilon) << '\n';
    }
    clock_start = std::chrono::steady_clock::now();
  }
  size_out.finish(a.prefix + "_size.csv");
  time_out.finish(a.prefix + "_time.csv");
  if (error_out) error_out->finish(a.prefix + "_error.csv");
  err << "n=" << a.n << " tuples=" << cs.size_report().total_tuples << " insert_seconds=" << total_seconds;
  if (a.n > 0) err << " per_insert_us=" << 1e6 * total_seconds / static_cast<double>(a.n);
  if (oracle_on) err << " max_error=" << worst;
  err << '\n';
}

struct VineDemoArgs {
  double epsilon = 0.05;
  count_t n = 0;
  std::size_t n_query = 1000;
  std::size_t grid_m = 100;
  double u2 = 0.1;
  std::size_t grid = 11;
  std::uint64_t seed = 1;
  double rho12 = 0.5, rho23 = 0.5, rho13 = 0.0;
  std::string out;
  std::string pseudo_out;
};

inline void cmd_vine_demo(const VineDemoArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.u2 > 0.0 && a.u2 <= 1.0)) throw usage_error("--u2 must lie in (0, 1]");
  if (a.n == 0) throw usage_error("--n must be positive");
  if (a.grid == 0) throw usage_error("--grid must be positive");
  const VineSpec spec{3, a.n_query, a.grid_m, a.epsilon};
  try {
    spec.validate();
    require_epsilon(a.epsilon);
  } catch (const error& e) {
    throw usage_error(e.what());
  }
  SummaryVine approx(spec);
  ExactVine exact(spec);
  for (const auto& x : streamgen::gaussian_tri_stream({a.n, a.seed, a.rho12, a.rho23, a.rho13})) {
    approx.insert(x);
    exact.insert(x);
  }
  approx.build();
  exact.build();

  Sink grid_out(a.out, out);
  auto& os = grid_out.stream();
  os << "u1,u2,u3,summary,exact,abs_diff\n";
  double worst = 0.0;
  const auto g = interior_grid(a.grid);
  for (double u1 : g) {
    for (double u3 : g) {
      const double u[3] = {u1, a.u2, u3};
      const double s = approx.evaluate(u);
      const double e = exact.evaluate(u);
      worst = std::max(worst, std::abs(s - e));
      os << real_text(u1) << ',' << real_text(a.u2) << ',' << real_text(u3) << ',' << real_text(s) << ','
         << real_text(e) << ',' << real_text(std::abs(s - e)) << '\n';
    }
  }
  grid_out.finish(a.out);

  const std::string table = a.pseudo_out.empty() ? pseudo_table_path(a.out == "-" ? "vine" : a.out) : a.pseudo_out;
  Sink pseudo(table, out);
  auto& ps = pseudo.stream();
  ps << "k,u1_given_2_summary,u1_given_2_exact,u1_given_2_error,u3_given_2_summary,u3_given_2_exact,u3_given_2_error\n";
  const auto [s12, s32] = std::pair{approx.edge(1, 1).forward, approx.edge(2, 1).backward};
  const auto [e12, e32] = std::pair{exact.edge(1, 1).forward, exact.edge(2, 1).backward};
  double worst_pseudo = 0.0;
  for (std::size_t k = 0; k < s12.size(); ++k) {
    const double d12 = std::abs(s12[k] - e12[k]);
    const double d32 = std::abs(s32[k] - e32[k]);
    worst_pseudo = std::max({worst_pseudo, d12, d32});
    ps << (k + 1) << ',' << real_text(s12[k]) << ',' << real_text(e12[k]) << ',' << real_text(d12) << ','
       << real_text(s32[k]) << ',' << real_text(e32[k]) << ',' << real_text(d32) << '\n';
  }
  pseudo.finish(table);
  err << "vine-demo: max |summary - exact| = " << worst << " over the grid; max pseudo-observation error = "
      << worst_pseudo << " (table: " << table << ")\n";
}

inline void cmd_dump(const std::string& path, std::ostream& out) {
  const CopulaSummary cs = load_summary(path);
  const auto rep = cs.size_report();
  out << "epsilon,n,L,total_tuples,bytes\n"
      << real_text(cs.epsilon()) << ',' << cs.n() << ',' << cs.L() << ',' << rep.total_tuples << ',' << rep.bytes
      << "\n\n";
  out << "i,v,g,delta,r_min,r_max,sub_tuples,sub_count\n";
  count_t r_min = 0;
  const auto tuples = cs.s1().tuples();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    r_min += tuples[i].g;
    out << (i + 1) << ',' << real_text(tuples[i].value) << ',' << tuples[i].g << ',' << tuples[i].delta << ','
        << r_min << ',' << (r_min + tuples[i].delta) << ',' << cs.subs()[i].size() << ',' << cs.subs()[i].count()
        << '\n';
  }
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t len : rep.sub_lengths) ++hist[len];
  out << "\nsub_tuples,frequency\n";
  for (const auto& [len, freq] : hist) out << len << ',' << freq << '\n';
}

}  // namespace detail

/// Parses `args` (program name excluded) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               std::istream& in = std::cin) {
  CLI::App app{"Streaming empirical-copula summaries: generate, ingest, query, benchmark."};
  app.name("copsum");
  app.require_subcommand(1);

  detail::GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a seeded Gaussian stream as CSV (x1,x2 or x1,x2,x3).");
  g->add_option("--n", gen.n, "Number of rows")->required();
  g->add_option("--seed", gen.seed, "64-bit seed")->capture_default_str();
  g->add_option("--rho", gen.rho, "Correlation of the bivariate stream")->capture_default_str();
  g->add_option("--rho12", gen.rho12, "Trivariate stream: corr(x1, x2)");
  g->add_option("--rho23", gen.rho23, "Trivariate stream: corr(x2, x3)");
  g->add_option("--rho13", gen.rho13, "Trivariate stream: corr(x1, x3)");
  g->add_option("--out", gen.out, "Output file, or - for stdout")->required();

  detail::IngestArgs ing;
  auto* i = app.add_subcommand("ingest", "Stream x1,x2 rows into a copula summary checkpoint.");
  i->add_option("--epsilon", ing.epsilon, "Approximation parameter in (0, 0.5)");
  i->add_option("--in", ing.in, "Input CSV, or - for stdin")->required();
  i->add_option("--checkpoint", ing.checkpoint, "Checkpoint file to write")->required();
  i->add_flag("--compress-every-insert", ing.every_insert, "Run the combine pass after every insert");
  i->add_flag("--resume", ing.resume, "Continue from the checkpoint if it exists");

  detail::QueryArgs qry;
  auto* q = app.add_subcommand("query", "Evaluate the copula summary; prints u1,u2,value,n_hat1,E,bound.");
  q->add_option("--summary", qry.summary, "Checkpoint file")->required();
  q->add_option("--u1", qry.u1, "First coordinate in [0, 1]");
  q->add_option("--u2", qry.u2, "Second coordinate in [0, 1]");
  q->add_option("--grid", qry.grid, "Evaluate on the K x K grid {1/K, ..., 1}^2 instead");

  detail::BenchmarkArgs bm;
  auto* b = app.add_subcommand("benchmark", "Trace size, error and insert time every --stride elements.");
  b->add_option("--epsilon", bm.epsilon, "Approximation parameter")->capture_default_str();
  b->add_option("--rho", bm.rho, "Correlation of the Gaussian stream")->capture_default_str();
  b->add_option("--n", bm.n, "Stream length")->required();
  b->add_option("--seed", bm.seed, "64-bit seed")->capture_default_str();
  b->add_option("--stride", bm.stride, "Elements between trace rows")->capture_default_str();
  b->add_flag("--with-oracle", bm.with_oracle, "Also trace |C_S(0.7,0.7) - C(0.7,0.7)| against exact data");
  b->add_option("--oracle-cap", bm.oracle_cap, "Largest n for which the oracle trace runs")->capture_default_str();
  b->add_flag("--compress-every-insert", bm.every_insert, "Run the combine pass after every insert");
  b->add_option("--out-prefix", bm.prefix, "Writes <P>_size.csv, <P>_time.csv and <P>_error.csv")->required();

  detail::VineDemoArgs vd;
  auto* v = app.add_subcommand("vine-demo", "Trivariate D-vine: summary vs exact surface over a (u1,u3) grid.");
  v->add_option("--epsilon", vd.epsilon, "Approximation parameter")->capture_default_str();
  v->add_option("--n", vd.n, "Stream length")->required();
  v->add_option("--n-query", vd.n_query, "Trailing points used for conditional copulas")->capture_default_str();
  v->add_option("--grid-m", vd.grid_m, "Trapezoid panels per h-function")->capture_default_str();
  v->add_option("--u2", vd.u2, "Fixed value of u2")->required();
  v->add_option("--grid", vd.grid, "Points per axis, spaced evenly over [0.05, 0.95]")->capture_default_str();
  v->add_option("--seed", vd.seed, "64-bit seed")->capture_default_str();
  v->add_option("--rho12", vd.rho12, "corr(x1, x2)")->capture_default_str();
  v->add_option("--rho23", vd.rho23, "corr(x2, x3)")->capture_default_str();
  v->add_option("--rho13", vd.rho13, "corr(x1, x3)")->capture_default_str();
  v->add_option("--out", vd.out, "Grid CSV, or - for stdout")->required();
  v->add_option("--pseudo-out", vd.pseudo_out, "Pseudo-observation table (default: <out stem>_pseudo.csv)");

  std::string dump_path;
  auto* d = app.add_subcommand("dump", "List S1 tuples with subsummary sizes, and the length histogram.");
  d->add_option("--summary", dump_path, "Checkpoint file")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*g) {
      detail::cmd_gen(gen, out);
    } else if (*i) {
      detail::cmd_ingest(ing, in, err);
    } else if (*q) {
      detail::cmd_query(qry, out);
    } else if (*b) {
      detail::cmd_benchmark(bm, err);
    } else if (*v) {
      detail::cmd_vine_demo(vd, out, err);
    } else if (*d) {
      detail::cmd_dump(dump_path, out);
    }
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const input_domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const invariant_error& e) {
    err << "invariant violation: " << e.what() << '\n';
    return exit_invariant;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  }
  return exit_ok;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args);
}

}  // namespace copsum::cli
