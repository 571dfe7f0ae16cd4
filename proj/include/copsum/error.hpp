#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace copsum {

/// Base class of every error thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside the domain of an operation (NaN, infinity, u outside [0,1]).
class input_domain_error : public error {
 public:
  using error::error;
};

/// A query against a summary or buffer that holds no elements.
class empty_query_error : public error {
 public:
  using error::error;
};

/// Inconsistent parameters, e.g. merging summaries built with different epsilons.
class config_error : public error {
 public:
  using error::error;
};

class index_error : public error {
 public:
  using error::error;
};

/// An operation was called on an object that is not in the required state.
class state_error : public error {
 public:
  using error::error;
};

class insufficient_data_error : public error {
 public:
  using error::error;
};

/// Malformed persisted data. `line()` is 1-based; 0 means "not tied to a line".
class format_error : public error {
 public:
  format_error(const std::string& what, std::size_t line)
      : error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Persisted data parsed cleanly but violates a structural invariant of the summary.
class invariant_error : public format_error {
 public:
  using format_error::format_error;
};

}  // namespace copsum
