#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uhm {

/// Raised when a caller passes parameters outside an operation's domain.
class invalid_argument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for well-formed input whose values violate a data invariant.
class invalid_data : public std::runtime_error {
public:
  invalid_data(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Raised when a text input cannot be parsed.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Raised when a dense materialization would exceed the configured element cap.
class capacity_error : public std::length_error {
public:
  using std::length_error::length_error;
};

class index_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

} // namespace uhm
