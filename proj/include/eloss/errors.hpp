#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eloss {

/// Bad call arguments (k out of range, shape mismatch, ...). CLI exit code 2.
class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data that cannot be processed (non-finite entries, labels out of range).
class InvalidDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Duplicate sample points make a nearest-neighbor distance zero, so the
/// estimator (log r) and its gradient are undefined.
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate analysis input: zero-variance point cloud, constant curve.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error("parse error at line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace eloss
