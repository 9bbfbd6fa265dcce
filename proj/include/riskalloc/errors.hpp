#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskalloc {

// A quantity is undefined or infinite for the given inputs (e.g. an
// integral diverges, a quantile level is outside (0,1]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An operation was called with inputs that violate its documented contract.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constructed object (allocation, candidate function, ...) fails its
// invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. `row` is 1-based and counts the header line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Malformed problem/kernel/distribution spec. `path` names the offending
// field, e.g. "agents[1].kernel.alpha".
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace riskalloc
