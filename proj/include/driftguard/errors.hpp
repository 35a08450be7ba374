#pragma once

#include <stdexcept>
#include <string>

namespace driftguard {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched vector lengths / action counts.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Non-finite or otherwise unusable numeric input.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

// Not enough samples/episodes for the requested statistic.
class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& what) : Error(what) {}
};

// Invalid ids, modes, or configuration values.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// Mitigation rate is undefined when clean == poisoned.
class DegenerateBaselineError : public Error {
public:
  explicit DegenerateBaselineError(const std::string& what) : Error(what) {}
};

// Malformed persisted file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Persisted file has an unsupported format version.
class VersionError : public Error {
public:
  explicit VersionError(const std::string& what) : Error(what) {}
};

}  // namespace driftguard
