#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factkb {

// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line. `line()` is 1-based; 0 when the line is unknown.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SynthesisError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

// A metric that is mathematically undefined for its input, e.g. balanced
// accuracy with single-class gold labels or correlation with zero variance.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace factkb
