#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jrmpc {

/// Caller passed inconsistent shapes or broke a precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter lies outside its mathematical domain (e.g. a nonpositive variance).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for failures of the numerical pipeline; the CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientConstraint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Diverged : public NumericalError {
 public:
  Diverged(std::size_t iteration, const std::string& what)
      : NumericalError(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class EmptyModel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace jrmpc
