#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// A wavefunction carries non-negligible probability close to the grid edge.
class GridTooSmall : public Error {
public:
  GridTooSmall(const std::string &what, double leakage)
      : Error(what), leakage_(leakage) {}
  double leakage() const noexcept { return leakage_; }

private:
  double leakage_;
};

class BasisMismatch : public Error {
public:
  using Error::Error;
};

class InsufficientOrder : public Error {
public:
  using Error::Error;
};

class RangeError : public Error {
public:
  using Error::Error;
};

/// Maximum-likelihood fit did not converge. Carries the last iterate
/// (internal standardized parameters) for diagnostics.
class FitError : public Error {
public:
  FitError(const std::string &what, std::vector<double> last_iterate = {})
      : Error(what), last_iterate_(std::move(last_iterate)) {}
  const std::vector<double> &last_iterate() const noexcept { return last_iterate_; }

private:
  std::vector<double> last_iterate_;
};

class SingularFit : public FitError {
public:
  using FitError::FitError;
};

class UnstableFit : public Error {
public:
  using Error::Error;
};

class EstimationFailed : public Error {
public:
  using Error::Error;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public Error {
public:
  ConfigError(const std::string &what, int line = 0, std::string field = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string &field() const noexcept { return field_; }

private:
  int line_;
  std::string field_;
};

} // namespace nlac
