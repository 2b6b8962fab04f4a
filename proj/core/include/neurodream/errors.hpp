#pragma once

#include <stdexcept>
#include <string>

namespace neurodream {

// Bad configuration or a violated precondition on user-supplied input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Efficacy calibration could not reach the target integration-factor band.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, double achieved_factor)
      : std::runtime_error(what), achieved_factor_(achieved_factor) {}
  double achieved_factor() const { return achieved_factor_; }

 private:
  double achieved_factor_;
};

// A non-finite value appeared in a gradient, loss, or readout.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace neurodream
