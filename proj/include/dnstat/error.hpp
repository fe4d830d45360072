#pragma once

#include <stdexcept>
#include <string>

namespace dnstat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// x(m) >= y(m), or a negative lower index.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Zero (or negative) convolution normalizer; means and densities refuse to divide.
class DegenerateNormalizer : public Error {
 public:
  using Error::Error;
};

/// Probability law violates its invariants at some index.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (y outside [0,1], r < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or run parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dnstat
