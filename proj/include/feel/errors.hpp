#pragma once

#include <stdexcept>
#include <string>

namespace feel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidIntervalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// A worker cannot finish its local computation before the round deadline,
/// even at maximum CPU frequency.
class InfeasibleDeadlineError : public Error {
 public:
  using Error::Error;
};

/// The required uplink power exceeds p_max, or the planned energy exceeds
/// the worker's remaining budget.
class InfeasiblePowerError : public Error {
 public:
  using Error::Error;
};

/// No finite bandwidth satisfies the bandwidth closed form at this power.
class InfeasibleBandwidthError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace feel
