#pragma once

#include <stdexcept>
#include <string>

namespace rzq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent sizes, mismatched grids, unusable run parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition was violated (epsilon out of range, bad index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The input makes the requested quantity meaningless (zero field, zero denominator).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A frequency is not resolved on the grid after dealiasing.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// The large-box stand-in for the real line leaked mass into the outer band.
class SurrogateInvalidError : public Error {
 public:
  explicit SurrogateInvalidError(const std::string& what, double tail)
      : Error(what), tail_(tail) {}
  double tail() const noexcept { return tail_; }

 private:
  double tail_;
};

/// The time step exceeds the transport stability ceiling.
class StabilityError : public ConfigError {
 public:
  StabilityError(const std::string& what, double dt, double ceiling)
      : ConfigError(what), dt_(dt), ceiling_(ceiling) {}
  double dt() const noexcept { return dt_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  double dt_;
  double ceiling_;
};

/// A non-finite value appeared in the state during a time step.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace rzq
