#pragma once

#include <stdexcept>
#include <string>

namespace selfdiff {

/// A jump direction that wraps onto the origin or exceeds the grid reach.
class InvalidDirection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exchange requested between a site and the tagged particle (y + v = 0).
class ExcludedPair : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs whose sizes do not agree (grid vs. function, term lengths, ...).
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration or brute force requested beyond its hard cap.
class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite intermediate or breakdown in a numerical kernel.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The one-site ALS system is not positive definite; carries both eigenvalues.
class IndefiniteSystem : public NumericalError {
 public:
  IndefiniteSystem(double eig_min, double eig_max)
      : NumericalError("indefinite 2x2 system: eigenvalues " + std::to_string(eig_min) + ", " +
                       std::to_string(eig_max)),
        eig_min_(eig_min),
        eig_max_(eig_max) {}

  double eig_min() const noexcept { return eig_min_; }
  double eig_max() const noexcept { return eig_max_; }

 private:
  double eig_min_;
  double eig_max_;
};

/// Malformed configuration text. `line()` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace selfdiff
