#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ompath {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition: wrong dimension, bad parameter, malformed input.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Floating-point failure: singular diffusion, non-finite values, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double determinant)
      : NumericalError(what), determinant_(determinant) {}

  double determinant() const noexcept { return determinant_; }

 private:
  double determinant_;
};

class SimulationDivergedError : public NumericalError {
 public:
  SimulationDivergedError(std::size_t step, std::optional<std::size_t> sample)
      : NumericalError(message(step, sample)), step_(step), sample_(sample) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> sample() const noexcept { return sample_; }

 private:
  static std::string message(std::size_t step, std::optional<std::size_t> sample) {
    std::string m = "simulation diverged at step " + std::to_string(step);
    if (sample) m += " of sample " + std::to_string(*sample);
    return m;
  }

  std::size_t step_;
  std::optional<std::size_t> sample_;
};

/// An iterative solver gave up. Optimizers report this through their result
/// instead; the boundary value solvers throw it.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ompath
