#pragma once

#include <stdexcept>
#include <string>

namespace minlqg {

/// Base class of every exception thrown by minlqg.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A covariance or weight matrix with eigenvalues below the PSD tolerance.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// The plant dynamics have spectral radius >= 1.
class UnstablePlantError : public Error {
 public:
  using Error::Error;
};

/// Failure of an iterative numerical routine (eigensolver, Stein solve,
/// divergence of a simulated trajectory, indefinite control curvature).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A cost guarantee below the minimum achievable cost rate.
class InfeasibleCostError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument combinations (bad tolerance, unknown variable label...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace minlqg
