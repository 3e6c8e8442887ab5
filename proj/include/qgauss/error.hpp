#pragma once

#include <stdexcept>
#include <string>

namespace qgauss {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (q out of range,
/// time outside the covariance domain, x outside the support, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A size cap or guardrail was exceeded (permutation enumeration, Fock basis
/// size, truncation degree).
class CapacityError : public Error {
public:
  using Error::Error;
};

/// A marginal variance c(t,t) vanished where a kernel needs to divide by it.
class DegenerateMarginalError : public Error {
public:
  using Error::Error;
};

/// A matrix that was supposed to be a covariance Gram matrix is not positive
/// semidefinite.
class NotCovarianceError : public Error {
public:
  using Error::Error;
};

/// A covariance fails the Markov identity where a Markov process is required.
class NotMarkovError : public Error {
public:
  using Error::Error;
};

}  // namespace qgauss
