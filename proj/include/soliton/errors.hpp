#pragma once

#include <stdexcept>
#include <string>

namespace soliton {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H-representation has no bounded full-dimensional solution set.
class EmptyOrUnboundedError : public Error {
 public:
  using Error::Error;
};

/// Polytope flagged canonical violates the offset-one / interior-origin form.
class NotCanonicalError : public Error {
 public:
  using Error::Error;
};

/// Vertex set does not affinely span the ambient dimension.
class DegeneratePolytopeError : public Error {
 public:
  using Error::Error;
};

/// Point lies outside the open domain of a weight or functional.
class DomainViolationError : public Error {
 public:
  using Error::Error;
};

/// An integral could not be computed to the requested tolerance.
class IntegrationFailureError : public Error {
 public:
  using Error::Error;
};

/// A named solver failed to meet its residual contract.
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

/// Valuation data (u, c, A) is inconsistent with the polytope.
class InvalidValuationDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace soliton
