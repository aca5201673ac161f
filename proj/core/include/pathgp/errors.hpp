#pragma once

#include <stdexcept>
#include <string>

namespace pathgp {

/// Base class for all errors raised by the library.
class GpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that should be symmetric positive semi-definite failed to factor
/// even after the diagonal jitter ladder was exhausted.
class NotPsdError : public GpError {
 public:
  using GpError::GpError;
};

/// A matrix expected to be symmetric deviates from its transpose by more than
/// the tolerance.
class NotSymmetricError : public GpError {
 public:
  using GpError::GpError;
};

/// The normalized graph Laplacian is undefined because some node has degree
/// zero.
class IsolatedNodeError : public GpError {
 public:
  using GpError::GpError;
};

/// The random-walk coefficient alpha = 1 - kappa^2 / (2s) left (0, 1).
class AlphaOutOfRangeError : public GpError {
 public:
  using GpError::GpError;
};

/// A point does not satisfy the manifold constraint (e.g. not unit norm for
/// the sphere).
class NotOnManifoldError : public GpError {
 public:
  using GpError::GpError;
};

/// The latitude-longitude tangent frame is singular at the requested point.
class FramePoleError : public GpError {
 public:
  using GpError::GpError;
};

/// An edge list entry is malformed, a self-loop, or has a non-positive weight.
class InvalidEdgeError : public GpError {
 public:
  using GpError::GpError;
};

/// A log marginal likelihood or gradient evaluated to a non-finite value.
class NonFiniteError : public GpError {
 public:
  using GpError::GpError;
};

/// An experiment configuration is invalid: unknown key, bad value, or a
/// missing required entry.  CLI maps this to exit code 2.
class ConfigError : public GpError {
 public:
  using GpError::GpError;
};

/// An input file (edge list, dataset, config) is syntactically malformed;
/// the message carries the line number.
class ParseError : public GpError {
 public:
  using GpError::GpError;
};

/// A file could not be opened, read, or written.
class IoError : public GpError {
 public:
  using GpError::GpError;
};

}  // namespace pathgp
