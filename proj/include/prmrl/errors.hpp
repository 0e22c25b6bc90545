#pragma once

#include <stdexcept>
#include <string>

namespace prmrl {

/// Map file could not be read or is inconsistent.
class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A start or query point lies in collision.
class CollisionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Rejection sampling gave up (free space too small or disconnected).
class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Roadmap container is malformed, truncated or from another version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace prmrl
