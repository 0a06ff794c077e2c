#pragma once

#include <stdexcept>
#include <string>

namespace d4gr {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed TaskNet / trace / config document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A document parsed but violates a structural invariant. The message names it.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Lookup of a goal, primitive, variable, session or domain that does not exist.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

/// Belief reached a state with no candidate explanation for the evidence.
class RecognitionError : public Error {
 public:
  using Error::Error;
};

/// A distribution the planner must sample from has no support.
class DegenerateBeliefError : public Error {
 public:
  using Error::Error;
};

/// The simulated human has no executable step left.
class DeadEndError : public Error {
 public:
  using Error::Error;
};

/// Session protocol misuse (question not pending, turn in flight, closed session).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace d4gr
