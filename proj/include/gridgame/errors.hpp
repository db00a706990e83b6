#pragma once

#include <stdexcept>
#include <string>

namespace gridgame {

/// Malformed network document (bad JSON, missing or mistyped fields).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is well-formed but breaks a model invariant (cycle, disconnected,
/// non-positive susceptance, duplicate id, bad configuration string, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Injections do not sum to zero, so no flow vector exists on a tree.
class ImbalanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Susceptance drop outside [0, min_e b_e), or another numeric parameter
/// outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive routines refuse networks that are too large to enumerate.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// No configuration reproduces the given target angles.
class NoMatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Markov chain is reducible; its fixed point is not unique.
class SingularChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// margin_exact was asked about a state that is already outside the region.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gridgame
