#pragma once

#include <stdexcept>
#include <string>

namespace dtasep {

// Invalid user-supplied parameters (rates, probabilities, densities, sizes).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A point or argument outside the domain of a function (e.g. outside the wedge).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A request that would exceed a configured memory budget.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Root-finding or optimization bracket does not contain the solution.
class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed lattice path.
class PathError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Internal state no longer satisfies a structural invariant.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace dtasep
