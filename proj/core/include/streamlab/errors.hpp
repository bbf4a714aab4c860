#pragma once

#include <stdexcept>
#include <string>

namespace streamlab {

// Bad argument or contradictory configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Markov chain side that is not positive recurrent.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulated behaviour left the analytic model; always a bug.
class ModelViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A random combination lost rank by coefficient coincidence.
class CoincidentalDependence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace streamlab
