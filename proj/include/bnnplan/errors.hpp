#pragma once

#include <stdexcept>
#include <string>

namespace bnnplan {

// Shape/arity violations and contract breaches in inputs.
struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad parameter values (zero gamma, unrepresentable scale, ...).
struct parameter_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance too large for an exhaustive tool; caller should shrink it.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A constraint is contradictory on its own (would require the empty clause).
struct unsat_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File / process / serialization failures.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed manifest, WCNF or solver output.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bnnplan
