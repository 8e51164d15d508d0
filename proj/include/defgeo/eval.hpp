#pragma once

#include <cstdint>
#include <span>

#include "defgeo/limits.hpp"
#include "defgeo/relation.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

// Instrumentation for cost checks: solution_set counts each enumerated
// assignment exactly once.
struct EvalStats {
  std::uint64_t assignments = 0;
};

// Value of a term under an assignment; assignment[i] holds x_{i+1}.
Elem eval_term(const Term& t, std::span<const Elem> assignment, const Structure& a);

// Tarskian satisfaction; quantifiers range over the finite universe by
// exhaustive iteration in element order 0..k-1, with existential/universal
// short-circuiting.
bool satisfies(const Formula& phi, std::span<const Elem> assignment, const Structure& a);

// The n-ary relation of all satisfying assignments, computed by enumerating
// all k^n assignments.  Requires free_vars(phi) within {x1..xn} and n >= 1;
// n may exceed the largest free variable, which pads (cylindrifies) the
// solution set.  Throws ResourceError if n exceeds the configured arity cap.
Relation solution_set(const Formula& phi, int arity, const Structure& a,
                      const Limits& limits = Limits::defaults(), EvalStats* stats = nullptr);

}  // namespace defgeo
