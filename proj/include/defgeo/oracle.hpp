#pragma once

#include <optional>
#include <span>
#include <vector>

#include "defgeo/closure.hpp"
#include "defgeo/limits.hpp"
#include "defgeo/relation.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

// Brute-force verifier for the closure engine.  It materializes families by
// naive pairwise iteration and decides membership straight from the seed
// list, sharing no closure or basis code with DefFamily.

// The family materialized explicitly: start from all target-arity minors of
// the generators' solution sets, repeatedly apply pairwise intersection and
// union (and complement in boolean mode) until nothing new appears.
// Canonical order.  Throws ResourceError when the family-size or work guard
// trips.
std::vector<Relation> oracle_def(const Structure& a, const FormulaClassSpec& spec, int arity,
                                 const Limits& limits = Limits::defaults());

// As oracle_def but returns nullopt instead of throwing on a guard trip.
std::optional<std::vector<Relation>> oracle_def_try(const Structure& a,
                                                    const FormulaClassSpec& spec, int arity,
                                                    const Limits& limits = Limits::defaults());

// Closure of explicit relation seeds; `mode` decides whether complements
// participate.
std::vector<Relation> oracle_close(std::span<const Relation> seeds, ClosureMode mode,
                                   const Limits& limits = Limits::defaults());

// Membership of `r` in the closure of `seeds`, decided directly from the
// seed list without materializing the family: in lattice mode r must be the
// union over its points of the meet of all seeds containing that point; in
// boolean mode r must not split any seed-signature class.
bool oracle_member(std::span<const Relation> seeds, ClosureMode mode, const Relation& r);

// Seed computation independent of the engine's (same definition, separate
// code): every arity-n minor of every generator's solution set.
std::vector<Relation> oracle_seeds(const Structure& a, const FormulaClassSpec& spec, int arity,
                                   const Limits& limits = Limits::defaults());

// Family equality at the given arity.  Materializes both families when the
// guards allow and compares extensionally; otherwise falls back to mutual
// seed membership (sound because both families are closed under the same
// operations, so closure(seeds1) = closure(seeds2) iff each seed list sits
// inside the other closure).
bool oracle_family_equal(const Structure& a1, const FormulaClassSpec& spec1,
                         const Structure& a2, const FormulaClassSpec& spec2, int arity,
                         const Limits& limits = Limits::defaults());

}  // namespace defgeo
