#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "defgeo/clone.hpp"
#include "defgeo/limits.hpp"
#include "defgeo/relation.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

// The n-ary algebraic sets of an algebra: all intersections of finitely many
// equalizers { x : f(x) = g(x) } over pairs f, g of n-ary term operations,
// computed as the intersection closure of the pairwise equalizer relations.
// Always contains A^n.  `exact` is false when a depth-bounded clone fed the
// construction.
class AlgebraicFamily {
public:
  int k = 0;
  int arity = 0;
  bool exact = true;
  std::vector<Relation> members;  // canonical order (relation_less)

  // Provenance: each member is either an equalizer of two clone members or
  // an intersection of two earlier members, so a defining conjunction of
  // equations can be rebuilt by walking the tree.
  struct Prov {
    int eq_lhs = -1, eq_rhs = -1;    // clone member indices (equalizer), or
    int from_a = -1, from_b = -1;    // member indices before canonical sort
  };
  std::vector<Prov> provenance;      // parallel to pre-sort discovery order
  std::vector<int> discovery_index;  // members[i] was discovered as #discovery_index[i]

  TermClone clone;

  bool contains(const Relation& r) const { return index_.count(r) != 0; }

  // The defining conjunction of equations for member `i`, as readable text.
  std::string defining_system_text(const Structure& a, int i) const;

  // internal
  void build_index();

private:
  std::unordered_set<Relation, RelationHash> index_;
};

AlgebraicFamily algebraic_family(const Structure& a, int arity,
                                 const Limits& limits = Limits::defaults());

// As above, but from a depth-bounded clone; the result is approximate unless
// the clone reached its fixpoint.
AlgebraicFamily algebraic_family_depth_bounded(const Structure& a, int arity, int depth,
                                               const Limits& limits = Limits::defaults());

// Result of checking the union-closure of algebraic sets up to an arity
// bound.  A failure carries the first counterexample pair in canonical
// order; the union is verifiably absent from the family.
struct EDReport {
  enum class Verdict { passes_at_bound, fails };

  Verdict verdict = Verdict::passes_at_bound;
  int bound = 0;
  int counterexample_arity = 0;
  std::optional<Relation> s, t, u;

  bool passed() const { return verdict == Verdict::passes_at_bound; }
  std::string to_text() const;
};

// For every arity n <= max_arity and every pair S, T of n-ary algebraic
// sets, tests S union T for membership in the family.  A caller that already
// holds the family at some arity can pass it to skip that recomputation.
EDReport ed_check(const Structure& a, int max_arity, const Limits& limits = Limits::defaults(),
                  const AlgebraicFamily* precomputed = nullptr);

}  // namespace defgeo
