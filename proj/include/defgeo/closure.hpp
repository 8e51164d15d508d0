#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defgeo/limits.hpp"
#include "defgeo/relation.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

struct DefOptions {
  // Largest free-variable index allowed in a generator; 0 means k*k.  The
  // cap is a performance knob, surfaced in classification reports.
  int max_generator_arity = 0;
  Limits limits = Limits::defaults();
};

// Canonical representation of the n-ary slice of a closure-generated family
// of definable sets: the point-closure basis.  V_t is the least member
// containing tuple t (lattice mode: defined for t inside the union of the
// seeds; boolean mode: the partition block of t, defined everywhere).
// Members are exactly the unions of point closures, plus the empty set when
// empty_flag holds, so membership and equality never materialize the family.
class DefFamily {
public:
  int k = 0;
  int arity = 0;
  ClosureMode mode = ClosureMode::lattice;
  Relation top;                           // union of seeds (lattice) or A^n (boolean)
  bool empty_flag = false;                // whether the empty set is a member
  std::vector<Relation> closures;         // distinct point closures, canonical order
  std::vector<std::int32_t> closure_of;   // tuple index -> index into closures, -1 undefined

  bool member(const Relation& r) const;
  const Relation* point_closure(std::uint64_t tuple_idx) const;
};

// Builds the family generated by the spec's formulas at the given arity.
// Seeds are every n-ary minor of every generator's solution set; the closure
// regime is the spec's mode.  Throws ResourceError on guard trips and
// std::invalid_argument on an empty generator list.
DefFamily def_family(const Structure& a, const FormulaClassSpec& spec, int arity,
                     const DefOptions& opts = {});

// Builds the family generated by relation seeds.  When `seeds_minor_closed`
// is false, every sigma-minor of every seed into the target arity is added
// first; set it when the seed list is already closed under such minors (for
// example, the equalizer relations of a term clone).
DefFamily def_family_from_relations(int k, int arity, ClosureMode mode,
                                    std::span<const Relation> seeds,
                                    const DefOptions& opts = {},
                                    bool seeds_minor_closed = false);

// The canonical invariant of a family: its basis at the comparison arity,
// serialized bit-exactly.  Two fingerprints are byte-equal iff the families
// are equal as sets of relations.
struct Fingerprint {
  ClosureMode mode = ClosureMode::lattice;
  int k = 0;
  int m = 0;
  bool empty_flag = false;
  Relation top;
  std::vector<Relation> closures;

  bool operator==(const Fingerprint&) const = default;
  std::string serialize() const;
  std::uint64_t digest() const;  // 64-bit FNV-1a of the serialization
};

Fingerprint fingerprint_of_family(const DefFamily& family);

// Fingerprint at the canonical comparison arity m = k*k.
Fingerprint fingerprint(const Structure& a, const FormulaClassSpec& spec,
                        const DefOptions& opts = {});

// Experimental override of the comparison arity; equality below k*k carries
// no general guarantee.
Fingerprint fingerprint_at(const Structure& a, const FormulaClassSpec& spec, int m,
                           const DefOptions& opts = {});

struct EquivalenceResult {
  bool equivalent = false;
  std::optional<Relation> witness;  // member of exactly one arity-m family
  int witness_side = 0;             // 1 or 2: which family contains the witness
};

// Families are equal at every arity iff they are equal at arity k*k; the
// decision compares fingerprints and, on inequality, produces a witness
// relation lying in exactly one of the two arity-m families.
EquivalenceResult decide_equivalence(const Structure& a1, const FormulaClassSpec& spec1,
                                     const Structure& a2, const FormulaClassSpec& spec2,
                                     const DefOptions& opts = {});

// A relational structure presenting the same definable-set geometry: one
// m-ary relation per basis element of the arity-m family (plus the empty
// relation when the family contains it), with atoms s_i(x1..xm) as the
// generator set under the same mode.
struct CanonicalPresentation {
  Structure presentation;
  FormulaClassSpec atoms;
  Fingerprint source_fingerprint;
};

CanonicalPresentation canonicalize(const Structure& a, const FormulaClassSpec& spec,
                                   const DefOptions& opts = {});

// Relation seeds used by def_family: every target-arity minor of every
// generator's solution set, deduplicated, canonical order.  Exposed for the
// oracle and for tests.
std::vector<Relation> family_seeds(const Structure& a, const FormulaClassSpec& spec, int arity,
                                   const DefOptions& opts = {});

// Every target-arity minor of every relation in `seeds`, deduplicated,
// canonical order.
std::vector<Relation> expand_relation_seeds(std::span<const Relation> seeds, int arity,
                                            const Limits& limits = Limits::defaults());

}  // namespace defgeo
