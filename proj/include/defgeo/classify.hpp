#pragma once

#include <optional>
#include <string>
#include <vector>

#include "defgeo/algebraic.hpp"
#include "defgeo/closure.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

enum class ClassifyMode { algebraic, l0 };

struct ClassifyOptions {
  int ed_bound = 4;
  // 0: exact term clones (refused for k >= 3 in algebraic mode); > 0:
  // depth-bounded generation, which makes every verdict inequivalence-only.
  int approximate_depth = 0;
  DefOptions def;
};

struct ClassifiedItem {
  std::string name;
  Fingerprint fp;
  bool approximate = false;
  std::optional<EDReport> ed;  // algebraic mode only
};

// Deterministic partition of structures by fingerprint.  In algebraic mode
// the lattice-closed family over the term-equation atoms is fingerprinted
// and items whose equational-domain check fails at the bound go to a
// separate undetermined section instead of the class partition; in l0 mode
// the boolean-closed family over atomic formulas is fingerprinted and every
// item is classified.
struct ClassificationReport {
  ClassifyMode mode = ClassifyMode::l0;
  int k = 0;
  bool approximate = false;
  int ed_bound = 0;
  int generator_arity_cap = 0;
  std::string bound_text;  // the 2^(2^(k^(k^2))) cardinality bound

  std::vector<ClassifiedItem> items;           // sorted by name
  std::vector<std::vector<int>> classes;       // item indices; blocks sorted by least name
  std::vector<int> undetermined;               // item indices (algebraic mode)

  struct PairWitness {
    int class_a = 0;
    int class_b = 0;
    Relation witness;
    int side = 0;  // 1: in class_a's family only; 2: in class_b's only
  };
  std::vector<PairWitness> witnesses;

  std::string to_text() const;          // defgeo-report v1
  std::string fingerprints_text() const;  // sidecar: full fingerprints per item
};

std::string to_string(ClassifyMode mode);
std::string theoretical_bound_text(int k);

ClassificationReport classify(const std::vector<Structure>& structures, ClassifyMode mode,
                              const ClassifyOptions& opts = {});

// The relation seeds standing in for the atomic generators of a structure:
// the deduplicated equalizer relations of the m-ary term clone, plus, in l0
// mode, every m-ary minor of each declared relation.
std::vector<Relation> atomic_seeds(const Structure& a, int m, const ClassifyOptions& opts);

}  // namespace defgeo
