#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "defgeo/limits.hpp"
#include "defgeo/structure.hpp"

namespace defgeo {

// The n-ary term operations of an algebra: the least set of n-ary tables
// that contains the projections and is closed under composition with the
// basic operations.  `exact` is false for depth-bounded generation that was
// cut off before the fixpoint.
//
// Each table carries a compact generation trace (projection index, or basic
// operation applied to earlier members) from which a witnessing term can be
// rebuilt on demand.
class TermClone {
public:
  struct Trace {
    int var = 0;             // > 0: projection x_var
    int op = -1;             // index into the algebra's ops
    std::vector<int> args;   // member indices
  };

  int k = 0;
  int arity = 0;
  bool exact = true;
  std::vector<std::vector<Elem>> tables;
  std::vector<Trace> traces;

  std::size_t size() const { return tables.size(); }
  bool contains(const std::vector<Elem>& table) const { return index_.count(key(table)) != 0; }
  int find(const std::vector<Elem>& table) const;

  // Witness term for member `i`; nullopt if the materialized term would
  // exceed `max_nodes` nodes (traces form a DAG, terms can explode).
  std::optional<Term> witness(const Structure& a, int i, std::size_t max_nodes = 4096) const;
  std::string witness_text(const Structure& a, int i, std::size_t max_nodes = 4096) const;

  // internal during generation
  bool insert(std::vector<Elem> table, Trace trace);

private:
  static std::string key(const std::vector<Elem>& table) {
    return std::string(reinterpret_cast<const char*>(table.data()), table.size());
  }
  std::unordered_map<std::string, int> index_;
};

// Exact generation by worklist fixpoint.  Throws ResourceError when the
// table-count or memory guard trips.
TermClone term_clone(const Structure& a, int arity, const Limits& limits = Limits::defaults());

// Depth-bounded generation: tables reachable by terms of depth <= depth
// (projections have depth 0).  `exact` is set when the fixpoint is reached
// early; otherwise the result is an explicitly approximate under-set.
TermClone term_clone_depth_bounded(const Structure& a, int arity, int depth,
                                   const Limits& limits = Limits::defaults());

// Solution set of the single equation s = t at the given arity: a fused
// evaluation loop over all k^arity assignments.
Relation equation_solution(const Term& s, const Term& t, int arity, const Structure& a,
                           const Limits& limits = Limits::defaults());

// Deduplicated equalizer relations { x : f(x) = g(x) } over all pairs of
// clone members, in canonical order.  Always includes the full relation.
std::vector<Relation> equalizer_relations(const TermClone& clone,
                                          const Limits& limits = Limits::defaults());

}  // namespace defgeo
