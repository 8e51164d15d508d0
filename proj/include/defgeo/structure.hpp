#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "defgeo/relation.hpp"

namespace defgeo {

struct Universe {
  int size = 0;  // elements are 0..size-1
};

// Finite operation table, row-major with argument 1 most significant: the
// entry for (a_1,..,a_r) sits at index sum a_i * k^(r-i).
struct OpTable {
  std::string name;
  int arity = 0;  // 0 allowed: constants have a table of length 1
  std::vector<Elem> table;

  Elem value(std::span<const Elem> args, int k) const {
    return table[tuple_index(args, k)];
  }
};

struct RelTable {
  std::string name;
  int arity = 0;  // >= 1
  std::vector<std::vector<Elem>> tuples;  // canonical: sorted by tuple_index, deduped

  bool contains(std::span<const Elem> tuple, int k) const;

  // Sorted encoded tuple indices; built by Structure's constructor.
  std::vector<std::uint64_t> index;
};

// An immutable finite first-order structure: universe, operation tables,
// relation tables.  Construction validates all invariants (symbol uniqueness,
// table lengths, entry ranges) and canonicalizes relation tuples.
class Structure {
public:
  Structure(std::string name, Universe universe, std::vector<OpTable> ops,
            std::vector<RelTable> rels);

  const std::string& name() const { return name_; }
  int k() const { return universe_.size; }
  const Universe& universe() const { return universe_; }
  const std::vector<OpTable>& ops() const { return ops_; }
  const std::vector<RelTable>& rels() const { return rels_; }

  const OpTable* find_op(const std::string& name) const;
  const RelTable* find_rel(const std::string& name) const;

private:
  std::string name_;
  Universe universe_;
  std::vector<OpTable> ops_;
  std::vector<RelTable> rels_;
  std::unordered_map<std::string, int> op_index_;
  std::unordered_map<std::string, int> rel_index_;
};

// First-order term: a variable x_i (i >= 1) or an operation applied to
// argument terms.  Plain value semantics; terms stay small at desk scale.
struct Term {
  int var = 0;  // > 0: variable index; 0: application
  std::string op;
  std::vector<Term> args;

  static Term variable(int index);
  static Term apply(std::string op, std::vector<Term> args = {});

  bool is_var() const { return var > 0; }
  bool operator==(const Term&) const = default;

  int max_var() const;
  void collect_vars(std::set<int>& out) const;
};

// First-order formula over terms, with equality, relation atoms, the lattice
// connectives, negation, and both quantifiers.  And/Or are n-ary lists.
struct Formula {
  enum class Kind { equality, atom, conj, disj, negation, exists, forall };

  Kind kind = Kind::equality;
  std::string rel;                 // atom
  std::vector<Term> terms;         // equality (2 entries), atom (arity entries)
  std::vector<Formula> children;   // conj/disj (>= 1), negation (1), quantifier (1)
  int bound_var = 0;               // exists/forall

  static Formula equals(Term lhs, Term rhs);
  static Formula atom(std::string rel, std::vector<Term> args);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula negation(Formula inner);
  static Formula exists(int var, Formula body);
  static Formula forall(int var, Formula body);

  bool operator==(const Formula&) const = default;
};

std::set<int> free_vars(const Formula& phi);

// Largest variable index occurring anywhere (free or bound); 0 if none.
int max_var_index(const Formula& phi);

// The minor of a formula: simultaneous substitution x_i -> x_sigma(i) for
// every i in the domain of sigma, applied to free occurrences.  Bound
// variables that collide with the range of the substitution are renamed to
// the smallest index not occurring in the formula, the map, or a previously
// chosen fresh variable, so the output is deterministic and capture-free.
// Throws std::invalid_argument if a free variable of phi lies outside the
// domain of sigma or if sigma has values < 1.
Formula substitute(const Formula& phi, const std::map<int, int>& sigma);

// Structural equality modulo consistent renaming of bound variables.
bool alpha_equal(const Formula& a, const Formula& b);

// Text forms.  print followed by parse reproduces the value exactly.
std::string to_text(const Term& t);
std::string to_text(const Formula& phi);
std::string to_text(const Structure& s);

// Verifies that `name` is usable as an op/rel symbol: not a keyword, not of
// the reserved variable shape x<digits>.  Throws std::invalid_argument.
void check_symbol_name(const std::string& name);

enum class ClosureMode { lattice, boolean };

std::string to_string(ClosureMode mode);

// A generator set together with the closure regime it is read under:
// lattice (and, or, minors) or boolean (and, or, not, minors).
struct FormulaClassSpec {
  ClosureMode mode = ClosureMode::lattice;
  std::vector<Formula> generators;  // nonempty
};

}  // namespace defgeo
