#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace defgeo {

// Element of a finite universe {0..k-1}.
using Elem = std::uint8_t;

// base^exp with overflow detection; throws std::overflow_error.
std::uint64_t pow_u64(std::uint64_t base, unsigned exp);

// Positional encoding of a tuple over {0..k-1}: argument 1 is most
// significant, i.e. index = sum a_i * k^(n-i).
std::uint64_t tuple_index(std::span<const Elem> tuple, int k);
void index_to_tuple(std::uint64_t index, int k, int arity, std::span<Elem> out);

// A finitary relation over {0..k-1}^arity, stored as a bitset of k^arity
// bits in tuple_index order.  Values are immutable in spirit: every operation
// returns a fresh relation.  Relations remember k so that mixing universes
// fails fast instead of aliasing.
class Relation {
public:
  Relation() = default;
  Relation(int k, int arity);  // empty relation

  static Relation full(int k, int arity);
  static Relation from_tuples(int k, int arity,
                              std::initializer_list<std::initializer_list<int>> tuples);
  // Build from the low `point_count()` bits of `mask`; requires k^arity <= 64.
  static Relation from_mask(int k, int arity, std::uint64_t mask);

  int k() const { return k_; }
  int arity() const { return arity_; }
  std::uint64_t point_count() const { return points_; }

  bool test(std::uint64_t index) const {
    return (bits_[index >> 6] >> (index & 63)) & 1;
  }
  void set(std::uint64_t index) { bits_[index >> 6] |= 1ull << (index & 63); }

  bool empty() const;
  bool is_full() const;
  std::uint64_t count() const;
  bool subset_of(const Relation& other) const;

  Relation operator&(const Relation& other) const;
  Relation operator|(const Relation& other) const;
  Relation complement() const;
  bool operator==(const Relation& other) const = default;

  // Low 64 bits; the whole relation when point_count() <= 64.
  std::uint64_t low_mask() const { return bits_.empty() ? 0 : bits_[0]; }
  const std::vector<std::uint64_t>& blocks() const { return bits_; }

  template <typename Fn>
  void for_each_member(Fn&& fn) const {
    for (std::size_t b = 0; b < bits_.size(); ++b) {
      std::uint64_t w = bits_[b];
      while (w != 0) {
        int bit = std::countr_zero(w);
        fn(static_cast<std::uint64_t>(b) * 64 + static_cast<std::uint64_t>(bit));
        w &= w - 1;
      }
    }
  }

private:
  void require_compatible(const Relation& other) const;

  int k_ = 0;
  int arity_ = 0;
  std::uint64_t points_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct RelationHash {
  std::size_t operator()(const Relation& r) const;
};

// Order on relations of equal shape: the bitset read as a big-endian integer
// (bit of tuple index 0 most significant).  This is the canonical order used
// in fingerprints and reports.
bool relation_less(const Relation& a, const Relation& b);

// A relation viewed as its indicator function A^n -> {0,1}.
struct CharFunction {
  Relation graph;

  int arity() const { return graph.arity(); }
  int operator()(std::span<const Elem> tuple) const {
    return graph.test(tuple_index(tuple, graph.k())) ? 1 : 0;
  }
  bool operator==(const CharFunction&) const = default;
};

CharFunction char_fn(const Relation& r);

// A variable map sigma : {1..source_arity} -> {1..target_arity} describing a
// minor.  sigma[i-1] holds sigma(i).
struct MinorMap {
  int source_arity = 0;
  int target_arity = 0;
  std::vector<int> sigma;

  static MinorMap identity(int arity);
  void validate() const;  // throws std::invalid_argument
};

// Composition: first apply `inner`, then `outer`; the result maps the inner
// source arity into the outer target arity.
MinorMap compose(const MinorMap& outer, const MinorMap& inner);

// The sigma-minor of a relation: { a in A^m | (a_sigma(1),..,a_sigma(n)) in src }.
Relation minor(const Relation& src, const MinorMap& mm);

// Function-minor of an indicator function, computed pointwise.
CharFunction char_minor(const CharFunction& f, const MinorMap& mm);

// Canonical text form: rel/<k>/<n>:{(t),(t),...} with tuples in tuple_index
// order, no whitespace.  Bit-exact; used in fingerprints and reports.
std::string to_text(const Relation& r);
Relation relation_from_text(const std::string& text);

}  // namespace defgeo
