#include "defgeo/relation.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>

namespace defgeo {

std::uint64_t pow_u64(std::uint64_t base, unsigned exp) {
  std::uint64_t result = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && result > UINT64_MAX / base) {
      throw std::overflow_error("pow_u64 overflow");
    }
    result *= base;
  }
  return result;
}

std::uint64_t tuple_index(std::span<const Elem> tuple, int k) {
  std::uint64_t index = 0;
  for (Elem a : tuple) index = index * static_cast<std::uint64_t>(k) + a;
  return index;
}

void index_to_tuple(std::uint64_t index, int k, int arity, std::span<Elem> out) {
  for (int i = arity - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<Elem>(index % static_cast<std::uint64_t>(k));
    index /= static_cast<std::uint64_t>(k);
  }
}

Relation::Relation(int k, int arity) : k_(k), arity_(arity) {
  if (k < 1) throw std::invalid_argument("universe size must be >= 1");
  if (arity < 1) throw std::invalid_argument("relation arity must be >= 1");
  points_ = pow_u64(static_cast<std::uint64_t>(k), static_cast<unsigned>(arity));
  if (points_ > (1ull << 34)) {
    throw std::invalid_argument("relation too large: k^arity exceeds 2^34 bits");
  }
  bits_.assign((points_ + 63) / 64, 0);
}

Relation Relation::full(int k, int arity) {
  Relation r(k, arity);
  for (auto& w : r.bits_) w = ~0ull;
  std::uint64_t tail = r.points_ & 63;
  if (tail != 0) r.bits_.back() = (1ull << tail) - 1;
  return r;
}

Relation Relation::from_tuples(int k, int arity,
                               std::initializer_list<std::initializer_list<int>> tuples) {
  Relation r(k, arity);
  std::vector<Elem> buf;
  for (const auto& t : tuples) {
    if (static_cast<int>(t.size()) != arity) {
      throw std::invalid_argument("tuple length does not match arity");
    }
    buf.clear();
    for (int v : t) {
      if (v < 0 || v >= k) throw std::invalid_argument("tuple entry out of range");
      buf.push_back(static_cast<Elem>(v));
    }
    r.set(tuple_index(buf, k));
  }
  return r;
}

Relation Relation::from_mask(int k, int arity, std::uint64_t mask) {
  Relation r(k, arity);
  if (r.points_ > 64) throw std::invalid_argument("from_mask requires k^arity <= 64");
  if (r.points_ < 64) mask &= (1ull << r.points_) - 1;
  r.bits_[0] = mask;
  return r;
}

bool Relation::empty() const {
  for (std::uint64_t w : bits_)
    if (w != 0) return false;
  return true;
}

bool Relation::is_full() const { return count() == points_; }

std::uint64_t Relation::count() const {
  std::uint64_t n = 0;
  for (std::uint64_t w : bits_) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

void Relation::require_compatible(const Relation& other) const {
  if (k_ != other.k_) throw std::invalid_argument("universe size mismatch");
  if (arity_ != other.arity_) throw std::invalid_argument("relation arity mismatch");
}

bool Relation::subset_of(const Relation& other) const {
  require_compatible(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if ((bits_[i] & ~other.bits_[i]) != 0) return false;
  }
  return true;
}

Relation Relation::operator&(const Relation& other) const {
  require_compatible(other);
  Relation out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] &= other.bits_[i];
  return out;
}

Relation Relation::operator|(const Relation& other) const {
  require_compatible(other);
  Relation out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= other.bits_[i];
  return out;
}

Relation Relation::complement() const {
  Relation out = *this;
  for (auto& w : out.bits_) w = ~w;
  std::uint64_t tail = points_ & 63;
  if (tail != 0) out.bits_.back() &= (1ull << tail) - 1;
  return out;
}

std::size_t RelationHash::operator()(const Relation& r) const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(r.k()));
  mix(static_cast<std::uint64_t>(r.arity()));
  for (std::uint64_t w : r.blocks()) mix(w);
  return static_cast<std::size_t>(h);
}

bool relation_less(const Relation& a, const Relation& b) {
  if (a.k() != b.k() || a.arity() != b.arity()) {
    throw std::invalid_argument("relation_less: shape mismatch");
  }
  // Big-endian: the bit of tuple index 0 is the most significant, so scan
  // from low indices and treat the first difference as deciding.
  const auto& wa = a.blocks();
  const auto& wb = b.blocks();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    std::uint64_t diff = wa[i] ^ wb[i];
    if (diff != 0) {
      int bit = std::countr_zero(diff);
      return ((wb[i] >> bit) & 1) != 0;  // b has the earlier 1 => a < b
    }
  }
  return false;
}

CharFunction char_fn(const Relation& r) { return CharFunction{r}; }

MinorMap MinorMap::identity(int arity) {
  MinorMap mm;
  mm.source_arity = arity;
  mm.target_arity = arity;
  mm.sigma.resize(static_cast<std::size_t>(arity));
  for (int i = 0; i < arity; ++i) mm.sigma[static_cast<std::size_t>(i)] = i + 1;
  return mm;
}

void MinorMap::validate() const {
  if (source_arity < 1 || target_arity < 1) {
    throw std::invalid_argument("minor map arities must be >= 1");
  }
  if (static_cast<int>(sigma.size()) != source_arity) {
    throw std::invalid_argument("minor map has wrong domain size");
  }
  for (int v : sigma) {
    if (v < 1 || v > target_arity) {
      throw std::invalid_argument("minor map value out of range");
    }
  }
}

MinorMap compose(const MinorMap& outer, const MinorMap& inner) {
  inner.validate();
  outer.validate();
  if (inner.target_arity != outer.source_arity) {
    throw std::invalid_argument("minor maps do not compose");
  }
  MinorMap out;
  out.source_arity = inner.source_arity;
  out.target_arity = outer.target_arity;
  out.sigma.reserve(inner.sigma.size());
  for (int v : inner.sigma) {
    out.sigma.push_back(outer.sigma[static_cast<std::size_t>(v - 1)]);
  }
  return out;
}

Relation minor(const Relation& src, const MinorMap& mm) {
  mm.validate();
  if (mm.source_arity != src.arity()) {
    throw std::invalid_argument("minor: map source arity does not match relation");
  }
  const int k = src.k();
  Relation out(k, mm.target_arity);
  std::vector<Elem> target(static_cast<std::size_t>(mm.target_arity));
  std::vector<Elem> source(static_cast<std::size_t>(mm.source_arity));
  for (std::uint64_t idx = 0; idx < out.point_count(); ++idx) {
    index_to_tuple(idx, k, mm.target_arity, target);
    for (int i = 0; i < mm.source_arity; ++i) {
      source[static_cast<std::size_t>(i)] =
          target[static_cast<std::size_t>(mm.sigma[static_cast<std::size_t>(i)] - 1)];
    }
    if (src.test(tuple_index(source, k))) out.set(idx);
  }
  return out;
}

CharFunction char_minor(const CharFunction& f, const MinorMap& mm) {
  mm.validate();
  if (mm.source_arity != f.arity()) {
    throw std::invalid_argument("char_minor: map source arity does not match function");
  }
  const int k = f.graph.k();
  Relation out(k, mm.target_arity);
  std::vector<Elem> target(static_cast<std::size_t>(mm.target_arity));
  std::vector<Elem> source(static_cast<std::size_t>(mm.source_arity));
  for (std::uint64_t idx = 0; idx < out.point_count(); ++idx) {
    index_to_tuple(idx, k, mm.target_arity, target);
    for (int i = 0; i < mm.source_arity; ++i) {
      source[static_cast<std::size_t>(i)] =
          target[static_cast<std::size_t>(mm.sigma[static_cast<std::size_t>(i)] - 1)];
    }
    if (f(source) == 1) out.set(idx);
  }
  return CharFunction{out};
}

std::string to_text(const Relation& r) {
  std::string out = "rel/" + std::to_string(r.k()) + "/" + std::to_string(r.arity()) + ":{";
  std::vector<Elem> tuple(static_cast<std::size_t>(r.arity()));
  bool first = true;
  r.for_each_member([&](std::uint64_t idx) {
    index_to_tuple(idx, r.k(), r.arity(), tuple);
    if (!first) out += ',';
    first = false;
    out += '(';
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i != 0) out += ',';
      out += std::to_string(static_cast<int>(tuple[i]));
    }
    out += ')';
  });
  out += '}';
  return out;
}

namespace {

struct TextCursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) {
      throw std::invalid_argument("bad relation literal: expected '" + std::string(1, c) +
                                  "' at offset " + std::to_string(pos));
    }
  }
  long number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) {
      throw std::invalid_argument("bad relation literal: expected number at offset " +
                                  std::to_string(start));
    }
    long v = 0;
    std::from_chars(s.data() + start, s.data() + pos, v);
    return v;
  }
};

}  // namespace

Relation relation_from_text(const std::string& text) {
  TextCursor c{text};
  for (char want : {'r', 'e', 'l'}) {
    if (c.pos >= text.size() || text[c.pos] != want) {
      throw std::invalid_argument("bad relation literal: expected rel/<k>/<n>:{...}");
    }
    ++c.pos;
  }
  c.expect('/');
  long k = c.number();
  c.expect('/');
  long arity = c.number();
  c.expect(':');
  c.expect('{');
  if (k < 1 || arity < 1) throw std::invalid_argument("bad relation literal: k and arity must be >= 1");
  Relation r(static_cast<int>(k), static_cast<int>(arity));
  c.skip_ws();
  if (!c.eat('}')) {
    std::vector<Elem> tuple;
    while (true) {
      c.expect('(');
      tuple.clear();
      tuple.push_back(static_cast<Elem>(c.number()));
      while (c.eat(',')) tuple.push_back(static_cast<Elem>(c.number()));
      c.expect(')');
      if (static_cast<long>(tuple.size()) != arity) {
        throw std::invalid_argument("bad relation literal: tuple length does not match arity");
      }
      for (Elem v : tuple) {
        if (v >= k) throw std::invalid_argument("bad relation literal: entry out of range");
      }
      r.set(tuple_index(tuple, static_cast<int>(k)));
      if (!c.eat(',')) break;
    }
    c.expect('}');
  }
  c.skip_ws();
  if (c.pos != text.size()) {
    throw std::invalid_argument("bad relation literal: trailing characters");
  }
  return r;
}

}  // namespace defgeo
