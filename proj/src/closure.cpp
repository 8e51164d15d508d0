#include "defgeo/closure.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "defgeo/errors.hpp"
#include "defgeo/eval.hpp"

namespace defgeo {

namespace {

int generator_arity_cap(int k, const DefOptions& opts) {
  return opts.max_generator_arity > 0 ? opts.max_generator_arity : k * k;
}

// All maps sigma : {1..r} -> {1..n}, applied to `base` as set minors.
void add_all_minors(const Relation& base, int target_arity,
                    std::vector<Relation>& out,
                    std::unordered_set<Relation, RelationHash>& seen,
                    const Limits& limits) {
  const int r = base.arity();
  std::uint64_t map_count =
      pow_u64(static_cast<std::uint64_t>(target_arity), static_cast<unsigned>(r));
  if (map_count > limits.max_seed_maps) {
    throw ResourceError("seed-map guard",
                        std::to_string(map_count) + " substitution maps for one generator");
  }
  MinorMap mm;
  mm.source_arity = r;
  mm.target_arity = target_arity;
  mm.sigma.assign(static_cast<std::size_t>(r), 1);
  while (true) {
    Relation seed = minor(base, mm);
    if (seen.insert(seed).second) out.push_back(std::move(seed));
    int slot = r - 1;
    while (slot >= 0) {
      std::size_t s = static_cast<std::size_t>(slot);
      if (++mm.sigma[s] <= target_arity) break;
      mm.sigma[s] = 1;
      --slot;
    }
    if (slot < 0) break;
  }
}

}  // namespace

std::vector<Relation> family_seeds(const Structure& a, const FormulaClassSpec& spec, int arity,
                                   const DefOptions& opts) {
  if (spec.generators.empty()) throw std::invalid_argument("generator list is empty");
  if (arity < 1) throw std::invalid_argument("family arity must be >= 1");
  if (arity > opts.limits.arity_cap(a.k())) {
    throw ResourceError("arity cap", "arity " + std::to_string(arity));
  }
  const int cap = generator_arity_cap(a.k(), opts);

  std::vector<Relation> seeds;
  std::unordered_set<Relation, RelationHash> seen;
  for (const Formula& g : spec.generators) {
    std::set<int> fv = free_vars(g);
    int r = fv.empty() ? 1 : *fv.rbegin();  // sentences evaluate at arity 1
    if (r > cap) {
      throw ResourceError("generator-arity cap",
                          "generator has free variable x" + std::to_string(r) + ", cap " +
                              std::to_string(cap));
    }
    Relation base = solution_set(g, r, a, opts.limits);
    add_all_minors(base, arity, seeds, seen, opts.limits);
  }
  std::sort(seeds.begin(), seeds.end(), relation_less);
  return seeds;
}

std::vector<Relation> expand_relation_seeds(std::span<const Relation> seeds, int arity,
                                            const Limits& limits) {
  std::vector<Relation> expanded;
  std::unordered_set<Relation, RelationHash> seen;
  for (const Relation& s : seeds) {
    add_all_minors(s, arity, expanded, seen, limits);
  }
  std::sort(expanded.begin(), expanded.end(), relation_less);
  return expanded;
}

namespace {

DefFamily build_family(int k, int arity, ClosureMode mode, std::span<const Relation> seeds,
                       const Limits& limits) {
  DefFamily fam;
  fam.k = k;
  fam.arity = arity;
  fam.mode = mode;

  const std::uint64_t points =
      pow_u64(static_cast<std::uint64_t>(k), static_cast<unsigned>(arity));
  limits.check_memory(points * 4 + (points / 8 + 48) * seeds.size(), "definable family basis");
  fam.closure_of.assign(points, -1);

  if (seeds.empty()) throw std::invalid_argument("cannot build a family from zero seeds");

  if (mode == ClosureMode::lattice) {
    Relation top(k, arity);
    Relation meet_all = Relation::full(k, arity);
    for (const Relation& s : seeds) {
      top = top | s;
      meet_all = meet_all & s;
    }
    fam.top = top;
    fam.empty_flag = meet_all.empty();

    // V_t = intersection of the seeds containing t, for t in the union of
    // the seeds.  Deduplicate as we go.
    std::unordered_map<Relation, std::int32_t, RelationHash> dedup;
    std::vector<Relation> closures;
    top.for_each_member([&](std::uint64_t t) {
      Relation v = Relation::full(k, arity);
      for (const Relation& s : seeds) {
        if (s.test(t)) v = v & s;
      }
      auto [it, fresh] = dedup.emplace(std::move(v), static_cast<std::int32_t>(closures.size()));
      if (fresh) closures.push_back(it->first);
      fam.closure_of[t] = it->second;
    });
    fam.closures = std::move(closures);
  } else {
    fam.top = Relation::full(k, arity);
    // Boolean mode: the point closures are the blocks of the partition by
    // seed-membership signature; the empty set is always reachable as the
    // meet of a block with a complement covering it.
    fam.empty_flag = true;

    std::vector<std::uint64_t> signature_hash(points, 1469598103934665603ull);
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const Relation& s = seeds[si];
      for (std::uint64_t t = 0; t < points; ++t) {
        std::uint64_t bit = s.test(t) ? 0x9e3779b97f4a7c15ull : 0x2545f4914f6cdd1dull;
        std::uint64_t h = signature_hash[t];
        h ^= bit + (h << 6) + (h >> 2);
        signature_hash[t] = h * 1099511628211ull;
      }
    }
    // Group points by signature; verify with exact block construction so a
    // hash collision cannot corrupt the partition.
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> buckets;
    for (std::uint64_t t = 0; t < points; ++t) buckets[signature_hash[t]].push_back(t);

    std::vector<Relation> blocks;
    auto signature_equal = [&](std::uint64_t s, std::uint64_t t) {
      for (const Relation& r : seeds) {
        if (r.test(s) != r.test(t)) return false;
      }
      return true;
    };
    for (auto& [hash, ts] : buckets) {
      (void)hash;
      // split the bucket exactly (collision safety)
      std::vector<std::vector<std::uint64_t>> groups;
      for (std::uint64_t t : ts) {
        bool placed = false;
        for (auto& g : groups) {
          if (signature_equal(g.front(), t)) {
            g.push_back(t);
            placed = true;
            break;
          }
        }
        if (!placed) groups.push_back({t});
      }
      for (const auto& g : groups) {
        Relation block(k, arity);
        for (std::uint64_t t : g) block.set(t);
        std::int32_t id = static_cast<std::int32_t>(blocks.size());
        for (std::uint64_t t : g) fam.closure_of[t] = id;
        blocks.push_back(std::move(block));
      }
    }
    fam.closures = std::move(blocks);
  }

  // Canonical order for the distinct closures; remap the per-point indices.
  std::vector<std::int32_t> order(fam.closures.size());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(order.size()); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&fam](std::int32_t x, std::int32_t y) {
    return relation_less(fam.closures[static_cast<std::size_t>(x)],
                         fam.closures[static_cast<std::size_t>(y)]);
  });
  std::vector<std::int32_t> rank(order.size());
  std::vector<Relation> sorted;
  sorted.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rank[static_cast<std::size_t>(order[pos])] = static_cast<std::int32_t>(pos);
    sorted.push_back(fam.closures[static_cast<std::size_t>(order[pos])]);
  }
  fam.closures = std::move(sorted);
  for (auto& idx : fam.closure_of) {
    if (idx >= 0) idx = rank[static_cast<std::size_t>(idx)];
  }
  return fam;
}

}  // namespace

DefFamily def_family(const Structure& a, const FormulaClassSpec& spec, int arity,
                     const DefOptions& opts) {
  std::vector<Relation> seeds = family_seeds(a, spec, arity, opts);
  return build_family(a.k(), arity, spec.mode, seeds, opts.limits);
}

DefFamily def_family_from_relations(int k, int arity, ClosureMode mode,
                                    std::span<const Relation> seeds, const DefOptions& opts,
                                    bool seeds_minor_closed) {
  if (seeds.empty()) throw std::invalid_argument("cannot build a family from zero seeds");
  if (arity < 1) throw std::invalid_argument("family arity must be >= 1");
  if (arity > opts.limits.arity_cap(k)) {
    throw ResourceError("arity cap", "arity " + std::to_string(arity));
  }
  for (const Relation& s : seeds) {
    if (s.k() != k) throw std::invalid_argument("seed universe mismatch");
  }
  if (seeds_minor_closed) {
    for (const Relation& s : seeds) {
      if (s.arity() != arity) {
        throw std::invalid_argument("minor-closed seeds must already have the target arity");
      }
    }
    return build_family(k, arity, mode, seeds, opts.limits);
  }
  std::vector<Relation> expanded;
  std::unordered_set<Relation, RelationHash> seen;
  for (const Relation& s : seeds) {
    add_all_minors(s, arity, expanded, seen, opts.limits);
  }
  std::sort(expanded.begin(), expanded.end(), relation_less);
  return build_family(k, arity, mode, expanded, opts.limits);
}

const Relation* DefFamily::point_closure(std::uint64_t tuple_idx) const {
  std::int32_t id = closure_of[tuple_idx];
  return id < 0 ? nullptr : &closures[static_cast<std::size_t>(id)];
}

bool DefFamily::member(const Relation& r) const {
  if (r.k() != k) throw std::invalid_argument("universe size mismatch");
  if (r.arity() != arity) throw std::invalid_argument("relation arity mismatch");
  if (r.empty()) return mode == ClosureMode::boolean ? true : empty_flag;
  if (mode == ClosureMode::lattice && !r.subset_of(top)) return false;

  // r is a member iff it is a union of point closures: every point's least
  // containing member must stay inside r.
  bool ok = true;
  r.for_each_member([&](std::uint64_t t) {
    if (!ok) return;
    std::int32_t id = closure_of[t];
    if (id < 0 || !closures[static_cast<std::size_t>(id)].subset_of(r)) ok = false;
  });
  return ok;
}

std::string Fingerprint::serialize() const {
  std::string out = "fingerprint mode=" + to_string(mode) + " k=" + std::to_string(k) +
                    " m=" + std::to_string(m) + " empty=" + (empty_flag ? "1" : "0") + "\n";
  out += "top=" + to_text(top) + "\n";
  for (const Relation& r : closures) {
    out += to_text(r);
    out += '\n';
  }
  return out;
}

std::uint64_t Fingerprint::digest() const {
  std::string bytes = serialize();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Fingerprint fingerprint_of_family(const DefFamily& family) {
  Fingerprint fp;
  fp.mode = family.mode;
  fp.k = family.k;
  fp.m = family.arity;
  fp.empty_flag = family.empty_flag;
  fp.top = family.top;
  fp.closures = family.closures;  // already canonical order
  return fp;
}

Fingerprint fingerprint(const Structure& a, const FormulaClassSpec& spec,
                        const DefOptions& opts) {
  return fingerprint_at(a, spec, a.k() * a.k(), opts);
}

Fingerprint fingerprint_at(const Structure& a, const FormulaClassSpec& spec, int m,
                           const DefOptions& opts) {
  return fingerprint_of_family(def_family(a, spec, m, opts));
}

EquivalenceResult decide_equivalence(const Structure& a1, const FormulaClassSpec& spec1,
                                     const Structure& a2, const FormulaClassSpec& spec2,
                                     const DefOptions& opts) {
  if (a1.k() != a2.k()) throw std::invalid_argument("universe size mismatch");
  if (spec1.mode != spec2.mode) throw std::invalid_argument("closure mode mismatch");

  const int m = a1.k() * a1.k();
  DefFamily f1 = def_family(a1, spec1, m, opts);
  DefFamily f2 = def_family(a2, spec2, m, opts);
  Fingerprint fp1 = fingerprint_of_family(f1);
  Fingerprint fp2 = fingerprint_of_family(f2);

  EquivalenceResult result;
  if (fp1.serialize() == fp2.serialize()) {
    result.equivalent = true;
    return result;
  }
  // Some basis element of one family fails membership in the other; if all
  // basis relations are mutual members, only the empty flags can differ.
  for (const Relation& v : f1.closures) {
    if (!f2.member(v)) {
      result.witness = v;
      result.witness_side = 1;
      return result;
    }
  }
  for (const Relation& v : f2.closures) {
    if (!f1.member(v)) {
      result.witness = v;
      result.witness_side = 2;
      return result;
    }
  }
  if (f1.empty_flag != f2.empty_flag) {
    result.witness = Relation(f1.k, m);
    result.witness_side = f1.empty_flag ? 1 : 2;
    return result;
  }
  throw std::logic_error("fingerprints differ but no witness found");
}

CanonicalPresentation canonicalize(const Structure& a, const FormulaClassSpec& spec,
                                   const DefOptions& opts) {
  Fingerprint fp = fingerprint(a, spec, opts);
  const int m = fp.m;

  std::vector<Relation> rels = fp.closures;
  if (fp.empty_flag) rels.push_back(Relation(fp.k, m));
  std::sort(rels.begin(), rels.end(), relation_less);

  std::vector<RelTable> tables;
  std::vector<Formula> atoms;
  std::vector<Elem> tuple(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < rels.size(); ++i) {
    RelTable table;
    table.name = "s" + std::to_string(i);
    table.arity = m;
    rels[i].for_each_member([&](std::uint64_t idx) {
      index_to_tuple(idx, fp.k, m, tuple);
      table.tuples.emplace_back(tuple.begin(), tuple.end());
    });
    tables.push_back(std::move(table));
    std::vector<Term> args;
    args.reserve(static_cast<std::size_t>(m));
    for (int v = 1; v <= m; ++v) args.push_back(Term::variable(v));
    atoms.push_back(Formula::atom("s" + std::to_string(i), std::move(args)));
  }

  CanonicalPresentation out{
      Structure(a.name() + "_canon", Universe{fp.k}, {}, std::move(tables)),
      FormulaClassSpec{spec.mode, std::move(atoms)},
      std::move(fp),
  };
  return out;
}

}  // namespace defgeo
