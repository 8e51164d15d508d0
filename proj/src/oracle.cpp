#include "defgeo/oracle.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "defgeo/errors.hpp"
#include "defgeo/eval.hpp"
#include "defgeo/maskset.hpp"

namespace defgeo {

std::vector<Relation> oracle_seeds(const Structure& a, const FormulaClassSpec& spec, int arity,
                                   const Limits& limits) {
  if (spec.generators.empty()) throw std::invalid_argument("generator list is empty");
  if (arity < 1) throw std::invalid_argument("arity must be >= 1");

  std::vector<Relation> seeds;
  std::unordered_set<Relation, RelationHash> seen;
  for (const Formula& g : spec.generators) {
    std::set<int> fv = free_vars(g);
    int r = fv.empty() ? 1 : *fv.rbegin();
    Relation base = solution_set(g, r, a, limits);

    // Walk sigma : {1..r} -> {1..arity} as an odometer.
    std::vector<int> sigma(static_cast<std::size_t>(r), 1);
    std::uint64_t map_count =
        pow_u64(static_cast<std::uint64_t>(arity), static_cast<unsigned>(r));
    if (map_count > limits.max_seed_maps) {
      throw ResourceError("seed-map guard");
    }
    while (true) {
      MinorMap mm{r, arity, sigma};
      Relation seed = minor(base, mm);
      if (seen.insert(seed).second) seeds.push_back(std::move(seed));
      int slot = r - 1;
      while (slot >= 0) {
        std::size_t s = static_cast<std::size_t>(slot);
        if (++sigma[s] <= arity) break;
        sigma[s] = 1;
        --slot;
      }
      if (slot < 0) break;
    }
  }
  std::sort(seeds.begin(), seeds.end(), relation_less);
  return seeds;
}

namespace {

// Mask-based naive closure for point spaces of at most 64 bits.
std::vector<std::uint64_t> close_masks(std::vector<std::uint64_t> seeds, std::uint64_t points,
                                       bool with_complement, const Limits& limits) {
  const std::uint64_t full = points == 64 ? ~0ull : (1ull << points) - 1;
  const std::uint64_t all_possible = points < 63 ? (1ull << points) : 0;

  MaskSet seen(points);
  std::vector<std::uint64_t> members;
  std::uint64_t work = 0;
  auto add = [&](std::uint64_t m) {
    if (seen.insert(m)) {
      members.push_back(m);
      if (members.size() > limits.max_oracle_members) {
        throw ResourceError("oracle family guard");
      }
    }
  };
  for (std::uint64_t s : seeds) add(s);

  for (std::size_t next = 0; next < members.size(); ++next) {
    if (all_possible != 0 && members.size() >= all_possible) break;
    if (with_complement) add(~members[next] & full);
    const std::uint64_t x = members[next];
    const std::uint64_t* data = members.data();
    for (std::size_t other = 0; other <= next; ++other) {
      const std::uint64_t y = data[other];
      const std::uint64_t join = x | y;
      // comparable pairs contribute nothing new
      if (join != x && join != y) {
        add(join);
        add(x & y);
        data = members.data();
      }
    }
    work += next + 1;
    if (work > limits.max_oracle_work) throw ResourceError("oracle work guard");
  }
  return members;
}

std::vector<Relation> close_relations(std::span<const Relation> seeds, bool with_complement,
                                      const Limits& limits) {
  std::unordered_set<Relation, RelationHash> seen;
  std::vector<Relation> members;
  std::uint64_t work = 0;
  auto add = [&](Relation m) {
    if (seen.insert(m).second) {
      members.push_back(std::move(m));
      if (members.size() > limits.max_oracle_members) {
        throw ResourceError("oracle family guard");
      }
    }
  };
  for (const Relation& s : seeds) add(s);
  for (std::size_t next = 0; next < members.size(); ++next) {
    if (with_complement) add(members[next].complement());
    for (std::size_t other = 0; other <= next; ++other) {
      add(members[next] | members[other]);
      add(members[next] & members[other]);
      work += 1;
      if (work > limits.max_oracle_work) throw ResourceError("oracle work guard");
    }
  }
  return members;
}

}  // namespace

std::vector<Relation> oracle_close(std::span<const Relation> seeds, ClosureMode mode,
                                   const Limits& limits) {
  if (seeds.empty()) throw std::invalid_argument("cannot close zero seeds");
  const int k = seeds.front().k();
  const int arity = seeds.front().arity();
  const std::uint64_t points = seeds.front().point_count();

  std::vector<Relation> out;
  if (points <= 64) {
    std::vector<std::uint64_t> masks;
    masks.reserve(seeds.size());
    for (const Relation& s : seeds) masks.push_back(s.low_mask());
    std::vector<std::uint64_t> closed =
        close_masks(std::move(masks), points, mode == ClosureMode::boolean, limits);
    out.reserve(closed.size());
    for (std::uint64_t m : closed) out.push_back(Relation::from_mask(k, arity, m));
  } else {
    out = close_relations(seeds, mode == ClosureMode::boolean, limits);
  }
  std::sort(out.begin(), out.end(), relation_less);
  return out;
}

std::vector<Relation> oracle_def(const Structure& a, const FormulaClassSpec& spec, int arity,
                                 const Limits& limits) {
  std::vector<Relation> seeds = oracle_seeds(a, spec, arity, limits);
  return oracle_close(seeds, spec.mode, limits);
}

std::optional<std::vector<Relation>> oracle_def_try(const Structure& a,
                                                    const FormulaClassSpec& spec, int arity,
                                                    const Limits& limits) {
  try {
    return oracle_def(a, spec, arity, limits);
  } catch (const ResourceError&) {
    return std::nullopt;
  }
}

bool oracle_member(std::span<const Relation> seeds, ClosureMode mode, const Relation& r) {
  if (seeds.empty()) throw std::invalid_argument("cannot test membership against zero seeds");
  const int k = seeds.front().k();
  const int arity = seeds.front().arity();
  if (r.k() != k || r.arity() != arity) {
    throw std::invalid_argument("relation shape does not match the seeds");
  }

  if (mode == ClosureMode::lattice) {
    if (r.empty()) {
      // The empty set arises exactly when some finite meet of seeds is
      // empty, i.e. when the meet of all of them is.
      Relation meet = Relation::full(k, arity);
      for (const Relation& s : seeds) meet = meet & s;
      return meet.empty();
    }
    bool ok = true;
    r.for_each_member([&](std::uint64_t t) {
      if (!ok) return;
      Relation v = Relation::full(k, arity);
      bool covered = false;
      for (const Relation& s : seeds) {
        if (s.test(t)) {
          v = v & s;
          covered = true;
        }
      }
      if (!covered || !v.subset_of(r)) ok = false;
    });
    return ok;
  }

  // Boolean mode: r is a member iff no seed-signature class straddles the
  // boundary of r.  Check per point of r that its class stays inside r.
  bool ok = true;
  r.for_each_member([&](std::uint64_t t) {
    if (!ok) return;
    Relation block = Relation::full(k, arity);
    for (const Relation& s : seeds) {
      block = s.test(t) ? (block & s) : (block & s.complement());
    }
    if (!block.subset_of(r)) ok = false;
  });
  return ok;
}

bool oracle_family_equal(const Structure& a1, const FormulaClassSpec& spec1,
                         const Structure& a2, const FormulaClassSpec& spec2, int arity,
                         const Limits& limits) {
  if (a1.k() != a2.k()) throw std::invalid_argument("universe size mismatch");
  if (spec1.mode != spec2.mode) throw std::invalid_argument("closure mode mismatch");

  std::vector<Relation> seeds1 = oracle_seeds(a1, spec1, arity, limits);
  std::vector<Relation> seeds2 = oracle_seeds(a2, spec2, arity, limits);

  auto fam1 = oracle_def_try(a1, spec1, arity, limits);
  auto fam2 = oracle_def_try(a2, spec2, arity, limits);
  if (fam1.has_value() && fam2.has_value()) {
    return *fam1 == *fam2;  // both canonically sorted
  }

  // Guarded fallback: closures agree iff each seed list lies in the other
  // closure (both sides are closed under the same operations).
  for (const Relation& s : seeds1) {
    if (!oracle_member(seeds2, spec1.mode, s)) return false;
  }
  for (const Relation& s : seeds2) {
    if (!oracle_member(seeds1, spec1.mode, s)) return false;
  }
  // In lattice mode the empty set can be a member of one closure only.
  if (spec1.mode == ClosureMode::lattice) {
    Relation empty(a1.k(), arity);
    if (oracle_member(seeds1, spec1.mode, empty) != oracle_member(seeds2, spec1.mode, empty)) {
      return false;
    }
  }
  return true;
}

}  // namespace defgeo
