#include "defgeo/algebraic.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "defgeo/errors.hpp"
#include "defgeo/maskset.hpp"

namespace defgeo {

void AlgebraicFamily::build_index() {
  index_.clear();
  index_.reserve(members.size() * 2);
  for (const Relation& r : members) index_.insert(r);
}

std::string AlgebraicFamily::defining_system_text(const Structure& a, int i) const {
  if (i < 0 || i >= static_cast<int>(members.size())) {
    throw std::invalid_argument("member index out of range");
  }
  // Walk the provenance tree, collecting equalizer pairs.
  std::set<std::pair<int, int>> equations;
  std::vector<int> stack{discovery_index[static_cast<std::size_t>(i)]};
  while (!stack.empty()) {
    int d = stack.back();
    stack.pop_back();
    const Prov& p = provenance[static_cast<std::size_t>(d)];
    if (p.eq_lhs >= 0) {
      equations.emplace(p.eq_lhs, p.eq_rhs);
    } else {
      stack.push_back(p.from_a);
      stack.push_back(p.from_b);
    }
  }
  std::string out;
  for (const auto& [lhs, rhs] : equations) {
    if (!out.empty()) out += " /\\ ";
    out += clone.witness_text(a, lhs) + " = " + clone.witness_text(a, rhs);
  }
  return out.empty() ? "x1 = x1" : out;
}

namespace {

AlgebraicFamily family_from_clone(const Structure& a, TermClone clone, const Limits& limits) {
  AlgebraicFamily fam;
  fam.k = a.k();
  fam.arity = clone.arity;
  fam.exact = clone.exact;

  const std::uint64_t points =
      pow_u64(static_cast<std::uint64_t>(fam.k), static_cast<unsigned>(fam.arity));
  const std::size_t n_members = clone.size();
  const std::uint64_t all_possible = points < 63 ? (1ull << points) : 0;

  // Discovery list: equalizers first, then intersection closure by worklist.
  std::vector<Relation> found;
  std::vector<AlgebraicFamily::Prov> prov;

  auto guard = [&]() {
    if (found.size() > limits.max_family_members) {
      throw ResourceError("relation-family member guard");
    }
    limits.check_memory(static_cast<std::uint64_t>(found.size()) * (points / 8 + 48),
                        "algebraic family");
  };

  if (points <= 64) {
    const std::uint64_t full = points == 64 ? ~0ull : (1ull << points) - 1;
    MaskSet seen(points);
    std::vector<std::uint64_t> masks;

    auto add = [&](std::uint64_t mask, AlgebraicFamily::Prov p) {
      if (!seen.insert(mask)) return;
      masks.push_back(mask);
      found.push_back(Relation::from_mask(fam.k, fam.arity, mask));
      prov.push_back(std::move(p));
      guard();
    };

    add(full, AlgebraicFamily::Prov{0, 0, -1, -1});

    // Per-value point masks: a pair's agreement set comes out in k words.
    std::vector<std::vector<std::uint64_t>> value_mask(
        static_cast<std::size_t>(fam.k), std::vector<std::uint64_t>(n_members, 0));
    for (std::size_t i = 0; i < n_members; ++i) {
      const auto& t = clone.tables[i];
      for (std::uint64_t p = 0; p < points; ++p) value_mask[t[p]][i] |= 1ull << p;
    }
    for (std::size_t i = 0; i < n_members; ++i) {
      if (all_possible != 0 && seen.size() >= all_possible) break;
      for (std::size_t j = i + 1; j < n_members; ++j) {
        std::uint64_t agree = 0;
        for (int v = 0; v < fam.k; ++v) {
          agree |= value_mask[static_cast<std::size_t>(v)][i] &
                   value_mask[static_cast<std::size_t>(v)][j];
        }
        if (!seen.contains(agree)) {
          add(agree, AlgebraicFamily::Prov{static_cast<int>(i), static_cast<int>(j), -1, -1});
          if (all_possible != 0 && seen.size() >= all_possible) break;
        }
      }
    }

    for (std::size_t next = 0; next < masks.size(); ++next) {
      if (all_possible != 0 && seen.size() >= all_possible) break;
      for (std::size_t other = 0; other < next; ++other) {
        std::uint64_t meet = masks[next] & masks[other];
        if (!seen.contains(meet)) {
          add(meet,
              AlgebraicFamily::Prov{-1, -1, static_cast<int>(next), static_cast<int>(other)});
        }
      }
    }
  } else {
    std::unordered_set<Relation, RelationHash> seen;

    {
      Relation full = Relation::full(fam.k, fam.arity);
      seen.insert(full);
      found.push_back(std::move(full));
      prov.push_back(AlgebraicFamily::Prov{0, 0, -1, -1});
    }
    for (std::size_t i = 0; i < n_members; ++i) {
      for (std::size_t j = i + 1; j < n_members; ++j) {
        Relation eq(fam.k, fam.arity);
        const auto& ti = clone.tables[i];
        const auto& tj = clone.tables[j];
        for (std::uint64_t p = 0; p < points; ++p) {
          if (ti[p] == tj[p]) eq.set(p);
        }
        if (seen.insert(eq).second) {
          found.push_back(eq);
          prov.push_back(AlgebraicFamily::Prov{static_cast<int>(i), static_cast<int>(j), -1, -1});
          guard();
        }
      }
    }

    for (std::size_t next = 0; next < found.size(); ++next) {
      for (std::size_t other = 0; other < next; ++other) {
        Relation meet = found[next] & found[other];
        if (seen.insert(meet).second) {
          found.push_back(std::move(meet));
          prov.push_back(
              AlgebraicFamily::Prov{-1, -1, static_cast<int>(next), static_cast<int>(other)});
          guard();
        }
      }
    }
  }

  fam.provenance = std::move(prov);
  fam.members = found;
  std::vector<int> order(fam.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&found](int x, int y) {
    return relation_less(found[static_cast<std::size_t>(x)], found[static_cast<std::size_t>(y)]);
  });
  fam.discovery_index.resize(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fam.members[pos] = found[static_cast<std::size_t>(order[pos])];
    fam.discovery_index[pos] = order[pos];
  }
  fam.clone = std::move(clone);
  fam.build_index();
  return fam;
}

}  // namespace

AlgebraicFamily algebraic_family(const Structure& a, int arity, const Limits& limits) {
  return family_from_clone(a, term_clone(a, arity, limits), limits);
}

AlgebraicFamily algebraic_family_depth_bounded(const Structure& a, int arity, int depth,
                                               const Limits& limits) {
  return family_from_clone(a, term_clone_depth_bounded(a, arity, depth, limits), limits);
}

std::string EDReport::to_text() const {
  std::string out = "ed-report\n";
  out += "verdict: ";
  out += passed() ? "passes_at_bound" : "fails";
  out += "\nbound: " + std::to_string(bound) + "\n";
  if (!passed()) {
    out += "counterexample-arity: " + std::to_string(counterexample_arity) + "\n";
    out += "S: " + defgeo::to_text(*s) + "\n";
    out += "T: " + defgeo::to_text(*t) + "\n";
    out += "union: " + defgeo::to_text(*u) + "\n";
  }
  return out;
}

EDReport ed_check(const Structure& a, int max_arity, const Limits& limits,
                  const AlgebraicFamily* precomputed) {
  if (max_arity < 1) throw std::invalid_argument("ed_check bound must be >= 1");
  EDReport report;
  report.bound = max_arity;

  for (int n = 1; n <= max_arity; ++n) {
    const bool reuse = precomputed != nullptr && precomputed->arity == n &&
                       precomputed->k == a.k() && precomputed->exact;
    AlgebraicFamily fam = reuse ? *precomputed : algebraic_family(a, n, limits);
    const std::uint64_t points =
        pow_u64(static_cast<std::uint64_t>(a.k()), static_cast<unsigned>(n));
    const std::size_t count = fam.members.size();

    if (points <= 64) {
      std::vector<std::uint64_t> masks(count);
      MaskSet membership(points);
      for (std::size_t i = 0; i < count; ++i) {
        masks[i] = fam.members[i].low_mask();
        membership.insert(masks[i]);
      }
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i; j < count; ++j) {
          std::uint64_t u = masks[i] | masks[j];
          if (!membership.contains(u)) {
            report.verdict = EDReport::Verdict::fails;
            report.counterexample_arity = n;
            report.s = fam.members[i];
            report.t = fam.members[j];
            report.u = Relation::from_mask(a.k(), n, u);
            return report;
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i; j < count; ++j) {
          Relation u = fam.members[i] | fam.members[j];
          if (!fam.contains(u)) {
            report.verdict = EDReport::Verdict::fails;
            report.counterexample_arity = n;
            report.s = fam.members[i];
            report.t = fam.members[j];
            report.u = std::move(u);
            return report;
          }
        }
      }
    }
  }
  return report;
}

}  // namespace defgeo
