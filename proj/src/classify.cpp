#include "defgeo/classify.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "defgeo/errors.hpp"

namespace defgeo {

std::string to_string(ClassifyMode mode) {
  return mode == ClassifyMode::algebraic ? "algebraic" : "l0";
}

std::string theoretical_bound_text(int k) {
  // 2^(2^(k^(k^2))), printed with the inner tower collapsed when it fits.
  std::uint64_t inner = pow_u64(static_cast<std::uint64_t>(k), static_cast<unsigned>(k * k));
  if (inner <= 62) {
    return "2^" + std::to_string(1ull << inner);
  }
  return "2^(2^" + std::to_string(inner) + ")";
}

std::vector<Relation> atomic_seeds(const Structure& a, int m, const ClassifyOptions& opts) {
  TermClone clone = opts.approximate_depth > 0
                        ? term_clone_depth_bounded(a, m, opts.approximate_depth, opts.def.limits)
                        : term_clone(a, m, opts.def.limits);
  std::vector<Relation> seeds = equalizer_relations(clone, opts.def.limits);

  // Relation atoms, when the structure declares relations: every m-ary minor
  // of each declared relation's extension.
  if (!a.rels().empty()) {
    std::unordered_set<Relation, RelationHash> seen(seeds.begin(), seeds.end());
    for (const RelTable& rel : a.rels()) {
      Relation base(a.k(), rel.arity);
      for (const auto& idx : rel.index) base.set(idx);
      std::vector<int> sigma(static_cast<std::size_t>(rel.arity), 1);
      std::uint64_t maps =
          pow_u64(static_cast<std::uint64_t>(m), static_cast<unsigned>(rel.arity));
      if (maps > opts.def.limits.max_seed_maps) throw ResourceError("seed-map guard");
      while (true) {
        Relation seed = minor(base, MinorMap{rel.arity, m, sigma});
        if (seen.insert(seed).second) seeds.push_back(std::move(seed));
        int slot = rel.arity - 1;
        while (slot >= 0) {
          std::size_t s = static_cast<std::size_t>(slot);
          if (++sigma[s] <= m) break;
          sigma[s] = 1;
          --slot;
        }
        if (slot < 0) break;
      }
    }
    std::sort(seeds.begin(), seeds.end(), relation_less);
  }
  return seeds;
}

namespace {

struct ItemResult {
  ClassifiedItem item;
  DefFamily family;
};

ItemResult classify_one(const Structure& a, ClassifyMode mode, const ClassifyOptions& opts) {
  const int m = a.k() * a.k();
  ItemResult out;
  out.item.name = a.name();

  ClosureMode closure_mode =
      mode == ClassifyMode::algebraic ? ClosureMode::lattice : ClosureMode::boolean;

  if (mode == ClassifyMode::algebraic && opts.approximate_depth == 0) {
    // The m-ary intersection-closed family generates the same lattice as the
    // raw equalizers and doubles as the top arity of the union check.
    AlgebraicFamily fam_m = algebraic_family(a, m, opts.def.limits);
    out.item.approximate = false;
    out.family = def_family_from_relations(a.k(), m, closure_mode, fam_m.members, opts.def,
                                           /*seeds_minor_closed=*/true);
    out.item.fp = fingerprint_of_family(out.family);
    out.item.ed = ed_check(a, opts.ed_bound, opts.def.limits, &fam_m);
    return out;
  }

  TermClone clone = opts.approximate_depth > 0
                        ? term_clone_depth_bounded(a, m, opts.approximate_depth, opts.def.limits)
                        : term_clone(a, m, opts.def.limits);
  out.item.approximate = !clone.exact;

  std::vector<Relation> seeds = equalizer_relations(clone, opts.def.limits);
  if (mode == ClassifyMode::l0 && !a.rels().empty()) {
    seeds = atomic_seeds(a, m, opts);
  }

  // Equalizer relations are closed under m->m minors (composing the terms
  // with projections stays inside the clone), so seeding skips the map
  // enumeration.  Relation atoms were minor-expanded above.
  out.family = def_family_from_relations(a.k(), m, closure_mode, seeds, opts.def,
                                         /*seeds_minor_closed=*/true);
  out.item.fp = fingerprint_of_family(out.family);
  // Approximate algebraic mode skips the equational-domain gate: verdicts
  // are inequivalence-only and nothing merges as "equivalent".
  return out;
}

}  // namespace

ClassificationReport classify(const std::vector<Structure>& structures, ClassifyMode mode,
                              const ClassifyOptions& opts) {
  if (structures.empty()) throw std::invalid_argument("no structures to classify");
  const int k = structures.front().k();
  for (const Structure& s : structures) {
    if (s.k() != k) {
      throw std::invalid_argument("mixed universe sizes: '" + s.name() + "' has k=" +
                                  std::to_string(s.k()) + ", expected " + std::to_string(k));
    }
  }
  if (mode == ClassifyMode::algebraic && k >= 3 && opts.approximate_depth == 0) {
    throw ResourceError("term-clone table guard",
                        "algebraic classification at k>=3 needs --approximate-depth");
  }

  // Sort by name up front; the report is ordered by input name throughout.
  std::vector<const Structure*> ordered;
  ordered.reserve(structures.size());
  for (const Structure& s : structures) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Structure* x, const Structure* y) { return x->name() < y->name(); });

  // Fan out per-structure jobs; assembly stays in name order.
  std::vector<std::future<ItemResult>> jobs;
  jobs.reserve(ordered.size());
  for (const Structure* s : ordered) {
    jobs.push_back(std::async(std::launch::async,
                              [s, mode, &opts]() { return classify_one(*s, mode, opts); }));
  }

  ClassificationReport report;
  report.mode = mode;
  report.k = k;
  report.ed_bound = opts.ed_bound;
  report.generator_arity_cap =
      opts.def.max_generator_arity > 0 ? opts.def.max_generator_arity : k * k;
  report.bound_text = theoretical_bound_text(k);

  std::vector<DefFamily> families;
  families.reserve(jobs.size());
  for (auto& job : jobs) {
    ItemResult r = job.get();
    report.approximate = report.approximate || r.item.approximate;
    report.items.push_back(std::move(r.item));
    families.push_back(std::move(r.family));
  }

  // Bucket by fingerprint bytes; hashes are display only.
  std::map<std::string, std::vector<int>> buckets;
  for (int i = 0; i < static_cast<int>(report.items.size()); ++i) {
    const ClassifiedItem& item = report.items[static_cast<std::size_t>(i)];
    if (mode == ClassifyMode::algebraic && item.ed.has_value() && !item.ed->passed()) {
      report.undetermined.push_back(i);
      continue;
    }
    buckets[item.fp.serialize()].push_back(i);
  }
  for (auto& [bytes, members] : buckets) {
    (void)bytes;
    report.classes.push_back(std::move(members));
  }
  std::sort(report.classes.begin(), report.classes.end(),
            [&report](const std::vector<int>& x, const std::vector<int>& y) {
              return report.items[static_cast<std::size_t>(x.front())].name <
                     report.items[static_cast<std::size_t>(y.front())].name;
            });

  // One witness per class pair, confirmed to sit in exactly one family.
  for (std::size_t a = 0; a < report.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < report.classes.size(); ++b) {
      int ia = report.classes[a].front();
      int ib = report.classes[b].front();
      const DefFamily& fa = families[static_cast<std::size_t>(ia)];
      const DefFamily& fb = families[static_cast<std::size_t>(ib)];
      ClassificationReport::PairWitness w;
      w.class_a = static_cast<int>(a);
      w.class_b = static_cast<int>(b);
      bool found = false;
      for (const Relation& v : fa.closures) {
        if (!fb.member(v)) {
          w.witness = v;
          w.side = 1;
          found = true;
          break;
        }
      }
      if (!found) {
        for (const Relation& v : fb.closures) {
          if (!fa.member(v)) {
            w.witness = v;
            w.side = 2;
            found = true;
            break;
          }
        }
      }
      if (!found && fa.empty_flag != fb.empty_flag) {
        w.witness = Relation(k, k * k);
        w.side = fa.empty_flag ? 1 : 2;
        found = true;
      }
      if (!found) throw std::logic_error("distinct classes without a witness");
      report.witnesses.push_back(std::move(w));
    }
  }
  return report;
}

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace

std::string ClassificationReport::to_text() const {
  std::string out = "defgeo-report v1\n";
  out += "mode: " + to_string(mode) + "\n";
  out += "k: " + std::to_string(k) + "\n";
  out += "generator-arity-cap: " + std::to_string(generator_arity_cap) + "\n";
  out += "approximate: ";
  out += approximate ? "yes" : "no";
  out += "\n";
  out += "theoretical-bound: " + bound_text + "\n";
  out += "items: " + std::to_string(items.size()) + "\n";
  for (const ClassifiedItem& item : items) {
    out += "item " + item.name + " fp=" + hex64(item.fp.digest());
    if (item.ed.has_value()) {
      out += item.ed->passed()
                 ? " ed=passes_at_bound(" + std::to_string(item.ed->bound) + ")"
                 : " ed=fails(arity=" + std::to_string(item.ed->counterexample_arity) + ")";
    }
    if (item.approximate) out += " approximate";
    out += "\n";
  }
  out += "classes: " + std::to_string(classes.size()) + "\n";
  if (approximate) {
    out += "note: approximate fingerprints; distinct classes are inequivalent, equal"
           " fingerprints prove nothing\n";
  }
  for (const auto& cls : classes) {
    out += "class " + items[static_cast<std::size_t>(cls.front())].name + ":";
    for (int i : cls) {
      out += ' ';
      out += items[static_cast<std::size_t>(i)].name;
    }
    out += "\n";
  }
  out += "undetermined: " + std::to_string(undetermined.size()) + "\n";
  for (int i : undetermined) {
    const ClassifiedItem& item = items[static_cast<std::size_t>(i)];
    out += "undetermined " + item.name + " fp=" + hex64(item.fp.digest());
    if (item.ed.has_value() && !item.ed->passed()) {
      out += " ed=fails(arity=" + std::to_string(item.ed->counterexample_arity) + ")";
    }
    out += "\n";
  }
  out += "witnesses: " + std::to_string(witnesses.size()) + "\n";
  for (const PairWitness& w : witnesses) {
    out += "witness " + items[static_cast<std::size_t>(classes[static_cast<std::size_t>(w.class_a)].front())].name +
           "|" + items[static_cast<std::size_t>(classes[static_cast<std::size_t>(w.class_b)].front())].name +
           ": side=" + std::to_string(w.side) + " " + defgeo::to_text(w.witness) + "\n";
  }
  out += "end\n";
  return out;
}

std::string ClassificationReport::fingerprints_text() const {
  std::string out;
  for (const ClassifiedItem& item : items) {
    out += "=== " + item.name + " ===\n";
    out += item.fp.serialize();
  }
  return out;
}

}  // namespace defgeo
