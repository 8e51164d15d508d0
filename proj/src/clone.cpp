#include "defgeo/clone.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "defgeo/errors.hpp"
#include "defgeo/eval.hpp"
#include "defgeo/maskset.hpp"

namespace defgeo {

int TermClone::find(const std::vector<Elem>& table) const {
  auto it = index_.find(key(table));
  return it == index_.end() ? -1 : it->second;
}

bool TermClone::insert(std::vector<Elem> table, Trace trace) {
  auto [it, fresh] = index_.emplace(key(table), static_cast<int>(tables.size()));
  if (!fresh) return false;
  tables.push_back(std::move(table));
  traces.push_back(std::move(trace));
  return true;
}

namespace {

std::optional<Term> build_witness(const TermClone& clone, const Structure& a, int i,
                                  std::size_t& budget) {
  if (budget == 0) return std::nullopt;
  --budget;
  const TermClone::Trace& tr = clone.traces[static_cast<std::size_t>(i)];
  if (tr.var > 0) return Term::variable(tr.var);
  std::vector<Term> args;
  args.reserve(tr.args.size());
  for (int child : tr.args) {
    auto t = build_witness(clone, a, child, budget);
    if (!t.has_value()) return std::nullopt;
    args.push_back(std::move(*t));
  }
  return Term::apply(a.ops()[static_cast<std::size_t>(tr.op)].name, std::move(args));
}

}  // namespace

std::optional<Term> TermClone::witness(const Structure& a, int i, std::size_t max_nodes) const {
  if (i < 0 || i >= static_cast<int>(tables.size())) {
    throw std::invalid_argument("witness index out of range");
  }
  std::size_t budget = max_nodes;
  return build_witness(*this, a, i, budget);
}

std::string TermClone::witness_text(const Structure& a, int i, std::size_t max_nodes) const {
  auto t = witness(a, i, max_nodes);
  return t.has_value() ? to_text(*t) : "term#" + std::to_string(i);
}

namespace {

struct GenContext {
  const Structure& a;
  int arity;
  std::uint64_t points;  // k^arity, the table length
  const Limits& limits;
  std::uint64_t total_functions;  // k^(k^arity) when representable, else 0

  void check_budget(std::size_t members) const {
    if (members > limits.max_clone_tables) {
      throw ResourceError("term-clone table guard",
                          "more than " + std::to_string(limits.max_clone_tables) + " tables");
    }
    limits.check_memory(static_cast<std::uint64_t>(members) * (points + 32), "term clone");
  }

  bool saturated(std::size_t members) const {
    return total_functions != 0 && members >= total_functions;
  }
};

GenContext make_context(const Structure& a, int arity, const Limits& limits) {
  if (arity < 1) throw std::invalid_argument("term clone arity must be >= 1");
  std::uint64_t points = pow_u64(static_cast<std::uint64_t>(a.k()), static_cast<unsigned>(arity));
  limits.check_memory(points * 4, "term clone tables");
  std::uint64_t total = 0;
  long double bits = static_cast<long double>(points) * std::log2(static_cast<long double>(a.k()));
  if (bits < 63.0L) {
    total = pow_u64(static_cast<std::uint64_t>(a.k()), static_cast<unsigned>(points));
  }
  return GenContext{a, arity, points, limits, total};
}

std::vector<Elem> projection_table(const GenContext& ctx, int var) {
  const int k = ctx.a.k();
  std::vector<Elem> table(ctx.points);
  std::vector<Elem> tuple(static_cast<std::size_t>(ctx.arity));
  for (std::uint64_t idx = 0; idx < ctx.points; ++idx) {
    index_to_tuple(idx, k, ctx.arity, tuple);
    table[idx] = tuple[static_cast<std::size_t>(var - 1)];
  }
  return table;
}

std::vector<Elem> compose_bytes(const OpTable& op, std::span<const int> args,
                                const std::vector<std::vector<Elem>>& tables,
                                const GenContext& ctx) {
  std::vector<Elem> out(ctx.points);
  if (op.arity == 0) {
    std::fill(out.begin(), out.end(), op.table[0]);
    return out;
  }
  const int k = ctx.a.k();
  for (std::uint64_t p = 0; p < ctx.points; ++p) {
    std::uint64_t idx = 0;
    for (int slot = 0; slot < op.arity; ++slot) {
      idx = idx * static_cast<std::uint64_t>(k) +
            tables[static_cast<std::size_t>(args[static_cast<std::size_t>(slot)])][p];
    }
    out[p] = op.table[idx];
  }
  return out;
}

// Enumerate argument vectors over [0..target] that use `target` in at least
// one slot, each exactly once: choose the nonempty set of slots pinned to
// `target`, let the remaining slots range over [0..target-1].
template <typename Fn>
bool for_each_new_combination(int op_arity, int target, Fn&& fn) {
  std::vector<int> args(static_cast<std::size_t>(op_arity), 0);
  for (unsigned pinned = 1; pinned < (1u << op_arity); ++pinned) {
    std::vector<int> free_slots;
    for (int s = 0; s < op_arity; ++s) {
      if ((pinned >> s) & 1) {
        args[static_cast<std::size_t>(s)] = target;
      } else {
        args[static_cast<std::size_t>(s)] = 0;
        free_slots.push_back(s);
      }
    }
    if (!free_slots.empty() && target == 0) continue;  // no values below target
    while (true) {
      if (!fn(args)) return false;
      std::size_t i = free_slots.size();
      while (i > 0) {
        --i;
        std::size_t s = static_cast<std::size_t>(free_slots[i]);
        if (++args[s] < target) break;
        args[s] = 0;
        if (i == 0) {
          i = static_cast<std::size_t>(-1);
          break;
        }
      }
      if (free_slots.empty() || i == static_cast<std::size_t>(-1)) break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Bit-parallel generation for k == 2 with tables of at most 64 points.

std::uint64_t compose_mask(const OpTable& op, std::span<const int> args,
                           const std::vector<std::uint64_t>& masks, std::uint64_t full) {
  if (op.arity == 0) return op.table[0] != 0 ? full : 0;
  std::uint64_t out = 0;
  for (unsigned entry = 0; entry < (1u << op.arity); ++entry) {
    if (op.table[entry] == 0) continue;
    std::uint64_t m = full;
    for (int j = 0; j < op.arity && m != 0; ++j) {
      std::uint64_t aj = masks[static_cast<std::size_t>(args[static_cast<std::size_t>(j)])];
      // table entries are row-major, argument 1 most significant
      m &= ((entry >> (op.arity - 1 - j)) & 1) != 0 ? aj : ~aj;
    }
    out |= m;
  }
  return out;
}

std::vector<Elem> mask_to_table(std::uint64_t mask, std::uint64_t points) {
  std::vector<Elem> out(points);
  for (std::uint64_t p = 0; p < points; ++p) out[p] = static_cast<Elem>((mask >> p) & 1);
  return out;
}

TermClone term_clone_masks(const Structure& a, const GenContext& ctx) {
  TermClone clone;
  clone.k = 2;
  clone.arity = ctx.arity;
  clone.exact = true;

  const std::uint64_t full = ctx.points == 64 ? ~0ull : (1ull << ctx.points) - 1;
  std::vector<std::uint64_t> masks;
  MaskSet seen(ctx.points);

  // Membership is tested before any trace is materialized; a duplicate mask
  // costs one bit lookup and nothing else.
  auto record = [&](std::uint64_t mask, int var, int op, std::vector<int> args) {
    masks.push_back(mask);
    clone.insert(mask_to_table(mask, ctx.points), TermClone::Trace{var, op, std::move(args)});
  };
  auto insert = [&](std::uint64_t mask, int var, int op, std::initializer_list<int> args) {
    if (!seen.insert(mask)) return false;
    record(mask, var, op, std::vector<int>(args));
    return true;
  };

  for (int v = 1; v <= ctx.arity; ++v) {
    std::uint64_t proj = 0;
    std::vector<Elem> tuple(static_cast<std::size_t>(ctx.arity));
    for (std::uint64_t idx = 0; idx < ctx.points; ++idx) {
      index_to_tuple(idx, 2, ctx.arity, tuple);
      if (tuple[static_cast<std::size_t>(v - 1)] != 0) proj |= 1ull << idx;
    }
    insert(proj, v, -1, {});
  }
  for (int oi = 0; oi < static_cast<int>(a.ops().size()); ++oi) {
    if (a.ops()[static_cast<std::size_t>(oi)].arity == 0) {
      insert(compose_mask(a.ops()[static_cast<std::size_t>(oi)], {}, masks, full), 0, oi, {});
    }
  }
  ctx.check_budget(clone.size());

  for (int next = 0; next < static_cast<int>(masks.size()); ++next) {
    if (ctx.saturated(masks.size())) break;
    bool stop = false;
    for (int oi = 0; oi < static_cast<int>(a.ops().size()) && !stop; ++oi) {
      const OpTable& op = a.ops()[static_cast<std::size_t>(oi)];
      if (op.arity == 0) continue;

      if (op.arity == 2) {
        // Direct pair loop; the table cases become four precomputed masks so
        // a composition is a handful of word operations.
        const std::uint64_t f00 = op.table[0] != 0 ? full : 0;
        const std::uint64_t f01 = op.table[1] != 0 ? full : 0;
        const std::uint64_t f10 = op.table[2] != 0 ? full : 0;
        const std::uint64_t f11 = op.table[3] != 0 ? full : 0;
        auto apply = [&](std::uint64_t x, std::uint64_t y) {
          return (f00 & ~x & ~y) | (f01 & ~x & y) | (f10 & x & ~y) | (f11 & x & y);
        };
        const std::uint64_t t = masks[static_cast<std::size_t>(next)];
        for (int other = 0; other <= next && !stop; ++other) {
          const std::uint64_t o = masks[static_cast<std::size_t>(other)];
          std::uint64_t r1 = apply(t, o);
          if (seen.insert(r1)) {
            record(r1, 0, oi, {next, other});
            ctx.check_budget(clone.size());
            if (ctx.saturated(masks.size())) stop = true;
          }
          if (stop || other == next) break;
          std::uint64_t r2 = apply(o, t);
          if (seen.insert(r2)) {
            record(r2, 0, oi, {other, next});
            ctx.check_budget(clone.size());
            if (ctx.saturated(masks.size())) stop = true;
          }
        }
        continue;
      }

      bool keep_going = for_each_new_combination(op.arity, next, [&](const std::vector<int>& args) {
        std::uint64_t out = compose_mask(op, args, masks, full);
        if (seen.insert(out)) {
          record(out, 0, oi, args);
          ctx.check_budget(clone.size());
          if (ctx.saturated(masks.size())) return false;
        }
        return true;
      });
      if (!keep_going) stop = true;
    }
    if (stop) break;
  }
  return clone;
}

}  // namespace

TermClone term_clone(const Structure& a, int arity, const Limits& limits) {
  GenContext ctx = make_context(a, arity, limits);
  if (a.k() == 2 && ctx.points <= 64) return term_clone_masks(a, ctx);

  TermClone clone;
  clone.k = a.k();
  clone.arity = arity;
  clone.exact = true;

  for (int v = 1; v <= arity; ++v) {
    clone.insert(projection_table(ctx, v), TermClone::Trace{v, -1, {}});
  }
  for (int oi = 0; oi < static_cast<int>(a.ops().size()); ++oi) {
    if (a.ops()[static_cast<std::size_t>(oi)].arity == 0) {
      clone.insert(compose_bytes(a.ops()[static_cast<std::size_t>(oi)], {}, clone.tables, ctx),
                   TermClone::Trace{0, oi, {}});
    }
  }
  ctx.check_budget(clone.size());

  // Worklist: process member `next` against everything discovered before it;
  // every argument vector over the final clone is covered exactly once by
  // the iteration whose `next` equals the vector's maximum index.
  for (int next = 0; next < static_cast<int>(clone.size()); ++next) {
    if (ctx.saturated(clone.size())) break;
    for (int oi = 0; oi < static_cast<int>(a.ops().size()); ++oi) {
      const OpTable& op = a.ops()[static_cast<std::size_t>(oi)];
      if (op.arity == 0) continue;
      bool keep_going = for_each_new_combination(op.arity, next, [&](const std::vector<int>& args) {
        std::vector<Elem> table = compose_bytes(op, args, clone.tables, ctx);
        if (clone.insert(std::move(table), TermClone::Trace{0, oi, args})) {
          ctx.check_budget(clone.size());
          if (ctx.saturated(clone.size())) return false;
        }
        return true;
      });
      if (!keep_going) break;
    }
  }
  return clone;
}

TermClone term_clone_depth_bounded(const Structure& a, int arity, int depth,
                                   const Limits& limits) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  GenContext ctx = make_context(a, arity, limits);
  TermClone clone;
  clone.k = a.k();
  clone.arity = arity;

  for (int v = 1; v <= arity; ++v) {
    clone.insert(projection_table(ctx, v), TermClone::Trace{v, -1, {}});
  }

  std::size_t generation_start = 0;
  bool reached_fixpoint = false;
  for (int d = 0; d < depth && !reached_fixpoint; ++d) {
    std::size_t generation_end = clone.size();
    bool added = false;
    for (int oi = 0; oi < static_cast<int>(a.ops().size()); ++oi) {
      const OpTable& op = a.ops()[static_cast<std::size_t>(oi)];
      if (op.arity == 0) {
        if (clone.insert(compose_bytes(op, {}, clone.tables, ctx), TermClone::Trace{0, oi, {}})) {
          added = true;
        }
        continue;
      }
      std::vector<int> args(static_cast<std::size_t>(op.arity), 0);
      while (true) {
        bool touches_new = false;
        for (int v : args) {
          if (v >= static_cast<int>(generation_start)) {
            touches_new = true;
            break;
          }
        }
        if (touches_new) {
          std::vector<Elem> table = compose_bytes(op, args, clone.tables, ctx);
          if (clone.insert(std::move(table), TermClone::Trace{0, oi, args})) {
            added = true;
            ctx.check_budget(clone.size());
          }
        }
        int slot = op.arity - 1;
        while (slot >= 0) {
          std::size_t s = static_cast<std::size_t>(slot);
          if (++args[s] < static_cast<int>(generation_end)) break;
          args[s] = 0;
          --slot;
        }
        if (slot < 0) break;
      }
    }
    generation_start = generation_end;
    if (!added || ctx.saturated(clone.size())) reached_fixpoint = true;
  }
  clone.exact = reached_fixpoint;
  return clone;
}

Relation equation_solution(const Term& s, const Term& t, int arity, const Structure& a,
                           const Limits& limits) {
  if (arity < 1) throw std::invalid_argument("equation_solution arity must be >= 1");
  int needed = std::max(s.max_var(), t.max_var());
  if (needed > arity) {
    throw std::invalid_argument("term variable x" + std::to_string(needed) + " beyond arity " +
                                std::to_string(arity));
  }
  if (arity > limits.arity_cap(a.k())) {
    throw ResourceError("arity cap", "arity " + std::to_string(arity));
  }
  const int k = a.k();
  Relation out(k, arity);
  std::vector<Elem> env(static_cast<std::size_t>(arity), 0);
  std::uint64_t total = out.point_count();
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (eval_term(s, env, a) == eval_term(t, env, a)) out.set(idx);
    for (int slot = arity - 1; slot >= 0; --slot) {
      std::size_t sl = static_cast<std::size_t>(slot);
      if (++env[sl] < k) break;
      env[sl] = 0;
    }
  }
  return out;
}

std::vector<Relation> equalizer_relations(const TermClone& clone, const Limits& limits) {
  const std::uint64_t points =
      pow_u64(static_cast<std::uint64_t>(clone.k), static_cast<unsigned>(clone.arity));
  const std::size_t n_members = clone.size();
  const std::uint64_t all_possible = points < 63 ? (1ull << points) : 0;

  std::vector<Relation> out;
  if (points <= 64) {
    // Per-value point masks let a pair's agreement set come out in k words.
    std::vector<std::vector<std::uint64_t>> value_mask(
        static_cast<std::size_t>(clone.k), std::vector<std::uint64_t>(n_members, 0));
    for (std::size_t i = 0; i < n_members; ++i) {
      const auto& t = clone.tables[i];
      for (std::uint64_t p = 0; p < points; ++p) {
        value_mask[t[p]][i] |= 1ull << p;
      }
    }
    const std::uint64_t full = points == 64 ? ~0ull : (1ull << points) - 1;
    MaskSet seen(points);
    std::uint64_t distinct = 0;
    auto add = [&](std::uint64_t mask) {
      if (seen.insert(mask)) {
        out.push_back(Relation::from_mask(clone.k, clone.arity, mask));
        ++distinct;
        if (out.size() > limits.max_family_members) {
          throw ResourceError("relation-family member guard");
        }
      }
    };
    add(full);
    for (std::size_t i = 0; i < n_members; ++i) {
      if (all_possible != 0 && distinct >= all_possible) break;
      for (std::size_t j = i + 1; j < n_members; ++j) {
        std::uint64_t agree = 0;
        for (int v = 0; v < clone.k; ++v) {
          agree |= value_mask[static_cast<std::size_t>(v)][i] &
                   value_mask[static_cast<std::size_t>(v)][j];
        }
        add(agree);
        if (all_possible != 0 && distinct >= all_possible) break;
      }
    }
  } else {
    std::unordered_set<Relation, RelationHash> seen;
    auto add = [&](Relation r) {
      if (seen.insert(r).second) {
        out.push_back(std::move(r));
        if (out.size() > limits.max_family_members) {
          throw ResourceError("relation-family member guard");
        }
        limits.check_memory(static_cast<std::uint64_t>(out.size()) * (points / 8 + 48),
                            "equalizer relations");
      }
    };
    add(Relation::full(clone.k, clone.arity));
    for (std::size_t i = 0; i < n_members; ++i) {
      for (std::size_t j = i + 1; j < n_members; ++j) {
        Relation eq(clone.k, clone.arity);
        const auto& ti = clone.tables[i];
        const auto& tj = clone.tables[j];
        for (std::uint64_t p = 0; p < points; ++p) {
          if (ti[p] == tj[p]) eq.set(p);
        }
        add(std::move(eq));
      }
    }
  }
  std::sort(out.begin(), out.end(), relation_less);
  return out;
}

}  // namespace defgeo
