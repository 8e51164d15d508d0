#include "defgeo/eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "defgeo/errors.hpp"

namespace defgeo {

namespace {

Elem eval_term_env(const Term& t, std::vector<Elem>& env, const Structure& a) {
  if (t.is_var()) {
    return env[static_cast<std::size_t>(t.var - 1)];
  }
  const OpTable* op = a.find_op(t.op);
  if (op == nullptr) throw std::invalid_argument("unknown operation '" + t.op + "'");
  std::uint64_t idx = 0;
  for (const Term& arg : t.args) {
    idx = idx * static_cast<std::uint64_t>(a.k()) + eval_term_env(arg, env, a);
  }
  return op->table[idx];
}

bool satisfies_env(const Formula& phi, std::vector<Elem>& env, const Structure& a) {
  switch (phi.kind) {
    case Formula::Kind::equality:
      return eval_term_env(phi.terms[0], env, a) == eval_term_env(phi.terms[1], env, a);
    case Formula::Kind::atom: {
      const RelTable* rel = a.find_rel(phi.rel);
      if (rel == nullptr) throw std::invalid_argument("unknown relation '" + phi.rel + "'");
      std::vector<Elem> tuple(phi.terms.size());
      for (std::size_t i = 0; i < phi.terms.size(); ++i) {
        tuple[i] = eval_term_env(phi.terms[i], env, a);
      }
      return rel->contains(tuple, a.k());
    }
    case Formula::Kind::conj:
      for (const Formula& c : phi.children) {
        if (!satisfies_env(c, env, a)) return false;
      }
      return true;
    case Formula::Kind::disj:
      for (const Formula& c : phi.children) {
        if (satisfies_env(c, env, a)) return true;
      }
      return false;
    case Formula::Kind::negation:
      return !satisfies_env(phi.children[0], env, a);
    case Formula::Kind::exists:
    case Formula::Kind::forall: {
      std::size_t slot = static_cast<std::size_t>(phi.bound_var - 1);
      Elem saved = env[slot];
      bool result = phi.kind == Formula::Kind::forall;
      for (int v = 0; v < a.k(); ++v) {
        env[slot] = static_cast<Elem>(v);
        bool hit = satisfies_env(phi.children[0], env, a);
        if (phi.kind == Formula::Kind::exists && hit) {
          result = true;
          break;
        }
        if (phi.kind == Formula::Kind::forall && !hit) {
          result = false;
          break;
        }
      }
      env[slot] = saved;
      return result;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Elem eval_term(const Term& t, std::span<const Elem> assignment, const Structure& a) {
  std::vector<Elem> env(assignment.begin(), assignment.end());
  std::size_t need = static_cast<std::size_t>(std::max(t.max_var(), 1));
  if (env.size() < need) env.resize(need, 0);
  return eval_term_env(t, env, a);
}

bool satisfies(const Formula& phi, std::span<const Elem> assignment, const Structure& a) {
  std::vector<Elem> env(assignment.begin(), assignment.end());
  std::size_t need = static_cast<std::size_t>(std::max(max_var_index(phi), 1));
  if (env.size() < need) env.resize(need, 0);
  return satisfies_env(phi, env, a);
}

Relation solution_set(const Formula& phi, int arity, const Structure& a, const Limits& limits,
                      EvalStats* stats) {
  if (arity < 1) throw std::invalid_argument("solution_set arity must be >= 1");
  std::set<int> fv = free_vars(phi);
  if (!fv.empty() && *fv.rbegin() > arity) {
    throw std::invalid_argument("formula has free variable x" + std::to_string(*fv.rbegin()) +
                                " beyond arity " + std::to_string(arity));
  }
  if (arity > limits.arity_cap(a.k())) {
    throw ResourceError("arity cap", "arity " + std::to_string(arity) + " over universe " +
                                         std::to_string(a.k()));
  }

  const int k = a.k();
  Relation out(k, arity);
  std::size_t env_size =
      static_cast<std::size_t>(std::max(arity, std::max(max_var_index(phi), 1)));
  std::vector<Elem> env(env_size, 0);

  // Odometer over the first `arity` slots, least significant last, so the
  // running index equals tuple_index(env[0..arity)).
  std::uint64_t total = out.point_count();
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (stats != nullptr) ++stats->assignments;
    if (satisfies_env(phi, env, a)) out.set(idx);
    // advance odometer
    for (int slot = arity - 1; slot >= 0; --slot) {
      std::size_t s = static_cast<std::size_t>(slot);
      if (++env[s] < k) break;
      env[s] = 0;
    }
  }
  return out;
}

}  // namespace defgeo
