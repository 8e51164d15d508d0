#include "defgeo/structure.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace defgeo {

bool RelTable::contains(std::span<const Elem> tuple, int k) const {
  std::uint64_t idx = tuple_index(tuple, k);
  return std::binary_search(index.begin(), index.end(), idx);
}

void check_symbol_name(const std::string& name) {
  static const char* keywords[] = {"structure", "universe", "op", "rel", "exists", "forall", "mode"};
  if (name.empty()) throw std::invalid_argument("empty symbol name");
  for (const char* kw : keywords) {
    if (name == kw) throw std::invalid_argument("symbol name '" + name + "' is a keyword");
  }
  if (name[0] == 'x' && name.size() > 1 &&
      std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw std::invalid_argument("symbol name '" + name + "' is reserved for variables");
  }
}

Structure::Structure(std::string name, Universe universe, std::vector<OpTable> ops,
                     std::vector<RelTable> rels)
    : name_(std::move(name)), universe_(universe), ops_(std::move(ops)), rels_(std::move(rels)) {
  if (universe_.size < 1) throw std::invalid_argument("universe size must be >= 1");
  if (universe_.size > 255) throw std::invalid_argument("universe size must be <= 255");
  const int k = universe_.size;

  for (int i = 0; i < static_cast<int>(ops_.size()); ++i) {
    OpTable& op = ops_[static_cast<std::size_t>(i)];
    check_symbol_name(op.name);
    if (op.arity < 0) throw std::invalid_argument("operation arity must be >= 0");
    std::uint64_t want = pow_u64(static_cast<std::uint64_t>(k), static_cast<unsigned>(op.arity));
    if (op.table.size() != want) {
      throw std::invalid_argument("operation '" + op.name + "' table length " +
                                  std::to_string(op.table.size()) + " != " + std::to_string(want));
    }
    for (Elem v : op.table) {
      if (v >= k) throw std::invalid_argument("operation '" + op.name + "' has an out-of-range entry");
    }
    if (!op_index_.emplace(op.name, i).second) {
      throw std::invalid_argument("duplicate symbol '" + op.name + "'");
    }
  }

  for (int i = 0; i < static_cast<int>(rels_.size()); ++i) {
    RelTable& rel = rels_[static_cast<std::size_t>(i)];
    check_symbol_name(rel.name);
    if (rel.arity < 1) throw std::invalid_argument("relation arity must be >= 1");
    for (const auto& t : rel.tuples) {
      if (static_cast<int>(t.size()) != rel.arity) {
        throw std::invalid_argument("relation '" + rel.name + "' has a tuple of wrong length");
      }
      for (Elem v : t) {
        if (v >= k) throw std::invalid_argument("relation '" + rel.name + "' has an out-of-range entry");
      }
    }
    std::sort(rel.tuples.begin(), rel.tuples.end(),
              [k](const std::vector<Elem>& a, const std::vector<Elem>& b) {
                return tuple_index(a, k) < tuple_index(b, k);
              });
    rel.tuples.erase(std::unique(rel.tuples.begin(), rel.tuples.end()), rel.tuples.end());
    rel.index.clear();
    rel.index.reserve(rel.tuples.size());
    for (const auto& t : rel.tuples) rel.index.push_back(tuple_index(t, k));
    if (op_index_.count(rel.name) != 0 || !rel_index_.emplace(rel.name, i).second) {
      throw std::invalid_argument("duplicate symbol '" + rel.name + "'");
    }
  }
}

const OpTable* Structure::find_op(const std::string& name) const {
  auto it = op_index_.find(name);
  return it == op_index_.end() ? nullptr : &ops_[static_cast<std::size_t>(it->second)];
}

const RelTable* Structure::find_rel(const std::string& name) const {
  auto it = rel_index_.find(name);
  return it == rel_index_.end() ? nullptr : &rels_[static_cast<std::size_t>(it->second)];
}

Term Term::variable(int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  Term t;
  t.var = index;
  return t;
}

Term Term::apply(std::string op, std::vector<Term> args) {
  Term t;
  t.op = std::move(op);
  t.args = std::move(args);
  return t;
}

int Term::max_var() const {
  if (is_var()) return var;
  int m = 0;
  for (const Term& a : args) m = std::max(m, a.max_var());
  return m;
}

void Term::collect_vars(std::set<int>& out) const {
  if (is_var()) {
    out.insert(var);
    return;
  }
  for (const Term& a : args) a.collect_vars(out);
}

Formula Formula::equals(Term lhs, Term rhs) {
  Formula f;
  f.kind = Kind::equality;
  f.terms = {std::move(lhs), std::move(rhs)};
  return f;
}

Formula Formula::atom(std::string rel, std::vector<Term> args) {
  Formula f;
  f.kind = Kind::atom;
  f.rel = std::move(rel);
  f.terms = std::move(args);
  return f;
}

Formula Formula::conj(std::vector<Formula> parts) {
  if (parts.empty()) throw std::invalid_argument("empty conjunction");
  Formula f;
  f.kind = Kind::conj;
  f.children = std::move(parts);
  return f;
}

Formula Formula::disj(std::vector<Formula> parts) {
  if (parts.empty()) throw std::invalid_argument("empty disjunction");
  Formula f;
  f.kind = Kind::disj;
  f.children = std::move(parts);
  return f;
}

Formula Formula::negation(Formula inner) {
  Formula f;
  f.kind = Kind::negation;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::exists(int var, Formula body) {
  if (var < 1) throw std::invalid_argument("variable index must be >= 1");
  Formula f;
  f.kind = Kind::exists;
  f.bound_var = var;
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::forall(int var, Formula body) {
  if (var < 1) throw std::invalid_argument("variable index must be >= 1");
  Formula f;
  f.kind = Kind::forall;
  f.bound_var = var;
  f.children.push_back(std::move(body));
  return f;
}

namespace {

void free_vars_rec(const Formula& phi, std::set<int>& bound, std::set<int>& out) {
  switch (phi.kind) {
    case Formula::Kind::equality:
    case Formula::Kind::atom: {
      std::set<int> vars;
      for (const Term& t : phi.terms) t.collect_vars(vars);
      for (int v : vars) {
        if (bound.count(v) == 0) out.insert(v);
      }
      return;
    }
    case Formula::Kind::conj:
    case Formula::Kind::disj:
    case Formula::Kind::negation:
      for (const Formula& c : phi.children) free_vars_rec(c, bound, out);
      return;
    case Formula::Kind::exists:
    case Formula::Kind::forall: {
      bool inserted = bound.insert(phi.bound_var).second;
      free_vars_rec(phi.children[0], bound, out);
      if (inserted) bound.erase(phi.bound_var);
      return;
    }
  }
}

}  // namespace

std::set<int> free_vars(const Formula& phi) {
  std::set<int> bound;
  std::set<int> out;
  free_vars_rec(phi, bound, out);
  return out;
}

int max_var_index(const Formula& phi) {
  int m = 0;
  for (const Term& t : phi.terms) m = std::max(m, t.max_var());
  m = std::max(m, phi.bound_var);
  for (const Formula& c : phi.children) m = std::max(m, max_var_index(c));
  return m;
}

namespace {

void collect_all_vars(const Formula& phi, std::set<int>& out) {
  for (const Term& t : phi.terms) t.collect_vars(out);
  if (phi.bound_var != 0) out.insert(phi.bound_var);
  for (const Formula& c : phi.children) collect_all_vars(c, out);
}

Term map_term(const Term& t, const std::map<int, int>& env) {
  if (t.is_var()) {
    auto it = env.find(t.var);
    if (it == env.end()) {
      throw std::invalid_argument("substitute: free variable x" + std::to_string(t.var) +
                                  " outside the domain of the map");
    }
    return Term::variable(it->second);
  }
  Term out;
  out.op = t.op;
  out.args.reserve(t.args.size());
  for (const Term& a : t.args) out.args.push_back(map_term(a, env));
  return out;
}

struct SubstState {
  std::map<int, int> env;
  std::set<int> used;  // variables that fresh names must avoid

  int fresh() {
    int v = 1;
    while (used.count(v) != 0) ++v;
    used.insert(v);
    return v;
  }

  bool in_env_range(int v) const {
    for (const auto& [from, to] : env) {
      (void)from;
      if (to == v) return true;
    }
    return false;
  }
};

Formula substitute_rec(const Formula& phi, SubstState& st) {
  switch (phi.kind) {
    case Formula::Kind::equality:
      return Formula::equals(map_term(phi.terms[0], st.env), map_term(phi.terms[1], st.env));
    case Formula::Kind::atom: {
      std::vector<Term> args;
      args.reserve(phi.terms.size());
      for (const Term& t : phi.terms) args.push_back(map_term(t, st.env));
      return Formula::atom(phi.rel, std::move(args));
    }
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      std::vector<Formula> parts;
      parts.reserve(phi.children.size());
      for (const Formula& c : phi.children) parts.push_back(substitute_rec(c, st));
      return phi.kind == Formula::Kind::conj ? Formula::conj(std::move(parts))
                                             : Formula::disj(std::move(parts));
    }
    case Formula::Kind::negation:
      return Formula::negation(substitute_rec(phi.children[0], st));
    case Formula::Kind::exists:
    case Formula::Kind::forall: {
      int v = phi.bound_var;
      int renamed = st.in_env_range(v) ? st.fresh() : v;
      auto it = st.env.find(v);
      bool had = it != st.env.end();
      int old = had ? it->second : 0;
      st.env[v] = renamed;
      Formula body = substitute_rec(phi.children[0], st);
      if (had) {
        st.env[v] = old;
      } else {
        st.env.erase(v);
      }
      return phi.kind == Formula::Kind::exists ? Formula::exists(renamed, std::move(body))
                                               : Formula::forall(renamed, std::move(body));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Formula substitute(const Formula& phi, const std::map<int, int>& sigma) {
  for (const auto& [from, to] : sigma) {
    if (from < 1 || to < 1) throw std::invalid_argument("substitution indices must be >= 1");
  }
  for (int v : free_vars(phi)) {
    if (sigma.count(v) == 0) {
      throw std::invalid_argument("substitute: free variable x" + std::to_string(v) +
                                  " outside the domain of the map");
    }
  }
  SubstState st;
  st.env = sigma;
  collect_all_vars(phi, st.used);
  for (const auto& [from, to] : sigma) {
    st.used.insert(from);
    st.used.insert(to);
  }
  return substitute_rec(phi, st);
}

namespace {

bool alpha_term(const Term& a, const Term& b, const std::map<int, int>& ab) {
  if (a.is_var() != b.is_var()) return false;
  if (a.is_var()) {
    auto it = ab.find(a.var);
    int mapped = it == ab.end() ? a.var : it->second;
    return mapped == b.var;
  }
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!alpha_term(a.args[i], b.args[i], ab)) return false;
  }
  return true;
}

bool alpha_rec(const Formula& a, const Formula& b, std::map<int, int>& ab) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::equality:
    case Formula::Kind::atom: {
      if (a.rel != b.rel || a.terms.size() != b.terms.size()) return false;
      for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (!alpha_term(a.terms[i], b.terms[i], ab)) return false;
      }
      return true;
    }
    case Formula::Kind::conj:
    case Formula::Kind::disj:
    case Formula::Kind::negation: {
      if (a.children.size() != b.children.size()) return false;
      for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!alpha_rec(a.children[i], b.children[i], ab)) return false;
      }
      return true;
    }
    case Formula::Kind::exists:
    case Formula::Kind::forall: {
      auto it = ab.find(a.bound_var);
      bool had = it != ab.end();
      int old = had ? it->second : 0;
      ab[a.bound_var] = b.bound_var;
      bool ok = alpha_rec(a.children[0], b.children[0], ab);
      if (had) {
        ab[a.bound_var] = old;
      } else {
        ab.erase(a.bound_var);
      }
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_equal(const Formula& a, const Formula& b) {
  std::map<int, int> ab;
  return alpha_rec(a, b, ab);
}

std::string to_text(const Term& t) {
  if (t.is_var()) return "x" + std::to_string(t.var);
  std::string out = t.op + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i != 0) out += ',';
    out += to_text(t.args[i]);
  }
  out += ')';
  return out;
}

namespace {

// Precedence: atoms > ~ > /\ > \/; quantifier bodies always take parens.
int precedence(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::equality:
    case Formula::Kind::atom:
      return 4;
    case Formula::Kind::negation:
      return 3;
    case Formula::Kind::conj:
      return 2;
    case Formula::Kind::disj:
      return 1;
    case Formula::Kind::exists:
    case Formula::Kind::forall:
      return 0;
  }
  return 0;
}

void print_formula(const Formula& f, std::string& out) {
  switch (f.kind) {
    case Formula::Kind::equality:
      out += to_text(f.terms[0]);
      out += " = ";
      out += to_text(f.terms[1]);
      return;
    case Formula::Kind::atom:
      out += f.rel;
      out += '(';
      for (std::size_t i = 0; i < f.terms.size(); ++i) {
        if (i != 0) out += ',';
        out += to_text(f.terms[i]);
      }
      out += ')';
      return;
    case Formula::Kind::negation:
      out += '~';
      out += '(';
      print_formula(f.children[0], out);
      out += ')';
      return;
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      const char* sep = f.kind == Formula::Kind::conj ? " /\\ " : " \\/ ";
      int mine = precedence(f);
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i != 0) out += sep;
        bool parens = precedence(f.children[i]) <= mine;
        if (parens) out += '(';
        print_formula(f.children[i], out);
        if (parens) out += ')';
      }
      return;
    }
    case Formula::Kind::exists:
    case Formula::Kind::forall:
      out += f.kind == Formula::Kind::exists ? "exists x" : "forall x";
      out += std::to_string(f.bound_var);
      out += " (";
      print_formula(f.children[0], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_text(const Formula& phi) {
  std::string out;
  print_formula(phi, out);
  return out;
}

std::string to_text(const Structure& s) {
  std::string out = "structure " + s.name() + " {\n";
  out += "  universe " + std::to_string(s.k()) + ";\n";
  for (const OpTable& op : s.ops()) {
    out += "  op " + op.name + "/" + std::to_string(op.arity) + " = [";
    for (std::size_t i = 0; i < op.table.size(); ++i) {
      if (i != 0) out += ',';
      out += std::to_string(static_cast<int>(op.table[i]));
    }
    out += "];\n";
  }
  for (const RelTable& rel : s.rels()) {
    out += "  rel " + rel.name + "/" + std::to_string(rel.arity) + " = {";
    for (std::size_t i = 0; i < rel.tuples.size(); ++i) {
      if (i != 0) out += ',';
      out += '(';
      for (std::size_t j = 0; j < rel.tuples[i].size(); ++j) {
        if (j != 0) out += ',';
        out += std::to_string(static_cast<int>(rel.tuples[i][j]));
      }
      out += ')';
    }
    out += "};\n";
  }
  out += "}\n";
  return out;
}

std::string to_string(ClosureMode mode) {
  return mode == ClosureMode::lattice ? "LATTICE" : "BOOLEAN";
}

}  // namespace defgeo
