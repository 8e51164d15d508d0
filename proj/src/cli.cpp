#include "defgeo/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "defgeo/classify.hpp"
#include "defgeo/errors.hpp"
#include "defgeo/eval.hpp"
#include "defgeo/oracle.hpp"
#include "defgeo/parse.hpp"

namespace defgeo {

namespace {

constexpr const char* kStructureGrammar =
    "structure file grammar:\n"
    "  file  := \"structure\" IDENT \"{\" decl* \"}\"\n"
    "  decl  := \"universe\" INT \";\"\n"
    "         | \"op\" IDENT \"/\" INT \"=\" \"[\" INT (\",\" INT)* \"]\" \";\"\n"
    "         | \"rel\" IDENT \"/\" INT \"=\" \"{\" tuple (\",\" tuple)* \"}\" \";\"\n"
    "         | \"rel\" IDENT \"/\" INT \"=\" \"{\" \"}\" \";\"\n"
    "  tuple := \"(\" INT (\",\" INT)* \")\"\n"
    "  the universe declaration comes first; tables are row-major with\n"
    "  argument 1 most significant\n";

constexpr const char* kFormulaGrammar =
    "formula grammar:\n"
    "  var     := \"x\" INT\n"
    "  term    := var | IDENT \"(\" term,* \")\"\n"
    "  atom    := term \"=\" term | IDENT \"(\" term,* \")\"\n"
    "  formula := atom | \"~\" formula | formula \"/\\\" formula\n"
    "           | formula \"\\/\" formula | (\"exists\"|\"forall\") var formula\n"
    "           | \"(\" formula \")\"\n"
    "  precedence ~ > /\\ > \\/; a quantifier's scope runs to the end of the\n"
    "  enclosing group\n";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Structure load_structure(const std::string& path) {
  try {
    return parse_structure(read_file(path));
  } catch (const ParseError& e) {
    throw std::runtime_error("in " + path + ": " + e.what() + "\n" + kStructureGrammar);
  }
}

FormulaClassSpec load_spec(const std::string& path, const Structure& ctx) {
  try {
    return parse_spec(read_file(path), ctx);
  } catch (const ParseError& e) {
    throw std::runtime_error("in " + path + ": " + e.what() + "\n" + kFormulaGrammar);
  }
}

struct SpecSource {
  std::string spec_path;
  bool auto_atomic = false;
  std::string mode = "lattice";
  int approximate_depth = 0;
  int max_term_arity = 0;  // 0: k^2

  void attach(CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "spec file: 'mode:' header plus one formula per line");
    cmd->add_flag("--auto-atomic", auto_atomic,
                  "generate the atomic term-equation spec from the term clone");
    cmd->add_option("--mode", mode, "closure mode for --auto-atomic: lattice|boolean")
        ->check(CLI::IsMember({"lattice", "boolean"}));
    cmd->add_option("--max-term-arity", max_term_arity,
                    "arity of the term clone behind --auto-atomic (default k^2)");
    cmd->add_option("--approximate-depth", approximate_depth,
                    "depth-bounded term enumeration for --auto-atomic (approximate)");
  }
};

ClosureMode parse_mode(const std::string& mode) {
  return mode == "boolean" ? ClosureMode::boolean : ClosureMode::lattice;
}

// A resolved generator set: either parsed formulas or atomic relation seeds.
struct ResolvedSpec {
  ClosureMode mode = ClosureMode::lattice;
  bool from_formulas = true;
  bool approximate = false;
  FormulaClassSpec formulas;
  std::vector<Relation> seeds;  // minor-closed, arity m

  DefFamily family(const Structure& a, int arity, const DefOptions& opts) const {
    if (from_formulas) return def_family(a, formulas, arity, opts);
    if (arity != seeds.front().arity()) {
      // Seeds live at arity m; reaching other arities needs the minor maps.
      return def_family_from_relations(a.k(), arity, mode, seeds, opts,
                                       /*seeds_minor_closed=*/false);
    }
    return def_family_from_relations(a.k(), arity, mode, seeds, opts,
                                     /*seeds_minor_closed=*/true);
  }
};

ResolvedSpec resolve_spec(const SpecSource& src, const Structure& a, const DefOptions& opts) {
  ResolvedSpec out;
  if (src.auto_atomic == !src.spec_path.empty()) {
    // exactly one of --spec / --auto-atomic
    throw std::runtime_error("give exactly one of --spec <file> or --auto-atomic");
  }
  if (!src.auto_atomic) {
    out.formulas = load_spec(src.spec_path, a);
    out.mode = out.formulas.mode;
    return out;
  }
  out.from_formulas = false;
  out.mode = parse_mode(src.mode);
  ClassifyOptions copts;
  copts.approximate_depth = src.approximate_depth;
  copts.def = opts;
  int clone_arity = src.max_term_arity > 0 ? src.max_term_arity : a.k() * a.k();
  out.seeds = atomic_seeds(a, clone_arity, copts);
  if (src.approximate_depth > 0) out.approximate = true;
  return out;
}

int exit_code_for_exception(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return 2;
}

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

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"definable-relation geometries over finite structures"};
  app.require_subcommand(1);

  // --- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "print the solution set of a formula");
  std::string eval_structure, eval_formula;
  int eval_arity = 0;
  eval_cmd->add_option("structure", eval_structure, "structure file")->required();
  eval_cmd->add_option("formula", eval_formula, "formula text")->required();
  eval_cmd->add_option("--arity", eval_arity, "solution-set arity (default: max free variable)");

  // --- defset -------------------------------------------------------------
  auto* defset_cmd = app.add_subcommand("defset", "test membership in a definable family");
  std::string defset_structure, defset_query;
  int defset_arity = 0;
  SpecSource defset_spec;
  defset_cmd->add_option("structure", defset_structure, "structure file")->required();
  defset_cmd->add_option("--arity", defset_arity, "family arity")->required();
  defset_cmd->add_option("--query", defset_query, "relation literal rel/<k>/<n>:{...}")->required();
  defset_spec.attach(defset_cmd);

  // --- fingerprint ----------------------------------------------------------
  auto* fp_cmd = app.add_subcommand("fingerprint", "print the canonical arity-k^2 fingerprint");
  std::string fp_structure;
  int fp_arity_override = 0;
  SpecSource fp_spec;
  fp_cmd->add_option("structure", fp_structure, "structure file")->required();
  fp_cmd->add_option("--comparison-arity", fp_arity_override,
                     "override the comparison arity (no guarantee below k^2)");
  fp_spec.attach(fp_cmd);

  // --- equiv ----------------------------------------------------------------
  auto* equiv_cmd = app.add_subcommand("equiv", "decide equality of two definable geometries");
  std::vector<std::string> equiv_args;
  SpecSource equiv_spec;
  equiv_cmd->add_option("inputs", equiv_args,
                        "s1.str s1.spec s2.str s2.spec, or s1.str s2.str with --auto-atomic")
      ->expected(-1);
  equiv_spec.attach(equiv_cmd);

  // --- edcheck ---------------------------------------------------------------
  auto* ed_cmd = app.add_subcommand("edcheck", "union-closure check for algebraic sets");
  std::string ed_structure;
  int ed_bound = 4;
  ed_cmd->add_option("structure", ed_structure, "structure file")->required();
  ed_cmd->add_option("--bound", ed_bound, "largest arity checked (default 4)");

  // --- canonicalize ------------------------------------------------------------
  auto* canon_cmd = app.add_subcommand("canonicalize", "write the canonical relational presentation");
  std::string canon_structure, canon_out, canon_out_spec;
  int canon_check = -1;
  SpecSource canon_spec;
  canon_cmd->add_option("structure", canon_structure, "structure file")->required();
  canon_cmd->add_option("--out", canon_out, "output structure file")->required();
  canon_cmd->add_option("--out-spec", canon_out_spec, "also write the atom spec file");
  canon_cmd->add_option("--check", canon_check,
                        "verify family agreement up to this arity (default: k^2 for k<=2)");
  canon_spec.attach(canon_cmd);

  // --- classify -----------------------------------------------------------------
  auto* classify_cmd = app.add_subcommand("classify", "partition structures by fingerprint");
  std::string classify_dir, classify_mode = "l0", classify_out;
  int classify_depth = 0, classify_ed_bound = 4;
  classify_cmd->add_option("dir", classify_dir, "directory of .str files")->required();
  classify_cmd->add_option("--mode", classify_mode, "algebraic|l0")
      ->check(CLI::IsMember({"algebraic", "l0"}));
  classify_cmd->add_option("--out", classify_out, "write the report here (plus .fingerprints sidecar)");
  classify_cmd->add_option("--approximate-depth", classify_depth,
                           "depth-bounded clones (inequivalence-only verdicts)");
  classify_cmd->add_option("--ed-bound", classify_ed_bound, "equational-domain check bound");

  // --- oracle ----------------------------------------------------------------
  auto* oracle_cmd = app.add_subcommand("oracle", "diff the engine against the naive verifier");
  std::string oracle_structure;
  int oracle_max_arity = 4;
  SpecSource oracle_spec;
  oracle_cmd->add_option("structure", oracle_structure, "structure file")->required();
  oracle_cmd->add_option("--max-arity", oracle_max_arity, "check arities 1..n (default 4)");
  oracle_spec.attach(oracle_cmd);

  std::vector<std::string> argv_like;
  argv_like.push_back("defgeo");
  argv_like.insert(argv_like.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_like.size());
  for (const std::string& s : argv_like) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // usage errors exit 2; --help and --version exit 0
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  DefOptions def_opts;

  try {
    if (*eval_cmd) {
      Structure a = load_structure(eval_structure);
      Formula phi = [&] {
        try {
          return parse_formula(eval_formula, a);
        } catch (const ParseError& e) {
          throw std::runtime_error(std::string(e.what()) + "\n" + kFormulaGrammar);
        }
      }();
      std::set<int> fv = free_vars(phi);
      int arity = eval_arity > 0 ? eval_arity : (fv.empty() ? 1 : *fv.rbegin());
      Relation sol = solution_set(phi, arity, a, def_opts.limits);
      out << to_text(sol) << "\n";
      return 0;
    }

    if (*defset_cmd) {
      Structure a = load_structure(defset_structure);
      ResolvedSpec spec = resolve_spec(defset_spec, a, def_opts);
      Relation query = relation_from_text(defset_query);
      DefFamily fam = spec.family(a, defset_arity, def_opts);
      bool is_member = fam.member(query);
      out << (is_member ? "member" : "not-member") << "\n";
      return is_member ? 0 : 1;
    }

    if (*fp_cmd) {
      Structure a = load_structure(fp_structure);
      ResolvedSpec spec = resolve_spec(fp_spec, a, def_opts);
      int m = fp_arity_override > 0 ? fp_arity_override : a.k() * a.k();
      if (m != a.k() * a.k()) {
        err << "note: comparison arity " << m << " != k^2; equality at this arity proves"
            << " nothing in general\n";
      }
      DefFamily fam = spec.family(a, m, def_opts);
      Fingerprint fp = fingerprint_of_family(fam);
      if (spec.approximate) {
        err << "note: approximate generator set; equal fingerprints prove nothing\n";
      }
      out << fp.serialize();
      return 0;
    }

    if (*equiv_cmd) {
      ResolvedSpec s1, s2;
      std::optional<Structure> a1, a2;
      if (equiv_spec.auto_atomic) {
        if (equiv_args.size() != 2) {
          throw std::runtime_error("equiv --auto-atomic needs: s1.str s2.str");
        }
        a1 = load_structure(equiv_args[0]);
        a2 = load_structure(equiv_args[1]);
        s1 = resolve_spec(equiv_spec, *a1, def_opts);
        s2 = resolve_spec(equiv_spec, *a2, def_opts);
      } else {
        if (equiv_args.size() != 4) {
          throw std::runtime_error("equiv needs: s1.str s1.spec s2.str s2.spec");
        }
        a1 = load_structure(equiv_args[0]);
        a2 = load_structure(equiv_args[2]);
        s1.formulas = load_spec(equiv_args[1], *a1);
        s1.mode = s1.formulas.mode;
        s2.formulas = load_spec(equiv_args[3], *a2);
        s2.mode = s2.formulas.mode;
      }
      if (a1->k() != a2->k()) throw std::runtime_error("universe size mismatch");
      if (s1.mode != s2.mode) throw std::runtime_error("closure mode mismatch");
      const int m = a1->k() * a1->k();
      DefFamily f1 = s1.family(*a1, m, def_opts);
      DefFamily f2 = s2.family(*a2, m, def_opts);
      Fingerprint fp1 = fingerprint_of_family(f1);
      Fingerprint fp2 = fingerprint_of_family(f2);
      if (fp1.serialize() == fp2.serialize()) {
        if (s1.approximate || s2.approximate) {
          out << "fingerprint-equal (approximate: equivalence undetermined)\n";
          return 1;
        }
        out << "equivalent\n";
        return 0;
      }
      // find the witness
      EquivalenceResult res;
      res.equivalent = false;
      for (const Relation& v : f1.closures) {
        if (!f2.member(v)) {
          res.witness = v;
          res.witness_side = 1;
          break;
        }
      }
      if (!res.witness.has_value()) {
        for (const Relation& v : f2.closures) {
          if (!f1.member(v)) {
            res.witness = v;
            res.witness_side = 2;
            break;
          }
        }
      }
      if (!res.witness.has_value()) {
        res.witness = Relation(a1->k(), m);
        res.witness_side = f1.empty_flag ? 1 : 2;
      }
      out << "inequivalent\n";
      out << "witness: side=" << res.witness_side << " " << to_text(*res.witness) << "\n";
      return 1;
    }

    if (*ed_cmd) {
      Structure a = load_structure(ed_structure);
      EDReport report = ed_check(a, ed_bound, def_opts.limits);
      out << report.to_text();
      return report.passed() ? 0 : 1;
    }

    if (*canon_cmd) {
      Structure a = load_structure(canon_structure);
      ResolvedSpec spec = resolve_spec(canon_spec, a, def_opts);

      // Build the presentation from the arity-m family: one relation per
      // point closure, plus the empty relation when the family contains it.
      DefFamily source = spec.family(a, a.k() * a.k(), def_opts);
      Fingerprint fp = fingerprint_of_family(source);
      std::vector<Relation> rels = fp.closures;
      if (fp.empty_flag) rels.push_back(Relation(fp.k, fp.m));
      std::sort(rels.begin(), rels.end(), relation_less);

      std::vector<RelTable> tables;
      std::vector<Formula> atoms;
      std::vector<Elem> tuple(static_cast<std::size_t>(fp.m));
      for (std::size_t i = 0; i < rels.size(); ++i) {
        std::string name = "s" + std::to_string(i);
        RelTable t;
        t.name = name;
        t.arity = fp.m;
        rels[i].for_each_member([&](std::uint64_t idx) {
          index_to_tuple(idx, fp.k, fp.m, tuple);
          t.tuples.emplace_back(tuple.begin(), tuple.end());
        });
        tables.push_back(std::move(t));
        std::vector<Term> args;
        for (int v = 1; v <= fp.m; ++v) args.push_back(Term::variable(v));
        atoms.push_back(Formula::atom(std::move(name), std::move(args)));
      }
      Structure presentation(a.name() + "_canon", Universe{fp.k}, {}, std::move(tables));
      FormulaClassSpec atom_spec{spec.mode, std::move(atoms)};

      {
        std::ofstream fo(canon_out, std::ios::binary);
        if (!fo) throw std::runtime_error("cannot write '" + canon_out + "'");
        fo << to_text(presentation);
      }
      if (!canon_out_spec.empty()) {
        std::ofstream fo(canon_out_spec, std::ios::binary);
        if (!fo) throw std::runtime_error("cannot write '" + canon_out_spec + "'");
        fo << to_text(atom_spec);
      }

      int check_bound = canon_check >= 0 ? canon_check : (a.k() <= 2 ? a.k() * a.k() : 0);
      for (int n = 1; n <= check_bound; ++n) {
        DefFamily original = spec.family(a, n, def_opts);
        DefFamily presented = def_family(presentation, atom_spec, n, def_opts);
        if (fingerprint_of_family(original).serialize() !=
            fingerprint_of_family(presented).serialize()) {
          out << "CHECK FAILED at arity " << n << "\n";
          return 1;
        }
      }
      out << "wrote " << canon_out << " (" << presentation.rels().size() << " relations, fp "
          << hex64(fp.digest()) << ")";
      if (check_bound > 0) out << "; families agree for n <= " << check_bound;
      out << "\n";
      return 0;
    }

    if (*classify_cmd) {
      namespace fs = std::filesystem;
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(classify_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".str") {
          files.push_back(entry.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw std::runtime_error("no .str files in '" + classify_dir + "'");
      std::vector<Structure> structures;
      structures.reserve(files.size());
      for (const std::string& f : files) structures.push_back(load_structure(f));

      ClassifyOptions copts;
      copts.approximate_depth = classify_depth;
      copts.ed_bound = classify_ed_bound;
      copts.def = def_opts;
      ClassificationReport report = classify(
          structures, classify_mode == "algebraic" ? ClassifyMode::algebraic : ClassifyMode::l0,
          copts);
      std::string text = report.to_text();
      if (!classify_out.empty()) {
        std::ofstream fo(classify_out, std::ios::binary);
        if (!fo) throw std::runtime_error("cannot write '" + classify_out + "'");
        fo << text;
        std::ofstream sidecar(classify_out + ".fingerprints", std::ios::binary);
        sidecar << report.fingerprints_text();
      }
      out << text;
      return 0;
    }

    if (*oracle_cmd) {
      Structure a = load_structure(oracle_structure);
      ResolvedSpec spec = resolve_spec(oracle_spec, a, def_opts);
      bool all_ok = true;
      for (int n = 1; n <= oracle_max_arity; ++n) {
        DefFamily fam = spec.family(a, n, def_opts);
        std::vector<Relation> seeds;
        if (spec.from_formulas) {
          seeds = oracle_seeds(a, spec.formulas, n, def_opts.limits);
        } else if (n == a.k() * a.k()) {
          seeds = spec.seeds;
        } else {
          seeds = expand_relation_seeds(spec.seeds, n, def_opts.limits);
        }
        auto family = [&]() -> std::optional<std::vector<Relation>> {
          try {
            return oracle_close(seeds, spec.mode, def_opts.limits);
          } catch (const ResourceError&) {
            return std::nullopt;
          }
        }();

        bool ok = true;
        if (family.has_value()) {
          // (a) every engine closure and the top are in the oracle family;
          // (b) the empty flag matches; (c) every oracle member passes
          // member().  Together these pin extensional equality.
          std::unordered_set<Relation, RelationHash> set(family->begin(), family->end());
          for (const Relation& v : fam.closures) ok = ok && set.count(v) != 0;
          ok = ok && set.count(fam.top) != 0;
          ok = ok && (set.count(Relation(a.k(), n)) != 0) == fam.empty_flag;
          for (const Relation& r : *family) ok = ok && fam.member(r);
          out << "arity " << n << ": " << (ok ? "agree" : "DISAGREE") << " (family size "
              << family->size() << ")\n";
        } else {
          for (const Relation& v : fam.closures) {
            ok = ok && oracle_member(seeds, spec.mode, v);
          }
          out << "arity " << n << ": " << (ok ? "agree" : "DISAGREE")
              << " (family too large; basis checked against seed membership)\n";
        }
        all_ok = all_ok && ok;
      }
      return all_ok ? 0 : 1;
    }
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    return exit_code_for_exception(err, e);
  }
  err << "no subcommand\n";
  return 2;
}

}  // namespace defgeo
