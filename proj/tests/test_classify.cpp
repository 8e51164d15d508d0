#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "defgeo/classify.hpp"
#include "defgeo/errors.hpp"
#include "defgeo/cli.hpp"
#include "defgeo/oracle.hpp"
#include "defgeo/parse.hpp"
#include "test_util.hpp"

using namespace defgeo;
using namespace defgeo::test;

namespace {

std::vector<Structure> some_ops(std::initializer_list<const char*> names) {
  std::vector<Structure> out;
  for (const char* n : names) {
    out.push_back(fixture_structure(std::string("ops2/") + n + ".str"));
  }
  return out;
}

int run_cli(std::initializer_list<const char*> args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::vector<std::string> argv(args.begin(), args.end());
  std::ostringstream out, err;
  int code = cli_main(argv, out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (err_text != nullptr) *err_text = err.str();
  return code;
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("two copies of one algebra land in the same class") {
    std::vector<Structure> items;
    items.push_back(parse_structure("structure a1 { universe 2; op f/2 = [0,0,0,1]; }"));
    items.push_back(parse_structure("structure a2 { universe 2; op f/2 = [0,0,0,1]; }"));
    ClassificationReport report = classify(items, ClassifyMode::l0);
    REQUIRE(report.classes.size() == 1);
    CHECK(report.classes[0].size() == 2);
    CHECK(report.undetermined.empty());
  }

  TEST_CASE("mixed universe sizes are rejected") {
    std::vector<Structure> items{gf2(), gf3()};
    CHECK_THROWS_AS(classify(items, ClassifyMode::l0), std::invalid_argument);
  }

  TEST_CASE("algebraic classification at k=3 is refused without a depth") {
    std::vector<Structure> items{gf3()};
    CHECK_THROWS_AS(classify(items, ClassifyMode::algebraic), ResourceError);
    ClassifyOptions opts;
    opts.approximate_depth = 1;
    ClassificationReport report = classify(items, ClassifyMode::algebraic, opts);
    CHECK(report.approximate);
    CHECK(report.items.size() == 1);
    CHECK(!report.items[0].ed.has_value());  // inequivalence-only mode skips the gate
  }

  TEST_CASE("partition on a small slice matches the naive oracle") {
    std::vector<Structure> items =
        some_ops({"op_0001", "op_0111", "op_0011", "op_1110", "op_0110"});
    ClassifyOptions opts;
    ClassificationReport report = classify(items, ClassifyMode::l0, opts);

    // oracle partition: materialize each boolean family at arity 4 from the
    // same atomic seeds, group extensionally
    std::vector<std::vector<Relation>> families;
    for (const Structure* s : {&items[0], &items[1], &items[2], &items[3], &items[4]}) {
      std::vector<Relation> seeds = atomic_seeds(*s, 4, opts);
      families.push_back(oracle_close(seeds, ClosureMode::boolean));
    }
    auto same = [&](int i, int j) { return families[static_cast<std::size_t>(i)] ==
                                           families[static_cast<std::size_t>(j)]; };

    std::map<std::string, int> name_to_index;
    for (int i = 0; i < 5; ++i) name_to_index[items[static_cast<std::size_t>(i)].name()] = i;
    for (const auto& cls : report.classes) {
      for (int a : cls) {
        for (int b : cls) {
          CHECK(same(name_to_index[report.items[static_cast<std::size_t>(a)].name],
                     name_to_index[report.items[static_cast<std::size_t>(b)].name]));
        }
      }
    }
    for (std::size_t c1 = 0; c1 < report.classes.size(); ++c1) {
      for (std::size_t c2 = c1 + 1; c2 < report.classes.size(); ++c2) {
        CHECK(!same(name_to_index[report.items[static_cast<std::size_t>(
                        report.classes[c1].front())].name],
                    name_to_index[report.items[static_cast<std::size_t>(
                        report.classes[c2].front())].name]));
      }
    }
  }

  TEST_CASE("witnesses sit in exactly one family") {
    std::vector<Structure> items = some_ops({"op_0001", "op_0011", "op_1110"});
    ClassifyOptions opts;
    ClassificationReport report = classify(items, ClassifyMode::l0, opts);
    for (const auto& w : report.witnesses) {
      const std::string& name_a =
          report.items[static_cast<std::size_t>(report.classes[static_cast<std::size_t>(w.class_a)].front())].name;
      const std::string& name_b =
          report.items[static_cast<std::size_t>(report.classes[static_cast<std::size_t>(w.class_b)].front())].name;
      const Structure* sa = nullptr;
      const Structure* sb = nullptr;
      for (const Structure& s : items) {
        if (s.name() == name_a) sa = &s;
        if (s.name() == name_b) sb = &s;
      }
      REQUIRE(sa != nullptr);
      REQUIRE(sb != nullptr);
      std::vector<Relation> seeds_a = atomic_seeds(*sa, 4, opts);
      std::vector<Relation> seeds_b = atomic_seeds(*sb, 4, opts);
      bool in_a = oracle_member(seeds_a, ClosureMode::boolean, w.witness);
      bool in_b = oracle_member(seeds_b, ClosureMode::boolean, w.witness);
      CHECK(in_a != in_b);
      CHECK((w.side == 1 ? in_a : in_b));
    }
  }

  TEST_CASE("algebraic-l0 refinement replay") {
    // items merged algebraically but split by the quantifier-free partition
    // must be split by a complement-derived witness: the witness cannot be a
    // member of either lattice family
    std::vector<Structure> items = some_ops({"op_0010", "op_0100", "op_0110", "op_1011"});
    ClassifyOptions opts;
    ClassificationReport alg = classify(items, ClassifyMode::algebraic, opts);
    ClassificationReport l0 = classify(items, ClassifyMode::l0, opts);

    auto l0_class_of = [&](const std::string& name) {
      for (std::size_t c = 0; c < l0.classes.size(); ++c) {
        for (int i : l0.classes[c]) {
          if (l0.items[static_cast<std::size_t>(i)].name == name) return static_cast<int>(c);
        }
      }
      return -1;
    };

    for (const auto& cls : alg.classes) {
      for (int i : cls) {
        for (int j : cls) {
          if (i >= j) continue;
          const std::string& na = alg.items[static_cast<std::size_t>(i)].name;
          const std::string& nb = alg.items[static_cast<std::size_t>(j)].name;
          int ca = l0_class_of(na);
          int cb = l0_class_of(nb);
          if (ca == cb) continue;
          // replay the l0 witness against both lattice families
          for (const auto& w : l0.witnesses) {
            bool matches = (l0.items[static_cast<std::size_t>(
                                l0.classes[static_cast<std::size_t>(w.class_a)].front())].name == na &&
                            l0.items[static_cast<std::size_t>(
                                l0.classes[static_cast<std::size_t>(w.class_b)].front())].name == nb);
            if (!matches) continue;
            const Structure* sa = nullptr;
            const Structure* sb = nullptr;
            for (const Structure& s : items) {
              if (s.name() == na) sa = &s;
              if (s.name() == nb) sb = &s;
            }
            std::vector<Relation> seeds_a = atomic_seeds(*sa, 4, opts);
            std::vector<Relation> seeds_b = atomic_seeds(*sb, 4, opts);
            CHECK(!(oracle_member(seeds_a, ClosureMode::lattice, w.witness) &&
                    oracle_member(seeds_b, ClosureMode::lattice, w.witness)));
          }
        }
      }
    }
  }

  TEST_CASE("declared relations separate otherwise identical algebras in l0 mode") {
    std::vector<Structure> items;
    items.push_back(parse_structure("structure bare { universe 2; op f/2 = [0,0,0,1]; }"));
    items.push_back(parse_structure(
        "structure edged { universe 2; op f/2 = [0,0,0,1]; rel e/1 = {(1)}; }"));
    ClassificationReport report = classify(items, ClassifyMode::l0);
    CHECK(report.classes.size() == 2);

    // the witness is confirmed against independently computed seeds
    REQUIRE(report.witnesses.size() == 1);
    ClassifyOptions opts;
    std::vector<Relation> bare_seeds = atomic_seeds(items[0], 4, opts);
    std::vector<Relation> edged_seeds = atomic_seeds(items[1], 4, opts);
    const Relation& w = report.witnesses[0].witness;
    CHECK(oracle_member(bare_seeds, ClosureMode::boolean, w) !=
          oracle_member(edged_seeds, ClosureMode::boolean, w));
  }

  TEST_CASE("report text is deterministic") {
    std::vector<Structure> items = some_ops({"op_0001", "op_0011"});
    ClassificationReport r1 = classify(items, ClassifyMode::l0);
    ClassificationReport r2 = classify(items, ClassifyMode::l0);
    CHECK(r1.to_text() == r2.to_text());
    CHECK(r1.to_text().starts_with("defgeo-report v1\n"));
    CHECK(r1.fingerprints_text() == r2.fingerprints_text());
  }

  TEST_CASE("cli subcommands and exit codes") {
    std::string gf2_path = fixture_path("gf2.str");
    std::string eq_spec = fixture_path("eq.spec");

    std::string out, err;
    CHECK(run_cli({"eval", gf2_path.c_str(), "x1 = x2", "--arity", "2"}, &out) == 0);
    CHECK(out == "rel/2/2:{(0,0),(1,1)}\n");

    CHECK(run_cli({"defset", gf2_path.c_str(), "--spec", eq_spec.c_str(), "--arity", "2",
                   "--query", "rel/2/2:{(0,0),(1,1)}"},
                  &out) == 0);
    CHECK(out == "member\n");
    CHECK(run_cli({"defset", gf2_path.c_str(), "--spec", eq_spec.c_str(), "--arity", "2",
                   "--query", "rel/2/2:{(0,1)}"},
                  &out) == 1);
    CHECK(out == "not-member\n");

    CHECK(run_cli({"equiv", gf2_path.c_str(), eq_spec.c_str(), gf2_path.c_str(),
                   eq_spec.c_str()},
                  &out) == 0);
    CHECK(out == "equivalent\n");

    CHECK(run_cli({"edcheck", gf2_path.c_str(), "--bound", "3"}, &out) == 0);
    CHECK(out.find("passes_at_bound") != std::string::npos);
    CHECK(run_cli({"edcheck", fixture_path("meet2.str").c_str(), "--bound", "4"}, &out) == 1);
    CHECK(out.find("fails") != std::string::npos);

    CHECK(run_cli({"oracle", gf2_path.c_str(), "--spec", eq_spec.c_str(), "--max-arity", "3"},
                  &out) == 0);

    // usage errors exit 2 and surface the grammar
    CHECK(run_cli({"eval", gf2_path.c_str(), "x1 = ", "--arity", "2"}, &out, &err) == 2);
    CHECK(err.find("formula grammar") != std::string::npos);
    CHECK(run_cli({"nonsense"}, &out, &err) == 2);
    CHECK(run_cli({"fingerprint", gf2_path.c_str()}, &out, &err) == 2);
    CHECK(run_cli({"--help"}, &out, &err) == 0);
    CHECK(out.find("eval") != std::string::npos);
  }

  TEST_CASE("cli fingerprint matches the library") {
    std::string out1, out2;
    CHECK(run_cli({"fingerprint", fixture_path("gf2.str").c_str(), "--spec",
                   fixture_path("eq.spec").c_str()},
                  &out1) == 0);
    Structure a = gf2();
    FormulaClassSpec spec;
    spec.mode = ClosureMode::lattice;
    spec.generators.push_back(parse_formula("x1 = x2", a));
    CHECK(out1 == fingerprint(a, spec).serialize());
  }

  TEST_CASE("cli canonicalize writes a loadable presentation") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "defgeo_canon_test";
    fs::create_directories(dir);
    std::string out_path = (dir / "canon.str").string();
    std::string spec_path = (dir / "canon.spec").string();
    std::string out;
    CHECK(run_cli({"canonicalize", fixture_path("gf2.str").c_str(), "--spec",
                   fixture_path("eq.spec").c_str(), "--out", out_path.c_str(), "--out-spec",
                   spec_path.c_str()},
                  &out) == 0);
    CHECK(out.find("families agree") != std::string::npos);

    std::ifstream written(out_path);
    std::stringstream buf;
    buf << written.rdbuf();
    Structure canon = parse_structure(buf.str());
    CHECK(canon.k() == 2);
    CHECK(!canon.rels().empty());
    fs::remove_all(dir);
  }
}
