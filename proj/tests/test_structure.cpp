#include <doctest.h>

#include "defgeo/errors.hpp"
#include "defgeo/parse.hpp"
#include "defgeo/structure.hpp"
#include "test_util.hpp"

using namespace defgeo;
using namespace defgeo::test;

TEST_SUITE("structure") {
  TEST_CASE("parse a structure") {
    Structure a = parse_structure("structure A { universe 2; op meet/2 = [0,0,0,1]; }");
    CHECK(a.k() == 2);
    REQUIRE(a.ops().size() == 1);
    CHECK(a.ops()[0].name == "meet");
    Elem args11[] = {1, 1};
    CHECK(a.ops()[0].value(args11, 2) == 1);
    Elem args10[] = {1, 0};
    CHECK(a.ops()[0].value(args10, 2) == 0);
  }

  TEST_CASE("gf2 fixture has xor and conjunction tables") {
    Structure a = gf2();
    CHECK(a.ops().size() == 2);
    Elem t[] = {1, 1};
    CHECK(a.find_op("plus")->value(t, 2) == 0);
    CHECK(a.find_op("times")->value(t, 2) == 1);
  }

  TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_WITH_AS(parse_structure("structure A { universe 2; op meet/2 = [0,0,0]; }"),
                         doctest::Contains("table length 3 != 4"), ParseError);
    CHECK_THROWS_AS(parse_structure("structure A { op f/1 = [0]; universe 2; }"), ParseError);
    CHECK_THROWS_AS(parse_structure("structure A { universe 2; op f/1 = [0,2]; }"), ParseError);
    CHECK_THROWS_AS(
        parse_structure("structure A { universe 2; op f/1 = [0,1]; rel f/1 = {(0)}; }"),
        ParseError);
    CHECK_THROWS_AS(parse_structure("structure A { universe 2; op x1/1 = [0,1]; }"), ParseError);
    CHECK_THROWS_AS(parse_structure("structure A { universe 2; rel r/2 = {(0,1,1)}; }"),
                    ParseError);
    CHECK_THROWS_AS(parse_structure("structure A { universe 2; universe 2; }"), ParseError);
    try {
      parse_structure("structure A {\n  universe 2;\n  op f/1 = [0,oops];\n}");
      CHECK(false);
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() > 0);
    }
  }

  TEST_CASE("structure text round-trips") {
    Structure a = graph2();
    Structure again = parse_structure(to_text(a));
    CHECK(to_text(again) == to_text(a));
    CHECK(again.k() == a.k());
    CHECK(again.rels()[0].tuples == a.rels()[0].tuples);
  }

  TEST_CASE("nullary operations are constants") {
    Structure a = parse_structure(
        "structure pointed { universe 2; op zero/0 = [0]; op meet/2 = [0,0,0,1]; }");
    REQUIRE(a.find_op("zero") != nullptr);
    CHECK(a.find_op("zero")->value({}, 2) == 0);
    Formula f = parse_formula("meet(x1,zero()) = zero()", a);
    CHECK(free_vars(f) == std::set<int>{1});
    CHECK(parse_formula(to_text(f), a) == f);
  }

  TEST_CASE("parse formulas") {
    Structure a = gf2();
    Formula f1 = parse_formula("x1 = x2", a);
    CHECK(f1 == Formula::equals(Term::variable(1), Term::variable(2)));

    Formula f2 = parse_formula("plus(x1,x2) = x3 /\\ times(x1,x1) = x1", a);
    REQUIRE(f2.kind == Formula::Kind::conj);
    CHECK(f2.children.size() == 2);

    Formula f3 = parse_formula("exists x3 (times(x3,x3) = x1)", a);
    REQUIRE(f3.kind == Formula::Kind::exists);
    CHECK(free_vars(f3) == std::set<int>{1});
  }

  TEST_CASE("formula precedence and quantifier scope") {
    Structure a = gf2();
    // ~ binds tighter than /\ which binds tighter than \/
    Formula f = parse_formula("~x1 = x2 /\\ x2 = x3 \\/ x3 = x1", a);
    REQUIRE(f.kind == Formula::Kind::disj);
    REQUIRE(f.children[0].kind == Formula::Kind::conj);
    CHECK(f.children[0].children[0].kind == Formula::Kind::negation);

    // quantifier scope runs to the end of the enclosing group
    Formula g = parse_formula("x1 = x2 /\\ exists x3 x3 = x1 \\/ x1 = x1", a);
    REQUIRE(g.kind == Formula::Kind::conj);
    REQUIRE(g.children[1].kind == Formula::Kind::exists);
    CHECK(g.children[1].children[0].kind == Formula::Kind::disj);

    Formula h = parse_formula("(exists x3 x3 = x1) \\/ x1 = x1", a);
    CHECK(h.kind == Formula::Kind::disj);
  }

  TEST_CASE("formula parse errors") {
    Structure a = gf2();
    CHECK_THROWS_AS(parse_formula("plus(x1) = x2", a), ParseError);
    CHECK_THROWS_AS(parse_formula("unknown(x1,x2) = x2", a), ParseError);
    CHECK_THROWS_AS(parse_formula("x1 = x2 /\\", a), ParseError);
    CHECK_THROWS_AS(parse_formula("x0 = x1", a), ParseError);
    Structure g = graph2();
    CHECK_THROWS_AS(parse_formula("edge(x1) ", g), ParseError);
    CHECK_THROWS_AS(parse_formula("edge(x1,x2) = x1", g), ParseError);
  }

  TEST_CASE("free variables") {
    Structure a = gf2();
    CHECK(free_vars(parse_formula("x1 = x2", a)) == std::set<int>{1, 2});
    CHECK(free_vars(parse_formula("exists x1 x1 = x2", a)) == std::set<int>{2});
    CHECK(free_vars(parse_formula("times(x1,x1) = x1", a)) == std::set<int>{1});
    CHECK(free_vars(parse_formula("forall x2 (x2 = x2)", a)).empty());
  }

  TEST_CASE("substitution identifies and swaps variables") {
    Structure a = gf2();
    Formula eq = parse_formula("x1 = x2", a);
    CHECK(substitute(eq, {{1, 1}, {2, 1}}) == parse_formula("x1 = x1", a));
    CHECK(substitute(eq, {{1, 2}, {2, 1}}) == parse_formula("x2 = x1", a));
    CHECK_THROWS_AS(substitute(eq, {{1, 1}}), std::invalid_argument);
  }

  TEST_CASE("substitution avoids capture deterministically") {
    Structure a = gf2();
    Formula phi = parse_formula("exists x2 (x1 = x2)", a);
    Formula got = substitute(phi, {{1, 2}});
    // the bound x2 is renamed to the smallest index free of the formula and
    // the map: x3
    CHECK(got == parse_formula("exists x3 (x2 = x3)", a));
    CHECK(alpha_equal(got, parse_formula("exists x9 (x2 = x9)", a)));
    CHECK(free_vars(got) == std::set<int>{2});
  }

  TEST_CASE("substitution composition law") {
    Structure structures[] = {gf2(), graph2()};
    std::mt19937_64 seeds(101);
    for (int round = 0; round < 80; ++round) {
      FormulaGen gen(seeds(), structures[round % 2]);
      gen.max_var = 3;
      Formula phi = gen.gen();
      int n = 3, m = 1 + static_cast<int>(seeds() % 3), p = 1 + static_cast<int>(seeds() % 3);
      std::map<int, int> sigma = gen.substitution(n, m);
      std::map<int, int> tau = gen.substitution(m, p);
      std::map<int, int> composed;
      for (int i = 1; i <= n; ++i) composed[i] = tau.at(sigma.at(i));
      CHECK(alpha_equal(substitute(substitute(phi, sigma), tau), substitute(phi, composed)));
    }
  }

  TEST_CASE("free variables transform along the substitution") {
    std::mt19937_64 seeds(103);
    Structure a = gf2();
    for (int round = 0; round < 80; ++round) {
      FormulaGen gen(seeds(), a);
      gen.max_var = 4;
      Formula phi = gen.gen();
      std::map<int, int> sigma = gen.substitution(4, 3);
      std::set<int> expected;
      for (int v : free_vars(phi)) expected.insert(sigma.at(v));
      CHECK(free_vars(substitute(phi, sigma)) == expected);
    }
  }

  TEST_CASE("formula text round-trips") {
    std::mt19937_64 seeds(107);
    Structure structures[] = {gf2(), graph2()};
    for (int round = 0; round < 120; ++round) {
      FormulaGen gen(seeds(), structures[round % 2]);
      Formula phi = gen.gen();
      CAPTURE(to_text(phi));
      CHECK(parse_formula(to_text(phi), structures[round % 2]) == phi);
    }
  }

  TEST_CASE("parsers reject garbage with positions, never crash") {
    Structure a = gf2();
    std::mt19937_64 rng(409);
    const std::string alphabet = "structure universe op rel x1 x2 (){}[];,=/\\~#0123456789";
    for (int round = 0; round < 300; ++round) {
      std::string noise;
      int len = static_cast<int>(rng() % 60);
      for (int i = 0; i < len; ++i) noise += alphabet[rng() % alphabet.size()];
      try {
        (void)parse_structure(noise);
      } catch (const ParseError& e) {
        CHECK(e.line() >= 1);
      }
      try {
        (void)parse_formula(noise, a);
      } catch (const ParseError&) {
      }
      try {
        (void)parse_spec(noise, a);
      } catch (const ParseError&) {
      }
    }
  }

  TEST_CASE("spec files parse") {
    Structure a = gf2();
    FormulaClassSpec spec = parse_spec("mode: lattice\nx1 = x2\nplus(x1,x2) = x3\n", a);
    CHECK(spec.mode == ClosureMode::lattice);
    CHECK(spec.generators.size() == 2);
    CHECK(parse_spec("mode: boolean\n# comment\n\nx1 = x2\n", a).mode == ClosureMode::boolean);
    CHECK_THROWS_AS(parse_spec("x1 = x2\n", a), ParseError);
    CHECK_THROWS_AS(parse_spec("mode: lattice\n", a), ParseError);
    FormulaClassSpec rt = parse_spec(to_text(spec), a);
    CHECK(rt.mode == spec.mode);
    CHECK(rt.generators == spec.generators);
  }
}
