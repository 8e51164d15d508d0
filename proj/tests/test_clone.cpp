#include <doctest.h>

#include <algorithm>
#include <set>

#include "defgeo/algebraic.hpp"
#include "defgeo/clone.hpp"
#include "defgeo/errors.hpp"
#include "defgeo/eval.hpp"
#include "defgeo/oracle.hpp"
#include "defgeo/parse.hpp"
#include "test_util.hpp"

using namespace defgeo;
using namespace defgeo::test;

namespace {

// Test-local term enumerator: all tables of terms up to the given depth,
// built by direct recursion over term syntax (independent of the worklist).
std::set<std::vector<Elem>> tables_by_depth(const Structure& a, int arity, int depth) {
  const std::uint64_t points =
      pow_u64(static_cast<std::uint64_t>(a.k()), static_cast<unsigned>(arity));
  std::set<std::vector<Elem>> current;
  for (int v = 1; v <= arity; ++v) {
    std::vector<Elem> table(points);
    std::vector<Elem> tuple(static_cast<std::size_t>(arity));
    for (std::uint64_t i = 0; i < points; ++i) {
      index_to_tuple(i, a.k(), arity, tuple);
      table[i] = tuple[static_cast<std::size_t>(v - 1)];
    }
    current.insert(std::move(table));
  }
  for (int d = 0; d < depth; ++d) {
    std::set<std::vector<Elem>> next = current;
    for (const OpTable& op : a.ops()) {
      std::vector<std::vector<Elem>> pool(current.begin(), current.end());
      std::vector<std::size_t> pick(static_cast<std::size_t>(op.arity), 0);
      while (true) {
        std::vector<Elem> table(points);
        for (std::uint64_t i = 0; i < points; ++i) {
          std::vector<Elem> args(static_cast<std::size_t>(op.arity));
          for (int s = 0; s < op.arity; ++s) {
            args[static_cast<std::size_t>(s)] = pool[pick[static_cast<std::size_t>(s)]][i];
          }
          table[i] = op.arity == 0 ? op.table[0] : op.value(args, a.k());
        }
        next.insert(std::move(table));
        int slot = op.arity - 1;
        while (slot >= 0) {
          std::size_t s = static_cast<std::size_t>(slot);
          if (++pick[s] < pool.size()) break;
          pick[s] = 0;
          --slot;
        }
        if (slot < 0 || op.arity == 0) break;
      }
    }
    current = std::move(next);
  }
  return current;
}

std::set<std::vector<Elem>> as_set(const TermClone& clone) {
  return std::set<std::vector<Elem>>(clone.tables.begin(), clone.tables.end());
}

}  // namespace

TEST_SUITE("clone") {
  TEST_CASE("unary clone of the meet-semilattice is the identity alone") {
    TermClone clone = term_clone(meet2(), 1);
    REQUIRE(clone.size() == 1);
    CHECK(clone.tables[0] == std::vector<Elem>{0, 1});
    CHECK(clone.exact);
  }

  TEST_CASE("binary clone of the meet-semilattice") {
    TermClone clone = term_clone(meet2(), 2);
    std::set<std::vector<Elem>> want{
        {0, 0, 1, 1},  // first projection
        {0, 1, 0, 1},  // second projection
        {0, 0, 0, 1},  // meet
    };
    CHECK(as_set(clone) == want);
  }

  TEST_CASE("clones match the independent depth-bounded enumerator") {
    Structure structures[] = {gf2(), meet2(), gf3()};
    for (const Structure& a : structures) {
      // the ternary-field clone is too large for the quadratic enumerator
      int max_arity = a.k() == 2 ? 2 : 1;
      for (int arity = 1; arity <= max_arity; ++arity) {
        TermClone clone = term_clone(a, arity);
        // saturate the enumerator: one more depth adds nothing
        int depth = 1;
        std::set<std::vector<Elem>> enumerated = tables_by_depth(a, arity, depth);
        while (true) {
          std::set<std::vector<Elem>> deeper = tables_by_depth(a, arity, depth + 1);
          if (deeper == enumerated) break;
          enumerated = std::move(deeper);
          ++depth;
          REQUIRE(depth < 12);
        }
        CAPTURE(a.name());
        CAPTURE(arity);
        CHECK(as_set(clone) == enumerated);
      }
    }
  }

  TEST_CASE("projections always belong to the clone") {
    Structure structures[] = {gf2(), meet2(), graph2(), gf3()};
    for (const Structure& a : structures) {
      int max_arity = a.k() == 2 ? 3 : 2;
      for (int arity = 1; arity <= max_arity; ++arity) {
        TermClone clone = term_clone(a, arity);
        std::set<std::vector<Elem>> members = as_set(clone);
        auto proj = tables_by_depth(a, arity, 0);
        for (const auto& p : proj) CHECK(members.count(p) == 1);
      }
    }
  }

  TEST_CASE("clone membership is closed under composition (spot check)") {
    Structure a = gf2();
    TermClone clone = term_clone(a, 2);
    std::mt19937_64 rng(5);
    for (int round = 0; round < 40; ++round) {
      const OpTable& op = a.ops()[rng() % a.ops().size()];
      std::vector<int> args;
      std::vector<Elem> table(4);
      for (int i = 0; i < op.arity; ++i) args.push_back(static_cast<int>(rng() % clone.size()));
      for (std::uint64_t p = 0; p < 4; ++p) {
        std::vector<Elem> vals;
        for (int i : args) vals.push_back(clone.tables[static_cast<std::size_t>(i)][p]);
        table[p] = op.value(vals, 2);
      }
      CHECK(clone.contains(table));
    }
  }

  TEST_CASE("witness terms evaluate to their tables") {
    Structure a = gf2();
    TermClone clone = term_clone(a, 2);
    for (int i = 0; i < static_cast<int>(clone.size()); ++i) {
      auto witness = clone.witness(a, i);
      REQUIRE(witness.has_value());
      Relation eq = equation_solution(*witness, *witness, 2, a);
      CHECK(eq == Relation::full(2, 2));
      std::vector<Elem> assignment(2);
      for (std::uint64_t p = 0; p < 4; ++p) {
        index_to_tuple(p, 2, 2, assignment);
        CHECK(eval_term(*witness, assignment, a) == clone.tables[static_cast<std::size_t>(i)][p]);
      }
    }
  }

  TEST_CASE("depth-bounded generation under-approximates and converges") {
    Structure a = gf2();
    TermClone exact = term_clone(a, 2);
    std::set<std::vector<Elem>> full = as_set(exact);
    std::set<std::vector<Elem>> previous;
    for (int depth = 0; depth <= 6; ++depth) {
      TermClone bounded = term_clone_depth_bounded(a, 2, depth);
      std::set<std::vector<Elem>> members = as_set(bounded);
      for (const auto& t : members) CHECK(full.count(t) == 1);
      for (const auto& t : previous) CHECK(members.count(t) == 1);
      previous = std::move(members);
      if (bounded.exact) {
        CHECK(as_set(bounded) == full);
        return;
      }
    }
    CHECK(false);  // never converged
  }

  TEST_CASE("equation solutions") {
    CHECK(equation_solution(Term::variable(1), Term::variable(2), 2, gf2()) ==
          Relation::from_tuples(2, 2, {{0, 0}, {1, 1}}));

    // meet(x1,x2) = x1 carves out the semilattice order
    Structure m = meet2();
    Term meet12 = Term::apply("meet", {Term::variable(1), Term::variable(2)});
    CHECK(equation_solution(meet12, Term::variable(1), 2, m) ==
          Relation::from_tuples(2, 2, {{0, 0}, {0, 1}, {1, 1}}));

    // (x1+x2)(x3+x4) = 0 over gf2: brute-forced 12-tuple relation
    Structure a = gf2();
    Term lhs = Term::apply(
        "times", {Term::apply("plus", {Term::variable(1), Term::variable(2)}),
                  Term::apply("plus", {Term::variable(3), Term::variable(4)})});
    Term zero = Term::apply("plus", {Term::variable(1), Term::variable(1)});
    Relation got = equation_solution(lhs, zero, 4, a);
    Relation want(2, 4);
    std::vector<Elem> t(4);
    for (std::uint64_t i = 0; i < 16; ++i) {
      index_to_tuple(i, 2, 4, t);
      if (t[0] == t[1] || t[2] == t[3]) want.set(i);
    }
    CHECK(got == want);
    CHECK(got.count() == 12);

    // symmetry and reflexivity
    CHECK(equation_solution(Term::variable(1), meet12, 2, m) ==
          equation_solution(meet12, Term::variable(1), 2, m));
    CHECK(equation_solution(meet12, meet12, 2, m) == Relation::full(2, 2));
  }

  TEST_CASE("algebraic families") {
    // unary clone of meet2 is {id}; the only equalizer is the full relation
    AlgebraicFamily fam1 = algebraic_family(meet2(), 1);
    REQUIRE(fam1.members.size() == 1);
    CHECK(fam1.members[0] == Relation::full(2, 1));

    // equality is an equalizer of the two projections
    AlgebraicFamily fam2 = algebraic_family(gf2(), 2);
    CHECK(fam2.contains(Relation::from_tuples(2, 2, {{0, 0}, {1, 1}})));
    CHECK(fam2.contains(Relation::full(2, 2)));

    // the family is closed under intersection
    for (std::size_t i = 0; i < fam2.members.size(); ++i) {
      for (std::size_t j = 0; j < fam2.members.size(); ++j) {
        CHECK(fam2.contains(fam2.members[i] & fam2.members[j]));
      }
    }

    // provenance reconstructs a defining system whose solutions match
    Structure a = gf2();
    for (int i = 0; i < static_cast<int>(fam2.members.size()); ++i) {
      std::string text = fam2.defining_system_text(a, i);
      CHECK(!text.empty());
    }
  }

  TEST_CASE("ed_check verdicts") {
    EDReport gf2_report = ed_check(gf2(), 4);
    CHECK(gf2_report.passed());
    CHECK(gf2_report.bound == 4);

    EDReport one_report = ed_check(fixture_structure("one.str"), 4);
    CHECK(one_report.passed());

    // whatever the verdict for the semilattice, a failure must carry a
    // verifiable counterexample
    EDReport meet_report = ed_check(meet2(), 4);
    if (!meet_report.passed()) {
      REQUIRE(meet_report.s.has_value());
      AlgebraicFamily fam = algebraic_family(meet2(), meet_report.counterexample_arity);
      CHECK(fam.contains(*meet_report.s));
      CHECK(fam.contains(*meet_report.t));
      CHECK(!fam.contains(*meet_report.u));
      CHECK((*meet_report.s | *meet_report.t) == *meet_report.u);
    }

    // cross-check the verdict against a naive recomputation at each arity
    for (int n = 1; n <= 4; ++n) {
      AlgebraicFamily fam = algebraic_family(meet2(), n);
      bool closed = true;
      for (const Relation& s : fam.members) {
        for (const Relation& t : fam.members) {
          if (!fam.contains(s | t)) closed = false;
        }
      }
      bool engine_fails_here =
          !meet_report.passed() && meet_report.counterexample_arity == n;
      if (engine_fails_here) CHECK(!closed);
      if (!meet_report.passed() && n < meet_report.counterexample_arity) CHECK(closed);
    }

    CHECK(ed_check(meet2(), 4).to_text() == meet_report.to_text());  // deterministic
  }

  TEST_CASE("union-closure at the comparison arity collapses the lattice family") {
    // when the union check passes at bound k^2, closing the equalizer seeds
    // under unions adds nothing at that arity: every lattice-family member
    // is already an intersection-closed algebraic set
    Structure passing[] = {gf2(), fixture_structure("ops2/op_1110.str")};
    for (const Structure& a : passing) {
      const int m = 4;
      REQUIRE(ed_check(a, m).passed());
      AlgebraicFamily alg = algebraic_family(a, m);
      DefFamily fam = def_family_from_relations(2, m, ClosureMode::lattice, alg.members, {},
                                                /*seeds_minor_closed=*/true);
      for (const Relation& v : fam.closures) CHECK(alg.contains(v));
      CHECK(alg.contains(fam.top));
      std::mt19937_64 rng(17);
      for (int i = 0; i < 50; ++i) {
        Relation u = fam.closures[rng() % fam.closures.size()] |
                     fam.closures[rng() % fam.closures.size()];
        CHECK(fam.member(u));
        CHECK(alg.contains(u));
      }
      for (const Relation& member : alg.members) CHECK(fam.member(member));
    }

    // and a failing algebra genuinely gains members from the unions
    Structure meet = meet2();
    EDReport report = ed_check(meet, 4);
    REQUIRE(!report.passed());
    AlgebraicFamily alg = algebraic_family(meet, report.counterexample_arity);
    DefFamily fam =
        def_family_from_relations(2, report.counterexample_arity, ClosureMode::lattice,
                                  alg.members, {}, /*seeds_minor_closed=*/true);
    CHECK(fam.member(*report.u));
    CHECK(!alg.contains(*report.u));
  }

  TEST_CASE("resource guards trip cleanly") {
    Limits tiny;
    tiny.max_clone_tables = 4;
    CHECK_THROWS_AS(term_clone(gf2(), 3, tiny), ResourceError);
    try {
      term_clone(gf2(), 3, tiny);
    } catch (const ResourceError& e) {
      CHECK(e.guard() == "term-clone table guard");
    }
  }
}
