#include <doctest.h>

#include <random>
#include <stdexcept>

#include "defgeo/relation.hpp"

using namespace defgeo;

namespace {

Relation random_relation(std::mt19937_64& rng, int k, int arity) {
  Relation r(k, arity);
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::uint64_t i = 0; i < r.point_count(); ++i) {
    if (coin(rng)) r.set(i);
  }
  return r;
}

MinorMap random_map(std::mt19937_64& rng, int n, int m) {
  MinorMap mm;
  mm.source_arity = n;
  mm.target_arity = m;
  std::uniform_int_distribution<int> val(1, m);
  for (int i = 0; i < n; ++i) mm.sigma.push_back(val(rng));
  return mm;
}

}  // namespace

TEST_SUITE("relation") {
  TEST_CASE("tuple index encoding") {
    Elem t10[] = {1, 0};
    CHECK(tuple_index(t10, 2) == 2);
    Elem t00[] = {0, 0};
    CHECK(tuple_index(t00, 3) == 0);
    Elem t21[] = {2, 1};
    CHECK(tuple_index(t21, 3) == 7);

    // inverse round-trip over a whole space
    std::vector<Elem> buf(3);
    for (std::uint64_t idx = 0; idx < 27; ++idx) {
      index_to_tuple(idx, 3, 3, buf);
      CHECK(tuple_index(buf, 3) == idx);
    }
  }

  TEST_CASE("minor basics") {
    Relation eq = Relation::from_tuples(2, 2, {{0, 0}, {1, 1}});

    // identify both coordinates: the diagonal's preimage is everything
    MinorMap collapse{2, 1, {1, 1}};
    Relation diag = minor(eq, collapse);
    CHECK(diag == Relation::full(2, 1));

    // coordinate swap
    Relation single = Relation::from_tuples(2, 2, {{0, 1}});
    MinorMap swap{2, 2, {2, 1}};
    CHECK(minor(single, swap) == Relation::from_tuples(2, 2, {{1, 0}}));

    // cylindrification to arity 3
    MinorMap pad{2, 3, {1, 2}};
    Relation cyl = minor(eq, pad);
    CHECK(cyl == Relation::from_tuples(2, 3, {{0, 0, 0}, {0, 0, 1}, {1, 1, 0}, {1, 1, 1}}));
  }

  TEST_CASE("boolean operations") {
    Relation s = Relation::from_tuples(2, 2, {{0, 0}});
    Relation t = Relation::from_tuples(2, 2, {{1, 1}});
    CHECK((s & t).empty());
    CHECK((s | t) == Relation::from_tuples(2, 2, {{0, 0}, {1, 1}}));

    Relation eq = Relation::from_tuples(2, 2, {{0, 0}, {1, 1}});
    CHECK(eq.complement() == Relation::from_tuples(2, 2, {{0, 1}, {1, 0}}));

    Relation other_k(3, 2);
    CHECK_THROWS_AS((void)(s & other_k), std::invalid_argument);
    Relation other_arity(2, 3);
    CHECK_THROWS_AS((void)(s | other_arity), std::invalid_argument);
  }

  TEST_CASE("minor functoriality") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
      int n = 1 + static_cast<int>(rng() % 3);
      int m = 1 + static_cast<int>(rng() % 3);
      int p = 1 + static_cast<int>(rng() % 3);
      Relation b = random_relation(rng, 2, n);
      MinorMap sigma = random_map(rng, n, m);
      MinorMap tau = random_map(rng, m, p);
      CHECK(minor(minor(b, sigma), tau) == minor(b, compose(tau, sigma)));
      CHECK(minor(b, MinorMap::identity(n)) == b);
    }
  }

  TEST_CASE("minor commutes with boolean structure") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 3; ++n) {
      for (int m = 1; m <= 4; ++m) {
        for (int round = 0; round < 12; ++round) {
          Relation s = random_relation(rng, 2, n);
          Relation t = random_relation(rng, 2, n);
          MinorMap mm = random_map(rng, n, m);
          CHECK(minor(s & t, mm) == (minor(s, mm) & minor(t, mm)));
          CHECK(minor(s | t, mm) == (minor(s, mm) | minor(t, mm)));
          CHECK(minor(s.complement(), mm) == minor(s, mm).complement());
        }
      }
    }
  }

  TEST_CASE("characteristic view") {
    Relation empty(2, 2);
    Relation full = Relation::full(2, 2);
    for (std::uint64_t i = 0; i < 4; ++i) {
      std::vector<Elem> t(2);
      index_to_tuple(i, 2, 2, t);
      CHECK(char_fn(empty)(t) == 0);
      CHECK(char_fn(full)(t) == 1);
    }

    Relation eq = Relation::from_tuples(2, 2, {{0, 0}, {1, 1}});
    MinorMap collapse{2, 1, {1, 1}};
    CHECK(char_minor(char_fn(eq), collapse) == char_fn(Relation::full(2, 1)));

    // the function-minor square commutes with the set-minor square
    std::mt19937_64 rng(23);
    for (int round = 0; round < 60; ++round) {
      int n = 1 + static_cast<int>(rng() % 3);
      int m = 1 + static_cast<int>(rng() % 3);
      Relation b = random_relation(rng, 2, n);
      MinorMap mm = random_map(rng, n, m);
      CHECK(char_minor(char_fn(b), mm) == char_fn(minor(b, mm)));
    }
  }

  TEST_CASE("canonical text form") {
    Relation eq = Relation::from_tuples(2, 2, {{1, 1}, {0, 0}});
    CHECK(to_text(eq) == "rel/2/2:{(0,0),(1,1)}");
    CHECK(to_text(Relation(2, 2)) == "rel/2/2:{}");
    CHECK(relation_from_text("rel/2/2:{(0,0),(1,1)}") == eq);
    CHECK(relation_from_text("rel/2/2:{}") == Relation(2, 2));
    CHECK(relation_from_text(to_text(eq)) == eq);
    CHECK_THROWS_AS(relation_from_text("rel/2/2:{(0,0,0)}"), std::invalid_argument);
    CHECK_THROWS_AS(relation_from_text("rel/2/2:{(0,2)}"), std::invalid_argument);

    std::mt19937_64 rng(31);
    for (int round = 0; round < 40; ++round) {
      Relation r = random_relation(rng, 3, 2);
      CHECK(relation_from_text(to_text(r)) == r);
    }
  }

  TEST_CASE("minor rejects mismatched shapes") {
    Relation eq = Relation::from_tuples(2, 2, {{0, 0}, {1, 1}});
    MinorMap wrong_source{3, 2, {1, 2, 1}};
    CHECK_THROWS_AS((void)minor(eq, wrong_source), std::invalid_argument);
    MinorMap bad_value{2, 2, {1, 3}};
    CHECK_THROWS_AS((void)minor(eq, bad_value), std::invalid_argument);
    CHECK_THROWS_AS((void)char_minor(char_fn(eq), wrong_source), std::invalid_argument);
  }

  TEST_CASE("canonical order is the big-endian bitset order") {
    Relation a = Relation::from_tuples(2, 1, {{0}});
    Relation b = Relation::from_tuples(2, 1, {{1}});
    // bit of tuple index 0 is most significant: {1} < {0}
    CHECK(relation_less(b, a));
    CHECK(!relation_less(a, b));
    CHECK(!relation_less(a, a));
    CHECK(relation_less(Relation(2, 1), b));
  }
}
