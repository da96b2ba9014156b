#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "powergraph/error.hpp"
#include "powergraph/gf.hpp"

using namespace pg;

namespace {

Poly P(const FieldPtr& F, std::vector<fe> c) { return Poly(F, std::move(c)); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

const std::vector<u64> kSmallFields{2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32, 49, 64, 81, 121, 125, 128, 243, 256, 343, 512, 625, 729, 1024, 2048, 2187, 2401, 3125, 4096};

FieldPtr field(u64 q) {
  auto pp = prime_power(q);
  return Field::make(pp->first, static_cast<unsigned>(pp->second));
}

}  // namespace

TEST_SUITE("gf") {

TEST_CASE("make_field: prime field has no modulus") {
  auto F = Field::make(3, 1);
  CHECK(F->is_prime_field());
  CHECK(F->q() == 3);
  CHECK(F->modulus().empty());
}

TEST_CASE("make_field: modulus matches the exhaustive smallest irreducible") {
  auto F2 = Field::make(2, 1);
  CHECK(Field::make(2, 2)->modulus() == std::vector<fe>{1, 1, 1});     // t^2+t+1
  CHECK(Field::make(2, 3)->modulus() == std::vector<fe>{1, 1, 0, 1});  // t^3+t+1
  CHECK(oracle::smallest_irreducible(F2, 2) == std::vector<fe>{1, 1, 1});
  CHECK(oracle::smallest_irreducible(F2, 3) == std::vector<fe>{1, 1, 0, 1});
  for (auto [p, k] : std::vector<std::pair<u64, unsigned>>{{2, 4}, {2, 5}, {3, 2}, {3, 3}, {5, 2}, {7, 2}}) {
    CAPTURE(p);
    CAPTURE(k);
    CHECK(Field::make(p, k)->modulus() == oracle::smallest_irreducible(Field::make(p, 1), k));
  }
}

TEST_CASE("make_field: construction is deterministic and cached") {
  CHECK(Field::make(2, 3) == Field::make(2, 3));
  CHECK(Field::make(5, 1) != Field::make(7, 1));
}

TEST_CASE("make_field: errors") {
  CHECK(code_of([] { Field::make(4, 1); }) == Errc::NotPrime);
  CHECK(code_of([] { Field::make(2, 64); }) == Errc::TooLarge);
}

TEST_CASE("fe_arith examples") {
  auto F3 = Field::make(3, 1), F4 = Field::make(2, 2), F5 = Field::make(5, 1);
  CHECK(fe_arith({F3, 2}, {F3, 2}, FieldOp::Add).v == 1);
  fe t = F4->parse("t");
  CHECK(fe_arith({F4, t}, {F4, F4->parse("t+1")}, FieldOp::Mul).v == 1);
  CHECK(fe_arith({F5, 1}, {F5, 2}, FieldOp::Div).v == 3);
  CHECK(code_of([&] { fe_arith({F3, 1}, {F5, 1}, FieldOp::Add); }) == Errc::FieldMismatch);
  CHECK(code_of([&] { fe_arith({F5, 1}, {F5, 0}, FieldOp::Div); }) == Errc::DivisionByZero);
}

TEST_CASE("fe_order examples against repeated multiplication") {
  auto F4 = Field::make(2, 2), F7 = Field::make(7, 1);
  CHECK(fe_order({F7, 1}) == 1);
  CHECK(fe_order({F4, F4->parse("t")}) == 3);
  CHECK(fe_order({F7, 2}) == 3);
  for (fe a = 1; a < 7; ++a) {
    u64 e = 1;
    fe x = a;
    while (x != 1) {
      x = F7->mul(x, a);
      ++e;
    }
    CHECK(fe_order({F7, a}) == e);
  }
  CHECK(code_of([&] { fe_order({F7, 0}); }) == Errc::ZeroElement);
}

TEST_CASE("fe_generator examples") {
  CHECK(fe_generator(Field::make(2, 1)).v == 1);
  CHECK(fe_generator(Field::make(7, 1)).v == 3);
  auto F4 = Field::make(2, 2);
  CHECK(fe_generator(F4).v == F4->parse("t"));
}

TEST_CASE("fe_generator is the smallest element of full order") {
  for (u64 q : {5u, 7u, 9u, 16u, 25u, 27u, 49u}) {
    auto F = field(q);
    fe best = 0;
    for (fe a = 1; a < q && best == 0; ++a) {
      std::set<fe> seen;
      fe x = 1;
      for (u64 i = 0; i + 1 < q; ++i) {
        x = F->mul(x, a);
        seen.insert(x);
      }
      if (seen.size() == q - 1) best = a;
    }
    CAPTURE(q);
    CHECK(F->generator() == best);
  }
}

TEST_CASE("multiplicative group axioms for every field up to 4096") {
  std::mt19937_64 rng(11);
  for (u64 q : kSmallFields) {
    auto F = field(q);
    CAPTURE(q);
    bool inverses = true;
    for (fe a = 1; a < q; ++a) inverses = inverses && F->mul(a, F->inv(a)) == 1;
    CHECK(inverses);
    bool axioms = true;
    for (int i = 0; i < 200; ++i) {
      fe a = rng() % q, b = rng() % q, c = rng() % q;
      axioms = axioms && F->mul(F->mul(a, b), c) == F->mul(a, F->mul(b, c));
      axioms = axioms && F->mul(a, b) == F->mul(b, a);
      axioms = axioms && F->mul(a, F->add(b, c)) == F->add(F->mul(a, b), F->mul(a, c));
      axioms = axioms && F->add(a, F->neg(a)) == 0;
    }
    CHECK(axioms);
    CHECK(F->order(F->generator()) == q - 1);
    // Independent: the generator's powers hit q-1 distinct elements.
    std::vector<bool> hit(q, false);
    fe x = 1;
    u64 distinct = 0;
    for (u64 i = 0; i + 1 < q; ++i) {
      x = F->mul(x, F->generator());
      if (!hit[x]) ++distinct;
      hit[x] = true;
    }
    CHECK(distinct == q - 1);
  }
}

TEST_CASE("discrete logarithm inverts pow") {
  std::mt19937_64 rng(5);
  for (auto [p, k] : std::vector<std::pair<u64, unsigned>>{{2, 8}, {3, 5}, {2, 20}, {101, 1}, {65537, 1}}) {
    auto F = Field::make(p, k);
    fe g = F->generator();
    for (int i = 0; i < 20; ++i) {
      fe x = 1 + rng() % (F->q() - 1);
      CHECK(F->pow(g, F->dlog(g, x)) == x);
    }
  }
}

TEST_CASE("element syntax") {
  auto F9 = Field::make(3, 2), F5 = Field::make(5, 1);
  CHECK(F5->parse("7") == 2);
  CHECK(F9->parse(" t + 1 ") == F9->parse("1+t"));
  CHECK(F9->parse("2*t") == F9->add(F9->parse("t"), F9->parse("t")));
  for (fe a = 0; a < 9; ++a) CHECK(F9->parse(F9->format(a)) == a);
  CHECK(code_of([&] { F5->parse("t"); }) == Errc::ParseError);
  CHECK(code_of([&] { F9->parse(""); }) == Errc::ParseError);
}

TEST_CASE("poly_factor examples") {
  auto F2 = Field::make(2, 1), F3 = Field::make(3, 1);
  auto f1 = poly_factor(P(F3, {2, 0, 1}));  // x^2 - 1
  REQUIRE(f1.size() == 2);
  CHECK(f1[0].f == P(F3, {1, 1}));  // x + 1
  CHECK(f1[1].f == P(F3, {2, 1}));  // x - 1
  auto f2 = poly_factor(P(F2, {1, 1, 0, 1}));
  REQUIRE(f2.size() == 1);
  CHECK(f2[0].mult == 1);
  auto f3 = poly_factor(P(F2, {1, 0, 0, 0, 0, 0, 0, 1}));  // x^7 - 1
  REQUIRE(f3.size() == 3);
  CHECK(f3[0].f == P(F2, {1, 1}));
  CHECK(f3[1].f == P(F2, {1, 1, 0, 1}));
  CHECK(f3[2].f == P(F2, {1, 0, 1, 1}));
  CHECK(code_of([&] { poly_factor(Poly(F2, {})); }) == Errc::ZeroPolynomial);
}

TEST_CASE("poly_factor: product reassembles and factors are irreducible") {
  std::mt19937_64 rng(3);
  for (u64 q : {2u, 3u, 4u, 5u}) {
    auto F = field(q);
    int bad_product = 0, bad_irr = 0;
    for (int i = 0; i < 1000; ++i) {
      int d = 1 + static_cast<int>(rng() % 8);
      std::vector<fe> c(static_cast<std::size_t>(d) + 1);
      for (auto& x : c) x = rng() % q;
      if (c.back() == 0) c.back() = 1;
      Poly f(F, c);
      Poly prod = Poly::constant(F, f.lead());
      for (const auto& pf : poly_factor(f)) {
        if (!oracle::naive_irreducible(F, pf.f.c) || !pf.f.is_monic()) ++bad_irr;
        prod = prod * poly_pow(pf.f, static_cast<unsigned>(pf.mult));
      }
      if (!(prod == f)) ++bad_product;
    }
    CAPTURE(q);
    CHECK(bad_product == 0);
    CHECK(bad_irr == 0);
  }
}

TEST_CASE("monic_irreducibles agrees with trial division") {
  for (u64 q : {2u, 3u, 4u}) {
    auto F = field(q);
    for (unsigned d = 1; d <= 4; ++d) {
      u64 count = 0;
      std::vector<fe> c(d + 1, 0);
      c[d] = 1;
      u64 total = checked_pow(q, d);
      for (u64 code = 0; code < total; ++code) {
        u64 v = code;
        for (unsigned i = 0; i < d; ++i) {
          c[i] = v % q;
          v /= q;
        }
        if (oracle::naive_irreducible(F, c)) ++count;
      }
      CHECK(monic_irreducibles(F, d).size() == count);
    }
  }
}

}  // TEST_SUITE
