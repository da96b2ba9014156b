#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "powergraph/error.hpp"
#include "powergraph/route.hpp"

using namespace pg;

namespace {

Matrix M(const FieldPtr& F, const std::string& s) { return Matrix::parse(F, s); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

FieldPtr field(u64 q) {
  auto pp = prime_power(q);
  return Field::make(pp->first, static_cast<unsigned>(pp->second));
}

bool commutes(const Matrix& X, const Matrix& K) { return X * K == K * X; }

// Literal recheck of a factorization, independent of check_factorization.
bool factorization_holds(const CommFactorization& f, const Matrix& X) {
  if (f.factors.size() != 5 || f.designated.size() != 5) return false;
  Matrix prod = Matrix::identity(X.F, X.n);
  for (std::size_t i = 0; i < 5; ++i) {
    if (!commutes(f.factors[i], f.designated[i])) return false;
    prod = prod * f.factors[i];
  }
  return prod == (f.permutation ? *f.permutation * X : X);
}

// Recheck a certificate by scanning powers, ignoring the stored exponents.
bool naive_chain(const PathCertificate& c) {
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
    const Matrix& a = c.vertices[i];
    const Matrix& b = c.vertices[i + 1];
    if (a.is_scalar() || b.is_scalar()) return false;
    bool pgl = c.ctx.mode == Mode::PGL;
    auto same = [&](const Matrix& x, const Matrix& y) {
      return pgl ? canonical(x, Mode::PGL) == canonical(y, Mode::PGL) : x == y;
    };
    bool linked = false;
    for (int dir = 0; dir < 2 && !linked; ++dir) {
      const Matrix& g = dir ? b : a;
      const Matrix& h = dir ? a : b;
      u64 ord = oracle::naive_order(g);
      if (ord == 0) return false;
      Matrix x = g;
      for (u64 k = 2; k <= ord && !linked; ++k) {
        x = x * g;
        linked = same(x, h);
      }
    }
    if (!linked) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("route") {

TEST_CASE("two-step links through AJ") {
  for (u64 q : {3u, 4u, 5u, 7u, 8u, 9u}) {
    auto F = field(q);
    for (int n = 3; n <= 5; ++n) {
      auto P = reference_pivots(n, F);
      Matrix AJ = P.A * P.J;
      CHECK(commutes(P.A, P.J));
      CHECK(mat_pow(AJ, q * q) == P.A);
      CHECK(mat_pow(AJ, (q * q - 1) * (q * q - 1)) == P.J);
      CHECK(mat_pow(P.A, q * q - 1).is_identity());
      CHECK(mat_pow(P.J, F->p()).is_identity());
      // Diagonal pivots with equal corner entries.
      for (int m = 1; m <= n - 2; ++m) {
        Matrix D = pivot_matrix({1, F->generator(), m}, n, F);
        Matrix DJ = D * P.J;
        CHECK(mat_pow(DJ, q) == D);
        CHECK(mat_pow(DJ, (q - 1) * (q - 1)) == P.J);
      }
    }
  }
}

TEST_CASE("reference pivots at q = 2") {
  auto F = Field::make(2);
  auto P = reference_pivots(5, F);
  CHECK(is_jordan_pivot(P.J));
  CHECK(commutes(P.A, P.J));
  CHECK(mat_pow(P.A, 3).is_identity());
}

TEST_CASE("pivot_matrix validation") {
  auto F = Field::make(5);
  CHECK(pivot_matrix({1, 2, 1}, 3, F) == Matrix::diag(F, {1, 2, 1}));
  CHECK(code_of([&] { pivot_matrix({1, 1, 1}, 3, F); }) == Errc::PreconditionViolated);
  CHECK(code_of([&] { pivot_matrix({1, 2, 2}, 3, F); }) == Errc::PreconditionViolated);
}

TEST_CASE("Jordan factorization examples") {
  auto F3 = Field::make(3);
  auto f = comm_factorize_jordan(Matrix::identity(F3, 3));
  for (const auto& m : f.factors) CHECK(m.is_identity());
  Matrix U = M(F3, "1,2,1;0,1,2;0,0,1");
  auto g = comm_factorize_jordan(U);
  CHECK(g.factors[0] == U);
  for (int i = 1; i < 5; ++i) CHECK(g.factors[static_cast<std::size_t>(i)].is_identity());
  CHECK(code_of([] { comm_factorize_jordan(Matrix::identity(Field::make(2), 3)); }) == Errc::OutOfRange);
}

TEST_CASE("Jordan factorization of 1000 random elements of GL_3(F_3)") {
  std::mt19937_64 rng(1);
  auto F = Field::make(3);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    Matrix X = oracle::random_invertible(F, 3, rng);
    auto f = comm_factorize_jordan(X);
    bad += !factorization_holds(f, X) || f.pattern != "J,A,J,A,J";
  }
  CHECK(bad == 0);
}

TEST_CASE("Jordan factorization over other fields") {
  std::mt19937_64 rng(2);
  for (auto [n, q] : std::vector<std::pair<int, u64>>{{4, 2}, {5, 2}, {4, 3}, {3, 4}, {5, 5}}) {
    auto F = field(q);
    for (int i = 0; i < 100; ++i) {
      Matrix X = oracle::random_invertible(F, n, rng);
      CHECK(factorization_holds(comm_factorize_jordan(X), X));
    }
  }
}

TEST_CASE("pivot factorization") {
  std::mt19937_64 rng(3);
  auto F3 = Field::make(3);
  auto id = comm_factorize_pivot(Matrix::identity(F3, 3), {1, 2, 1}, {1, 2, 1});
  CHECK(factorization_holds(id, Matrix::identity(F3, 3)));
  for (const auto& m : id.factors) CHECK(m.is_identity());
  // Zero lower-left 2x2 determinant with b = e = 0.
  Matrix X = M(F3, "1,0,1;1,0,2;2,1,0");
  CHECK(factorization_holds(comm_factorize_pivot(X, {1, 2, 1}, {1, 2, 1}), X));
  int permuted = 0;
  for (auto [n, q] : std::vector<std::pair<int, u64>>{{3, 3}, {4, 3}, {4, 5}, {5, 4}, {6, 3}}) {
    auto F = field(q);
    for (int i = 0; i < 100; ++i) {
      Matrix Y = oracle::random_invertible(F, n, rng);
      int m1 = 1 + static_cast<int>(rng() % static_cast<u64>(n / 2));
      int m2 = 1 + static_cast<int>(rng() % static_cast<u64>(n / 2));
      if (n == 3) m1 = m2 = 1;
      PivotSpec a1{1, F->generator(), m1}, a2{F->generator(), 1, m2};
      auto f = comm_factorize_pivot(Y, a1, a2);
      CHECK(factorization_holds(f, Y));
      CHECK(check_factorization(f, Y));
      permuted += f.permutation.has_value();
    }
  }
  CHECK(code_of([] { comm_factorize_pivot(Matrix::identity(Field::make(2), 4), {1, 0, 1}, {1, 0, 1}); }) == Errc::OutOfRange);
  MESSAGE("factorizations using the permutation: " << permuted);
}

TEST_CASE("pivot_path examples") {
  std::mt19937_64 rng(4);
  auto F3 = Field::make(3);
  Matrix P = Matrix::diag(F3, {1, 1, 2});
  CHECK(pivot_path(P, P).empty());
  auto c = pivot_path(P, Matrix::diag(F3, {2, 1, 1}));
  CHECK(c.length() <= 8);
  CHECK(verify_path(c));
  CHECK(naive_chain(c));

  auto F2 = Field::make(2);
  auto J = reference_pivots(4, F2).J;
  for (int i = 0; i < 20; ++i) {
    Matrix X = oracle::random_invertible(F2, 4, rng);
    auto d = pivot_path(J, X * J * mat_inv(X));
    CHECK(d.length() <= 8);
    CHECK(verify_path(d));
    CHECK(d.back() == X * J * mat_inv(X));
  }
  CHECK(code_of([&] { pivot_path(P, M(F3, "1,1,0;0,1,0;0,0,2")); }) == Errc::NotPivot);
}

TEST_CASE("pivot_path between random pivots") {
  std::mt19937_64 rng(5);
  for (auto [n, q] : std::vector<std::pair<int, u64>>{{3, 3}, {4, 3}, {3, 4}, {4, 5}, {5, 7}}) {
    auto F = field(q);
    for (int i = 0; i < 20; ++i) {
      auto rand_pivot = [&] {
        fe x = 1 + rng() % (q - 1), y;
        do y = 1 + rng() % (q - 1);
        while (y == x);
        Matrix D = pivot_matrix({x, y, 1 + static_cast<int>(rng() % static_cast<u64>(n - 2))}, n, F);
        Matrix X = oracle::random_invertible(F, n, rng);
        return Matrix(X * D * mat_inv(X));
      };
      Matrix a = rand_pivot(), b = rand_pivot();
      auto c = pivot_path(a, b);
      CHECK(c.length() <= 8);
      CHECK(verify_path(c));
      CHECK(c.front() == a);
      CHECK(c.back() == b);
    }
  }
}

TEST_CASE("to_pivot_path examples") {
  auto F3 = Field::make(3), F5 = Field::make(5);
  auto r0 = to_pivot_path(Matrix::diag(F3, {1, 1, 2}));
  CHECK(r0.branch == Branch::AlreadyPivot);
  REQUIRE(r0.path);
  CHECK(r0.path->empty());

  Matrix J4 = M(F5, "1,1,0,0;0,1,1,0;0,0,1,1;0,0,0,1");
  auto r1 = to_pivot_path(J4);
  CHECK(r1.branch == Branch::ObstructionJordan);
  REQUIRE(r1.obstruction);
  CHECK(r1.obstruction->label == Label::JORDAN_TYPE);
  CHECK_FALSE(r1.path);

  Matrix JJ = M(F3, "1,1,0,0;0,1,0,0;0,0,1,1;0,0,0,1");
  auto r2 = to_pivot_path(JJ);
  REQUIRE(r2.path);
  CHECK(r2.path->length() <= 3);
  CHECK(verify_path(*r2.path));
  CHECK(is_pivot(r2.path->back()));

  auto F2 = Field::make(2);
  Matrix A21 = block_diag({companion(Poly(F2, {1, 1, 0, 1})), companion(Poly(F2, {1, 1, 1})), M(F2, "1")});
  REQUIRE(oracle::naive_order(A21) == 21);
  auto r3 = to_pivot_path(A21);
  REQUIRE(r3.path);
  CHECK(r3.path->length() <= 5);
  CHECK(verify_path(*r3.path));
  CHECK(is_jordan_pivot(r3.path->back()));
  CHECK(naive_chain(*r3.path));

  CHECK(code_of([&] { to_pivot_path(companion(Poly(F2, {1, 1, 0, 1}))); }) == Errc::OutOfRange);
}

TEST_CASE("to_pivot_path on random elements respects bounds") {
  std::mt19937_64 rng(6);
  for (auto [n, q] : std::vector<std::pair<int, u64>>{{3, 3}, {4, 3}, {3, 4}, {4, 5}, {6, 2}}) {
    auto F = field(q);
    int bound = to_pivot_bound(n, q);
    for (int i = 0; i < 150; ++i) {
      Matrix A = oracle::random_noncentral(F, n, rng);
      auto r = to_pivot_path(A);
      if (r.obstruction) {
        CHECK(r.obstruction->label != Label::BIG);
        CHECK(branch_is_obstruction(r.branch));
        continue;
      }
      REQUIRE(r.path);
      CHECK(static_cast<int>(r.path->length()) <= branch_bound(r.branch));
      CHECK(static_cast<int>(r.path->length()) <= bound);
      CHECK(verify_path(*r.path));
      CHECK(r.path->front() == A);
      const Matrix& end = r.path->back();
      CHECK((q == 2 ? is_jordan_pivot(end) : (is_pivot(end) || is_jordan_pivot(end))));
    }
  }
}

TEST_CASE("branch witnesses take their branch") {
  for (auto [n, q] : std::vector<std::pair<int, u64>>{{3, 3}, {4, 3}, {3, 4}, {4, 5}, {6, 2}, {7, 2}}) {
    auto F = field(q);
    for (const auto& br : branch_reachability(n, q)) {
      if (!br.reachable) {
        CHECK_FALSE(br.reason.empty());
        continue;
      }
      auto w = branch_witness(br.branch, n, F);
      if (!w) continue;
      CAPTURE(branch_name(br.branch));
      CHECK(to_pivot_path(*w).branch == br.branch);
    }
  }
}

TEST_CASE("verify_path examples") {
  auto F2 = Field::make(2);
  Matrix A = companion(Poly(F2, {1, 1, 0, 1}));
  PathCertificate e;
  e.ctx = {3, F2, Mode::GL_PROJ};
  e.vertices = {A};
  CHECK(verify_path(e));
  PathCertificate c = e;
  c.vertices.push_back(mat_pow(A, 3));
  c.steps.push_back({3, true});
  CHECK(verify_path(c));
  CHECK(verify_path(c.reversed()));
  PathCertificate bad = e;
  bad.vertices.push_back(M(F2, "1,1,0;0,1,0;0,0,1"));
  bad.steps.push_back({2, true});
  auto chk = verify_path(bad);
  CHECK_FALSE(chk);
  CHECK(chk.failed_index == 0);
  PathCertificate central = e;
  central.vertices.push_back(Matrix::identity(F2, 3));
  central.steps.push_back({7, true});
  CHECK_FALSE(verify_path(central));
}

TEST_CASE("connect examples") {
  auto F3 = Field::make(3);
  Matrix A = M(F3, "1,1,0;0,2,1;0,0,1");
  Matrix B = mat_pow(A, 2);
  REQUIRE_FALSE(B.is_scalar());
  auto r = connect(A, B, Mode::PGL);
  REQUIRE(r.path);
  CHECK(r.path->length() == 1);
  auto F2 = Field::make(2);
  CHECK(code_of([&] { connect(companion(Poly(F2, {1, 1, 0, 1})), M(F2, "1,1,0;0,1,0;0,0,1")); }) == Errc::OutOfRange);
}

TEST_CASE("connect agrees with BFS on PGL_3(F_3) and PGL_3(F_4)") {
  for (u64 q : {3u, 4u}) {
    auto F = field(q);
    Graph G = Graph::build({3, F, Mode::PGL});
    std::mt19937_64 rng(100 + q);
    int bad = 0, joined = 0;
    for (int i = 0; i < 200; ++i) {
      u64 u = rng() % G.vertex_count();
      // Half the pairs are drawn inside one component so both outcomes occur.
      u64 v = rng() % G.vertex_count();
      if (i % 2 == 0) {
        auto members = G.component_vertices(G.component_of(u));
        v = members[rng() % members.size()];
      }
      auto r = connect(G.vertex(u), G.vertex(v), Mode::PGL);
      int d = G.bfs(u)[v];
      if (d < 0) {
        bad += r.path.has_value();
        continue;
      }
      ++joined;
      if (!r.path) {
        ++bad;
        continue;
      }
      bad += static_cast<int>(r.path->length()) < d;
      bad += static_cast<int>(r.path->length()) > connect_bound(3, q);
      bad += !verify_path(*r.path);
    }
    CAPTURE(q);
    CHECK(bad == 0);
    CHECK(joined > 0);
  }
}

}  // TEST_SUITE
