#include <doctest.h>

#include <map>
#include <set>

#include "oracles.hpp"
#include "powergraph/error.hpp"
#include "powergraph/pgraph.hpp"

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

GroupContext ctx(int n, u64 q, Mode m) {
  auto pp = prime_power(q);
  return {n, Field::make(pp->first, static_cast<unsigned>(pp->second)), m};
}

// Scalar-free canonical form computed independently: divide by the first
// nonzero entry.
Matrix naive_canon(const Matrix& A, Mode mode) {
  if (mode == Mode::GL_PROJ) return A;
  for (fe x : A.a)
    if (x != 0) return scale(A, A.F->inv(x));
  return A;
}

// Edge set by brute force: for every vertex, all of its powers g^k with k >= 2
// that are vertices and differ from g.
std::set<std::pair<Matrix, Matrix>> naive_edges(const GroupContext& c, const std::vector<Matrix>& verts) {
  std::set<std::pair<Matrix, Matrix>> E;
  for (const Matrix& g : verts) {
    Matrix x = g * g;
    for (int k = 2; k < 5000 && !x.is_identity(); ++k, x = x * g) {
      if (x.is_scalar()) continue;  // removed in both modes
      Matrix h = naive_canon(x, c.mode);
      Matrix gc = naive_canon(g, c.mode);
      if (h == gc) continue;
      E.insert(gc < h ? std::make_pair(gc, h) : std::make_pair(h, gc));
    }
  }
  return E;
}

void check_edges_against_oracle(int n, u64 q, Mode m) {
  auto c = ctx(n, q, m);
  Graph G = Graph::build(c);
  std::vector<Matrix> verts;
  for (u64 i = 0; i < G.vertex_count(); ++i) verts.push_back(G.vertex(i));
  auto E = naive_edges(c, verts);
  std::set<std::pair<Matrix, Matrix>> got;
  for (auto [u, v] : G.edges()) {
    Matrix a = G.vertex(u), b = G.vertex(v);
    got.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  }
  CHECK(got.size() == G.edge_count());
  CHECK(got == E);
  // All-pairs agreement with is_edge on a prefix of vertices.
  u64 lim = std::min<u64>(G.vertex_count(), 120);
  int bad = 0;
  for (u64 i = 0; i < lim; ++i)
    for (u64 j = 0; j < lim; ++j) bad += is_edge(c, verts[i], verts[j]) != G.adjacent(i, j);
  CHECK(bad == 0);
}

}  // namespace

TEST_SUITE("pgraph") {

TEST_CASE("vertex counts") {
  CHECK(Graph::build(ctx(3, 2, Mode::GL_PROJ)).vertex_count() == 167);
  CHECK(Graph::build(ctx(3, 3, Mode::PGL)).vertex_count() == 5615);
  CHECK(Graph::build(ctx(2, 2, Mode::PGL)).vertex_count() == 5);
  CHECK(predicted_vertex_count(ctx(3, 3, Mode::GL_PROJ)) == 11230);
  CHECK(predicted_vertex_count(ctx(2, 4, Mode::PGL)) == 59);
}

TEST_CASE("vertex cap") {
  GraphConfig cfg;
  cfg.max_vertices = 100;
  CHECK(code_of([&] { Graph::build(ctx(3, 2, Mode::GL_PROJ), cfg); }) == Errc::TooLarge);
}

TEST_CASE("enumeration is a bijection onto canonical non-central elements") {
  auto c = ctx(2, 5, Mode::PGL);
  Graph G = Graph::build(c);
  std::set<Matrix> seen;
  for (u64 i = 0; i < G.vertex_count(); ++i) {
    Matrix A = G.vertex(i);
    CHECK(canonical(A, Mode::PGL) == A);
    CHECK(canonical(canonical(A, Mode::PGL), Mode::PGL) == A);
    CHECK(G.index_of(scale(A, 3)) == i);
    CHECK_FALSE(A.is_scalar());
    seen.insert(A);
  }
  CHECK(seen.size() == G.vertex_count());
  CHECK(seen.size() == gl_order(2, 5) / 4 - 1);
}

TEST_CASE("GL_2(F_2) components") {
  Graph G = Graph::build(ctx(2, 2, Mode::PGL));
  std::vector<u64> sizes;
  for (const auto& comp : G.components()) sizes.push_back(comp.size);
  CHECK(sizes == std::vector<u64>{2, 1, 1, 1});
  CHECK(G.edge_count() == 1);
  CHECK(G.diameter(0).value == 1);
}

TEST_CASE("GL_3(F_2) components") {
  Graph G = Graph::build(ctx(3, 2, Mode::GL_PROJ));
  std::map<u64, int> by_size;
  for (const auto& comp : G.components()) {
    ++by_size[comp.size];
    if (comp.size == 6) CHECK(G.diameter(comp.id).value == 1);
  }
  CHECK(G.components().size() == 57);
  CHECK(by_size == std::map<u64, int>{{2, 28}, {3, 21}, {6, 8}});
  // Sorted by size descending.
  for (std::size_t i = 1; i < G.components().size(); ++i) CHECK(G.components()[i - 1].size >= G.components()[i].size);
}

TEST_CASE("components agree with BFS reachability") {
  Graph G = Graph::build(ctx(2, 4, Mode::GL_PROJ));
  for (u64 v = 0; v < G.vertex_count(); v += 7) {
    auto d = G.bfs(v);
    for (u64 u = 0; u < G.vertex_count(); ++u) CHECK((d[u] >= 0) == (G.component_of(u) == G.component_of(v)));
  }
}

TEST_CASE("edges agree with brute force on GL_2(F_3) and GL_3(F_2)") {
  check_edges_against_oracle(2, 3, Mode::GL_PROJ);
  check_edges_against_oracle(2, 3, Mode::PGL);
  check_edges_against_oracle(3, 2, Mode::GL_PROJ);
  check_edges_against_oracle(2, 4, Mode::PGL);
}

TEST_CASE("is_edge examples") {
  auto F2 = Field::make(2), F3 = Field::make(3);
  GroupContext c2{3, F2, Mode::GL_PROJ};
  Matrix A = companion(Poly(F2, {1, 1, 0, 1}));
  CHECK(is_edge(c2, A, mat_pow(A, 2)));
  CHECK(is_edge(c2, A, mat_pow(A, 3)));
  CHECK_FALSE(is_edge(c2, A, A));
  CHECK_FALSE(is_edge(c2, M(F2, "1,1,0;0,1,0;0,0,1"), M(F2, "1,0,1;0,1,0;0,0,1")));
  GroupContext c3{3, F3, Mode::PGL};
  Matrix B = M(F3, "1,1,0;0,1,1;0,0,2");
  CHECK(is_edge(c3, B, scale(mat_pow(B, 2), 2)));
  CHECK(code_of([&] { is_edge(c2, A, Matrix::identity(F2, 3)); }) == Errc::InvalidVertex);
}

TEST_CASE("quotient_check") {
  Graph a = Graph::build(ctx(3, 3, Mode::GL_PROJ));
  Graph b = Graph::build(ctx(3, 3, Mode::PGL));
  CHECK(quotient_check(a, b));
  Graph c = Graph::build(ctx(3, 2, Mode::GL_PROJ));
  Graph d = Graph::build(ctx(3, 2, Mode::PGL));
  CHECK(quotient_check(c, d));
  CHECK(c.vertex_count() == d.vertex_count());
  CHECK(c.edge_count() == d.edge_count());
  CHECK(code_of([&] { quotient_check(a, d); }) == Errc::ContextMismatch);
}

TEST_CASE("build is deterministic across worker counts") {
  GraphConfig one, two;
  two.workers = 2;
  Graph a = Graph::build(ctx(2, 7, Mode::GL_PROJ), one);
  Graph b = Graph::build(ctx(2, 7, Mode::GL_PROJ), two);
  CHECK(a.edges() == b.edges());
  REQUIRE(a.components().size() == b.components().size());
  for (std::size_t i = 0; i < a.components().size(); ++i) {
    CHECK(a.components()[i].size == b.components()[i].size);
    CHECK(a.components()[i].representative == b.components()[i].representative);
  }
}

TEST_CASE("diameter strategies") {
  GraphConfig cfg;
  cfg.adjacency_cap = 10;
  Graph G = Graph::build(ctx(3, 2, Mode::GL_PROJ), cfg);
  CHECK_FALSE(G.has_adjacency());
  CHECK(code_of([&] { G.diameter(0); }) == Errc::AdjacencyDropped);

  Graph H = Graph::build(ctx(3, 3, Mode::PGL));
  auto big = H.components().front();
  auto exact = H.diameter_exact(big.id, false);
  auto sym = H.diameter_exact(big.id, true);
  auto sampled = H.diameter_sampled(big.id, 8, 3);
  CHECK(exact.exact);
  CHECK(exact.value == sym.value);
  CHECK_FALSE(sampled.exact);
  CHECK(sampled.value <= exact.value);
  CHECK(exact.value <= 16);
}

}  // TEST_SUITE
