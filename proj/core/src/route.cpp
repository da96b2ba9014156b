#include "powergraph/route.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "powergraph/canon.hpp"
#include "powergraph/error.hpp"

namespace pg {

namespace {

[[noreturn]] void internal(const std::string& msg) { throw Error(Errc::Internal, msg); }

bool mode_equal(const Matrix& a, const Matrix& b, Mode mode) {
  if (mode == Mode::GL_PROJ) return a == b;
  return canonical(a, Mode::PGL) == canonical(b, Mode::PGL);
}

bool is_power_of_two(u64 v) { return v != 0 && (v & (v - 1)) == 0; }

// q - 1 is a power of r (r prime).
bool is_power_of_prime(u64 v, u64 r) {
  if (v <= 1) return false;
  while (v % r == 0) v /= r;
  return v == 1;
}

u64 smallest_prime_except(u64 v, u64 skip) {
  for (u64 r : prime_factors(v)) {
    if (r != skip) return r;
  }
  return 0;
}

// Multiplicative order of 2 modulo an odd prime p.
u64 order_of_two(u64 p) {
  u64 m = 1, v = 2 % p;
  while (v != 1) {
    v = mulmod(v, 2, p);
    ++m;
  }
  return m;
}

// Smallest field element other than 0 and 1.
fe nontrivial_unit(const FieldPtr&) { return 2; }

Matrix jordan_ref(int n, const FieldPtr& F) {
  Matrix J = Matrix::identity(F, n);
  J(0, n - 1) = 1;
  return J;
}

Matrix j2(const FieldPtr& F) { return Matrix::from_rows(F, {{1, 1}, {0, 1}}); }

// A == X * diag(blocks) * X^-1 with blocks the generalized Jordan blocks.
struct Split {
  Matrix X, Xinv;
  std::vector<GJCFBlock> info;
  std::vector<Matrix> blocks;
  std::vector<int> offset;
};

Split split_blocks(const Matrix& A) {
  GJCF g = gjcf(A);
  Split s;
  s.X = g.transform;
  s.Xinv = mat_inv(g.transform);
  s.info = g.blocks;
  int off = 0;
  for (const auto& b : g.blocks) {
    s.blocks.push_back(gjcf_block(b.irr, b.chain));
    s.offset.push_back(off);
    off += b.size();
  }
  return s;
}

Split reorder(const Split& s, const std::vector<int>& order) {
  Split r;
  r.X = Matrix(s.X.F, s.X.n);
  int col = 0;
  for (int idx : order) {
    int sz = s.blocks[idx].n;
    for (int j = 0; j < sz; ++j) r.X.set_col(col + j, s.X.col(s.offset[idx] + j));
    r.info.push_back(s.info[idx]);
    r.blocks.push_back(s.blocks[idx]);
    r.offset.push_back(col);
    col += sz;
  }
  r.Xinv = mat_inv(r.X);
  return r;
}

// Moves the listed blocks to the front, keeping the rest in order.
Split front(const Split& s, const std::vector<int>& first) {
  std::vector<int> order = first;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    if (std::find(first.begin(), first.end(), i) == first.end()) order.push_back(i);
  }
  return reorder(s, order);
}

Matrix assemble(const Split& s, const std::vector<Matrix>& blocks) {
  return s.X * block_diag(blocks) * s.Xinv;
}

void require_semisimple(const Split& s) {
  for (const auto& b : s.info) {
    if (b.chain != 1) internal("expected a semisimple matrix");
  }
}

bool is_x_minus_one(const Poly& f) { return f.degree() == 1 && f.c[0] == f.F->neg(1); }

// Path under construction with exact equality.
class Walk {
 public:
  explicit Walk(const Matrix& start) { v_.push_back(start); }
  const Matrix& cur() const { return v_.back(); }
  int length() const { return static_cast<int>(s_.size()); }
  const std::vector<Matrix>& vertices() const { return v_; }
  const std::vector<PathStep>& steps() const { return s_; }

  void power(u64 k) { push(mat_pow(cur(), k), {k, true}); }
  void root(const Matrix& R, u64 k) {
    if (mat_pow(R, k) != cur()) internal("root witness does not power to the current vertex");
    push(R, {k, false});
  }
  void append_raw(const Matrix& V, PathStep s) { push(V, s); }

  PathCertificate finish(const std::string& tag) const {
    PathCertificate c;
    c.ctx = GroupContext{cur().n, cur().F, Mode::GL_PROJ};
    c.vertices = v_;
    c.steps = s_;
    c.branches.push_back(tag);
    remove_cycles(c);
    return c;
  }

 private:
  void push(const Matrix& B, PathStep s) {
    if (B == cur()) return;
    if (B.is_scalar()) internal("construction reached a central element");
    v_.push_back(B);
    s_.push_back(s);
  }
  std::vector<Matrix> v_;
  std::vector<PathStep> s_;
};

}  // namespace

// ------------------------------------------------------------ certificates

PathCertificate PathCertificate::reversed() const {
  PathCertificate r;
  r.ctx = ctx;
  r.vertices.assign(vertices.rbegin(), vertices.rend());
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) r.steps.push_back({it->k, !it->forward});
  r.branches = branches;
  return r;
}

void PathCertificate::append(const PathCertificate& tail) {
  if (tail.vertices.empty()) return;
  if (vertices.empty()) {
    *this = tail;
    return;
  }
  if (!mode_equal(back(), tail.front(), ctx.mode)) throw Error(Errc::PreconditionViolated, "appended path does not start at the end vertex");
  for (std::size_t i = 1; i < tail.vertices.size(); ++i) vertices.push_back(tail.vertices[i]);
  steps.insert(steps.end(), tail.steps.begin(), tail.steps.end());
  branches.insert(branches.end(), tail.branches.begin(), tail.branches.end());
}

PathCheck verify_path(const PathCertificate& cert) {
  PathCheck bad;
  bad.ok = false;
  const auto& v = cert.vertices;
  if (v.empty()) {
    if (!cert.steps.empty()) {
      bad.failed_index = 0;
      bad.reason = "steps without vertices";
      return bad;
    }
    return {};
  }
  if (cert.steps.size() + 1 != v.size()) {
    bad.failed_index = 0;
    bad.reason = "step count does not match vertex count";
    return bad;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    bad.failed_index = static_cast<int>(i);
    if (v[i].F != cert.ctx.F || v[i].n != cert.ctx.n) {
      bad.reason = "vertex outside the group";
      return bad;
    }
    if (!is_invertible(v[i])) {
      bad.reason = "singular vertex";
      return bad;
    }
    if (v[i].is_scalar()) {
      bad.reason = "central vertex";
      return bad;
    }
  }
  for (std::size_t i = 0; i < cert.steps.size(); ++i) {
    bad.failed_index = static_cast<int>(i);
    const PathStep& s = cert.steps[i];
    if (s.k == 0) {
      bad.reason = "zero exponent";
      return bad;
    }
    if (mode_equal(v[i], v[i + 1], cert.ctx.mode)) {
      bad.reason = "repeated consecutive vertex";
      return bad;
    }
    const Matrix& base = s.forward ? v[i] : v[i + 1];
    const Matrix& image = s.forward ? v[i + 1] : v[i];
    if (!mode_equal(mat_pow(base, s.k), image, cert.ctx.mode)) {
      bad.reason = "power relation fails";
      return bad;
    }
  }
  return {};
}

void remove_cycles(PathCertificate& c) {
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    for (std::size_t j = c.vertices.size() - 1; j > i; --j) {
      if (mode_equal(c.vertices[i], c.vertices[j], c.ctx.mode)) {
        c.vertices.erase(c.vertices.begin() + static_cast<long>(i) + 1, c.vertices.begin() + static_cast<long>(j) + 1);
        c.steps.erase(c.steps.begin() + static_cast<long>(i), c.steps.begin() + static_cast<long>(j));
        break;
      }
    }
  }
}

PathCertificate project_to_pgl(const PathCertificate& cert) {
  PathCertificate r;
  r.ctx = cert.ctx;
  r.ctx.mode = Mode::PGL;
  r.branches = cert.branches;
  for (std::size_t i = 0; i < cert.vertices.size(); ++i) {
    Matrix c = canonical(cert.vertices[i], Mode::PGL);
    if (!r.vertices.empty() && r.vertices.back() == c) {
      // Merged vertices are equal modulo scalars, so either adjacent step
      // still witnesses the relation with the surviving neighbour.
      continue;
    }
    if (i > 0) r.steps.push_back(cert.steps[i - 1]);
    r.vertices.push_back(c);
  }
  remove_cycles(r);
  return r;
}

bool in_routing_range(int n, u64 q) { return q == 2 ? n >= 6 : n >= 3; }

// ------------------------------------------------------------ pivots

PivotPair reference_pivots(int n, const FieldPtr& F) {
  PivotPair p{jordan_ref(n, F), Matrix::identity(F, n)};
  if (F->q() == 2) {
    if (n < 4) throw Error(Errc::OutOfRange, "q = 2 needs n >= 4");
    p.A(1, 1) = 1;
    p.A(1, 2) = 1;
    p.A(2, 1) = 1;
    p.A(2, 2) = 0;
  } else {
    if (n < 3) throw Error(Errc::OutOfRange, "n >= 3 required");
    p.A(1, 1) = nontrivial_unit(F);
  }
  return p;
}

Matrix pivot_matrix(const PivotSpec& s, int n, const FieldPtr& F) {
  if (s.m < 1 || s.m > n - 2 || s.x == s.y || s.x == 0 || s.y == 0) throw Error(Errc::PreconditionViolated, "invalid pivot spec");
  std::vector<fe> d(static_cast<std::size_t>(n), s.x);
  for (int i = n - s.m - 1; i < n - 1; ++i) d[static_cast<std::size_t>(i)] = s.y;
  return Matrix::diag(F, d);
}

Matrix conjugator(const Matrix& P, const Matrix& T) {
  GJCF gp = gjcf(P), gt = gjcf(T);
  if (!same_blocks(gp.blocks, gt.blocks)) throw Error(Errc::PreconditionViolated, "matrices are not similar");
  Matrix X = gp.transform * mat_inv(gt.transform);
  if (X * T != P * X) internal("conjugator check failed");
  return X;
}

PivotSpec pivot_spec_of(const Matrix& P, Matrix* X) {
  if (!is_pivot(P)) throw Error(Errc::NotPivot, "not a pivot matrix");
  std::map<fe, int> mult;
  for (const auto& b : similarity_blocks(P)) {
    if (b.irr.degree() != 1) throw Error(Errc::NotPivot, "eigenvalue outside the field");
    mult[P.F->neg(b.irr.c[0])] += b.chain;
  }
  if (mult.size() != 2) throw Error(Errc::NotPivot, "pivot must have two eigenvalues");
  auto a = *mult.begin(), b = *std::next(mult.begin());
  PivotSpec s;
  if (a.second >= b.second) {
    s = {a.first, b.first, b.second};
  } else {
    s = {b.first, a.first, a.second};
  }
  if (X) *X = conjugator(P, pivot_matrix(s, P.n, P.F));
  return s;
}

bool check_factorization(const CommFactorization& f, const Matrix& X) {
  if (f.factors.size() != 5 || f.designated.size() != 5) return false;
  Matrix prod = Matrix::identity(X.F, X.n);
  for (std::size_t i = 0; i < 5; ++i) {
    const Matrix& M = f.factors[i];
    const Matrix& K = f.designated[i];
    if (!is_invertible(M) || M * K != K * M) return false;
    prod = prod * M;
  }
  Matrix target = f.permutation ? *f.permutation * X : X;
  return prod == target;
}

namespace {

Matrix swap_ends(int n, const FieldPtr& F) {
  Matrix T(F, n);
  T(0, n - 1) = 1;
  T(n - 1, 0) = 1;
  for (int i = 1; i < n - 1; ++i) T(i, i) = 1;
  return T;
}

bool strong_shape(const Matrix& Z) {
  int n = Z.n;
  return Z(n - 1, 0) != 0 && rank(sub_block(Z, 1, 0, n - 1)) == n - 1;
}

// Z with non-zero lower-left entry and invertible lower-left (n-1) block:
// Z = (TLT)(TD)U with TLT, U in Comm(J) and TD in Comm(A).
std::array<Matrix, 3> strong_factor(const Matrix& Z) {
  const FieldPtr& F = Z.F;
  const Field& K = *F;
  int n = Z.n, r = n - 2;
  Matrix T = swap_ends(n, F);
  Matrix M = T * Z;
  fe a = M(0, 0);
  if (a == 0) internal("strong factorization needs a non-zero corner");
  fe ainv = K.inv(a);
  // Schur complement E' = E - d b / a and f' = f - d c / a on the middle block.
  Matrix Ep(F, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) Ep(i, j) = K.sub(M(1 + i, 1 + j), K.mul(K.mul(M(1 + i, 0), M(0, 1 + j)), ainv));
  }
  Matrix Epinv = mat_inv(Ep);
  std::vector<fe> fp(static_cast<std::size_t>(r)), hp(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) fp[i] = K.sub(M(1 + i, n - 1), K.mul(K.mul(M(1 + i, 0), M(0, n - 1)), ainv));
  for (int j = 0; j < r; ++j) hp[j] = K.sub(M(n - 1, 1 + j), K.mul(K.mul(M(n - 1, 0), M(0, 1 + j)), ainv));
  std::vector<fe> l32(static_cast<std::size_t>(r), 0);
  for (int j = 0; j < r; ++j) {
    fe s = 0;
    for (int t = 0; t < r; ++t) s = K.add(s, K.mul(hp[t], Epinv(t, j)));
    l32[j] = s;
  }
  fe dn = K.sub(M(n - 1, n - 1), K.mul(K.mul(M(n - 1, 0), M(0, n - 1)), ainv));
  for (int t = 0; t < r; ++t) dn = K.sub(dn, K.mul(l32[t], fp[t]));

  Matrix L = Matrix::identity(F, n), D = Matrix::identity(F, n), U = Matrix::identity(F, n);
  for (int i = 0; i < r; ++i) L(1 + i, 0) = K.mul(M(1 + i, 0), ainv);
  L(n - 1, 0) = K.mul(M(n - 1, 0), ainv);
  for (int j = 0; j < r; ++j) L(n - 1, 1 + j) = l32[j];
  D(0, 0) = a;
  D(n - 1, n - 1) = dn;
  for (int j = 0; j < n - 1; ++j) U(0, 1 + j) = K.mul(M(0, 1 + j), ainv);
  put_block(U, 1, 1, Ep);
  for (int i = 0; i < r; ++i) U(1 + i, n - 1) = fp[i];
  if (L * D * U != M) internal("block LDU reconstruction failed");
  return {T * L * T, T * D, U};
}

// Z with non-zero lower-left entry, n >= 4, q != 2: Z in Comm(J)Comm(A)Comm(J).
std::array<Matrix, 3> weak_factor(const Matrix& Y) {
  const FieldPtr& F = Y.F;
  const Field& K = *F;
  int n = Y.n;
  fe c = Y(n - 1, 0);
  if (c == 0) internal("weak factorization needs a non-zero corner");
  fe cinv = K.inv(c);
  Matrix U1 = Matrix::identity(F, n);
  for (int i = 0; i < n - 1; ++i) U1(i, n - 1) = K.neg(K.mul(Y(i, 0), cinv));
  Matrix Y1 = U1 * Y;
  Matrix U2 = Matrix::identity(F, n);
  for (int j = 1; j < n; ++j) U2(0, j) = K.neg(K.mul(Y1(n - 1, j), cinv));
  Matrix Y2 = Y1 * U2;

  // Reduce the middle block to diag(1, X'') inside rows/columns 1..n-2.
  int pr = -1, pc = -1;
  for (int i = 1; i < n - 1 && pr < 0; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      if (Y2(i, j) != 0) {
        pr = i;
        pc = j;
        break;
      }
    }
  }
  if (pr < 0) internal("middle block vanished");
  Matrix Pr = Matrix::identity(F, n), Pc = Matrix::identity(F, n);
  if (pr != 1) {
    Pr(1, 1) = Pr(pr, pr) = 0;
    Pr(1, pr) = Pr(pr, 1) = 1;
  }
  if (pc != 1) {
    Pc(1, 1) = Pc(pc, pc) = 0;
    Pc(1, pc) = Pc(pc, 1) = 1;
  }
  Matrix Z0 = Pr * Y2 * Pc;
  fe piv = Z0(1, 1);
  Matrix Er = Matrix::identity(F, n), Ec = Matrix::identity(F, n);
  Er(1, 1) = K.inv(piv);
  for (int i = 2; i < n - 1; ++i) Er(i, 1) = K.neg(K.mul(Z0(i, 1), K.inv(piv)));
  for (int j = 2; j < n - 1; ++j) Ec(1, j) = K.neg(K.mul(Z0(1, j), K.inv(piv)));
  Matrix R1 = Er * Pr, R2 = Pc * Ec;
  Matrix Z = R1 * Y2 * R2;
  Matrix U3 = Matrix::identity(F, n);
  U3(0, 1) = K.neg(Z(0, 1));
  Matrix Z3 = U3 * Z;
  Matrix U4 = Matrix::identity(F, n);
  U4(1, n - 1) = K.neg(Z3(1, n - 1));
  Matrix W = Z3 * U4;
  for (int t = 0; t < n; ++t) {
    if (t != 1 && (W(1, t) != 0 || W(t, 1) != 0)) internal("weak factorization middle factor not in Comm(A)");
  }
  Matrix left = U3 * R1 * U1, right = U2 * R2 * U4;
  return {mat_inv(left), W, mat_inv(right)};
}

CommFactorization identity_factorization(const Matrix& X, std::string pattern, std::vector<Matrix> designated) {
  CommFactorization f;
  f.pattern = std::move(pattern);
  f.designated = std::move(designated);
  Matrix I = Matrix::identity(X.F, X.n);
  f.factors = {X, I, I, I, I};
  return f;
}

void require_range(const Matrix& X) {
  u64 q = X.F->q();
  if ((q == 2 && X.n < 4) || (q != 2 && X.n < 3)) throw Error(Errc::OutOfRange, "factorization needs (q != 2, n >= 3) or (q = 2, n >= 4)");
  if (!is_invertible(X)) throw Error(Errc::Singular, "X is singular");
}

}  // namespace

CommFactorization comm_factorize_jordan(const Matrix& X) {
  require_range(X);
  const FieldPtr& F = X.F;
  int n = X.n;
  PivotPair ref = reference_pivots(n, F);
  std::vector<Matrix> des{ref.J, ref.A, ref.J, ref.A, ref.J};
  if (X * ref.J == ref.J * X) return identity_factorization(X, "J,A,J,A,J", des);

  // Column operations making the lower (n-1) rows of columns
  // y, x_1, ..., x_{n-2} a basis with y having non-zero last coordinate.
  Matrix U = Matrix::identity(F, n);
  if (X(n - 1, n - 1) == 0) {
    int i = 0;
    while (X(n - 1, i) == 0) ++i;
    U(i, n - 1) = 1;
  }
  Matrix T = swap_ends(n, F);
  if (!strong_shape(X * U * T)) {
    Matrix XU = X * U;
    bool fixed = false;
    for (int i = 1; i < n - 1 && !fixed; ++i) {
      Matrix U2 = Matrix::identity(F, n);
      U2(0, i) = 1;
      if (strong_shape(XU * U2 * T)) {
        U = U * U2;
        fixed = true;
      }
    }
    if (!fixed) internal("column operation search failed");
  }
  auto m = strong_factor(X * U * T);
  CommFactorization f;
  f.pattern = "J,A,J,A,J";
  f.designated = des;
  f.factors = {m[0], m[1], m[2], T, mat_inv(U)};
  if (!check_factorization(f, X)) internal("Jordan factorization check failed");
  return f;
}

namespace {

// 2x2 helpers for the n = 3 corner submatrix.
Matrix embed_corners(const Matrix& r) {
  Matrix R = Matrix::identity(r.F, 3);
  R(0, 0) = r(0, 0);
  R(0, 2) = r(0, 1);
  R(2, 0) = r(1, 0);
  R(2, 2) = r(1, 1);
  return R;
}

// r, r2 with r * S * r2 equal to [[0,1],[1,0]] or [[0,0],[1,0]].
std::pair<Matrix, Matrix> corner_normalizers(const Matrix& S) {
  const FieldPtr& F = S.F;
  const Field& K = *F;
  Matrix anti = Matrix::from_rows(F, {{0, 1}, {1, 0}});
  if (rank(S) == 2) return {anti * mat_inv(S), Matrix::identity(F, 2)};
  int pi = -1, pj = -1;
  for (int i = 0; i < 2 && pi < 0; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (S(i, j) != 0) {
        pi = i;
        pj = j;
        break;
      }
    }
  }
  if (pi < 0) throw Error(Errc::Singular, "corner submatrix vanished");
  Matrix Pr = pi == 1 ? Matrix::identity(F, 2) : anti;
  Matrix Pc = pj == 0 ? Matrix::identity(F, 2) : anti;
  Matrix S1 = Pr * S * Pc;
  fe s = S1(1, 0), sinv = K.inv(s);
  Matrix Er = Matrix::identity(F, 2), Ec = Matrix::identity(F, 2);
  Er(0, 1) = K.neg(K.mul(S1(0, 0), sinv));
  Er(1, 1) = sinv;
  Ec(0, 1) = K.neg(K.mul(S1(1, 1), sinv));
  return {Er * Pr, Pc * Ec};
}

CommFactorization factorize_pivot3(const Matrix& X, const Matrix& A1, const Matrix& A2, const PivotPair& ref) {
  const FieldPtr& F = X.F;
  CommFactorization f;
  f.pattern = "A,J,A,J,A";
  f.designated = {A1, ref.J, ref.A, ref.J, A2};
  Matrix S = Matrix::from_rows(F, {{0, 0}, {0, 0}});
  S(0, 0) = X(0, 0);
  S(0, 1) = X(0, 2);
  S(1, 0) = X(2, 0);
  S(1, 1) = X(2, 2);
  auto [r, r2] = corner_normalizers(S);
  Matrix R = embed_corners(r), R2 = embed_corners(r2);
  Matrix Y = R * X * R2;
  Matrix I = Matrix::identity(F, 3), T = swap_ends(3, F), L = Matrix::identity(F, 3);
  L(2, 0) = 1;
  const std::pair<Matrix, Matrix> tries[] = {{I, I}, {T, T}, {L, I}, {I, L}, {L, L}};
  for (const auto& [left, right] : tries) {
    Matrix Z = left * Y * right;
    if (!strong_shape(Z)) continue;
    Matrix Rl = left * R, Rr = R2 * right;
    auto m = strong_factor(Z);
    f.factors = {mat_inv(Rl), m[0], m[1], m[2], mat_inv(Rr)};
    if (!check_factorization(f, X)) internal("n = 3 pivot factorization check failed");
    return f;
  }
  internal("no corner adjustment produced the strong shape");
}

// Permutation exchanging coordinates i and i + n/2.
Matrix block_swap(int n, const FieldPtr& F) {
  Matrix P(F, n);
  int h = n / 2;
  for (int i = 0; i < h; ++i) {
    P(i + h, i) = 1;
    P(i, i + h) = 1;
  }
  return P;
}

}  // namespace

CommFactorization comm_factorize_pivot(const Matrix& X, const PivotSpec& s1, const PivotSpec& s2) {
  require_range(X);
  const FieldPtr& F = X.F;
  int n = X.n;
  if (F->q() == 2) throw Error(Errc::OutOfRange, "pivot factorization needs q != 2");
  PivotPair ref = reference_pivots(n, F);
  Matrix A1 = pivot_matrix(s1, n, F), A2 = pivot_matrix(s2, n, F);
  if (n == 3) {
    if (X.is_identity()) return identity_factorization(X, "A,J,A,J,A", {A1, ref.J, ref.A, ref.J, A2});
    return factorize_pivot3(X, A1, A2, ref);
  }
  CommFactorization f;
  f.pattern = "A1,J,A,J,A2";
  f.designated = {A1, ref.J, ref.A, ref.J, A2};
  if (X * A1 == A1 * X) {
    Matrix I = Matrix::identity(F, n);
    f.factors = {X, I, I, I, I};
    return f;
  }
  // Rows where A1 has x1 and columns where A2 has x2.
  auto x_rows = [n](int m) {
    std::vector<int> v;
    for (int i = 0; i < n - m - 1; ++i) v.push_back(i);
    v.push_back(n - 1);
    return v;
  };
  std::vector<int> rows = x_rows(s1.m), cols = x_rows(s2.m);
  auto attempt = [&](const Matrix& Xp) -> bool {
    for (int i : rows) {
      for (int j : cols) {
        if (Xp(i, j) == 0) continue;
        Matrix R = Matrix::identity(F, n), R2 = Matrix::identity(F, n);
        if (i != n - 1) {
          R(i, i) = R(n - 1, n - 1) = 0;
          R(i, n - 1) = R(n - 1, i) = 1;
        }
        if (j != 0) {
          R2(j, j) = R2(0, 0) = 0;
          R2(j, 0) = R2(0, j) = 1;
        }
        auto m = weak_factor(R * Xp * R2);
        f.factors = {mat_inv(R), m[0], m[1], m[2], mat_inv(R2)};
        return true;
      }
    }
    return false;
  };
  if (!attempt(X)) {
    if (2 * s1.m != n) internal("unbalanced factorization found no usable entry");
    Matrix P = block_swap(n, F);
    PivotSpec swapped{s1.y, s1.x, s1.m};
    if (P * A1 * mat_inv(P) != pivot_matrix(swapped, n, F)) internal("block swap does not exchange the eigenspaces");
    if (!attempt(P * X)) internal("block swap did not expose a usable entry");
    f.permutation = P;
  }
  if (!check_factorization(f, X)) internal("pivot factorization check failed");
  return f;
}

namespace {

// Walks V_0 = Z0 T0 Z0^-1 through the alternation; each hop passes through
// the product of consecutive designated matrices.
PathCertificate alternation_path(const Matrix& Z0, const std::vector<Matrix>& types, const std::vector<Matrix>& factors,
                                 const std::vector<u64>& exps, const Matrix& target) {
  Matrix Z = Z0;
  Walk w(Z * types[0] * mat_inv(Z));
  for (int i = 0; i < 4; ++i) {
    Z = Z * factors[i];
    Matrix Zi = mat_inv(Z);
    Matrix mid = Z * (types[i] * types[i + 1]) * Zi;
    w.root(mid, exps[i]);
    w.power(exps[i + 1]);
  }
  if (w.cur() != target) internal("alternation path does not end at the target");
  return w.finish("PivotAlternation");
}

}  // namespace

PathCertificate pivot_path(const Matrix& P1, const Matrix& P2) {
  if (P1.F != P2.F || P1.n != P2.n) throw Error(Errc::ContextMismatch, "pivots from different groups");
  const FieldPtr& F = P1.F;
  int n = P1.n;
  u64 q = F->q();
  if ((q == 2 && n < 4) || (q != 2 && n < 3)) throw Error(Errc::OutOfRange, "pivot paths need (q != 2, n >= 3) or (q = 2, n >= 4)");
  if (P1 == P2) {
    Walk w(P1);
    return w.finish("PivotAlternation");
  }
  PivotPair ref = reference_pivots(n, F);
  if (is_jordan_pivot(P1) && is_jordan_pivot(P2)) {
    Matrix X1 = conjugator(P1, ref.J), X2 = conjugator(P2, ref.J);
    CommFactorization f = comm_factorize_jordan(mat_inv(X1) * X2);
    u64 kA = q * q, kJ = (q * q - 1) * (q * q - 1);
    return alternation_path(X1, f.designated, f.factors, {kJ, kA, kJ, kA, kJ}, P2);
  }
  if (q == 2 || !is_pivot(P1) || !is_pivot(P2)) throw Error(Errc::NotPivot, "both endpoints must be pivots or both Jordan pivots");
  Matrix X1, X2;
  PivotSpec s1 = pivot_spec_of(P1, &X1), s2 = pivot_spec_of(P2, &X2);
  CommFactorization f = comm_factorize_pivot(mat_inv(X1) * X2, s1, s2);
  std::vector<Matrix> types = f.designated;
  Matrix Z0 = X1;
  if (f.permutation) {
    const Matrix& P = *f.permutation;
    Matrix Pinv = mat_inv(P);
    types[0] = P * types[0] * Pinv;
    Z0 = X1 * Pinv;
  }
  // Middle slot of the n = 3 pattern uses the reference A; its centralizer
  // equals that of every 3x3 pivot in this normal form.
  types[2] = ref.A;
  u64 kA = q, kJ = (q - 1) * (q - 1);
  return alternation_path(Z0, types, f.factors, {kA, kJ, kA, kJ, kA}, P2);
}


// ------------------------------------------------------------ path to pivot

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::AlreadyPivot: return "AlreadyPivot";
    case Branch::UnipotentPower: return "UnipotentPower";
    case Branch::PrimeEvasion: return "PrimeEvasion";
    case Branch::IrreducibleChar: return "IrreducibleChar";
    case Branch::IrreducibleCharSpecial: return "IrreducibleCharSpecial";
    case Branch::DiagonalOdd: return "DiagonalOdd";
    case Branch::DiagonalEven: return "DiagonalEven";
    case Branch::SamePrimePower: return "SamePrimePower";
    case Branch::SamePrimePowerSpecial: return "SamePrimePowerSpecial";
    case Branch::EvenOrder2: return "EvenOrder2";
    case Branch::IrreducibleFactor2: return "IrreducibleFactor2";
    case Branch::CompositeOrder2: return "CompositeOrder2";
    case Branch::PrimeOrder2: return "PrimeOrder2";
    case Branch::MersenneOrder2: return "MersenneOrder2";
    case Branch::ObstructionJordan: return "ObstructionJordan";
    case Branch::ObstructionIrreducible: return "ObstructionIrreducible";
    case Branch::ObstructionDiagonal: return "ObstructionDiagonal";
    case Branch::ObstructionExtraIrreducible2: return "ObstructionExtraIrreducible2";
    case Branch::ObstructionQuasiDiagonal2: return "ObstructionQuasiDiagonal2";
  }
  return "?";
}

bool branch_is_obstruction(Branch b) {
  switch (b) {
    case Branch::ObstructionJordan:
    case Branch::ObstructionIrreducible:
    case Branch::ObstructionDiagonal:
    case Branch::ObstructionExtraIrreducible2:
    case Branch::ObstructionQuasiDiagonal2:
      return true;
    default:
      return false;
  }
}

int branch_bound(Branch b) {
  switch (b) {
    case Branch::AlreadyPivot: return 0;
    case Branch::UnipotentPower: return 3;
    case Branch::PrimeEvasion: return 3;
    case Branch::IrreducibleChar: return 4;
    case Branch::IrreducibleCharSpecial: return 6;
    case Branch::DiagonalOdd: return 1;
    case Branch::DiagonalEven: return 4;
    case Branch::SamePrimePower: return 4;
    case Branch::SamePrimePowerSpecial: return 5;
    case Branch::EvenOrder2: return 5;
    case Branch::IrreducibleFactor2: return 6;
    case Branch::CompositeOrder2: return 5;
    case Branch::PrimeOrder2: return 4;
    case Branch::MersenneOrder2: return 6;
    default: return 0;
  }
}

int to_pivot_bound(int n, u64 q) {
  if (q == 2) return 6;
  if (q == 3 && n == 4) return 6;
  return 4;
}

int connect_bound(int n, u64 q) { return 2 * to_pivot_bound(n, q) + 8; }

namespace {

// ---- q != 2

// Current vertex has a p1-part in its projective order and reducible
// characteristic polynomial: raise to projective order p1, take a p0-th root
// and an m-th power landing on X diag(x I, I) X^-1.
void prime_evasion_tail(Walk& w, u64 p1) {
  const FieldPtr F = w.cur().F;
  u64 q = F->q();
  w.power(projective_prime_exponent(w.cur(), p1));
  Split s = split_blocks(w.cur());
  require_semisimple(s);
  if (s.blocks.size() < 2) internal("prime evasion needs a reducible characteristic polynomial");
  u64 p0 = smallest_prime_except(q - 1, p1);
  if (p0 == 0) internal("q - 1 is a power of p1");
  fe x = F->pow(F->generator(), (q - 1) / p0);
  u64 m = 1;
  for (const auto& C : s.blocks) m = lcm_u64(m, mat_order(C));
  u64 mi = inv_mod(m % p0, p0);
  std::vector<Matrix> roots;
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    Matrix Cr = prime_companion_root(s.blocks[i], p0);
    Matrix S = mat_pow(Cr, m);
    if (!S.is_scalar()) internal("root power is not scalar");
    u64 d = 0;
    while (F->pow(x, d) != S(0, 0)) {
      if (++d == p0) internal("root power outside <x>");
    }
    u64 e = (((i == 0 ? 1 : 0) + p0 - d) % p0) * mi % p0;
    roots.push_back(scale(Cr, F->pow(x, e)));
  }
  w.root(assemble(s, roots), p0);
  w.power(m);
  if (!is_pivot(w.cur())) internal("prime evasion did not reach a pivot");
}

// C4 similar to diag(C, C) with C = [[0,-1],[1,0]] over F_3.
void special_chain(Walk& w) {
  const FieldPtr F = w.cur().F;
  Matrix C = companion(Poly(F, {1, 0, 1}));
  Matrix I2 = Matrix::identity(F, 2), Z2(F, 2);
  Matrix D = block_diag({C, C});
  Matrix Y = conjugator(w.cur(), D), Yi = mat_inv(Y);
  Matrix R9(F, 4);
  put_block(R9, 0, 0, C);
  put_block(R9, 0, 2, I2);
  put_block(R9, 2, 2, C);
  Matrix U(F, 4);
  put_block(U, 0, 0, I2);
  put_block(U, 0, 2, scale(C, F->neg(1)));
  put_block(U, 2, 2, I2);
  Matrix R4 = Matrix::from_rows(F, {{1, 0, 0, 1}, {0, -1, 1, 0}, {0, 0, -1, 0}, {0, 0, 0, 1}});
  Matrix P = Matrix::diag(F, {1, F->neg(1), F->neg(1), 1});
  if (mat_pow(R9, 4) != U || mat_pow(R4, 4) != U || mat_pow(R4, 3) != P) internal("special chain identities fail");
  w.root(Y * R9 * Yi, 9);
  w.power(4);
  w.root(Y * R4 * Yi, 4);
  w.power(3);
  if (!is_pivot(w.cur())) internal("special chain did not reach a pivot");
}

bool special_chain_start(const Matrix& M) {
  if (M.n != 4 || M.F->q() != 3) return false;
  Matrix M2 = M * M;
  return M2 == Matrix::scalar(M.F, 4, M.F->neg(1));
}

Branch unipotent_power(Walk& w) {
  const FieldPtr F = w.cur().F;
  u64 q = F->q();
  w.power(projective_prime_exponent(w.cur(), F->p()));
  Split s = split_blocks(w.cur());
  if (s.blocks.size() == 1) return Branch::ObstructionJordan;
  std::vector<Matrix> b = s.blocks;
  b[0] = scale(b[0], nontrivial_unit(F));
  w.root(assemble(s, b), (q - 1) * (q - 1));
  w.power(q);
  if (!is_pivot(w.cur())) internal("unipotent scaling did not reach a pivot");
  return Branch::UnipotentPower;
}

Branch irreducible_char(Walk& w) {
  const Matrix A = w.cur();
  const FieldPtr& F = A.F;
  u64 q = F->q();
  int n = A.n;
  CompanionField K(A);
  const Field& E = *K.iso();
  fe g = E.generator();
  w.root(K.to_matrix(g), E.dlog(g, K.from_matrix(A)));
  u64 N = E.q() - 1;
  if (q == 3 && n == 4) {
    w.power(20);
    if (!special_chain_start(w.cur())) internal("twentieth power is not of the special shape");
    special_chain(w);
    return Branch::IrreducibleCharSpecial;
  }
  // Smallest proper factor k (k >= 3 when q = 3) and the smallest prime of
  // q^k - 1 coprime to q - 1.
  u64 p1 = 0;
  for (int k = (q == 3 ? 3 : 2); k < n && p1 == 0; ++k) {
    if (n % k != 0) continue;
    for (u64 r : prime_factors(checked_pow(q, static_cast<unsigned>(k)) - 1)) {
      if (gcd_u64(r, q - 1) == 1) {
        p1 = r;
        break;
      }
    }
    break;
  }
  if (p1 != 0) {
    w.power(N / p1);
  } else {
    // q - 1 not a prime power can leave no such prime (q = 7, n = 4); use the
    // smallest prime whose projective-prime power lies in a proper subfield.
    const Matrix G = w.cur();
    for (u64 r : prime_factors(proj_order(G))) {
      if (is_power_of_prime(q - 1, r)) continue;
      Matrix B = raise_to_projective_prime(G, r);
      if (!is_irreducible(char_poly(B))) {
        p1 = r;
        break;
      }
    }
    if (p1 == 0) internal("no usable prime for the irreducible branch");
    w.power(projective_prime_exponent(G, p1));
  }
  prime_evasion_tail(w, p1);
  return Branch::IrreducibleChar;
}

Branch diagonal_even(Walk& w) {
  const FieldPtr F = w.cur().F;
  u64 q = F->q();
  Split s = split_blocks(w.cur());
  int a = -1, b = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()) && a < 0; ++i) {
    for (int j = i + 1; j < static_cast<int>(s.blocks.size()); ++j) {
      if (s.blocks[i] == s.blocks[j]) {
        a = i;
        b = j;
        break;
      }
    }
  }
  if (a < 0) internal("no repeated eigenvalue");
  Split t = front(s, {a, b});
  u64 p1 = prime_evasion(q, 2).value();
  std::vector<Matrix> roots{double_companion_root(t.blocks[0], p1)};
  for (std::size_t i = 2; i < t.blocks.size(); ++i) roots.push_back(prime_companion_root(t.blocks[i], p1));
  w.root(assemble(t, roots), p1);
  prime_evasion_tail(w, p1);
  return Branch::DiagonalEven;
}

Branch same_prime_power(Walk& w) {
  const Matrix A = w.cur();
  const FieldPtr& F = A.F;
  u64 q = F->q();
  int n = A.n;
  Split s = split_blocks(A);
  require_semisimple(s);
  int b = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    if (s.blocks[i].n >= (q == 3 ? 3 : 2)) {
      b = i;
      break;
    }
  }
  if (b >= 0) {
    u64 p1 = prime_evasion(q, s.blocks[b].n).value();
    std::vector<Matrix> roots;
    for (const auto& C : s.blocks) roots.push_back(prime_companion_root(C, p1));
    w.root(assemble(s, roots), p1);
    prime_evasion_tail(w, p1);
    return Branch::SamePrimePower;
  }
  // q = 3 with blocks of size at most 2.
  u64 m = mat_order(A);
  Matrix H = mat_pow(A, m / 2);
  if (H != Matrix::scalar(F, n, F->neg(1))) {
    w.power(m / 2);
    if (!is_pivot(w.cur())) internal("half power is not a pivot");
    return Branch::SamePrimePower;
  }
  if (n > 4) {
    // Two equal 2x2 blocks exist by pigeonhole; a fifth root of that pair
    // raises 5 into the projective order.
    int a = -1, c = -1;
    for (int i = 0; i < static_cast<int>(s.blocks.size()) && a < 0; ++i) {
      for (int j = i + 1; j < static_cast<int>(s.blocks.size()); ++j) {
        if (s.blocks[i] == s.blocks[j]) {
          a = i;
          c = j;
          break;
        }
      }
    }
    if (a < 0) internal("no repeated 2x2 block");
    Split t = front(s, {a, c});
    std::vector<Matrix> roots{double_companion_root(t.blocks[0], 5)};
    for (std::size_t i = 2; i < t.blocks.size(); ++i) roots.push_back(prime_companion_root(t.blocks[i], 5));
    w.root(assemble(t, roots), 5);
    prime_evasion_tail(w, 5);
    return Branch::SamePrimePower;
  }
  w.power(m / 4);
  if (!special_chain_start(w.cur())) internal("quarter power is not of the special shape");
  special_chain(w);
  return Branch::SamePrimePowerSpecial;
}

Branch dispatch_odd_q(Walk& w) {
  const Matrix A = w.cur();
  const FieldPtr& F = A.F;
  u64 q = F->q(), p = F->p();
  int n = A.n;
  if (is_pivot(A)) return Branch::AlreadyPivot;
  u64 po = proj_order(A);
  if (po % p == 0) return unipotent_power(w);
  if (is_irreducible(char_poly(A))) {
    if (is_prime(static_cast<u64>(n))) return Branch::ObstructionIrreducible;
    return irreducible_char(w);
  }
  for (u64 r : prime_factors(po)) {
    if (!is_power_of_prime(q - 1, r)) {
      prime_evasion_tail(w, r);
      return Branch::PrimeEvasion;
    }
  }
  if (is_diagonalizable(A)) {
    if (q % 2 == 1) {
      w.power(po / 2);
      if (!is_pivot(w.cur())) internal("half projective power is not a pivot");
      return Branch::DiagonalOdd;
    }
    std::vector<fe> seen;
    for (const auto& b : similarity_blocks(A)) {
      for (int c = 0; c < b.chain; ++c) seen.push_back(b.irr.c[0]);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) == seen.end()) return Branch::ObstructionDiagonal;
    return diagonal_even(w);
  }
  return same_prime_power(w);
}

// ---- q = 2

// Odd order with (x+1)^2 dividing the characteristic polynomial.
void repeat_one(Walk& w) {
  const FieldPtr F = w.cur().F;
  u64 k = mat_order(w.cur());
  Split s = split_blocks(w.cur());
  require_semisimple(s);
  std::vector<int> ones;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    if (is_x_minus_one(s.info[i].irr)) ones.push_back(i);
  }
  if (ones.size() < 2) internal("repeat-one step needs two unit blocks");
  Split t = front(s, {ones[0], ones[1]});
  std::vector<Matrix> b{j2(F)};
  for (std::size_t i = 2; i < t.blocks.size(); ++i) b.push_back(t.blocks[i]);
  w.root(assemble(t, b), k + 1);
  w.power(k);
  if (!is_jordan_pivot(w.cur())) internal("repeat-one step did not reach a Jordan pivot");
}

// Order p with p + 1 not a power of two, every factor of degree <= N - 2.
void prime_order_nonprime(Walk& w) {
  u64 p = mat_order(w.cur());
  u64 m = order_of_two(p);
  u64 p0 = smallest_prime_except((u64{1} << m) - 1, p);
  if (p0 == 0) internal("2^m - 1 is a power of p");
  Split s = split_blocks(w.cur());
  require_semisimple(s);
  int b = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    if (static_cast<u64>(s.blocks[i].n) == m) {
      b = i;
      break;
    }
  }
  if (b < 0) internal("no block of the order's degree");
  u64 inv = inv_mod(p0 % p, p);
  std::vector<Matrix> roots;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    const Matrix& C = s.blocks[i];
    if (i == b) {
      roots.push_back(companion_root(C, p0));
    } else if (C.n == 1) {
      roots.push_back(C);
    } else {
      roots.push_back(mat_pow(C, inv));
    }
  }
  w.root(assemble(s, roots), p0);
  w.power(p);
  repeat_one(w);
}

// Order p = 2^m - 1 prime with two equal blocks.  Returns false, leaving the
// walk untouched, when the vertex is diag(C, C) or diag(C, C, 1).
bool mersenne_block_step(Walk& w) {
  u64 p = mat_order(w.cur());
  int N = w.cur().n;
  Split s = split_blocks(w.cur());
  require_semisimple(s);
  int a = -1, c = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(s.blocks.size()); ++j) {
      if (s.blocks[i] == s.blocks[j] && (a < 0 || s.blocks[i].n < s.blocks[a].n)) {
        a = i;
        c = j;
      }
    }
  }
  if (a < 0) internal("no repeated block");
  if (s.blocks[a].n == 1) {
    repeat_one(w);
    return true;
  }
  int m = s.blocks[a].n;
  if (N - 2 * m < 2) return false;
  u64 p0 = prime_factors((u64{1} << m) + 1).front();
  Split t = front(s, {a, c});
  std::vector<Matrix> roots{double_companion_root(t.blocks[0], p0)};
  for (std::size_t i = 2; i < t.blocks.size(); ++i) {
    roots.push_back(t.blocks[i].n == 1 ? t.blocks[i] : prime_companion_root(t.blocks[i], p0));
  }
  w.root(assemble(t, roots), p0);
  w.power(p);
  repeat_one(w);
  return true;
}

void mersenne_order(Walk& w) {
  if (mersenne_block_step(w)) return;
  u64 p = mat_order(w.cur());
  Split s = split_blocks(w.cur());
  int a = -1, c = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()) && a < 0; ++i) {
    for (int j = i + 1; j < static_cast<int>(s.blocks.size()); ++j) {
      if (s.blocks[i] == s.blocks[j]) {
        a = i;
        c = j;
        break;
      }
    }
  }
  Split t = front(s, {a, c});
  std::vector<Matrix> roots{double_companion_root(t.blocks[0], 3)};
  for (std::size_t i = 2; i < t.blocks.size(); ++i) roots.push_back(t.blocks[i]);
  w.root(assemble(t, roots), 3);
  w.power(p);
  if (!mersenne_block_step(w)) internal("order-3 power still of the excluded shape");
}

void composite_order(Walk& w) {
  u64 k = mat_order(w.cur());
  auto primes = prime_factors(k);
  for (u64 p : primes) {
    if (!is_power_of_two(p + 1)) {
      w.power(k / p);
      prime_order_nonprime(w);
      return;
    }
  }
  w.power(k / primes.front());
  if (!mersenne_block_step(w)) internal("composite order power of the excluded shape");
}

// Irreducible characteristic polynomial of composite degree N.
void irreducible_char2(Walk& w) {
  const Matrix A = w.cur();
  int N = A.n;
  CompanionField K(A);
  const Field& E = *K.iso();
  fe g = E.generator();
  w.root(K.to_matrix(g), E.dlog(g, K.from_matrix(A)));
  u64 m = prime_factors(static_cast<u64>(N)).front();
  u64 mers = (u64{1} << m) - 1;
  u64 p = prime_factors(mers).front();
  w.power((E.q() - 1) / p);
  if (p != mers) {
    prime_order_nonprime(w);
  } else if (!mersenne_block_step(w)) {
    internal("subfield power of the excluded shape");
  }
}

Branch even_order2(Walk& w) {
  const FieldPtr F = w.cur().F;
  int n = w.cur().n;
  w.power(projective_prime_exponent(w.cur(), 2));
  if (is_jordan_pivot(w.cur())) return Branch::EvenOrder2;
  Split s = split_blocks(w.cur());
  std::vector<int> ones, twos;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    (s.blocks[i].n == 1 ? ones : twos).push_back(i);
  }
  Matrix P = Matrix::from_rows(F, {{0, 1}, {1, 1}});
  Split t;
  std::vector<Matrix> b;
  if (ones.size() >= 2) {
    t = front(s, {ones[0], ones[1]});
    b.push_back(P);
    for (std::size_t i = 2; i < t.blocks.size(); ++i) b.push_back(t.blocks[i]);
  } else {
    if (twos.size() < 2) internal("even-order power has too few blocks");
    t = front(s, {twos[0], twos[1]});
    // Basis e1, e3, e2, e4 turns diag(J2, J2) into [[I, I], [0, I]].
    Matrix X = t.X;
    t.X.set_col(1, X.col(2));
    t.X.set_col(2, X.col(1));
    t.Xinv = mat_inv(t.X);
    Matrix B4(F, 4);
    put_block(B4, 0, 0, P);
    put_block(B4, 0, 2, P);
    put_block(B4, 2, 2, P);
    b.push_back(B4);
    for (std::size_t i = 2; i < t.blocks.size(); ++i) b.push_back(t.blocks[i]);
  }
  Matrix B = assemble(t, b);
  Matrix Cd = Matrix::identity(F, n);
  Cd(n - 2, n - 1) = 1;
  Matrix C = t.X * Cd * t.Xinv;
  w.root(B, 3);
  w.power(4);
  w.root(w.cur() * C, 4);
  w.power(3);
  if (w.cur() != C || !is_jordan_pivot(C)) internal("even-order chain did not reach a Jordan pivot");
  return Branch::EvenOrder2;
}

Branch dispatch_two(Walk& w) {
  const Matrix A = w.cur();
  int n = A.n;
  if (is_jordan_pivot(A)) return Branch::AlreadyPivot;
  u64 k = mat_order(A);
  if (k % 2 == 0) return even_order2(w);
  Split s = split_blocks(A);
  int big = -1;
  for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
    if (s.blocks[i].n >= n - 1) big = i;
  }
  if (big >= 0) {
    int d = s.blocks[big].n;
    if (is_prime(static_cast<u64>(d))) return d == n ? Branch::ObstructionIrreducible : Branch::ObstructionExtraIrreducible2;
    if (d == n) {
      irreducible_char2(w);
    } else {
      Split t = front(s, {big});
      Walk sub(t.blocks[0]);
      irreducible_char2(sub);
      const auto& sv = sub.vertices();
      for (std::size_t i = 1; i < sv.size(); ++i) w.append_raw(assemble(t, {sv[i], t.blocks[1]}), sub.steps()[i - 1]);
    }
    return Branch::IrreducibleFactor2;
  }
  if (!is_prime(k)) {
    composite_order(w);
    return Branch::CompositeOrder2;
  }
  if (!is_power_of_two(k + 1)) {
    prime_order_nonprime(w);
    return Branch::PrimeOrder2;
  }
  if (min_poly(A) == char_poly(A)) return Branch::ObstructionQuasiDiagonal2;
  mersenne_order(w);
  return Branch::MersenneOrder2;
}

Label obstruction_label(Branch b) {
  switch (b) {
    case Branch::ObstructionJordan: return Label::JORDAN_TYPE;
    case Branch::ObstructionIrreducible: return Label::IRREDUCIBLE;
    case Branch::ObstructionDiagonal: return Label::DIAGONALIZABLE;
    case Branch::ObstructionExtraIrreducible2: return Label::EXTRA_IRRED_2;
    default: return Label::QUASI_DIAG_2;
  }
}

void require_routable(const Matrix& A) {
  if (!in_routing_range(A.n, A.F->q())) throw Error(Errc::OutOfRange, "routing needs (q != 2, n >= 3) or (q = 2, n >= 6)");
  if (!is_invertible(A)) throw Error(Errc::Singular, "matrix is singular");
  if (A.is_scalar()) throw Error(Errc::CentralElement, "matrix is central");
}

}  // namespace

PivotRoute to_pivot_path(const Matrix& A) {
  require_routable(A);
  u64 q = A.F->q();
  Walk w(A);
  PivotRoute r;
  r.branch = q == 2 ? dispatch_two(w) : dispatch_odd_q(w);
  if (branch_is_obstruction(r.branch)) {
    ComponentClass c = classify(A.n, q, A);
    if (c.label != obstruction_label(r.branch)) {
      throw Error(Errc::WrongLabel, std::string("dispatch ended at ") + branch_name(r.branch) + " but classify gives " + label_name(c.label));
    }
    r.obstruction = c;
    return r;
  }
  PathCertificate cert = w.finish(branch_name(r.branch));
  if (static_cast<int>(cert.length()) > branch_bound(r.branch)) {
    throw Error(Errc::InternalBoundViolation, std::string(branch_name(r.branch)) + " path of length " + std::to_string(cert.length()));
  }
  const Matrix& end = cert.back();
  if (!(q == 2 ? is_jordan_pivot(end) : is_pivot(end))) internal("path does not end at a pivot");
  if (auto chk = verify_path(cert); !chk) internal("constructed path fails verification: " + chk.reason);
  r.path = std::move(cert);
  return r;
}

// ------------------------------------------------------------ connect

std::optional<u64> power_exponent(const Matrix& A, const Matrix& B, Mode mode) {
  if (A.F != B.F || A.n != B.n) return std::nullopt;
  u64 ord = mode == Mode::PGL ? proj_order(A) : mat_order(A);
  Matrix target = mode == Mode::PGL ? canonical(B, Mode::PGL) : B;
  Matrix M = A;
  for (u64 k = 1; k <= ord; ++k) {
    if ((mode == Mode::PGL ? canonical(M, Mode::PGL) : M) == target) return k;
    M = M * A;
  }
  return std::nullopt;
}

namespace {

PathCertificate single_vertex(const Matrix& A, Mode mode) {
  PathCertificate c;
  c.ctx = GroupContext{A.n, A.F, mode};
  c.vertices.push_back(A);
  return c;
}

// Generator of the cyclic power-closure of an isolated component whose
// diameter can reach two.
std::optional<Matrix> closure_generator(const Matrix& A, Label label) {
  if (label == Label::IRREDUCIBLE) {
    CompanionField K(A);
    return K.to_matrix(K.iso()->generator());
  }
  if (label == Label::EXTRA_IRRED_2) {
    Split s = split_blocks(A);
    int big = 0;
    for (int i = 0; i < static_cast<int>(s.blocks.size()); ++i) {
      if (s.blocks[i].n > s.blocks[big].n) big = i;
    }
    Split t = front(s, {big});
    CompanionField K(t.blocks[0]);
    std::vector<Matrix> b{K.to_matrix(K.iso()->generator())};
    for (std::size_t i = 1; i < t.blocks.size(); ++i) b.push_back(t.blocks[i]);
    return assemble(t, b);
  }
  return std::nullopt;
}

}  // namespace

ConnectResult connect(const Matrix& A, const Matrix& B, Mode mode) {
  if (A.F != B.F || A.n != B.n) throw Error(Errc::ContextMismatch, "elements from different groups");
  require_routable(A);
  require_routable(B);
  int n = A.n;
  u64 q = A.F->q();
  ConnectResult r;
  r.a = classify(n, q, A);
  r.b = classify(n, q, B);
  PathCertificate cert;
  cert.ctx = GroupContext{n, A.F, mode};
  if (mode_equal(A, B, mode)) {
    cert = single_vertex(A, mode);
  } else if (auto k = power_exponent(A, B, mode)) {
    cert.vertices = {A, B};
    cert.steps = {{*k, true}};
    cert.branches = {"DirectEdge"};
  } else if (auto k2 = power_exponent(B, A, mode)) {
    cert.vertices = {A, B};
    cert.steps = {{*k2, false}};
    cert.branches = {"DirectEdge"};
  } else if (r.a.label == Label::BIG && r.b.label == Label::BIG) {
    PivotRoute ra = to_pivot_path(A), rb = to_pivot_path(B);
    if (!ra.path || !rb.path) internal("BIG element dispatched to an obstruction");
    PathCertificate full = *ra.path;
    full.append(pivot_path(ra.path->back(), rb.path->back()));
    full.append(rb.path->reversed());
    remove_cycles(full);
    cert = mode == Mode::PGL ? project_to_pgl(full) : full;
  } else if (r.a.label == r.b.label && r.a.label != Label::BIG) {
    auto G = closure_generator(A, r.a.label);
    if (!G) return r;
    auto e1 = power_exponent(*G, A, mode), e2 = power_exponent(*G, B, mode);
    if (!e1 || !e2) return r;
    cert.vertices = {A, *G, B};
    cert.steps = {{*e1, false}, {*e2, true}};
    cert.branches = {"PowerClosure"};
    remove_cycles(cert);
  } else {
    return r;
  }
  if (static_cast<int>(cert.length()) > connect_bound(n, q)) {
    throw Error(Errc::InternalBoundViolation, "connect path of length " + std::to_string(cert.length()));
  }
  if (auto chk = verify_path(cert); !chk) internal("connect path fails verification: " + chk.reason);
  r.path = std::move(cert);
  return r;
}

// ------------------------------------------------------------ coverage

namespace {

// Exponent of r in v.
int valuation(u64 v, u64 r) {
  int e = 0;
  while (v % r == 0) {
    v /= r;
    ++e;
  }
  return e;
}

// `skip`-th monic irreducible of degree d in coefficient-code order.
Poly nth_irreducible(const FieldPtr& F, int d, int skip = 0) {
  u64 q = F->q();
  u64 count = checked_pow(q, static_cast<unsigned>(d));
  for (u64 code = 0; code < count; ++code) {
    std::vector<fe> c(static_cast<std::size_t>(d) + 1, 0);
    u64 v = code;
    for (int i = 0; i < d; ++i) {
      c[static_cast<std::size_t>(i)] = v % q;
      v /= q;
    }
    c[static_cast<std::size_t>(d)] = 1;
    Poly f(F, c);
    if (is_irreducible(f) && skip-- == 0) return f;
  }
  internal("not enough irreducible polynomials");
}

// d x d block for an element of the given order in F_{q^d}.
Matrix subfield_element(const FieldPtr& F, int d, u64 order) {
  CompanionField K(companion(nth_irreducible(F, d)));
  const Field& E = *K.iso();
  return K.to_matrix(E.pow(E.generator(), (E.q() - 1) / order));
}

Matrix pad(const Matrix& B, int n) {
  if (B.n == n) return B;
  return block_diag({B, Matrix::identity(B.F, n - B.n)});
}

// Prime r of q^d - 1 (d in [2, n-1]) with q - 1 not a power of r.
std::optional<std::pair<int, u64>> evasion_block(int n, u64 q) {
  for (int d = 2; d < n; ++d) {
    auto qd = try_pow(q, static_cast<unsigned>(d));
    if (!qd) break;
    for (u64 r : prime_factors(*qd - 1)) {
      if (!is_power_of_prime(q - 1, r)) return std::make_pair(d, r);
    }
  }
  return std::nullopt;
}

// d in [2, n-1] whose q^d - 1 has a larger p0-part than q - 1.
std::optional<std::pair<int, u64>> same_prime_block(int n, u64 q) {
  auto pp = prime_power(q - 1);
  if (!pp) return std::nullopt;
  u64 p0 = pp->first;
  for (int d = 2; d < n; ++d) {
    auto qd = try_pow(q, static_cast<unsigned>(d));
    if (!qd) break;
    int v = valuation(*qd - 1, p0);
    if (v > pp->second) return std::make_pair(d, checked_pow(p0, static_cast<unsigned>(v)));
  }
  return std::nullopt;
}

// (m, k, extra): k distinct degree-m irreducibles of Mersenne prime order
// 2^m - 1 plus `extra` unit blocks fill n.
std::optional<std::array<int, 3>> quasi_diagonal_shape(int n) {
  for (int m = 3; m <= 31 && m <= n / 2; ++m) {
    if (!is_prime(static_cast<u64>(m)) || !is_prime((u64{1} << m) - 1)) continue;
    u64 avail = ((u64{1} << m) - 2) / static_cast<u64>(m);
    for (int extra = 0; extra <= 1; ++extra) {
      int rest = n - extra;
      if (rest % m != 0) continue;
      u64 k = static_cast<u64>(rest / m);
      if (k >= 2 && k <= avail) return std::array<int, 3>{m, static_cast<int>(k), extra};
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<BranchReach> branch_reachability(int n, u64 q) {
  std::vector<BranchReach> out;
  auto add = [&](Branch b, bool ok, std::string why) { out.push_back({b, ok, std::move(why)}); };
  bool two = q == 2;
  const std::string q2 = "only for q = 2", qn2 = "only for q != 2";
  bool n_prime = is_prime(static_cast<u64>(n));
  u64 p = prime_power(q) ? prime_power(q)->first : q;
  bool qm1_pp = !two && is_prime_power(q - 1);
  bool even_mersenne = !two && q % 2 == 0 && is_prime(q - 1);

  add(Branch::AlreadyPivot, true, "pivots exist");
  if (two) {
    for (Branch b : {Branch::UnipotentPower, Branch::PrimeEvasion, Branch::IrreducibleChar, Branch::IrreducibleCharSpecial,
                     Branch::DiagonalOdd, Branch::DiagonalEven, Branch::SamePrimePower, Branch::SamePrimePowerSpecial,
                     Branch::ObstructionJordan, Branch::ObstructionDiagonal}) {
      add(b, false, qn2);
    }
    add(Branch::EvenOrder2, true, "diag(J2, J2, I) has even order");
    add(Branch::IrreducibleFactor2, !n_prime || !is_prime(static_cast<u64>(n - 1)),
        "needs n or n - 1 composite");
    add(Branch::CompositeOrder2, true, "an order-21 block pair fits when n >= 6");
    add(Branch::PrimeOrder2, true, "an order-5 block of size 4 fits when n >= 6");
    add(Branch::MersenneOrder2, true, "diag(C, C, I) with C of order 3");
    add(Branch::ObstructionIrreducible, n_prime, "needs n prime");
    add(Branch::ObstructionExtraIrreducible2, is_prime(static_cast<u64>(n - 1)), "needs n - 1 prime");
    add(Branch::ObstructionQuasiDiagonal2, quasi_diagonal_shape(n).has_value(),
        "needs n = k m or k m + 1 with 2 <= k distinct degree-m factors of Mersenne prime order");
    return out;
  }
  add(Branch::UnipotentPower, true, "diag(J2, I) is unipotent with two blocks");
  add(Branch::PrimeEvasion, !qm1_pp || evasion_block(n, q).has_value(),
      qm1_pp ? "needs a prime of q^d - 1 (d < n) other than the prime of q - 1" : "q - 1 is not a prime power");
  add(Branch::IrreducibleChar, !n_prime && !(q == 3 && n == 4), "needs n composite, (q, n) != (3, 4)");
  add(Branch::IrreducibleCharSpecial, q == 3 && n == 4, "only for q = 3, n = 4");
  add(Branch::DiagonalOdd, qm1_pp && q % 2 == 1 && q > 3,
      q == 3 ? "every non-central diagonalizable matrix over F_3 is a pivot" : "needs q odd with q - 1 a power of 2");
  add(Branch::DiagonalEven, even_mersenne && n >= 4, "needs q even, q - 1 prime, n >= 4");
  add(Branch::SamePrimePower, same_prime_block(n, q).has_value(),
      "needs q - 1 a prime power with a block size d < n carrying more of that prime");
  add(Branch::SamePrimePowerSpecial, q == 3 && n == 4, "only for q = 3, n = 4");
  for (Branch b : {Branch::EvenOrder2, Branch::IrreducibleFactor2, Branch::CompositeOrder2, Branch::PrimeOrder2,
                   Branch::MersenneOrder2}) {
    add(b, false, q2);
  }
  add(Branch::ObstructionJordan, static_cast<u64>(n) <= p, "needs n <= p");
  add(Branch::ObstructionIrreducible, n_prime, "needs n prime");
  add(Branch::ObstructionDiagonal, even_mersenne && static_cast<u64>(n) < q, "needs q even, q - 1 prime, n < q");
  add(Branch::ObstructionExtraIrreducible2, false, q2);
  add(Branch::ObstructionQuasiDiagonal2, false, q2);
  return out;
}

std::optional<Matrix> branch_witness(Branch b, int n, const FieldPtr& F) {
  u64 q = F->q();
  if (!in_routing_range(n, q)) return std::nullopt;
  bool two = q == 2;
  for (const auto& r : branch_reachability(n, q)) {
    if (r.branch == b && !r.reachable) return std::nullopt;
  }
  Matrix I = Matrix::identity(F, n);
  fe g = F->generator();
  auto diag_powers = [&](std::vector<u64> exps) {
    std::vector<fe> d(static_cast<std::size_t>(n), 1);
    for (std::size_t i = 0; i < exps.size(); ++i) d[i] = F->pow(g, exps[i]);
    return Matrix::diag(F, d);
  };
  auto comp = [&](std::vector<long long> c) {
    std::vector<fe> v;
    for (long long x : c) v.push_back(F->from_int(x));
    return companion(Poly(F, v));
  };
  switch (b) {
    case Branch::AlreadyPivot:
      if (two) return jordan_ref(n, F);
      return diag_powers({1});
    case Branch::UnipotentPower: {
      Matrix A = I;
      A(0, 1) = 1;
      return A;
    }
    case Branch::ObstructionJordan: {
      Matrix A = I;
      for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1;
      return A;
    }
    case Branch::PrimeEvasion: {
      if (!is_prime_power(q - 1)) return diag_powers({1, 2});
      auto e = evasion_block(n, q);
      return pad(subfield_element(F, e->first, e->second), n);
    }
    case Branch::IrreducibleChar:
    case Branch::IrreducibleCharSpecial:
      return companion(nth_irreducible(F, n));
    case Branch::ObstructionIrreducible:
      return companion(nth_irreducible(F, n));
    case Branch::DiagonalOdd:
      return diag_powers({0, 1, 2});
    case Branch::DiagonalEven:
      return diag_powers({0, 0, 1, 2});
    case Branch::ObstructionDiagonal: {
      std::vector<u64> e;
      for (int i = 0; i < n; ++i) e.push_back(static_cast<u64>(i));
      return diag_powers(e);
    }
    case Branch::SamePrimePower: {
      auto e = same_prime_block(n, q);
      return pad(subfield_element(F, e->first, e->second), n);
    }
    case Branch::SamePrimePowerSpecial: {
      Matrix C = comp({1, 0, 1});
      return block_diag({C, C});
    }
    case Branch::EvenOrder2:
      return pad(block_diag({j2(F), j2(F)}), n);
    case Branch::IrreducibleFactor2:
      if (!is_prime(static_cast<u64>(n))) return companion(nth_irreducible(F, n));
      return pad(companion(nth_irreducible(F, n - 1)), n);
    case Branch::ObstructionExtraIrreducible2:
      return pad(companion(nth_irreducible(F, n - 1)), n);
    case Branch::CompositeOrder2:
      return pad(block_diag({comp({1, 1, 1}), comp({1, 1, 0, 1})}), n);
    case Branch::PrimeOrder2:
      return pad(comp({1, 1, 1, 1, 1}), n);
    case Branch::MersenneOrder2:
      return pad(block_diag({comp({1, 1, 1}), comp({1, 1, 1})}), n);
    case Branch::ObstructionQuasiDiagonal2: {
      auto s = quasi_diagonal_shape(n);
      std::vector<Matrix> blocks;
      for (int i = 0; i < (*s)[1]; ++i) blocks.push_back(companion(nth_irreducible(F, (*s)[0], i)));
      return pad(block_diag(blocks), n);
    }
  }
  return std::nullopt;
}

}  // namespace pg
