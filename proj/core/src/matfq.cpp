#include "powergraph/matfq.hpp"

#include <algorithm>
#include <sstream>

#include "powergraph/error.hpp"

namespace pg {

Matrix::Matrix(FieldPtr f, int dim) : F(std::move(f)), n(dim), a(static_cast<std::size_t>(dim) * dim, 0) {
  if (dim < 1 || dim > 16) throw Error(Errc::DimensionMismatch, "matrix dimension must be in [1, 16]");
}

Matrix Matrix::identity(const FieldPtr& f, int dim) { return scalar(f, dim, 1); }

Matrix Matrix::scalar(const FieldPtr& f, int dim, fe s) {
  Matrix m(f, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = s;
  return m;
}

Matrix Matrix::diag(const FieldPtr& f, const std::vector<fe>& d) {
  Matrix m(f, static_cast<int>(d.size()));
  for (int i = 0; i < m.n; ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(const FieldPtr& f, const std::vector<std::vector<long long>>& rows) {
  Matrix m(f, static_cast<int>(rows.size()));
  for (int i = 0; i < m.n; ++i) {
    if (static_cast<int>(rows[i].size()) != m.n) throw Error(Errc::DimensionMismatch, "matrix must be square");
    for (int j = 0; j < m.n; ++j) m(i, j) = f->from_int(rows[i][j]);
  }
  return m;
}

Matrix Matrix::parse(const FieldPtr& f, const std::string& text) {
  std::vector<std::vector<fe>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<fe> r;
    std::stringstream es(row);
    std::string e;
    while (std::getline(es, e, ',')) r.push_back(f->parse(e));
    rows.push_back(std::move(r));
  }
  int n = static_cast<int>(rows.size());
  if (n == 0) throw Error(Errc::ParseError, "empty matrix");
  Matrix m(f, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw Error(Errc::ParseError, "matrix '" + text + "' is not square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

bool Matrix::is_scalar() const {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (*this)(i, j) != 0) return false;
      if (i == j && (*this)(i, i) != (*this)(0, 0)) return false;
    }
  }
  return true;
}

bool Matrix::is_identity() const { return is_scalar() && (*this)(0, 0) == 1; }

std::string Matrix::format() const {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ";";
    for (int j = 0; j < n; ++j) {
      if (j) out += ",";
      out += F->format((*this)(i, j));
    }
  }
  return out;
}

Vec Matrix::col(int j) const {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_col(int j, const Vec& v) {
  for (int i = 0; i < n; ++i) (*this)(i, j) = v[i];
}

static void check_compat(const Matrix& A, const Matrix& B) {
  if (A.F != B.F) throw Error(Errc::FieldMismatch, "matrices over different fields");
  if (A.n != B.n) throw Error(Errc::DimensionMismatch, "matrix dimensions differ");
}

Matrix operator+(const Matrix& A, const Matrix& B) {
  check_compat(A, B);
  Matrix C(A.F, A.n);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.F->add(A.a[i], B.a[i]);
  return C;
}

Matrix operator-(const Matrix& A, const Matrix& B) {
  check_compat(A, B);
  Matrix C(A.F, A.n);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.F->sub(A.a[i], B.a[i]);
  return C;
}

Matrix operator*(const Matrix& A, const Matrix& B) {
  check_compat(A, B);
  const Field& F = *A.F;
  int n = A.n;
  Matrix C(A.F, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      fe x = A(i, k);
      if (x == 0) continue;
      for (int j = 0; j < n; ++j) {
        fe y = B(k, j);
        if (y) C(i, j) = F.add(C(i, j), F.mul(x, y));
      }
    }
  }
  return C;
}

Matrix mat_arith(const Matrix& A, const Matrix& B, MatOp op) { return op == MatOp::Add ? A + B : A * B; }

Matrix scale(const Matrix& A, fe s) {
  Matrix C(A.F, A.n);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.F->mul(A.a[i], s);
  return C;
}

Vec mat_vec(const Matrix& A, const Vec& v) {
  Vec r(A.n, 0);
  for (int i = 0; i < A.n; ++i) {
    fe s = 0;
    for (int j = 0; j < A.n; ++j) {
      if (A(i, j) && v[j]) s = A.F->add(s, A.F->mul(A(i, j), v[j]));
    }
    r[i] = s;
  }
  return r;
}

namespace {

// In-place reduced row echelon form of an r x c row-major array; returns
// pivot columns.
std::vector<int> rref(const Field& F, std::vector<Vec>& rows, int cols) {
  std::vector<int> piv;
  int r = 0;
  int R = static_cast<int>(rows.size());
  for (int c = 0; c < cols && r < R; ++c) {
    int sel = -1;
    for (int i = r; i < R; ++i) {
      if (rows[i][c] != 0) {
        sel = i;
        break;
      }
    }
    if (sel < 0) continue;
    std::swap(rows[r], rows[sel]);
    fe inv = F.inv(rows[r][c]);
    const int width = static_cast<int>(rows[r].size());
    for (int j = 0; j < width; ++j) rows[r][j] = F.mul(rows[r][j], inv);
    for (int i = 0; i < R; ++i) {
      if (i == r || rows[i][c] == 0) continue;
      fe t = rows[i][c];
      for (int j = 0; j < width; ++j) rows[i][j] = F.sub(rows[i][j], F.mul(t, rows[r][j]));
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

std::vector<Vec> to_rows(const Matrix& A) {
  std::vector<Vec> rows(A.n, Vec(A.n));
  for (int i = 0; i < A.n; ++i) {
    for (int j = 0; j < A.n; ++j) rows[i][j] = A(i, j);
  }
  return rows;
}

}  // namespace

Matrix mat_inv(const Matrix& A) {
  const Field& F = *A.F;
  int n = A.n;
  std::vector<Vec> rows(n, Vec(2 * n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rows[i][j] = A(i, j);
    rows[i][n + i] = 1;
  }
  auto piv = rref(F, rows, n);
  if (static_cast<int>(piv.size()) < n) throw Error(Errc::Singular, "matrix is singular");
  Matrix R(A.F, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) R(i, j) = rows[i][n + j];
  }
  return R;
}

Matrix mat_pow(const Matrix& A, u64 e) {
  Matrix r = Matrix::identity(A.F, A.n);
  Matrix b = A;
  while (e) {
    if (e & 1) r = r * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return r;
}

int rank(const Matrix& A) {
  auto rows = to_rows(A);
  return static_cast<int>(rref(*A.F, rows, A.n).size());
}

bool is_invertible(const Matrix& A) { return rank(A) == A.n; }

Matrix transpose(const Matrix& A) {
  Matrix T(A.F, A.n);
  for (int i = 0; i < A.n; ++i) {
    for (int j = 0; j < A.n; ++j) T(j, i) = A(i, j);
  }
  return T;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
  int n = 0;
  for (auto& b : blocks) n += b.n;
  Matrix M(blocks.at(0).F, n);
  int off = 0;
  for (auto& b : blocks) {
    put_block(M, off, off, b);
    off += b.n;
  }
  return M;
}

Matrix sub_block(const Matrix& A, int r, int c, int k) {
  Matrix B(A.F, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) B(i, j) = A(r + i, c + j);
  }
  return B;
}

void put_block(Matrix& A, int r, int c, const Matrix& B) {
  for (int i = 0; i < B.n; ++i) {
    for (int j = 0; j < B.n; ++j) A(r + i, c + j) = B(i, j);
  }
}

std::vector<Vec> kernel(const Matrix& A) {
  const Field& F = *A.F;
  auto rows = to_rows(A);
  auto piv = rref(F, rows, A.n);
  std::vector<bool> is_piv(A.n, false);
  for (int c : piv) is_piv[c] = true;
  std::vector<Vec> out;
  for (int f = 0; f < A.n; ++f) {
    if (is_piv[f]) continue;
    Vec v(A.n, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = F.neg(rows[r][f]);
    out.push_back(std::move(v));
  }
  return out;
}

// ------------------------------------------------------------ Echelon

Vec Echelon::reduce(Vec v) const {
  const Field& F = *F_;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    fe t = v[pivots_[r]];
    if (t == 0) continue;
    for (int j = 0; j < n_; ++j) v[j] = F.sub(v[j], F.mul(t, rows_[r][j]));
  }
  return v;
}

bool Echelon::contains(const Vec& v) const {
  Vec r = reduce(v);
  return std::all_of(r.begin(), r.end(), [](fe x) { return x == 0; });
}

bool Echelon::add(const Vec& v) {
  const Field& F = *F_;
  Vec r = reduce(v);
  int p = -1;
  for (int j = 0; j < n_; ++j) {
    if (r[j] != 0) {
      p = j;
      break;
    }
  }
  if (p < 0) return false;
  fe inv = F.inv(r[p]);
  for (int j = 0; j < n_; ++j) r[j] = F.mul(r[j], inv);
  for (auto& row : rows_) {
    fe t = row[p];
    if (t == 0) continue;
    for (int j = 0; j < n_; ++j) row[j] = F.sub(row[j], F.mul(t, r[j]));
  }
  rows_.push_back(std::move(r));
  pivots_.push_back(p);
  return true;
}

// ------------------------------------------------ Krylov polynomials

namespace {

// Krylov sequence of v under A, reduced modulo `prev` (an echelon basis of an
// A-invariant subspace, possibly empty).  Returns the monic relation
// polynomial and appends the Krylov vectors to `prev`.
Poly krylov_relation(const Matrix& A, const Vec& v, std::vector<Vec>& prev_rows, std::vector<int>& prev_piv) {
  const Field& F = *A.F;
  int n = A.n;
  // Augmented rows: n vector entries followed by n tracking entries.
  int W = 2 * n;
  std::vector<Vec> rows;
  std::vector<int> piv;
  for (std::size_t i = 0; i < prev_rows.size(); ++i) {
    Vec r(W, 0);
    std::copy(prev_rows[i].begin(), prev_rows[i].end(), r.begin());
    rows.push_back(std::move(r));
    piv.push_back(prev_piv[i]);
  }
  Vec cur = v;
  for (int m = 0; m <= n; ++m) {
    Vec aug(W, 0);
    std::copy(cur.begin(), cur.end(), aug.begin());
    aug[n + m] = 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      fe t = aug[piv[r]];
      if (t == 0) continue;
      for (int j = 0; j < W; ++j) aug[j] = F.sub(aug[j], F.mul(t, rows[r][j]));
    }
    int p = -1;
    for (int j = 0; j < n; ++j) {
      if (aug[j] != 0) {
        p = j;
        break;
      }
    }
    if (p < 0) {
      std::vector<fe> c(m + 1);
      for (int j = 0; j <= m; ++j) c[j] = aug[n + j];
      // Record the new Krylov vectors (without tracking) in prev.
      for (std::size_t r = prev_rows.size(); r < rows.size(); ++r) {
        prev_rows.emplace_back(rows[r].begin(), rows[r].begin() + n);
        prev_piv.push_back(piv[r]);
      }
      return Poly(A.F, c);
    }
    fe inv = F.inv(aug[p]);
    for (int j = 0; j < W; ++j) aug[j] = F.mul(aug[j], inv);
    for (auto& row : rows) {
      fe t = row[p];
      if (t == 0) continue;
      for (int j = 0; j < W; ++j) row[j] = F.sub(row[j], F.mul(t, aug[j]));
    }
    rows.push_back(std::move(aug));
    piv.push_back(p);
    cur = mat_vec(A, cur);
  }
  throw Error(Errc::Internal, "Krylov sequence did not terminate");
}

bool in_span(const Field& F, const std::vector<Vec>& rows, const std::vector<int>& piv, Vec v) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    fe t = v[piv[r]];
    if (t == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = F.sub(v[j], F.mul(t, rows[r][j]));
  }
  return std::all_of(v.begin(), v.end(), [](fe x) { return x == 0; });
}

}  // namespace

Poly char_poly(const Matrix& A) {
  // Block-triangularize by successive Krylov subspaces; the characteristic
  // polynomial is the product of the relation polynomials.
  std::vector<Vec> rows;
  std::vector<int> piv;
  Poly result = Poly::constant(A.F, 1);
  for (int i = 0; i < A.n && static_cast<int>(rows.size()) < A.n; ++i) {
    Vec e(A.n, 0);
    e[i] = 1;
    if (in_span(*A.F, rows, piv, e)) continue;
    result = result * krylov_relation(A, e, rows, piv);
  }
  return result;
}

Poly min_poly(const Matrix& A) {
  Poly result = Poly::constant(A.F, 1);
  for (int i = 0; i < A.n; ++i) {
    Vec e(A.n, 0);
    e[i] = 1;
    std::vector<Vec> rows;
    std::vector<int> piv;
    result = poly_lcm(result, krylov_relation(A, e, rows, piv));
  }
  return result;
}

Matrix poly_eval(const Poly& f, const Matrix& A) {
  Matrix R = Matrix::zero(A.F, A.n);
  for (int i = f.degree(); i >= 0; --i) {
    R = R * A;
    for (int j = 0; j < A.n; ++j) R(j, j) = A.F->add(R(j, j), f.c[i]);
  }
  return R;
}

Matrix companion(const Poly& f) {
  if (!f.is_monic() || f.degree() < 1) throw Error(Errc::NotMonic, "companion needs a monic polynomial of degree >= 1");
  int n = f.degree();
  Matrix C(f.F, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1;
  for (int i = 0; i < n; ++i) C(i, n - 1) = f.F->neg(f.c[i]);
  return C;
}

u64 mat_order(const Matrix& A) {
  if (!is_invertible(A)) throw Error(Errc::Singular, "order of a singular matrix");
  const Field& F = *A.F;
  // Exponent bound: lcm of q^d - 1 over irreducible factors, times the
  // smallest power of p covering the largest multiplicity.
  u64 L = 1;
  int maxmult = 1;
  for (auto& pf : poly_factor(char_poly(A))) {
    L = lcm_u64(L, checked_pow(F.q(), static_cast<unsigned>(pf.f.degree())) - 1);
    maxmult = std::max(maxmult, pf.mult);
  }
  u64 pp = 1;
  while (pp < static_cast<u64>(maxmult)) pp = checked_mul(pp, F.p());
  L = checked_mul(L, pp);
  u64 e = L;
  for (u64 r : prime_factors(L)) {
    while (e % r == 0 && mat_pow(A, e / r).is_identity()) e /= r;
  }
  if (!mat_pow(A, e).is_identity()) throw Error(Errc::Internal, "order bound failed");
  return e;
}

u64 proj_order(const Matrix& A) {
  u64 e = mat_order(A);
  for (u64 r : prime_factors(e)) {
    while (e % r == 0 && mat_pow(A, e / r).is_scalar()) e /= r;
  }
  return e;
}

u64 gl_order(int n, u64 q) {
  u64 qn = checked_pow(q, static_cast<unsigned>(n));
  u64 r = 1, qi = 1;
  for (int i = 0; i < n; ++i) {
    r = checked_mul(r, qn - qi);
    qi *= q;
  }
  return r;
}

}  // namespace pg
