#pragma once

#include <string>
#include <vector>

#include "powergraph/gf.hpp"

namespace pg {

using Vec = std::vector<fe>;

// Dense square matrix over a field, row-major.
struct Matrix {
  FieldPtr F;
  int n = 0;
  std::vector<fe> a;

  Matrix() = default;
  Matrix(FieldPtr f, int dim);
  static Matrix zero(const FieldPtr& f, int dim) { return Matrix(f, dim); }
  static Matrix identity(const FieldPtr& f, int dim);
  static Matrix scalar(const FieldPtr& f, int dim, fe s);
  static Matrix diag(const FieldPtr& f, const std::vector<fe>& d);
  static Matrix from_rows(const FieldPtr& f, const std::vector<std::vector<long long>>& rows);
  static Matrix parse(const FieldPtr& f, const std::string& text);

  fe& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  fe operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  bool is_scalar() const;
  bool is_identity() const;
  std::string format() const;

  Vec col(int j) const;
  void set_col(int j, const Vec& v);

  friend bool operator==(const Matrix& x, const Matrix& y) { return x.F == y.F && x.n == y.n && x.a == y.a; }
  friend bool operator!=(const Matrix& x, const Matrix& y) { return !(x == y); }
  friend bool operator<(const Matrix& x, const Matrix& y) { return x.a < y.a; }
};

enum class MatOp { Add, Mul };
Matrix mat_arith(const Matrix& A, const Matrix& B, MatOp op);
Matrix operator+(const Matrix& A, const Matrix& B);
Matrix operator-(const Matrix& A, const Matrix& B);
Matrix operator*(const Matrix& A, const Matrix& B);
Matrix scale(const Matrix& A, fe s);
Vec mat_vec(const Matrix& A, const Vec& v);

Matrix mat_inv(const Matrix& A);  // throws Singular
Matrix mat_pow(const Matrix& A, u64 e);
int rank(const Matrix& A);
bool is_invertible(const Matrix& A);
Matrix transpose(const Matrix& A);
Matrix block_diag(const std::vector<Matrix>& blocks);
// Copy of the k x k block starting at (r, c) of a possibly rectangular view.
Matrix sub_block(const Matrix& A, int r, int c, int k);
void put_block(Matrix& A, int r, int c, const Matrix& B);

// Basis of the null space {v : A v = 0}, one vector per free column.
std::vector<Vec> kernel(const Matrix& A);

Poly char_poly(const Matrix& A);
Poly min_poly(const Matrix& A);
Matrix poly_eval(const Poly& f, const Matrix& A);
Matrix companion(const Poly& f);

u64 mat_order(const Matrix& A);
u64 proj_order(const Matrix& A);

// |GL_n(F_q)| = prod (q^n - q^i); throws TooLarge on overflow.
u64 gl_order(int n, u64 q);

// Row-reduction workspace: incremental echelon basis of a subspace of F^n.
class Echelon {
 public:
  Echelon(FieldPtr f, int dim) : F_(std::move(f)), n_(dim) {}
  // Reduces v against the basis; returns the residual.
  Vec reduce(Vec v) const;
  bool contains(const Vec& v) const;
  // Adds v if independent; returns whether it was added.
  bool add(const Vec& v);
  int size() const { return static_cast<int>(rows_.size()); }

 private:
  FieldPtr F_;
  int n_;
  std::vector<Vec> rows_;  // each normalized with leading 1 at pivots_[i]
  std::vector<int> pivots_;
};

}  // namespace pg
