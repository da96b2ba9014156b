#pragma once

#include <vector>

#include "powergraph/matfq.hpp"

namespace pg {

struct GJCFBlock {
  Poly irr;   // monic irreducible, degree d
  int chain;  // number of companion blocks along the diagonal
  int size() const { return irr.degree() * chain; }
};

// Generalized Jordan canonical form: transform * form() * transform^-1 == A.
struct GJCF {
  std::vector<GJCFBlock> blocks;
  Matrix transform;
  Matrix form() const;
};

// d*c square block with companion(irr) on the diagonal and identities on the
// block superdiagonal.
Matrix gjcf_block(const Poly& irr, int chain);

GJCF gjcf(const Matrix& A);
// Block list only; equal for similar matrices.
std::vector<GJCFBlock> similarity_blocks(const Matrix& A);
bool same_blocks(const std::vector<GJCFBlock>& a, const std::vector<GJCFBlock>& b);

// F_q[C] for C with irreducible characteristic polynomial f, identified with
// the extension of F_q by f.
class CompanionField {
 public:
  explicit CompanionField(const Matrix& C);
  const Matrix& C() const { return C_; }
  const Poly& poly() const { return f_; }
  const FieldPtr& iso() const { return iso_; }
  int degree() const { return C_.n; }
  Matrix to_matrix(fe a) const;
  fe from_matrix(const Matrix& M) const;  // throws PreconditionViolated if M is not in F_q[C]

 private:
  Matrix C_;
  Poly f_;
  FieldPtr iso_;
  Matrix kinv_;  // inverse of the Krylov basis [v, Cv, ...] with v = e_1
};

struct PowerProfile {
  Poly g;
  int copies;
};
PowerProfile companion_power_profile(const Matrix& C, u64 t);

Matrix companion_root(const Matrix& C, u64 t);
Matrix prime_companion_root(const Matrix& C, u64 p0);
Matrix double_companion_root(const Matrix& C, u64 p0);

bool is_pivot(const Matrix& A);
bool is_jordan_pivot(const Matrix& A);
bool is_diagonalizable(const Matrix& A);  // over the base field

// Exponent e with A^e of projective order exactly p0 and multiplicative
// order a power of p0.
u64 projective_prime_exponent(const Matrix& A, u64 p0);
Matrix raise_to_projective_prime(const Matrix& A, u64 p0);

}  // namespace pg
