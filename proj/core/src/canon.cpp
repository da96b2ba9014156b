#include "powergraph/canon.hpp"

#include <algorithm>

#include "powergraph/error.hpp"

namespace pg {

namespace {

// a^-1 mod m for gcd(a, m) = 1.
Poly poly_inv_mod(const Poly& a, const Poly& m) {
  Poly r0 = m, r1 = a % m;
  Poly s0(a.F, {}), s1 = Poly::constant(a.F, 1);
  while (!r1.is_zero()) {
    auto [qq, r] = divmod(r0, r1);
    Poly s = s0 - qq * s1;
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  if (r0.degree() != 0) throw Error(Errc::Internal, "polynomial not invertible modulo m");
  return scale(s0, a.F->inv(r0.c[0])) % m;
}

// theta = x mod f with f(theta) = 0 mod f^e (Hensel lift of a root).
Poly hensel_root(const Poly& f, int e) {
  Poly fe_ = poly_pow(f, static_cast<unsigned>(e));
  Poly th = Poly::x(f.F) % fe_;
  Poly df = derivative(f);
  for (int it = 0; it < 2 * e + 2; ++it) {
    Poly val = compose_mod(f, th, fe_);
    if (val.is_zero()) return th;
    Poly d = compose_mod(df, th, fe_);
    th = (th - val * poly_inv_mod(d, fe_)) % fe_;
  }
  if (!compose_mod(f, th, fe_).is_zero()) throw Error(Errc::Internal, "Hensel lift did not converge");
  return th;
}

bool block_less(const GJCFBlock& a, const GJCFBlock& b) {
  if (!(a.irr == b.irr)) return poly_less(a.irr, b.irr);
  return a.chain > b.chain;
}

}  // namespace

Matrix gjcf_block(const Poly& irr, int chain) {
  int d = irr.degree();
  Matrix C = companion(irr);
  Matrix B(irr.F, d * chain);
  for (int j = 0; j < chain; ++j) {
    put_block(B, j * d, j * d, C);
    if (j + 1 < chain) {
      for (int i = 0; i < d; ++i) B(j * d + i, (j + 1) * d + i) = 1;
    }
  }
  return B;
}

Matrix GJCF::form() const {
  std::vector<Matrix> parts;
  for (auto& b : blocks) parts.push_back(gjcf_block(b.irr, b.chain));
  return block_diag(parts);
}

GJCF gjcf(const Matrix& A) {
  if (!is_invertible(A)) throw Error(Errc::Singular, "gjcf of a singular matrix");
  const Field& F = *A.F;
  int n = A.n;
  struct Chain {
    GJCFBlock block;
    std::vector<Vec> cols;
  };
  std::vector<Chain> chains;
  for (auto& pf : poly_factor(char_poly(A))) {
    const Poly& f = pf.f;
    int d = f.degree();
    int e = pf.mult;
    Matrix fA = poly_eval(f, A);
    Poly th = hensel_root(f, e);
    Matrix T = poly_eval(th, A);
    Matrix E = A - T;
    // W[c] = Ker f(A)^c.
    std::vector<std::vector<Vec>> W(e + 1);
    Matrix P = Matrix::identity(A.F, n);
    int cmax = 0;
    for (int c = 1; c <= e; ++c) {
      P = P * fA;
      W[c] = kernel(P);
      if (static_cast<int>(W[c].size()) > static_cast<int>(W[c - 1].size())) cmax = c;
    }
    std::vector<Chain> found;
    for (int c = cmax; c >= 1; --c) {
      Echelon Q(A.F, n);
      for (auto& v : W[c - 1]) Q.add(v);
      if (c + 1 <= e) {
        for (auto& v : W[c + 1]) Q.add(mat_vec(E, v));
      }
      for (auto& w : W[c]) {
        if (Q.contains(w)) continue;
        Vec tw = w;
        for (int b = 0; b < d; ++b) {
          Q.add(tw);
          tw = mat_vec(T, tw);
        }
        Chain ch{{f, c}, {}};
        // Group j = E^(c-j) {T^b w}.
        std::vector<Vec> tb;
        Vec x = w;
        for (int b = 0; b < d; ++b) {
          tb.push_back(x);
          x = mat_vec(T, x);
        }
        for (int j = 1; j <= c; ++j) {
          for (int b = 0; b < d; ++b) {
            Vec y = tb[b];
            for (int s = 0; s < c - j; ++s) y = mat_vec(E, y);
            ch.cols.push_back(std::move(y));
          }
        }
        found.push_back(std::move(ch));
      }
    }
    for (auto& ch : found) chains.push_back(std::move(ch));
  }
  std::stable_sort(chains.begin(), chains.end(), [](const Chain& a, const Chain& b) { return block_less(a.block, b.block); });
  GJCF out;
  out.transform = Matrix(A.F, n);
  int col = 0;
  for (auto& ch : chains) {
    out.blocks.push_back(ch.block);
    for (auto& v : ch.cols) out.transform.set_col(col++, v);
  }
  if (col != n) throw Error(Errc::Internal, "gjcf basis has wrong size");
  (void)F;
  return out;
}

std::vector<GJCFBlock> similarity_blocks(const Matrix& A) {
  // Chain counts from kernel dimensions, no transform needed.
  std::vector<GJCFBlock> out;
  for (auto& pf : poly_factor(char_poly(A))) {
    int d = pf.f.degree();
    Matrix fA = poly_eval(pf.f, A);
    std::vector<int> dims{0};
    Matrix P = Matrix::identity(A.F, A.n);
    for (int c = 1; c <= pf.mult; ++c) {
      P = P * fA;
      dims.push_back((A.n - rank(P)) / d);
    }
    dims.push_back(dims.back());
    for (int c = pf.mult; c >= 1; --c) {
      // chains of length >= c minus chains of length >= c+1
      int ge_c = dims[c] - dims[c - 1];
      int ge_c1 = dims[c + 1] - dims[c];
      for (int i = 0; i < ge_c - ge_c1; ++i) out.push_back({pf.f, c});
    }
  }
  std::stable_sort(out.begin(), out.end(), block_less);
  return out;
}

bool same_blocks(const std::vector<GJCFBlock>& a, const std::vector<GJCFBlock>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].irr == b[i].irr) || a[i].chain != b[i].chain) return false;
  }
  return true;
}

// ---------------------------------------------------------- CompanionField

CompanionField::CompanionField(const Matrix& C) : C_(C) {
  f_ = char_poly(C);
  if (!is_irreducible(f_)) throw Error(Errc::NotIrreducibleInput, "characteristic polynomial is not irreducible");
  iso_ = Field::extend(C.F, f_.c);
  Matrix K(C.F, C.n);
  Vec v(C.n, 0);
  v[0] = 1;
  for (int j = 0; j < C.n; ++j) {
    K.set_col(j, v);
    v = mat_vec(C, v);
  }
  kinv_ = mat_inv(K);
}

Matrix CompanionField::to_matrix(fe a) const {
  auto c = iso_->coeffs(a);
  return poly_eval(Poly(C_.F, c), C_);
}

fe CompanionField::from_matrix(const Matrix& M) const {
  Vec e1(C_.n, 0);
  e1[0] = 1;
  Vec coeffs = mat_vec(kinv_, mat_vec(M, e1));
  fe a = iso_->from_coeffs(coeffs);
  if (to_matrix(a) != M) throw Error(Errc::PreconditionViolated, "matrix is not a polynomial in C");
  return a;
}

PowerProfile companion_power_profile(const Matrix& C, u64 t) {
  if (!is_irreducible(char_poly(C))) throw Error(Errc::NotIrreducibleInput, "characteristic polynomial is not irreducible");
  Poly g = min_poly(mat_pow(C, t));
  if (!is_irreducible(g)) throw Error(Errc::Internal, "power of a companion matrix has reducible minimal polynomial");
  return {g, C.n / g.degree()};
}

namespace {

// Smallest y among solutions of t*y = e (mod N) with order(g^y) == want.
fe root_in_group(const Field& K, fe c, u64 t, u64 want) {
  u64 N = K.q() - 1;
  fe g = K.generator();
  u64 e = K.dlog(g, c);
  u64 d = gcd_u64(t, N);
  if (e % d != 0) throw Error(Errc::Internal, "no root exists");
  u64 Nd = N / d;
  u64 y0 = Nd == 1 ? 0 : mulmod(e / d, inv_mod((t / d) % Nd, Nd), Nd);
  for (u64 j = 0; j < d; ++j) {
    u64 y = y0 + j * Nd;
    fe r = K.pow(g, y);
    if (K.order(r) == want) return r;
  }
  throw Error(Errc::Internal, "no root of the requested order");
}

u64 single_prime_of(u64 k) {
  if (k == 1) return 0;
  auto pp = prime_power(k);
  if (!pp) throw Error(Errc::PreconditionViolated, "order is not a prime power");
  return pp->first;
}

}  // namespace

Matrix companion_root(const Matrix& C, u64 t) {
  CompanionField K(C);
  const Field& E = *K.iso();
  fe c = K.from_matrix(C);
  u64 k = E.order(c);
  u64 N = E.q() - 1;
  if (t == 0 || N % k != 0 || (N / k) % t != 0) throw Error(Errc::OrderNotDividing, "k*t does not divide q^n-1");
  fe r = root_in_group(E, c, t, k * t);
  Matrix M = K.to_matrix(r);
  if (mat_pow(M, t) != C || mat_order(M) != k * t) throw Error(Errc::Internal, "companion_root postcondition failed");
  return M;
}

Matrix prime_companion_root(const Matrix& C, u64 p0) {
  CompanionField K(C);
  const Field& E = *K.iso();
  fe c = K.from_matrix(C);
  u64 k = E.order(c);
  if (single_prime_of(k) == p0) throw Error(Errc::SamePrime, "p0 equals the prime of the order of C");
  u64 N = E.q() - 1;
  Matrix M;
  if (N % p0 == 0) {
    M = companion_root(C, p0);
  } else {
    u64 e = E.dlog(E.generator(), c);
    u64 y = mulmod(e, inv_mod(p0 % N, N), N);
    M = K.to_matrix(E.pow(E.generator(), y));
  }
  if (mat_pow(M, p0) != C) throw Error(Errc::Internal, "prime_companion_root postcondition failed");
  if (N % p0 == 0 && mat_order(M) % p0 != 0) throw Error(Errc::Internal, "prime_companion_root order postcondition failed");
  return M;
}

Matrix double_companion_root(const Matrix& C, u64 p0) {
  CompanionField K(C);
  const FieldPtr& Fq = K.iso();
  fe c = K.from_matrix(C);
  u64 k = Fq->order(c);
  if (single_prime_of(k) == p0) throw Error(Errc::SamePrime, "p0 equals the prime of the order of C");
  u64 Q = Fq->q();
  u64 N = Q - 1;
  int n = C.n;
  Matrix M(C.F, 2 * n);
  if (N % p0 == 0) {
    Matrix R = prime_companion_root(C, p0);
    M = block_diag({R, R});
  } else {
    u64 N2 = checked_mul(Q, Q) - 1;
    if (N2 % p0 != 0) throw Error(Errc::NoDegree2Factor, "p0 does not divide q^(2n)-1");
    // Quadratic extension of F_q[C] by the smallest irreducible quadratic.
    FieldPtr E;
    for (u64 code = 1; !E; ++code) {
      std::vector<fe> m{code % Q, code / Q, 1};
      if (m[0] == 0) continue;
      if (is_irreducible(Poly(Fq, m))) E = Field::extend(Fq, m);
    }
    fe gE = E->generator();
    u64 e2 = E->dlog(gE, c);
    if (e2 % p0 != 0) throw Error(Errc::Internal, "unexpected discrete log");
    u64 step = N2 / p0;
    u64 y0 = (e2 / p0) % step;
    bool have = false;
    fe best1 = 0, best0 = 0;
    for (u64 j = 0; j < p0; ++j) {
      fe r = E->pow(gE, y0 + j * step);
      fe rq = E->pow(r, Q);
      if (rq == r) continue;
      fe s = E->add(r, rq);
      fe pr = E->mul(r, rq);
      if (!E->in_base(s) || !E->in_base(pr)) throw Error(Errc::Internal, "conjugate sum outside base field");
      fe g1 = Fq->neg(s), g0 = pr;
      if (!have || g1 < best1 || (g1 == best1 && g0 < best0)) {
        best1 = g1;
        best0 = g0;
        have = true;
      }
    }
    if (!have) throw Error(Errc::NoDegree2Factor, "x^p0 - C has no quadratic factor");
    Matrix G0 = scale(K.to_matrix(best0), C.F->neg(1));
    Matrix G1 = scale(K.to_matrix(best1), C.F->neg(1));
    put_block(M, 0, n, G0);
    put_block(M, n, n, G1);
    for (int i = 0; i < n; ++i) M(n + i, i) = 1;
  }
  if (mat_pow(M, p0) != block_diag({C, C})) throw Error(Errc::Internal, "double_companion_root postcondition failed");
  if (mat_order(M) % p0 != 0) throw Error(Errc::Internal, "double_companion_root order postcondition failed");
  return M;
}

// ------------------------------------------------------------- predicates

bool is_diagonalizable(const Matrix& A) {
  for (auto& pf : poly_factor(min_poly(A))) {
    if (pf.f.degree() != 1 || pf.mult != 1) return false;
  }
  return true;
}

bool is_pivot(const Matrix& A) {
  Poly m = min_poly(A);
  if (m.degree() != 2) return false;
  auto fs = poly_factor(m);
  return fs.size() == 2 && fs[0].f.degree() == 1 && fs[1].f.degree() == 1;
}

bool is_jordan_pivot(const Matrix& A) {
  Matrix N = A - Matrix::identity(A.F, A.n);
  return rank(N) == 1 && (N * N).is_scalar() && (N * N)(0, 0) == 0;
}

u64 projective_prime_exponent(const Matrix& A, u64 p0) {
  u64 po = proj_order(A);
  if (!is_prime(p0) || po % p0 != 0) throw Error(Errc::PrimeNotDividing, "p0 does not divide the projective order");
  u64 mo = mat_order(A);
  u64 m = po;
  int k = 0;
  while (m % p0 == 0) {
    m /= p0;
    ++k;
  }
  u64 mp = mo;
  while (mp % p0 == 0) mp /= p0;
  u64 ex = mp;
  for (int i = 0; i + 1 < k; ++i) ex *= p0;
  auto good = [&](const Matrix& B) {
    u64 o = mat_order(B);
    while (o % p0 == 0) o /= p0;
    return o == 1 && proj_order(B) == p0;
  };
  if (good(mat_pow(A, ex))) return ex;
  for (u64 d : divisors(mo)) {
    if (good(mat_pow(A, d))) return d;
  }
  throw Error(Errc::Internal, "no power with projective order p0");
}

Matrix raise_to_projective_prime(const Matrix& A, u64 p0) { return mat_pow(A, projective_prime_exponent(A, p0)); }

}  // namespace pg
