#include "oracles.hpp"

#include <set>

#include "powergraph/error.hpp"

namespace pg::oracle {

Matrix random_matrix(const FieldPtr& F, int n, std::mt19937_64& rng) {
  Matrix M(F, n);
  for (auto& x : M.a) x = rng() % F->q();
  return M;
}

Matrix random_invertible(const FieldPtr& F, int n, std::mt19937_64& rng) {
  for (;;) {
    Matrix M = random_matrix(F, n, rng);
    if (det(M) != 0) return M;
  }
}

Matrix random_noncentral(const FieldPtr& F, int n, std::mt19937_64& rng) {
  for (;;) {
    Matrix M = random_invertible(F, n, rng);
    if (!M.is_scalar()) return M;
  }
}

std::vector<Matrix> all_invertible(const FieldPtr& F, int n) {
  std::vector<Matrix> out;
  Matrix M(F, n);
  u64 q = F->q();
  for (;;) {
    if (det(M) != 0) out.push_back(M);
    std::size_t i = 0;
    while (i < M.a.size() && ++M.a[i] == q) M.a[i++] = 0;
    if (i == M.a.size()) break;
  }
  return out;
}

u64 naive_order(const Matrix& A, u64 cap) {
  Matrix P = A;
  for (u64 k = 1; k <= cap; ++k) {
    if (P.is_identity()) return k;
    P = P * A;
  }
  return 0;
}

u64 naive_proj_order(const Matrix& A, u64 cap) {
  Matrix P = A;
  for (u64 k = 1; k <= cap; ++k) {
    if (P.is_scalar()) return k;
    P = P * A;
  }
  return 0;
}

fe det(const Matrix& A) {
  const Field& F = *A.F;
  int n = A.n;
  Matrix M = A;
  fe d = 1;
  for (int c = 0; c < n; ++c) {
    int r = c;
    while (r < n && M(r, c) == 0) ++r;
    if (r == n) return 0;
    if (r != c) {
      for (int j = 0; j < n; ++j) std::swap(M(r, j), M(c, j));
      d = F.neg(d);
    }
    d = F.mul(d, M(c, c));
    fe inv = F.inv(M(c, c));
    for (int i = c + 1; i < n; ++i) {
      fe t = F.mul(M(i, c), inv);
      if (t == 0) continue;
      for (int j = c; j < n; ++j) M(i, j) = F.sub(M(i, j), F.mul(t, M(c, j)));
    }
  }
  return d;
}

Coeffs cmul(const FieldPtr& F, const Coeffs& a, const Coeffs& b) {
  if (a.empty() || b.empty()) return {};
  Coeffs r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = F->add(r[i + j], F->mul(a[i], b[j]));
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

Coeffs crem(const FieldPtr& F, Coeffs a, const Coeffs& b) {
  while (!a.empty() && a.back() == 0) a.pop_back();
  std::size_t db = b.size() - 1;
  while (a.size() > db) {
    fe lead = a.back();
    std::size_t shift = a.size() - 1 - db;
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] = F->sub(a[shift + i], F->mul(lead, b[i]));
    while (!a.empty() && a.back() == 0) a.pop_back();
  }
  return a;
}

namespace {

// Calls fn on every monic polynomial of degree d.
template <class Fn>
void each_monic(const FieldPtr& F, int d, Fn fn) {
  u64 q = F->q();
  Coeffs c(static_cast<std::size_t>(d) + 1, 0);
  c[static_cast<std::size_t>(d)] = 1;
  for (;;) {
    fn(c);
    int i = 0;
    while (i < d && ++c[static_cast<std::size_t>(i)] == q) c[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }
}

Matrix horner(const Poly& f, const Matrix& A) {
  Matrix R(A.F, A.n);
  for (int i = f.degree(); i >= 0; --i) R = R * A + Matrix::scalar(A.F, A.n, f.coeff(static_cast<unsigned>(i)));
  return R;
}

std::vector<u64> divisors_naive(u64 v) {
  std::vector<u64> d;
  for (u64 i = 1; i <= v; ++i) {
    if (v % i == 0) d.push_back(i);
  }
  return d;
}

bool prime_naive(u64 v) {
  if (v < 2) return false;
  for (u64 i = 2; i * i <= v; ++i) {
    if (v % i == 0) return false;
  }
  return true;
}

std::vector<Coeffs> irreducibles(const FieldPtr& F, int d) {
  std::vector<Coeffs> out;
  each_monic(F, d, [&](const Coeffs& c) {
    if (c[0] != 0 && naive_irreducible(F, c)) out.push_back(c);
  });
  return out;
}

u64 ipow(u64 b, int e) {
  u64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

bool naive_irreducible(const FieldPtr& F, const Coeffs& f) {
  int n = static_cast<int>(f.size()) - 1;
  if (n < 1) return false;
  for (int d = 1; 2 * d <= n; ++d) {
    bool divides = false;
    each_monic(F, d, [&](const Coeffs& g) {
      if (!divides && crem(F, f, g).empty()) divides = true;
    });
    if (divides) return false;
  }
  return true;
}

Coeffs smallest_irreducible(const FieldPtr& Fp, unsigned k) {
  u64 p = Fp->q();
  u64 count = ipow(p, static_cast<int>(k));
  for (u64 code = 0; code < count; ++code) {
    Coeffs c(k + 1, 0);
    u64 v = code;
    for (unsigned i = 0; i < k; ++i) {
      c[i] = v % p;
      v /= p;
    }
    c[k] = 1;
    if (naive_irreducible(Fp, c)) return c;
  }
  return {};
}

std::vector<Coeffs> monic_with_unit_constant(const FieldPtr& F, int d) {
  std::vector<Coeffs> out;
  each_monic(F, d, [&](const Coeffs& c) {
    if (c[0] != 0) out.push_back(c);
  });
  return out;
}

Matrix naive_companion(const FieldPtr& F, const Coeffs& f) {
  int n = static_cast<int>(f.size()) - 1;
  Matrix C(F, n);
  for (int i = 0; i + 1 < n; ++i) C(i + 1, i) = 1;
  for (int i = 0; i < n; ++i) C(i, n - 1) = F->neg(f[static_cast<std::size_t>(i)]);
  return C;
}

void Tally::fail(std::string what) {
  ++failed;
  if (log.size() < 5) log.push_back(std::move(what));
}

void cayley_hamilton(const FieldPtr& F, int n, int count, u64 seed, Tally& t) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    Matrix A = random_matrix(F, n, rng);
    ++t.checked;
    Poly cp = char_poly(A);
    if (cp.degree() != n || !cp.is_monic()) t.fail("char_poly not monic of degree n for " + A.format());
    if (!(horner(cp, A) == Matrix(F, n))) t.fail("char_poly does not annihilate " + A.format());
  }
}

void gjcf_roundtrip(const FieldPtr& F, int n, int count, u64 seed, Tally& t) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    Matrix A = random_invertible(F, n, rng);
    ++t.checked;
    GJCF g = gjcf(A);
    if (det(g.transform) == 0 || !(g.transform * g.form() == A * g.transform)) {
      t.fail("gjcf round trip fails for " + A.format());
      continue;
    }
    Matrix Y = random_invertible(F, n, rng);
    Matrix B = Y * A * mat_inv(Y);
    if (!same_blocks(gjcf(B).blocks, g.blocks)) t.fail("conjugate has different blocks: " + A.format());
  }
}

void companion_comm_exhaustive(const FieldPtr& F, int n_max, Tally& t) {
  u64 q = F->q();
  for (int n = 2; n <= n_max; ++n) {
    each_monic(F, n, [&](const Coeffs& f) {
      Matrix C = naive_companion(F, f);
      // F_q[C] as the span of I, C, ..., C^{n-1}.
      std::vector<Matrix> pw{Matrix::identity(F, n)};
      for (int i = 1; i < n; ++i) pw.push_back(pw.back() * C);
      std::set<std::vector<fe>> span;
      std::vector<fe> coef(static_cast<std::size_t>(n), 0);
      for (;;) {
        Matrix S(F, n);
        for (int i = 0; i < n; ++i) S = S + scale(pw[static_cast<std::size_t>(i)], coef[static_cast<std::size_t>(i)]);
        span.insert(S.a);
        int i = 0;
        while (i < n && ++coef[static_cast<std::size_t>(i)] == q) coef[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
      }
      u64 commuting = 0;
      bool outside = false;
      Matrix B(F, n);
      for (;;) {
        if (B * C == C * B) {
          ++commuting;
          if (!span.count(B.a)) outside = true;
        }
        std::size_t i = 0;
        while (i < B.a.size() && ++B.a[i] == q) B.a[i++] = 0;
        if (i == B.a.size()) break;
      }
      ++t.checked;
      if (outside || commuting != span.size()) t.fail("centralizer of " + C.format() + " is not F_q[C]");
    });
  }
}

void scalar_companion_powers(const FieldPtr& F, int n_max, Tally& t) {
  u64 q = F->q();
  for (int d = 1; d <= n_max; ++d) {
    for (const auto& f : irreducibles(F, d)) {
      Matrix C = naive_companion(F, f);
      u64 k = naive_order(C);
      for (u64 s : divisors_naive(k)) {
        ++t.checked;
        bool scalar = mat_pow(C, s).is_scalar();
        bool divides = (q - 1) % (k / s) == 0;
        if (scalar != divides) t.fail("scalar companion power test fails for " + C.format() + " t=" + std::to_string(s));
      }
    }
  }
}

void same_order_same_size(const FieldPtr& F, int n_max, Tally& t) {
  u64 q = F->q();
  for (int d = 2; d <= n_max; ++d) {
    for (const auto& f : irreducibles(F, d)) {
      Matrix C = naive_companion(F, f);
      u64 k = naive_order(C);
      for (u64 p1 = 2; p1 <= k; ++p1) {
        if (k % p1 != 0 || !prime_naive(p1)) continue;
        if (!mat_pow(C, p1).is_scalar()) continue;
        int n1 = 1;
        while ((ipow(q, n1) - 1) % (p1 * (q - 1)) != 0) ++n1;
        ++t.checked;
        if (n1 != d) t.fail("same order same size fails for " + C.format() + " p1=" + std::to_string(p1));
      }
    }
  }
}

void root_postconditions(const FieldPtr& F, int n_max, Tally& t) {
  u64 q = F->q();
  for (int d = 1; d <= n_max; ++d) {
    u64 qd = ipow(q, d) - 1;
    u64 q2d = ipow(q, 2 * d) - 1;
    for (const auto& f : irreducibles(F, d)) {
      Matrix C = naive_companion(F, f);
      u64 k = naive_order(C);
      for (u64 s : divisors_naive(qd / k)) {
        Matrix M = companion_root(C, s);
        ++t.checked;
        Poly cp = char_poly(M);
        if (!(mat_pow(M, s) == C) || naive_order(M) != k * s || cp.degree() != d || !naive_irreducible(F, cp.c)) {
          t.fail("companion_root(" + C.format() + ", " + std::to_string(s) + ")");
        }
      }
      ++t.checked;
      try {
        companion_root(C, qd / k + 1);
        t.fail("companion_root accepted a non-dividing order");
      } catch (const Error& e) {
        if (e.code() != Errc::OrderNotDividing) t.fail(std::string("wrong error ") + e.what());
      }

      // Prime-power order only.
      u64 p1 = 0;
      {
        u64 v = k;
        for (u64 r = 2; r <= v; ++r) {
          if (v % r == 0) {
            p1 = r;
            while (v % r == 0) v /= r;
            break;
          }
        }
        if (v != 1) continue;
      }
      for (u64 p0 = 2; p0 <= 41; ++p0) {
        if (!prime_naive(p0)) continue;
        if (p0 == p1) {
          ++t.checked;
          try {
            prime_companion_root(C, p0);
            t.fail("prime_companion_root accepted p0 = p1");
          } catch (const Error& e) {
            if (e.code() != Errc::SamePrime) t.fail(std::string("wrong error ") + e.what());
          }
          continue;
        }
        Matrix M = prime_companion_root(C, p0);
        ++t.checked;
        bool ok = mat_pow(M, p0) == C;
        if (qd % p0 == 0) {
          ok = ok && naive_order(M) % p0 == 0;
        } else {
          ok = ok && M * C == C * M;
        }
        if (!ok) t.fail("prime_companion_root(" + C.format() + ", " + std::to_string(p0) + ")");
        if (q2d % p0 != 0) continue;
        Matrix D = double_companion_root(C, p0);
        ++t.checked;
        if (!(mat_pow(D, p0) == block_diag({C, C})) || naive_order(D) % p0 != 0) {
          t.fail("double_companion_root(" + C.format() + ", " + std::to_string(p0) + ")");
        }
      }
    }
  }
}

}  // namespace pg::oracle
