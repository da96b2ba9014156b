#include "powergraph/obstruct.hpp"

#include "powergraph/canon.hpp"
#include "powergraph/error.hpp"

namespace pg {

const char* label_name(Label l) {
  switch (l) {
    case Label::JORDAN_TYPE:
      return "JORDAN_TYPE";
    case Label::IRREDUCIBLE:
      return "IRREDUCIBLE";
    case Label::DIAGONALIZABLE:
      return "DIAGONALIZABLE";
    case Label::QUASI_DIAG_2:
      return "QUASI_DIAG_2";
    case Label::EXTRA_IRRED_2:
      return "EXTRA_IRRED_2";
    case Label::BIG:
      return "BIG";
  }
  return "?";
}

const char* diam_name(DiamBound d) {
  switch (d) {
    case DiamBound::Exactly1:
      return "exactly 1";
    case DiamBound::AtMost2:
      return "at most 2";
    case DiamBound::AtMost16:
      return "at most 16";
    case DiamBound::AtMost20:
      return "at most 20";
  }
  return "?";
}

int diam_limit(DiamBound d) {
  switch (d) {
    case DiamBound::Exactly1:
      return 1;
    case DiamBound::AtMost2:
      return 2;
    case DiamBound::AtMost16:
      return 16;
    case DiamBound::AtMost20:
      return 20;
  }
  return 0;
}

std::string ComponentClass::display() const {
  std::string s = label_name(label);
  if (census_only) s += " (census-only)";
  if (big_tag) s += big_tag == 1 ? " [component of diag(J_2,I)]" : " [component of diag(J_2,J_2)]";
  return s;
}

std::optional<u64> predicted_size_for(const ComponentClass& c, bool pgl_mode, u64 q) {
  if (!c.predicted_size) return std::nullopt;
  if (pgl_mode) return *c.predicted_size;
  // Jordan-type and irreducible closures absorb every scalar multiple.  A
  // diagonalizable obstruction has prime order q - 1, so lambda*A generates
  // its own copy {lambda^k A^k} and the preimage splits into q - 1 pieces.
  if (c.label == Label::DIAGONALIZABLE) return *c.predicted_size;
  return *c.predicted_size * (q - 1);
}

bool obstruction_diameter_is_one(u64 q, int n, Label label) {
  if (label == Label::IRREDUCIBLE) {
    bool pp = (q - 1 == 1) || is_prime_power(q - 1);
    u64 qn = checked_pow(q, static_cast<unsigned>(n));
    return pp && is_prime((qn - 1) / (q - 1));
  }
  if (label == Label::EXTRA_IRRED_2) {
    return is_prime(checked_pow(2, static_cast<unsigned>(n - 1)) - 1);
  }
  throw Error(Errc::WrongLabel, "diameter criterion only covers IRREDUCIBLE and EXTRA_IRRED_2");
}

std::optional<u64> prime_evasion(u64 q, int n) {
  if (q <= 2 || n <= 1 || !is_prime_power(q) || !is_prime_power(q - 1)) {
    throw Error(Errc::PreconditionViolated, "prime_evasion needs q, q-1 prime powers, q != 2, n > 1");
  }
  u64 qn1 = checked_pow(q, static_cast<unsigned>(n)) - 1;
  for (u64 r : prime_factors(qn1)) {
    if (gcd_u64(r, q - 1) == 1) return r;
  }
  return std::nullopt;
}

const char* consecutive_name(ConsecutiveKind k) {
  switch (k) {
    case ConsecutiveKind::FERMAT_PRIME:
      return "FERMAT_PRIME";
    case ConsecutiveKind::MERSENNE_SUCCESSOR:
      return "MERSENNE_SUCCESSOR";
    case ConsecutiveKind::NINE:
      return "NINE";
    case ConsecutiveKind::NOT_CONSECUTIVE:
      return "NOT_CONSECUTIVE";
  }
  return "?";
}

ConsecutiveKind consecutive_pp_kind(u64 q) {
  if (!is_prime_power(q)) throw Error(Errc::NotPrimePower, std::to_string(q) + " is not a prime power");
  if (q == 2 || !is_prime_power(q - 1)) return ConsecutiveKind::NOT_CONSECUTIVE;
  if (q == 9) return ConsecutiveKind::NINE;
  if (is_prime(q) && is_prime_power(q - 1) && prime_power(q - 1)->first == 2) return ConsecutiveKind::FERMAT_PRIME;
  if (is_prime(q - 1) && prime_power(q)->first == 2) return ConsecutiveKind::MERSENNE_SUCCESSOR;
  throw Error(Errc::Internal, "consecutive prime powers outside the known families");
}

PrimeFacts prime_facts(u64 q, int n) {
  PrimeFacts pf;
  pf.q = q;
  pf.n = n;
  for (int d = 1; d <= 2 * n; ++d) {
    auto v = try_pow(q, static_cast<unsigned>(d));
    if (!v) {
      pf.qd_minus_1.emplace_back();
      continue;
    }
    auto f = factor_u64(*v - 1);
    u64 back = 1;
    for (auto& [r, e] : f) {
      for (int i = 0; i < e; ++i) back *= r;
    }
    if (back != *v - 1) throw Error(Errc::Internal, "factorization check failed");
    pf.qd_minus_1.push_back(std::move(f));
  }
  pf.kind = consecutive_pp_kind(q);
  return pf;
}

ComponentClass classify(int n, u64 q, const Matrix& A) {
  if (A.n != n || A.F->q() != q) throw Error(Errc::ContextMismatch, "matrix does not match (n, q)");
  if (!is_invertible(A)) throw Error(Errc::Singular, "classify needs an invertible matrix");
  if (A.is_scalar()) throw Error(Errc::CentralElement, "scalar matrices are not vertices");
  const Field& F = *A.F;
  u64 p = F.p();
  Poly mp = min_poly(A);
  Poly cp = char_poly(A);
  auto fm = poly_factor(mp);
  bool in_range = (q != 2 && n >= 3) || (q == 2 && n >= 6);
  ComponentClass c;
  c.census_only = !in_range;
  auto qn = checked_pow(q, static_cast<unsigned>(n));

  if (is_prime(static_cast<u64>(n)) && fm.size() == 1 && fm[0].mult == 1 && fm[0].f.degree() == n) {
    c.label = Label::IRREDUCIBLE;
    c.predicted_size = (qn - q) / (q - 1);
    c.diameter = obstruction_diameter_is_one(q, n, c.label) ? DiamBound::Exactly1 : DiamBound::AtMost2;
    c.witness = "min poly " + mp.format() + " irreducible of prime degree " + std::to_string(n);
    return c;
  }
  if (static_cast<u64>(n) <= p && fm.size() == 1 && fm[0].f.degree() == 1 && fm[0].mult == n) {
    c.label = Label::JORDAN_TYPE;
    c.predicted_size = p - 1;
    c.diameter = DiamBound::Exactly1;
    c.witness = "min poly (" + fm[0].f.format() + ")^" + std::to_string(n);
    return c;
  }
  if (q > 2 && is_prime(q - 1) && static_cast<u64>(n) < q && is_diagonalizable(A) && mp.degree() == n) {
    c.label = Label::DIAGONALIZABLE;
    c.predicted_size = q - 2;
    c.diameter = DiamBound::Exactly1;
    c.witness = std::to_string(n) + " distinct eigenvalues, q-1 = " + std::to_string(q - 1) + " prime";
    return c;
  }
  if (q == 2) {
    Poly xm1(A.F, {1, 1});
    if (is_prime(static_cast<u64>(n - 1)) && fm.size() == 2 && fm[0].f == xm1 && fm[0].mult == 1 && fm[1].mult == 1 &&
        fm[1].f.degree() == n - 1) {
      c.label = Label::EXTRA_IRRED_2;
      c.predicted_size = checked_pow(2, static_cast<unsigned>(n - 1)) - 2;
      c.diameter = obstruction_diameter_is_one(q, n, c.label) ? DiamBound::Exactly1 : DiamBound::AtMost2;
      c.witness = "min poly (x+1)(" + fm[1].f.format() + ")";
      return c;
    }
    std::vector<u64> cands = prime_factors(static_cast<u64>(n));
    for (u64 r : prime_factors(static_cast<u64>(n - 1))) cands.push_back(r);
    for (u64 p1 : cands) {
      if (p1 >= 63) continue;
      u64 p0 = (u64{1} << p1) - 1;
      if (!is_prime(p0)) continue;
      Poly xp0 = Poly::monomial(A.F, 1, static_cast<unsigned>(p0)) - Poly::constant(A.F, 1);
      if ((xp0 % cp).is_zero() && mp == cp) {
        c.label = Label::QUASI_DIAG_2;
        c.predicted_size = p0 - 1;
        c.diameter = DiamBound::Exactly1;
        c.witness = "p1 = " + std::to_string(p1) + ", p0 = " + std::to_string(p0) + ", char poly divides x^" +
                    std::to_string(p0) + "-1";
        return c;
      }
    }
  }
  c.label = Label::BIG;
  c.diameter = ((q == 2 && n >= 6) || (q == 3 && n == 4)) ? DiamBound::AtMost20 : DiamBound::AtMost16;
  c.witness = "no obstruction applies";
  if (c.census_only && q == 2) {
    if (n == 3) {
      // Non-identity powers of a regular unipotent, three per component.
      if (fm.size() == 1 && fm[0].f.degree() == 1) {
        c.label = Label::JORDAN_TYPE;
        c.predicted_size = 3;
        c.diameter = DiamBound::Exactly1;
        c.witness = "census-only: power of a regular unipotent";
      }
    } else if (n == 4 || n == 5) {
      c.big_tag = census_big_tag(n, A);
      c.witness = "census-only: brute-force component lookup";
    }
  }
  return c;
}

}  // namespace pg
