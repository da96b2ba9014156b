#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "powergraph/intmath.hpp"

namespace pg {

// Field elements are packed codes: the coefficient sequence over the base
// field written as digits, c0 + c1*qb + c2*qb^2 + ...  Over a prime field the
// code is the residue itself.
using fe = u64;

class Field;
using FieldPtr = std::shared_ptr<const Field>;

class Field {
 public:
  // make_field: F_p[t]/(m) with m the smallest monic irreducible of degree k,
  // ordered by code (highest-degree coefficient most significant).
  static FieldPtr make(u64 p, unsigned k = 1);
  // Extension of `base` by a monic polynomial given low-degree first.  The
  // modulus is checked for irreducibility.
  static FieldPtr extend(const FieldPtr& base, const std::vector<fe>& modulus);

  u64 p() const { return p_; }
  u64 q() const { return q_; }
  unsigned k() const { return k_; }            // degree over base
  unsigned abs_degree() const { return abs_k_; }  // degree over F_p
  bool is_prime_field() const { return base_ == nullptr; }
  const FieldPtr& base() const { return base_; }
  const std::vector<fe>& modulus() const { return mod_; }

  fe zero() const { return 0; }
  fe one() const { return 1; }
  fe from_int(long long v) const;

  fe add(fe a, fe b) const;
  fe sub(fe a, fe b) const;
  fe neg(fe a) const;
  fe mul(fe a, fe b) const;
  fe inv(fe a) const;
  fe div(fe a, fe b) const { return mul(a, inv(b)); }
  fe pow(fe a, u64 e) const;

  u64 order(fe a) const;  // fe_order
  fe generator() const { return gen_; }
  // Smallest e >= 0 with b^e == x; throws PreconditionViolated if none.
  u64 dlog(fe b, fe x) const;

  std::vector<fe> coeffs(fe a) const;
  fe from_coeffs(const std::vector<fe>& c) const;
  bool in_base(fe a) const { return a < (base_ ? base_->q() : q_); }

  std::string format(fe a) const;
  fe parse(const std::string& s) const;

  // Factorization of q-1, shared by order and generator computations.
  const std::vector<std::pair<u64, int>>& unit_group_factors() const { return qm1_; }

  Field(u64 p, FieldPtr base, std::vector<fe> mod);

 private:
  fe mul_slow(fe a, fe b) const;
  fe pow_slow(fe a, u64 e) const;
  fe find_generator() const;

  u64 p_;
  u64 q_;
  unsigned k_;
  unsigned abs_k_;
  FieldPtr base_;
  std::vector<fe> mod_;
  u64 modbits_ = 0;  // modulus as a bit mask, for extensions of F_2 only
  std::vector<std::pair<u64, int>> qm1_;
  fe gen_ = 1;
  // exp/log tables, used when q <= 2^16 and the field is an extension.
  std::vector<std::uint32_t> log_;
  std::vector<std::uint32_t> exp_;
};

// Value wrapper carrying its field; arithmetic checks ownership.
struct FieldElement {
  FieldPtr F;
  fe v = 0;

  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.F == b.F && a.v == b.v;
  }
};

enum class FieldOp { Add, Sub, Mul, Div };
FieldElement fe_arith(const FieldElement& a, const FieldElement& b, FieldOp op);
u64 fe_order(const FieldElement& a);
FieldElement fe_generator(const FieldPtr& F);

// Polynomials, coefficients low-degree first, no trailing zeros.
struct Poly {
  FieldPtr F;
  std::vector<fe> c;

  Poly() = default;
  Poly(FieldPtr f, std::vector<fe> coeffs);
  static Poly monomial(const FieldPtr& f, fe a, unsigned d);
  static Poly x(const FieldPtr& f) { return monomial(f, 1, 1); }
  static Poly constant(const FieldPtr& f, fe a) { return monomial(f, a, 0); }

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  fe lead() const { return c.empty() ? 0 : c.back(); }
  fe coeff(unsigned i) const { return i < c.size() ? c[i] : 0; }
  bool is_monic() const { return !c.empty() && c.back() == 1; }
  void trim();

  std::string format(const std::string& var = "x") const;

  friend bool operator==(const Poly& a, const Poly& b) { return a.F == b.F && a.c == b.c; }
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly scale(const Poly& a, fe s);
Poly monic(const Poly& a);
std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
Poly operator%(const Poly& a, const Poly& b);
Poly operator/(const Poly& a, const Poly& b);
Poly poly_gcd(Poly a, Poly b);  // monic
Poly poly_lcm(const Poly& a, const Poly& b);
Poly pow_mod(Poly a, u64 e, const Poly& m);
Poly poly_pow(const Poly& a, unsigned e);
Poly derivative(const Poly& a);
fe eval(const Poly& a, fe x);
// Substitute: a(b(x)) mod m.
Poly compose_mod(const Poly& a, const Poly& b, const Poly& m);

// Canonical order: degree, then coefficients from the top down.
bool poly_less(const Poly& a, const Poly& b);

bool is_irreducible(const Poly& f);
// All monic irreducibles of degree d, in canonical order; cached per field.
const std::vector<Poly>& monic_irreducibles(const FieldPtr& F, unsigned d);

struct PolyFactor {
  Poly f;
  int mult;
};
// Monic irreducible factors with multiplicity, canonical order.
std::vector<PolyFactor> poly_factor(const Poly& f);

}  // namespace pg
