#include <array>
#include "powergraph/gf.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "powergraph/error.hpp"

namespace pg {

namespace {

constexpr u64 kTableLimit = u64{1} << 16;

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Field::Field(u64 p, FieldPtr base, std::vector<fe> mod) : p_(p), base_(std::move(base)), mod_(std::move(mod)) {
  if (!base_) {
    q_ = p;
    k_ = 1;
    abs_k_ = 1;
  } else {
    k_ = static_cast<unsigned>(mod_.size() - 1);
    q_ = checked_pow(base_->q(), k_);
    abs_k_ = base_->abs_degree() * k_;
    if (p_ == 2 && base_->is_prime_field()) {
      for (unsigned j = 0; j <= k_; ++j) modbits_ |= mod_[j] << j;
    }
  }
  qm1_ = factor_u64(q_ - 1);
  gen_ = find_generator();
  if (base_ && q_ <= kTableLimit) {
    log_.assign(q_, 0);
    exp_.assign(2 * (q_ - 1), 0);
    fe x = 1;
    for (u64 i = 0; i < q_ - 1; ++i) {
      exp_[i] = static_cast<std::uint32_t>(x);
      exp_[i + q_ - 1] = static_cast<std::uint32_t>(x);
      log_[x] = static_cast<std::uint32_t>(i);
      x = mul_slow(x, gen_);
    }
  }
}

FieldPtr Field::make(u64 p, unsigned k) {
  if (k == 0) throw Error(Errc::PreconditionViolated, "extension degree must be positive");
  if (!is_prime(p)) throw Error(Errc::NotPrime, std::to_string(p) + " is not prime");
  auto qk = try_pow(p, k);
  if (!qk || *qk > (u64{1} << 63)) throw Error(Errc::TooLarge, "p^k exceeds 2^63");

  static std::map<std::pair<u64, unsigned>, FieldPtr> cache;
  {
    std::lock_guard<std::mutex> lk(registry_mutex());
    auto it = cache.find({p, k});
    if (it != cache.end()) return it->second;
  }
  FieldPtr prime;
  {
    std::lock_guard<std::mutex> lk(registry_mutex());
    auto it = cache.find({p, 1});
    if (it != cache.end()) prime = it->second;
  }
  if (!prime) {
    prime = std::make_shared<Field>(p, nullptr, std::vector<fe>{});
    std::lock_guard<std::mutex> lk(registry_mutex());
    prime = cache.emplace(std::make_pair(p, 1u), prime).first->second;
  }
  if (k == 1) return prime;

  // Candidates in code order of the non-leading coefficients.
  u64 count = *qk;
  std::vector<fe> mod(k + 1, 0);
  mod[k] = 1;
  for (u64 code = 0; code < count; ++code) {
    u64 c = code;
    for (unsigned i = 0; i < k; ++i) {
      mod[i] = c % p;
      c /= p;
    }
    if (mod[0] == 0) continue;
    if (is_irreducible(Poly(prime, mod))) {
      auto F = std::make_shared<Field>(p, prime, mod);
      std::lock_guard<std::mutex> lk(registry_mutex());
      return cache.emplace(std::make_pair(p, k), F).first->second;
    }
  }
  throw Error(Errc::Internal, "no irreducible polynomial found");
}

FieldPtr Field::extend(const FieldPtr& base, const std::vector<fe>& modulus) {
  if (modulus.size() < 2 || modulus.back() != 1) throw Error(Errc::NotMonic, "extension modulus must be monic of degree >= 1");
  static std::map<std::pair<const Field*, std::vector<fe>>, FieldPtr> cache;
  {
    std::lock_guard<std::mutex> lk(registry_mutex());
    auto it = cache.find({base.get(), modulus});
    if (it != cache.end()) return it->second;
  }
  if (!is_irreducible(Poly(base, modulus))) throw Error(Errc::NotIrreducibleInput, "extension modulus is reducible");
  if (!try_pow(base->q(), static_cast<unsigned>(modulus.size() - 1))) throw Error(Errc::TooLarge, "extension field too large");
  auto F = std::make_shared<Field>(base->p(), base, modulus);
  std::lock_guard<std::mutex> lk(registry_mutex());
  return cache.emplace(std::make_pair(base.get(), modulus), F).first->second;
}

fe Field::from_int(long long v) const {
  long long r = v % static_cast<long long>(p_);
  if (r < 0) r += static_cast<long long>(p_);
  return static_cast<fe>(r);
}

fe Field::add(fe a, fe b) const {
  if (!base_) {
    u64 s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  if (p_ == 2) return a ^ b;
  fe r = 0, w = 1;
  for (unsigned i = 0; i < abs_k_; ++i) {
    u64 s = a % p_ + b % p_;
    if (s >= p_) s -= p_;
    r += s * w;
    w *= p_;
    a /= p_;
    b /= p_;
  }
  return r;
}

fe Field::neg(fe a) const {
  if (!base_) return a == 0 ? 0 : p_ - a;
  if (p_ == 2) return a;
  fe r = 0, w = 1;
  for (unsigned i = 0; i < abs_k_; ++i) {
    u64 d = a % p_;
    r += (d == 0 ? 0 : p_ - d) * w;
    w *= p_;
    a /= p_;
  }
  return r;
}

fe Field::sub(fe a, fe b) const { return add(a, neg(b)); }

fe Field::mul_slow(fe a, fe b) const {
  if (!base_) return mulmod(a, b, p_);
  if (a == 0 || b == 0) return 0;
  if (modbits_) {
    // Binary extension of F_2: codes are bit vectors, shift and xor.
    const u64 top = u64{1} << k_;
    fe r = 0;
    while (b) {
      if (b & 1) r ^= a;
      b >>= 1;
      a <<= 1;
      if (a & top) a ^= modbits_;
    }
    return r;
  }
  const Field& B = *base_;
  u64 qb = B.q();
  // k_ < 64 since q fits in 64 bits.
  std::array<fe, 64> da{}, db{};
  std::array<fe, 127> prod{};
  for (unsigned i = 0; i < k_; ++i) {
    da[i] = a % qb;
    a /= qb;
    db[i] = b % qb;
    b /= qb;
  }
  for (unsigned i = 0; i < k_; ++i) {
    if (da[i] == 0) continue;
    for (unsigned j = 0; j < k_; ++j) {
      if (db[j] == 0) continue;
      prod[i + j] = B.add(prod[i + j], B.mul(da[i], db[j]));
    }
  }
  for (int i = static_cast<int>(2 * k_) - 2; i >= static_cast<int>(k_); --i) {
    fe t = prod[i];
    if (t == 0) continue;
    for (unsigned j = 0; j <= k_; ++j) {
      prod[i - k_ + j] = B.sub(prod[i - k_ + j], B.mul(t, mod_[j]));
    }
  }
  fe r = 0, w = 1;
  for (unsigned i = 0; i < k_; ++i) {
    r += prod[i] * w;
    w *= qb;
  }
  return r;
}

fe Field::mul(fe a, fe b) const {
  if (!base_) return p_ < (u64{1} << 32) ? (a * b) % p_ : mulmod(a, b, p_);
  if (!log_.empty()) {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  return mul_slow(a, b);
}

fe Field::pow_slow(fe a, u64 e) const {
  fe r = 1;
  while (e) {
    if (e & 1) r = mul_slow(r, a);
    a = mul_slow(a, a);
    e >>= 1;
  }
  return r;
}

fe Field::pow(fe a, u64 e) const {
  if (!log_.empty()) {
    if (a == 0) return e == 0 ? 1 : 0;
    u64 l = static_cast<u64>(static_cast<u128>(log_[a]) * e % (q_ - 1));
    return exp_[l];
  }
  fe r = 1;
  while (e) {
    if (e & 1) r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

fe Field::inv(fe a) const {
  if (a == 0) throw Error(Errc::DivisionByZero, "inverse of zero");
  if (!base_) return inv_mod(a, p_);
  if (!log_.empty()) return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
  return pow_slow(a, q_ - 2);
}

u64 Field::order(fe a) const {
  if (a == 0) throw Error(Errc::ZeroElement, "order of zero");
  u64 e = q_ - 1;
  for (auto& [r, m] : qm1_) {
    while (e % r == 0 && pow(a, e / r) == 1) e /= r;
  }
  return e;
}

fe Field::find_generator() const {
  if (q_ == 2) return 1;
  for (fe g = 1; g < q_; ++g) {
    bool ok = true;
    for (auto& [r, m] : qm1_) {
      if (pow_slow(g, (q_ - 1) / r) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw Error(Errc::Internal, "no generator found");
}

u64 Field::dlog(fe b, fe x) const {
  if (b == 0 || x == 0) throw Error(Errc::ZeroElement, "discrete log of zero");
  u64 N = order(b);
  if (N < kTableLimit) {
    fe y = 1;
    for (u64 e = 0; e < N; ++e) {
      if (y == x) return e;
      y = mul(y, b);
    }
    throw Error(Errc::PreconditionViolated, "element not in the subgroup");
  }
  u64 m = 1;
  while (static_cast<u128>(m) * m < N) ++m;
  std::unordered_map<fe, u64> baby;
  baby.reserve(m * 2);
  fe y = 1;
  for (u64 j = 0; j < m; ++j) {
    baby.emplace(y, j);
    y = mul(y, b);
  }
  fe giant = inv(pow(b, m));
  y = x;
  for (u64 i = 0; i < m; ++i) {
    auto it = baby.find(y);
    if (it != baby.end()) return i * m + it->second;
    y = mul(y, giant);
  }
  throw Error(Errc::PreconditionViolated, "element not in the subgroup");
}

std::vector<fe> Field::coeffs(fe a) const {
  if (!base_) return {a};
  std::vector<fe> c(k_);
  u64 qb = base_->q();
  for (unsigned i = 0; i < k_; ++i) {
    c[i] = a % qb;
    a /= qb;
  }
  return c;
}

fe Field::from_coeffs(const std::vector<fe>& c) const {
  if (!base_) return c.empty() ? 0 : c[0] % p_;
  u64 qb = base_->q();
  fe r = 0, w = 1;
  for (unsigned i = 0; i < k_ && i < c.size(); ++i) {
    r += (c[i] % qb) * w;
    w *= qb;
  }
  return r;
}

std::string Field::format(fe a) const {
  if (!base_) return std::to_string(a);
  if (a == 0) return "0";
  auto c = coeffs(a);
  bool nested = !base_->is_prime_field();
  const char* var = nested ? "s" : "t";
  std::string out;
  for (int i = static_cast<int>(k_) - 1; i >= 0; --i) {
    if (c[i] == 0) continue;
    if (!out.empty()) out += "+";
    std::string cs = base_->format(c[i]);
    if (nested) cs = "(" + cs + ")";
    if (i == 0) {
      out += cs;
      continue;
    }
    if (c[i] != 1) out += cs + "*";
    out += var;
    if (i > 1) out += "^" + std::to_string(i);
  }
  return out;
}

fe Field::parse(const std::string& text) const {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  if (s.empty()) throw Error(Errc::ParseError, "empty field element");
  if (base_ && !base_->is_prime_field()) throw Error(Errc::ParseError, "parsing tower field elements is not supported");
  std::vector<long long> acc(k_, 0);
  std::size_t i = 0;
  auto parse_int = [&](long long& out, u64 modulus) {
    std::size_t start = i;
    long long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      v = static_cast<long long>((static_cast<u128>(v) * 10 + static_cast<u64>(s[i] - '0')) % modulus);
      ++i;
    }
    if (i == start) return false;
    out = v;
    return true;
  };
  while (i < s.size()) {
    long long sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      if (s[i] == '-') sign = -1;
      ++i;
    } else if (i != 0) {
      throw Error(Errc::ParseError, "expected '+' or '-' in '" + text + "'");
    }
    long long coef = 1;
    bool has_coef = parse_int(coef, p_);
    unsigned deg = 0;
    if (i < s.size() && s[i] == '*') {
      if (!has_coef) throw Error(Errc::ParseError, "dangling '*' in '" + text + "'");
      ++i;
      if (i >= s.size() || s[i] != 't') throw Error(Errc::ParseError, "expected 't' after '*' in '" + text + "'");
    }
    if (i < s.size() && s[i] == 't') {
      if (!base_) throw Error(Errc::ParseError, "prime field elements are integers: '" + text + "'");
      ++i;
      deg = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        long long e = 0;
        if (!parse_int(e, 1u << 20)) throw Error(Errc::ParseError, "missing exponent in '" + text + "'");
        deg = static_cast<unsigned>(e);
      }
    } else if (!has_coef) {
      throw Error(Errc::ParseError, "cannot parse '" + text + "'");
    }
    coef = (coef % static_cast<long long>(p_)) * sign;
    if (deg < k_) {
      acc[deg] += coef;
    } else {
      // Reduce t^deg through the modulus.
      std::vector<fe> mono(deg + 1, 0);
      mono[deg] = from_int(coef);
      Poly r = Poly(base_, mono) % Poly(base_, mod_);
      for (unsigned j = 0; j < r.c.size(); ++j) acc[j] += static_cast<long long>(r.c[j]);
    }
  }
  std::vector<fe> c(k_);
  for (unsigned j = 0; j < k_; ++j) c[j] = (base_ ? *base_ : *this).from_int(acc[j]);
  if (!base_) return from_int(acc[0]);
  return from_coeffs(c);
}

FieldElement fe_arith(const FieldElement& a, const FieldElement& b, FieldOp op) {
  if (a.F != b.F) throw Error(Errc::FieldMismatch, "operands belong to different fields");
  const Field& F = *a.F;
  switch (op) {
    case FieldOp::Add:
      return {a.F, F.add(a.v, b.v)};
    case FieldOp::Sub:
      return {a.F, F.sub(a.v, b.v)};
    case FieldOp::Mul:
      return {a.F, F.mul(a.v, b.v)};
    case FieldOp::Div:
      return {a.F, F.div(a.v, b.v)};
  }
  throw Error(Errc::Internal, "unknown field op");
}

u64 fe_order(const FieldElement& a) { return a.F->order(a.v); }

FieldElement fe_generator(const FieldPtr& F) { return {F, F->generator()}; }

// ---------------------------------------------------------------- Poly

Poly::Poly(FieldPtr f, std::vector<fe> coeffs) : F(std::move(f)), c(std::move(coeffs)) { trim(); }

Poly Poly::monomial(const FieldPtr& f, fe a, unsigned d) {
  std::vector<fe> c(d + 1, 0);
  c[d] = a;
  return Poly(f, std::move(c));
}

void Poly::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

std::string Poly::format(const std::string& var) const {
  if (c.empty()) return "0";
  std::string out;
  bool nested = !F->is_prime_field();
  for (int i = degree(); i >= 0; --i) {
    if (c[i] == 0) continue;
    if (!out.empty()) out += "+";
    std::string cs = F->format(c[i]);
    if (nested && i > 0) cs = "(" + cs + ")";
    if (i == 0) {
      out += cs;
      continue;
    }
    if (c[i] != 1) out += cs + "*";
    out += var;
    if (i > 1) out += "^" + std::to_string(i);
  }
  return out;
}

static void check_same(const Poly& a, const Poly& b) {
  if (a.F != b.F) throw Error(Errc::FieldMismatch, "polynomials over different fields");
}

Poly operator+(const Poly& a, const Poly& b) {
  check_same(a, b);
  std::vector<fe> r(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.F->add(a.coeff(i), b.coeff(i));
  return Poly(a.F, std::move(r));
}

Poly operator-(const Poly& a, const Poly& b) {
  check_same(a, b);
  std::vector<fe> r(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.F->sub(a.coeff(i), b.coeff(i));
  return Poly(a.F, std::move(r));
}

Poly operator*(const Poly& a, const Poly& b) {
  check_same(a, b);
  if (a.is_zero() || b.is_zero()) return Poly(a.F, {});
  const Field& F = *a.F;
  std::vector<fe> r(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i] == 0) continue;
    for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(a.c[i], b.c[j]));
  }
  return Poly(a.F, std::move(r));
}

Poly scale(const Poly& a, fe s) {
  std::vector<fe> r(a.c.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.F->mul(a.c[i], s);
  return Poly(a.F, std::move(r));
}

Poly monic(const Poly& a) {
  if (a.is_zero()) return a;
  return scale(a, a.F->inv(a.lead()));
}

std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  check_same(a, b);
  if (b.is_zero()) throw Error(Errc::DivisionByZero, "polynomial division by zero");
  const Field& F = *a.F;
  std::vector<fe> r = a.c;
  int db = b.degree();
  if (a.degree() < db) return {Poly(a.F, {}), a};
  std::vector<fe> qv(a.degree() - db + 1, 0);
  fe li = F.inv(b.lead());
  for (int i = a.degree(); i >= db; --i) {
    fe t = F.mul(r[i], li);
    qv[i - db] = t;
    if (t == 0) continue;
    for (int j = 0; j <= db; ++j) r[i - db + j] = F.sub(r[i - db + j], F.mul(t, b.c[j]));
  }
  r.resize(db);
  return {Poly(a.F, std::move(qv)), Poly(a.F, std::move(r))};
}

Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }
Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }

Poly poly_gcd(Poly a, Poly b) {
  check_same(a, b);
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

Poly poly_lcm(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly(a.F, {});
  return monic((a * b) / poly_gcd(a, b));
}

Poly pow_mod(Poly a, u64 e, const Poly& m) {
  Poly r = Poly::constant(a.F, 1) % m;
  a = a % m;
  while (e) {
    if (e & 1) r = (r * a) % m;
    e >>= 1;
    if (e) a = (a * a) % m;
  }
  return r;
}

Poly poly_pow(const Poly& a, unsigned e) {
  Poly r = Poly::constant(a.F, 1);
  for (unsigned i = 0; i < e; ++i) r = r * a;
  return r;
}

Poly derivative(const Poly& a) {
  if (a.c.size() <= 1) return Poly(a.F, {});
  std::vector<fe> r(a.c.size() - 1);
  for (std::size_t i = 1; i < a.c.size(); ++i) r[i - 1] = a.F->mul(a.c[i], a.F->from_int(static_cast<long long>(i % a.F->p())));
  return Poly(a.F, std::move(r));
}

fe eval(const Poly& a, fe x) {
  fe r = 0;
  for (int i = a.degree(); i >= 0; --i) r = a.F->add(a.F->mul(r, x), a.c[i]);
  return r;
}

Poly compose_mod(const Poly& a, const Poly& b, const Poly& m) {
  Poly r(a.F, {});
  for (int i = a.degree(); i >= 0; --i) r = (r * b + Poly::constant(a.F, a.c[i])) % m;
  return r;
}

bool poly_less(const Poly& a, const Poly& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (int i = a.degree(); i >= 0; --i) {
    if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
  }
  return false;
}

namespace {

// x^(Q^i) mod f for i = 0..upto.
std::vector<Poly> frobenius_powers(const Poly& f, unsigned upto) {
  std::vector<Poly> out;
  Poly xp = Poly::x(f.F) % f;
  out.push_back(xp);
  for (unsigned i = 1; i <= upto; ++i) {
    xp = pow_mod(xp, f.F->q(), f);
    out.push_back(xp);
  }
  return out;
}

}  // namespace

bool is_irreducible(const Poly& f) {
  int n = f.degree();
  if (n <= 0) return false;
  if (n == 1) return true;
  Poly g = monic(f);
  auto fr = frobenius_powers(g, n);
  Poly x = Poly::x(g.F) % g;
  if (!(fr[n] == x)) return false;
  for (u64 r : prime_factors(static_cast<u64>(n))) {
    Poly h = poly_gcd(g, fr[n / r] - x);
    if (h.degree() > 0) return false;
  }
  return true;
}

const std::vector<Poly>& monic_irreducibles(const FieldPtr& F, unsigned d) {
  static std::mutex mu;
  static std::map<std::pair<const Field*, unsigned>, std::vector<Poly>> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find({F.get(), d});
    if (it != cache.end()) return it->second;
  }
  auto total = try_pow(F->q(), d);
  if (!total || *total > (u64{1} << 24)) throw Error(Errc::TooLarge, "too many candidate polynomials to enumerate");
  std::vector<Poly> out;
  std::vector<fe> c(d + 1, 0);
  c[d] = 1;
  for (u64 code = 0; code < *total; ++code) {
    u64 v = code;
    for (unsigned i = 0; i < d; ++i) {
      c[i] = v % F->q();
      v /= F->q();
    }
    if (d > 1 && c[0] == 0) continue;
    Poly p(F, c);
    if (is_irreducible(p)) out.push_back(std::move(p));
  }
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(std::make_pair(F.get(), d), std::move(out)).first->second;
}

std::vector<PolyFactor> poly_factor(const Poly& f0) {
  if (f0.is_zero()) throw Error(Errc::ZeroPolynomial, "cannot factor zero");
  Poly f = monic(f0);
  std::vector<PolyFactor> out;
  auto strip = [&](const Poly& g) {
    int m = 0;
    for (;;) {
      auto [qq, r] = divmod(f, g);
      if (!r.is_zero()) break;
      f = qq;
      ++m;
    }
    if (m > 0) out.push_back({g, m});
  };
  for (unsigned d = 1; 2 * d <= static_cast<unsigned>(std::max(f.degree(), 0)); ++d) {
    // Product of the distinct degree-d factors (smaller ones are gone).
    Poly xq = pow_mod(Poly::x(f.F), checked_pow(f.F->q(), d), f);
    Poly h = poly_gcd(f, xq - Poly::x(f.F) % f);
    if (h.degree() <= 0) continue;
    if (h.degree() == static_cast<int>(d)) {
      strip(h);
      continue;
    }
    for (const Poly& g : monic_irreducibles(f.F, d)) {
      if (!(h % g).is_zero()) continue;
      strip(g);
      h = h / g;
      if (h.degree() <= 0) break;
    }
  }
  if (f.degree() > 0) out.push_back({f, 1});
  std::sort(out.begin(), out.end(), [](const PolyFactor& a, const PolyFactor& b) { return poly_less(a.f, b.f); });
  return out;
}

}  // namespace pg
