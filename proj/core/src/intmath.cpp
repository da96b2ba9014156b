#include "powergraph/intmath.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "powergraph/error.hpp"

namespace pg {

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  if (m == 1) return 0;
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  static const u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : small) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : small) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

namespace {

u64 rho(u64 n) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 x = 2, y = 2, d = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

void factor_rec(u64 n, std::map<u64, int>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out[n]++;
    return;
  }
  u64 d = rho(n);
  factor_rec(d, out);
  factor_rec(n / d, out);
}

}  // namespace

std::vector<std::pair<u64, int>> factor_u64(u64 n) {
  std::map<u64, int> out;
  for (u64 p = 2; p < 1000 && p * p <= n; ++p) {
    while (n % p == 0) {
      out[p]++;
      n /= p;
    }
  }
  if (n > 1) factor_rec(n, out);
  return {out.begin(), out.end()};
}

std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> r;
  for (auto& [p, e] : factor_u64(n)) r.push_back(p);
  return r;
}

std::vector<u64> divisors(u64 n) {
  std::vector<u64> ds{1};
  for (auto& [p, e] : factor_u64(n)) {
    std::size_t cur = ds.size();
    u64 pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      for (std::size_t j = 0; j < cur; ++j) ds.push_back(ds[j] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

std::optional<std::pair<u64, int>> prime_power(u64 n) {
  if (n < 2) return std::nullopt;
  auto f = factor_u64(n);
  if (f.size() != 1) return std::nullopt;
  return std::make_pair(f[0].first, f[0].second);
}

bool is_prime_power(u64 n) { return prime_power(n).has_value(); }

std::optional<u64> try_pow(u64 b, unsigned e) {
  u128 r = 1;
  for (unsigned i = 0; i < e; ++i) {
    r *= b;
    if (r > ~u64{0}) return std::nullopt;
  }
  return static_cast<u64>(r);
}

u64 checked_pow(u64 b, unsigned e) {
  auto r = try_pow(b, e);
  if (!r) throw Error(Errc::TooLarge, "integer power overflows 64 bits");
  return *r;
}

u64 checked_mul(u64 a, u64 b) {
  u128 r = static_cast<u128>(a) * b;
  if (r > ~u64{0}) throw Error(Errc::TooLarge, "integer product overflows 64 bits");
  return static_cast<u64>(r);
}

u64 gcd_u64(u64 a, u64 b) { return std::gcd(a, b); }

u64 lcm_u64(u64 a, u64 b) {
  if (a == 0 || b == 0) return 0;
  return checked_mul(a / std::gcd(a, b), b);
}

u64 inv_mod(u64 a, u64 m) {
  using i128 = __int128;
  i128 t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    i128 qq = r / nr;
    i128 tmp = t - qq * nt;
    t = nt;
    nt = tmp;
    tmp = r - qq * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw Error(Errc::PreconditionViolated, "value not invertible modulo m");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

}  // namespace pg
