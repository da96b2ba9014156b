#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace pg {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);

// Deterministic for all 64-bit inputs.
bool is_prime(u64 n);

// Sorted by prime. Trial division, Pollard rho for large cofactors.
std::vector<std::pair<u64, int>> factor_u64(u64 n);
std::vector<u64> prime_factors(u64 n);
std::vector<u64> divisors(u64 n);

// (p, k) with n = p^k, k >= 1; nullopt if n is not a prime power.
std::optional<std::pair<u64, int>> prime_power(u64 n);
bool is_prime_power(u64 n);

// Throws TooLarge on overflow.
u64 checked_pow(u64 b, unsigned e);
u64 checked_mul(u64 a, u64 b);
std::optional<u64> try_pow(u64 b, unsigned e);

u64 gcd_u64(u64 a, u64 b);
u64 lcm_u64(u64 a, u64 b);  // throws TooLarge on overflow

// Inverse of a mod m, requires gcd(a, m) == 1.
u64 inv_mod(u64 a, u64 m);

}  // namespace pg
