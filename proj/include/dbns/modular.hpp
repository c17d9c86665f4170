#pragma once

// Images of the {2,3}-integers in Z/mZ and the density / work-factor
// estimates built on them.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dbns/bigint.hpp"

namespace dbns {

struct ContextLimits {
  /// Largest t(m) build_context will enumerate.
  std::size_t max_cardinality = 1'000'000'000;
};

/// Largest modulus a ModContext can hold (residues are 128-bit words).
inline constexpr u128 kMaxContextModulus = static_cast<u128>(1) << 120;
/// Moduli below this bound get 64-bit residue views for the hot loops.
inline constexpr u128 kWordModulusBound = static_cast<u128>(1) << 63;

/// T(m), T2(m), T3(m) as ascending residue arrays.
///
///   all    = { +-2^i 3^j mod m }
///   twos   = { +-2^i mod m }
///   threes = { +-3^j mod m }
///
/// Zero is included whenever it is reached (m | 2^i 3^j). When m < 2^63 the
/// same sets are also kept as 64-bit arrays (`*64`), which is what the
/// intersection engine consumes.
struct ModContext {
  u128 m = 1;
  std::vector<u128> all;
  std::vector<u128> twos;
  std::vector<u128> threes;
  std::optional<BigInt> lambda;  // empty if m could not be factored

  std::vector<std::uint64_t> all64;
  std::vector<std::uint64_t> twos64;
  std::vector<std::uint64_t> threes64;

  std::size_t t() const { return all.size(); }
  std::size_t t2() const { return twos.size(); }
  std::size_t t3() const { return threes.size(); }
  bool word_sized() const { return m < kWordModulusBound; }
  BigInt modulus() const { return from_u128(m); }

  bool contains(u128 x) const;
  bool contains_two_power(u128 x) const;
  bool contains_three_power(u128 x) const;
};

/// BFS closure of {1} under x -> 2x, 3x, -x (mod m). Throws
/// std::invalid_argument for m < 1 and ResourceError past the caps.
ModContext build_context(const BigInt& m, const ContextLimits& limits = {});

/// Carmichael's function: exponent of (Z/mZ)^*. Throws FactorizationError
/// when m has a large composite cofactor that resists Pollard rho.
BigInt carmichael(const BigInt& m);

/// Prime factorization as (p, e) pairs, ascending.
std::vector<std::pair<BigInt, unsigned>> factorize(const BigInt& m);

/// Exact rational quantity together with its natural logarithm.
struct Estimate {
  mpq_class exact;
  bool clamped = false;  // true when a density was capped at 1

  double ln() const;
  double value() const;
};

/// Expected degree-r density: min(1, C(t+r-1, r) / m).
Estimate density_D(const ModContext& ctx, int r);
/// Expected doubly-primitive density: min(1, t2 t3 C(t+r-3, r-2) / m).
Estimate density_dp(const ModContext& ctx, int r);
/// Approximate #S1 + #S2 for the half-sumset intersection at length r.
Estimate work_factor(const ModContext& ctx, int r);

/// Same formulas from bare cardinalities.
Estimate density_D(const BigInt& m, std::size_t t, int r);
Estimate density_dp(const BigInt& m, std::size_t t, std::size_t t2, std::size_t t3, int r);
Estimate work_factor(std::size_t t, std::size_t t2, std::size_t t3, int r);

struct ModulusProfile {
  unsigned a = 0, b = 0;
  unsigned x = 0, y = 0;  // 2^a - 1 = 3^x u,  3^b - 1 = 2^y v
  BigInt u, v, g;         // g = gcd(u, v)
  BigInt m;               // 2^y 3^x g
  std::size_t t = 0, t2 = 0, t3 = 0;
  std::optional<BigInt> lambda;
  std::map<int, double> ln_D, ln_d, ln_w;
  std::map<int, bool> d_clamped;  // d_r capped at 1
};

struct ModulusRecipe {
  unsigned x = 0, y = 0;
  BigInt u, v, g, m;
};

/// 2^a - 1 = 3^x u (3 does not divide u), 3^b - 1 = 2^y v (v odd),
/// m = 2^y 3^x gcd(u, v).
ModulusRecipe exponent_recipe(unsigned a, unsigned b);

/// Modulus recipe from exponents (a, b); fills estimates for r in [r_lo, r_hi].
ModulusProfile modulus_from_exponents(unsigned a, unsigned b, int r_lo = 2, int r_hi = 5,
                                      const ContextLimits& limits = {});

/// Same estimates for an explicitly given modulus (a = b = x = y = 0).
ModulusProfile profile_for_modulus(const ModContext& ctx, int r_lo = 2, int r_hi = 5);

nlohmann::json to_json(const ModulusProfile& p);

/// Residues not expressible as a sum of exactly r elements of T(m),
/// ascending. Throws ResourceError if m > 2^28 or the sumset DP would cost
/// more than `max_word_ops` 64-bit word operations.
std::vector<u128> non_representable_residues(const ModContext& ctx, int r,
                                             std::uint64_t max_word_ops = 4'000'000'000ULL);

}  // namespace dbns
