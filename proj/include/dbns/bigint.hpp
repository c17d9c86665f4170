#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace dbns {

using BigInt = mpz_class;
using u128 = unsigned __int128;

BigInt from_u128(u128 x);
/// Throws ResourceError unless 0 <= x < 2^128.
u128 to_u128(const BigInt& x);

std::string to_string(u128 x);
inline std::string to_string(const BigInt& x) { return x.get_str(); }

/// Decimal integer, optional leading '-'. Also accepts `B^E` and `B^E±C`
/// (e.g. "2^61", "2^63-1") since bounds are usually written that way.
BigInt parse_bigint(std::string_view text);
u128 parse_u128(std::string_view text);

/// Least nonnegative residue of x modulo m (m > 0).
u128 mod_u128(const BigInt& x, u128 m);

inline bool fits_int64(const BigInt& x) { return x.fits_slong_p(); }

}  // namespace dbns
