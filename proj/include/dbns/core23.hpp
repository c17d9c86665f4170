#pragma once

// {2,3}-integers and double-base representations.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbns/bigint.hpp"

namespace dbns {

/// Nonzero integer sign * 2^exp2 * 3^exp3, stored in canonical form.
struct TwoThreeInteger {
  int sign = 1;  // +1 or -1
  std::uint32_t exp2 = 0;
  std::uint32_t exp3 = 0;

  BigInt value() const;
  /// value() when it fits a signed 64-bit word.
  std::optional<std::int64_t> value_i64() const;

  bool operator==(const TwoThreeInteger&) const = default;
  std::string to_string() const;
};

/// Total order used wherever a deterministic choice among summands is
/// needed: ascending (|value|, sign, exp2, exp3), with negative sign first.
std::strong_ordering compare_key(const TwoThreeInteger& x, const TwoThreeInteger& y);

inline bool key_less(const TwoThreeInteger& x, const TwoThreeInteger& y) {
  return compare_key(x, y) < 0;
}

std::optional<TwoThreeInteger> canonicalize(const BigInt& n);
std::optional<TwoThreeInteger> canonicalize(std::int64_t n);

inline BigInt value(const TwoThreeInteger& t) { return t.value(); }

struct Representation {
  BigInt target;
  std::vector<TwoThreeInteger> summands;

  std::size_t length() const { return summands.size(); }
  BigInt sum() const;
  /// True iff nonempty and the summands add up to target.
  bool is_valid() const;
  /// Throws SumMismatchError when !is_valid().
  void validate() const;
  std::string to_string() const;
};

enum class ReprClass { General, Primitive, DoublyPrimitive };

const char* to_string(ReprClass c);

/// DoublyPrimitive: one summand is odd (exp2 == 0) and a different one is
/// prime to 3 (exp3 == 0). Primitive: the summands have gcd 1.
ReprClass classify(const Representation& rep);

/// Replaces summand `index` by the pair (3x, -2x); same target, one longer.
/// Throws std::out_of_range for a bad index.
Representation lengthen(const Representation& rep, std::size_t index);

Representation negate(const Representation& rep);

}  // namespace dbns
