#include "dbns/core23.hpp"

#include <cmath>
#include <stdexcept>

#include "dbns/errors.hpp"

namespace dbns {

BigInt TwoThreeInteger::value() const {
  BigInt p2, p3;
  mpz_ui_pow_ui(p2.get_mpz_t(), 2, exp2);
  mpz_ui_pow_ui(p3.get_mpz_t(), 3, exp3);
  BigInt v = p2 * p3;
  return sign < 0 ? BigInt(-v) : v;
}

std::optional<std::int64_t> TwoThreeInteger::value_i64() const {
  if (exp2 == 63 && exp3 == 0 && sign < 0) return INT64_MIN;
  if (exp2 >= 63) return std::nullopt;
  std::int64_t v = std::int64_t{1} << exp2;
  for (std::uint32_t i = 0; i < exp3; ++i) {
    if (v > INT64_MAX / 3) return std::nullopt;
    v *= 3;
  }
  return sign < 0 ? -v : v;
}

std::string TwoThreeInteger::to_string() const {
  std::string s = sign < 0 ? "-" : "";
  s += "2^" + std::to_string(exp2) + "*3^" + std::to_string(exp3);
  return s;
}

std::strong_ordering compare_key(const TwoThreeInteger& x, const TwoThreeInteger& y) {
  if (x.exp2 != y.exp2 || x.exp3 != y.exp3) {
    // Distinct (exp2, exp3) never give equal magnitudes; compare logs and
    // fall back to exact arithmetic when they are too close to call.
    const double lx = x.exp2 * std::log(2.0) + x.exp3 * std::log(3.0);
    const double ly = y.exp2 * std::log(2.0) + y.exp3 * std::log(3.0);
    if (std::abs(lx - ly) > 1e-9 * (1.0 + std::max(lx, ly))) {
      return lx < ly ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    BigInt ax = abs(x.value());
    BigInt ay = abs(y.value());
    int c = cmp(ax, ay);
    if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (x.sign != y.sign) return x.sign < y.sign ? std::strong_ordering::less : std::strong_ordering::greater;
  if (auto c = x.exp2 <=> y.exp2; c != 0) return c;
  return x.exp3 <=> y.exp3;
}

std::optional<TwoThreeInteger> canonicalize(const BigInt& n) {
  if (sgn(n) == 0) return std::nullopt;
  TwoThreeInteger t;
  t.sign = sgn(n) < 0 ? -1 : 1;
  BigInt m = abs(n);
  t.exp2 = static_cast<std::uint32_t>(mpz_scan1(m.get_mpz_t(), 0));
  m >>= t.exp2;
  while (mpz_divisible_ui_p(m.get_mpz_t(), 3)) {
    mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), 3);
    ++t.exp3;
  }
  if (m != 1) return std::nullopt;
  return t;
}

std::optional<TwoThreeInteger> canonicalize(std::int64_t n) {
  if (n == 0) return std::nullopt;
  if (n == INT64_MIN) return TwoThreeInteger{-1, 63, 0};
  TwoThreeInteger t;
  t.sign = n < 0 ? -1 : 1;
  std::uint64_t m = static_cast<std::uint64_t>(n < 0 ? -n : n);
  t.exp2 = static_cast<std::uint32_t>(__builtin_ctzll(m));
  m >>= t.exp2;
  while (m % 3 == 0) {
    m /= 3;
    ++t.exp3;
  }
  if (m != 1) return std::nullopt;
  return t;
}

BigInt Representation::sum() const {
  BigInt s = 0;
  for (const auto& x : summands) s += x.value();
  return s;
}

bool Representation::is_valid() const { return !summands.empty() && sum() == target; }

void Representation::validate() const {
  if (summands.empty()) throw SumMismatchError("representation of " + target.get_str() + " has no summands");
  BigInt s = sum();
  if (s != target) {
    throw SumMismatchError("summands add to " + s.get_str() + ", not " + target.get_str());
  }
}

std::string Representation::to_string() const {
  std::string out = target.get_str() + " =";
  bool first = true;
  for (const auto& x : summands) {
    BigInt v = x.value();
    if (first) {
      out += " " + v.get_str();
    } else if (sgn(v) < 0) {
      out += " - " + BigInt(-v).get_str();
    } else {
      out += " + " + v.get_str();
    }
    first = false;
  }
  return out;
}

const char* to_string(ReprClass c) {
  switch (c) {
    case ReprClass::General: return "general";
    case ReprClass::Primitive: return "primitive";
    case ReprClass::DoublyPrimitive: return "doubly-primitive";
  }
  return "?";
}

ReprClass classify(const Representation& rep) {
  rep.validate();
  const auto& s = rep.summands;
  // Doubly primitive needs an odd summand and a *different* summand prime to 3.
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].exp2 != 0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != i && s[j].exp3 == 0) return ReprClass::DoublyPrimitive;
    }
  }
  bool has_odd = false, has_prime_to_3 = false;
  for (const auto& x : s) {
    has_odd = has_odd || x.exp2 == 0;
    has_prime_to_3 = has_prime_to_3 || x.exp3 == 0;
  }
  return has_odd && has_prime_to_3 ? ReprClass::Primitive : ReprClass::General;
}

Representation lengthen(const Representation& rep, std::size_t index) {
  if (index >= rep.summands.size()) {
    throw std::out_of_range("lengthen: index " + std::to_string(index) + " out of range for length " +
                            std::to_string(rep.summands.size()));
  }
  const TwoThreeInteger x = rep.summands[index];
  Representation out = rep;
  out.summands[index] = TwoThreeInteger{x.sign, x.exp2, x.exp3 + 1};
  out.summands.insert(out.summands.begin() + static_cast<std::ptrdiff_t>(index) + 1,
                      TwoThreeInteger{-x.sign, x.exp2 + 1, x.exp3});
  return out;
}

Representation negate(const Representation& rep) {
  Representation out;
  out.target = -rep.target;
  out.summands = rep.summands;
  for (auto& x : out.summands) x.sign = -x.sign;
  return out;
}

}  // namespace dbns
