#include "dbns/bigint.hpp"

#include <algorithm>
#include <cctype>

#include "dbns/errors.hpp"

namespace dbns {

BigInt from_u128(u128 x) {
  BigInt hi = static_cast<unsigned long>(static_cast<std::uint64_t>(x >> 64));
  BigInt lo = static_cast<unsigned long>(static_cast<std::uint64_t>(x));
  return (hi << 64) + lo;
}

u128 to_u128(const BigInt& x) {
  if (sgn(x) < 0 || mpz_sizeinbase(x.get_mpz_t(), 2) > 128) {
    throw ResourceError("value " + x.get_str() + " does not fit in 128 bits");
  }
  BigInt hi = x >> 64;
  BigInt lo = x - (hi << 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | static_cast<u128>(lo.get_ui());
}

std::string to_string(u128 x) {
  if (x == 0) return "0";
  std::string out;
  while (x != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(x % 10)));
    x /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

BigInt parse_decimal(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw std::invalid_argument("bad integer literal '" + std::string(text) + "'");
  for (std::size_t j = i; j < text.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(text[j]))) {
      throw std::invalid_argument("bad integer literal '" + std::string(text) + "'");
    }
  }
  BigInt v(std::string(text.substr(i)), 10);
  return negative ? BigInt(-v) : v;
}

}  // namespace

BigInt parse_bigint(std::string_view text) {
  auto caret = text.find('^');
  if (caret == std::string_view::npos) return parse_decimal(text);

  BigInt base = parse_decimal(text.substr(0, caret));
  std::string_view rest = text.substr(caret + 1);
  auto sign_pos = rest.find_first_of("+-");
  BigInt exponent = parse_decimal(rest.substr(0, sign_pos));
  if (sgn(exponent) < 0 || exponent > 100000) {
    throw std::invalid_argument("exponent out of range in '" + std::string(text) + "'");
  }
  BigInt v;
  mpz_pow_ui(v.get_mpz_t(), base.get_mpz_t(), exponent.get_ui());
  if (sign_pos != std::string_view::npos) v += parse_decimal(rest.substr(sign_pos));
  return v;
}

u128 parse_u128(std::string_view text) { return to_u128(parse_bigint(text)); }

u128 mod_u128(const BigInt& x, u128 m) {
  BigInt r;
  BigInt mm = from_u128(m);
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), mm.get_mpz_t());
  return to_u128(r);
}

}  // namespace dbns
