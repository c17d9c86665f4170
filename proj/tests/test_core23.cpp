#include <doctest.h>

#include <random>

#include "dbns/core23.hpp"
#include "dbns/errors.hpp"

using namespace dbns;

TEST_CASE("canonicalize") {
  CHECK(canonicalize(12) == TwoThreeInteger{1, 2, 1});
  CHECK(canonicalize(-48) == TwoThreeInteger{-1, 4, 1});
  CHECK(canonicalize(1) == TwoThreeInteger{1, 0, 0});
  CHECK_FALSE(canonicalize(5).has_value());
  CHECK_FALSE(canonicalize(0).has_value());
  CHECK_FALSE(canonicalize(BigInt(-10)).has_value());
  CHECK(canonicalize(BigInt("1853020188851841")) == TwoThreeInteger{1, 0, 32});
}

TEST_CASE("value") {
  CHECK(TwoThreeInteger{1, 0, 0}.value() == 1);
  CHECK(TwoThreeInteger{-1, 4, 1}.value() == -48);
  CHECK(TwoThreeInteger{1, 6, 0}.value() == 64);
  CHECK(TwoThreeInteger{1, 63, 0}.value_i64() == std::nullopt);
  CHECK(TwoThreeInteger{-1, 63, 0}.value_i64() == INT64_MIN);
}

TEST_CASE("canonicalize inverts value for exponents up to 64") {
  for (std::uint32_t a = 0; a <= 64; ++a) {
    for (std::uint32_t b = 0; b <= 64; ++b) {
      for (int s : {1, -1}) {
        const TwoThreeInteger t{s, a, b};
        REQUIRE(canonicalize(t.value()) == t);
      }
    }
  }
}

TEST_CASE("compare_key orders by magnitude then sign") {
  const TwoThreeInteger m3{-1, 0, 1}, p3{1, 0, 1}, p4{1, 2, 0}, p2{1, 1, 0};
  CHECK(key_less(p2, m3));
  CHECK(key_less(m3, p3));
  CHECK(key_less(p3, p4));
  CHECK(compare_key(p4, p4) == std::strong_ordering::equal);
}

namespace {

Representation rep(std::int64_t target, std::initializer_list<std::int64_t> values) {
  Representation r;
  r.target = target;
  for (auto v : values) r.summands.push_back(*canonicalize(v));
  return r;
}

}  // namespace

TEST_CASE("classify") {
  CHECK(classify(rep(5, {2, 3})) == ReprClass::DoublyPrimitive);
  CHECK(classify(rep(10, {4, 6})) == ReprClass::General);
  CHECK(classify(rep(7, {1, 6})) == ReprClass::Primitive);
  CHECK(classify(rep(1, {1})) == ReprClass::Primitive);
  CHECK(classify(rep(13, {4, 9})) == ReprClass::DoublyPrimitive);
  CHECK(classify(rep(12, {6, 6})) == ReprClass::General);
}

TEST_CASE("validate and to_string") {
  const auto r = rep(103, {108, -4, -1});
  CHECK(r.is_valid());
  CHECK(r.to_string() == "103 = 108 - 4 - 1");
  CHECK_THROWS_AS(rep(104, {108, -4, -1}).validate(), SumMismatchError);
  Representation empty;
  empty.target = 0;
  CHECK_FALSE(empty.is_valid());
}

TEST_CASE("lengthen") {
  const auto a = lengthen(rep(5, {2, 3}), 0);
  CHECK(a.to_string() == "5 = 6 - 4 + 3");
  CHECK(lengthen(rep(1, {1}), 0).to_string() == "1 = 3 - 2");
  CHECK_THROWS_AS(lengthen(rep(1, {1}), 1), std::out_of_range);
}

TEST_CASE("random representations: sum, lengthen, negation") {
  std::mt19937_64 rng(20261018);
  std::uniform_int_distribution<std::uint32_t> e2(0, 40), e3(0, 25), len(1, 7);
  for (int trial = 0; trial < 10000; ++trial) {
    Representation r;
    BigInt sum = 0;
    const auto k = len(rng);
    for (std::uint32_t i = 0; i < k; ++i) {
      const TwoThreeInteger t{rng() & 1 ? 1 : -1, e2(rng), e3(rng)};
      r.summands.push_back(t);
      sum += t.value();
    }
    r.target = sum;
    REQUIRE(r.is_valid());

    const auto idx = rng() % k;
    const auto longer = lengthen(r, idx);
    REQUIRE(longer.length() == r.length() + 1);
    REQUIRE(longer.target == r.target);
    REQUIRE(longer.is_valid());

    const auto neg = negate(r);
    REQUIRE(neg.target == -r.target);
    REQUIRE(neg.is_valid());
    REQUIRE(classify(neg) == classify(r));
  }
}
