#include <doctest.h>

#include <cmath>
#include <vector>

#include "dbns/errors.hpp"
#include "dbns/modular.hpp"
#include "oracles.hpp"
#include "reference_table.hpp"

using namespace dbns;

namespace {

bool squarefree(std::uint64_t m) {
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    if (m % (p * p) == 0) return false;
  }
  return true;
}

mpz_class binom(unsigned long n, unsigned long k) {
  mpz_class c;
  mpz_bin_uiui(c.get_mpz_t(), n, k);
  return c;
}

}  // namespace

TEST_CASE("small contexts") {
  const auto c5 = build_context(5);
  CHECK(c5.t() == 4);
  CHECK(c5.t2() == 4);
  CHECK(c5.t3() == 4);
  CHECK(c5.all64 == std::vector<std::uint64_t>{1, 2, 3, 4});

  const auto c1 = build_context(1);
  CHECK(c1.t() == 1);
  CHECK(c1.t2() == 1);
  CHECK(c1.t3() == 1);

  const auto c8 = build_context(8);
  CHECK(c8.twos64 == std::vector<std::uint64_t>{0, 1, 2, 4, 6, 7});

  CHECK_THROWS_AS(build_context(0), std::invalid_argument);
  ContextLimits tight;
  tight.max_cardinality = 10;
  CHECK_THROWS_AS(build_context(1000003, tight), ResourceError);
}

TEST_CASE("build_context agrees with the exponent double loop for m <= 10^4") {
  for (std::uint64_t m = 1; m <= 10000; ++m) {
    const auto ctx = build_context(m);
    const auto lambda = ctx.lambda->get_ui();
    const auto im = oracle::images(m, static_cast<unsigned>(4 * lambda + 8));
    REQUIRE_MESSAGE(ctx.all64 == im.all, "m = " << m);
    REQUIRE(ctx.twos64 == im.twos);
    REQUIRE(ctx.threes64 == im.threes);
  }
}

TEST_CASE("closure under negation, doubling and tripling") {
  for (std::uint64_t m : {7ULL, 24ULL, 97ULL, 1000ULL, 4096ULL, 1099511627760ULL}) {
    const auto ctx = build_context(m);
    for (auto x : ctx.all) {
      CHECK(ctx.contains((ctx.m - x) % ctx.m));
      CHECK(ctx.contains(x * 2 % ctx.m));
      CHECK(ctx.contains(x * 3 % ctx.m));
    }
    for (auto x : ctx.twos) CHECK(ctx.contains_two_power((ctx.m - x) % ctx.m));
    for (auto x : ctx.threes) CHECK(ctx.contains_three_power((ctx.m - x) % ctx.m));
  }
}

TEST_CASE("carmichael") {
  CHECK(carmichael(5) == 4);
  CHECK(carmichael(24) == 2);
  CHECK(carmichael(1) == 1);
  for (std::uint64_t m = 1; m <= 2000; ++m) REQUIRE_MESSAGE(carmichael(m) == oracle::carmichael(m), "m = " << m);
  CHECK(factorize(BigInt("1811941545963463911360")).size() > 3);
}

TEST_CASE("t(m) against lambda for squarefree m") {
  for (std::uint64_t m = 2; m <= 5000; ++m) {
    if (!squarefree(m)) continue;
    const auto ctx = build_context(m);
    const BigInt l = *ctx.lambda;
    REQUIRE_MESSAGE(BigInt(ctx.t()) <= 2 * (l + 1) * (l + 1), "m = " << m);
    if (l >= 4) REQUIRE(BigInt(ctx.t()) < l * l * l);
  }
}

TEST_CASE("densities") {
  const auto c5 = build_context(5);
  const auto d = density_D(c5, 2);
  CHECK(d.clamped);
  CHECK(d.exact == 1);
  CHECK(density_D(build_context(1), 3).exact == 1);
  CHECK(density_dp(build_context(1), 4).exact == 1);

  // 39312 is the first m with D_2 < 1 (found by a one-off scan).
  {
    const auto ctx = build_context(39312);
    const auto est = density_D(ctx, 2);
    CHECK_FALSE(est.clamped);
    mpq_class expect(binom(ctx.t() + 1, 2), mpz_class(39312));
    expect.canonicalize();
    CHECK(expect < 1);
    CHECK(est.exact == expect);
    CHECK(est.ln() == doctest::Approx(std::log(expect.get_d())));
    CHECK(density_D(build_context(39311), 2).clamped);
  }

  for (std::uint64_t m : {97ULL, 1000ULL, 1099511627760ULL}) {
    const auto ctx = build_context(m);
    for (int r = 2; r < 6; ++r) {
      mpq_class lo(binom(ctx.t() + r - 1, r), mpz_class(std::to_string(m)));
      mpq_class hi(binom(ctx.t() + r, r + 1), mpz_class(std::to_string(m)));
      CHECK(lo <= hi);
      CHECK(density_D(ctx, r).exact <= density_D(ctx, r + 1).exact);
    }
  }
}

TEST_CASE("work factor formula") {
  // odd r = 2u+1: (u t2 t3 + t) t^(u-1) / u!; even r = 2u: (t2 + t3) t^(u-1) / (u-1)!
  CHECK(work_factor(10, 3, 4, 3).exact == 1 * 3 * 4 + 10);
  CHECK(work_factor(10, 3, 4, 5).exact == (2 * 3 * 4 + 10) * 10 / 2);
  CHECK(work_factor(10, 3, 4, 2).exact == 7);
  CHECK(work_factor(10, 3, 4, 6).exact == 350);
}

TEST_CASE("exponent recipe") {
  const auto r22 = exponent_recipe(2, 2);
  CHECK(r22.x == 1);
  CHECK(r22.y == 3);
  CHECK(r22.u == 1);
  CHECK(r22.v == 1);
  CHECK(r22.m == 24);
  CHECK_THROWS_AS(exponent_recipe(0, 3), std::invalid_argument);

  for (unsigned a = 1; a <= 48; ++a) {
    for (unsigned b = 1; b <= 48; ++b) {
      const auto rc = exponent_recipe(a, b);
      BigInt two_a, three_b, p3x, p2y;
      mpz_ui_pow_ui(two_a.get_mpz_t(), 2, a);
      mpz_ui_pow_ui(three_b.get_mpz_t(), 3, b);
      mpz_ui_pow_ui(p3x.get_mpz_t(), 3, rc.x);
      mpz_ui_pow_ui(p2y.get_mpz_t(), 2, rc.y);
      REQUIRE(two_a - 1 == p3x * rc.u);
      REQUIRE(rc.u % 3 != 0);
      REQUIRE(three_b - 1 == p2y * rc.v);
      REQUIRE(rc.v % 2 != 0);
      REQUIRE(rc.g == gcd(rc.u, rc.v));
      REQUIRE(rc.m == p2y * p3x * rc.g);
    }
  }
}

TEST_CASE("reference table rows") {
  for (const auto& row : reference::kTable) {
    const auto p = modulus_from_exponents(row.a, row.b);
    CHECK(p.m == BigInt(row.m));
    for (int r = 2; r <= 5; ++r) {
      CHECK(std::abs(p.ln_d.at(r) - row.ln_d[r - 2]) <= 0.005 + 1e-9);
      CHECK(p.d_clamped.at(r) == std::isnan(row.ln_w[r - 2]));
      if (!std::isnan(row.ln_w[r - 2])) CHECK(std::abs(p.ln_w.at(r) - row.ln_w[r - 2]) <= 0.005 + 1e-9);
    }
  }
}

TEST_CASE("non-representable residues") {
  CHECK(non_representable_residues(build_context(5), 2).empty());
  CHECK(non_representable_residues(build_context(1), 3).empty());

  for (std::uint64_t m = 1; m < 5000; ++m) {
    const auto ctx = build_context(m);
    const auto got = non_representable_residues(ctx, 2);
    if (got.empty()) continue;
    std::vector<char> hit(m, 0);
    for (auto x : ctx.all64) {
      for (auto y : ctx.all64) hit[(x + y) % m] = 1;
    }
    std::vector<u128> expect;
    for (std::uint64_t z = 0; z < m; ++z) {
      if (!hit[z]) expect.push_back(z);
    }
    CHECK(got == expect);
    MESSAGE("first modulus with a gap at r = 2: " << m);
    break;
  }
  CHECK_THROWS_AS(non_representable_residues(build_context(BigInt("1099511627760")), 2), ResourceError);
}

TEST_CASE("profile json carries big values as strings") {
  const auto j = to_json(modulus_from_exponents(144, 432));
  CHECK(j.at("m").get<std::string>() == "1811941545963463911360");
}
