#include <doctest.h>

#include <algorithm>

#include "dbns/certify.hpp"
#include "dbns/intersect.hpp"
#include "dbns/modular.hpp"
#include "oracles.hpp"

using namespace dbns;

namespace {

unsigned exponent_range(const ModContext& ctx) { return static_cast<unsigned>(4 * ctx.lambda->get_ui() + 8); }

}  // namespace

TEST_CASE("direct refutation matches the nested-loop oracle, m <= 300, r in {2, 3}") {
  for (std::uint64_t m = 1; m <= 300; ++m) {
    const auto ctx = build_context(m);
    const auto im = oracle::images(m, exponent_range(ctx));
    for (int r = 2; r <= 3; ++r) {
      const auto reach = oracle::dp_reach(im, m, r);
      for (std::uint64_t x = 0; x < m; ++x) {
        REQUIRE_MESSAGE(dp_intersection_empty(ctx, x, r) == !reach[x], "m = " << m << " r = " << r << " x = " << x);
      }
    }
  }
}

TEST_CASE("enumeration counts match the nested-loop oracle, m <= 500") {
  // Output size grows like t2 t3 t, so above m = 60 only a few residues
  // per modulus are enumerated.
  for (std::uint64_t m = 1; m <= 500; ++m) {
    const auto ctx = build_context(m);
    const auto im = oracle::images(m, exponent_range(ctx));
    std::vector<std::size_t> c2(m, 0), c3(m, 0);
    for (auto a : im.twos) {
      for (auto b : im.threes) {
        ++c2[(a + b) % m];
        for (auto c : im.all) ++c3[(a + b + c) % m];
      }
    }
    std::vector<std::uint64_t> residues;
    if (m <= 60) {
      for (std::uint64_t x = 0; x < m; ++x) residues.push_back(x);
    } else {
      residues = {0, 1, 5, 2 * m / 3};
    }
    for (auto x : residues) {
      const auto s2 = dp_solutions(ctx, x, 2);
      const auto s3 = dp_solutions(ctx, x, 3);
      REQUIRE_MESSAGE(s2.size() == c2[x], "m = " << m << " x = " << x);
      REQUIRE_MESSAGE(s3.size() == c3[x], "m = " << m << " x = " << x);
      REQUIRE(s2.empty() == dp_intersection_empty(ctx, x, 2));
      REQUIRE(s3.empty() == dp_intersection_empty(ctx, x, 3));
      const bool sums_ok = std::all_of(s3.begin(), s3.end(), [&](const DpTuple& t) { return (t[0] + t[1] + t[2]) % m == x; });
      REQUIRE(sums_ok);
    }
  }
}

TEST_CASE("length 4 enumeration keeps the tail sorted and duplicate-free") {
  const auto ctx = build_context(97);
  const auto im = oracle::images(97, exponent_range(ctx));
  std::size_t expect = 0;
  for (auto a : im.twos) {
    for (auto b : im.threes) {
      for (std::size_t i = 0; i < im.all.size(); ++i) {
        for (std::size_t j = i; j < im.all.size(); ++j) expect += (a + b + im.all[i] + im.all[j]) % 97 == 11;
      }
    }
  }
  const auto sols = dp_solutions(ctx, 11, 4);
  CHECK(sols.size() == expect);
  for (const auto& t : sols) CHECK(t[2] <= t[3]);
  CHECK(std::adjacent_find(sols.begin(), sols.end()) == sols.end());
}

TEST_CASE("small memory budget forces many buckets with the same answer") {
  const auto ctx = build_context(BigInt("1099511627760"));
  EngineOptions wide, narrow;
  narrow.slice_target = 64;
  EngineStats s1, s2;
  const auto a = dp_solutions(ctx, 4985, 3, wide, &s1);
  const auto b = dp_solutions(ctx, 4985, 3, narrow, &s2);
  CHECK(a == b);
  CHECK(s2.buckets > s1.buckets);
}

TEST_CASE("known residues") {
  const auto big = build_context(BigInt("1099511627760"));
  CHECK(dp_refute_direct(big, 103, 2));
  CHECK_FALSE(dp_refute_direct(big, 5, 2));
  const auto c1000 = build_context(1000);
  const auto sols = dp_enumerate(c1000, 5, 2);
  CHECK(std::find(sols.begin(), sols.end(), DpTuple{2, 3}) != sols.end());
}

TEST_CASE("half sizes follow the split") {
  const auto ctx = build_context(97);
  const auto [h1, h2] = half_sizes(ctx, 3);
  CHECK(h1 == ctx.t2() * ctx.t3());
  CHECK(h2 == ctx.t());
  const auto [e1, e2] = half_sizes(ctx, 4);
  CHECK(e1 == ctx.t2() * ctx.t());
  CHECK(e2 == ctx.t3() * ctx.t());
}
