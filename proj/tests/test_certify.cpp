#include <doctest.h>

#include <random>

#include "dbns/certify.hpp"
#include "dbns/errors.hpp"

using namespace dbns;
using nlohmann::json;

namespace {

const StrategyPool& pool() {
  static const StrategyPool p = StrategyPool::table1();
  return p;
}

bool verifies(const json& j) {
  try {
    return verify_certificate(certificate_from_json(j)).ok;
  } catch (const MalformedCertificate&) {
    return false;
  }
}

// First node in preorder satisfying pred, as a JSON pointer.
template <class Pred>
std::optional<json::json_pointer> find_node(const json& node, const json::json_pointer& at, Pred pred) {
  if (pred(node)) return at;
  const auto& children = node.at("children");
  for (std::size_t i = 0; i < children.size(); ++i) {
    auto hit = find_node(children[i].at("node"), at / "children" / i / "node", pred);
    if (hit) return hit;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("table pool") {
  const auto& p = pool();
  CHECK(p.entries().size() == 6);
  CHECK(p.entries()[0].m == BigInt("1811941545963463911360"));
  CHECK(*p.entries()[0].lift_divisor == 408);
  const auto s5 = p.strategies(5);
  REQUIRE(s5.size() == 1);
  CHECK(s5[0].lifted);
  const auto s2 = p.strategies(2);
  CHECK(s2.size() == 6);
  for (std::size_t i = 1; i < s2.size(); ++i) CHECK(s2[i - 1].ln_w <= s2[i].ln_w);
  const auto back = StrategyPool::from_json(p.to_json());
  CHECK(back.labels() == p.labels());
  CHECK_THROWS(StrategyPool::from_json(json::parse(R"({"moduli":[{"a":0,"b":3}]})")));
}

TEST_CASE("lift agrees with direct refutation on a toy pair") {
  const auto c8 = build_context(8);
  const auto c24 = build_context(24);
  for (int n = 0; n < 48; ++n) {
    const bool direct = dp_refute_direct(c24, n, 2);
    const auto lifted = lift_refute(n, 2, c8, c24);
    CHECK_MESSAGE(lifted.has_value() == direct, "n = " << n);
  }
  CHECK_THROWS_AS(lift_refute(1, 2, BigInt(7), BigInt(24)), std::invalid_argument);
}

TEST_CASE("refute_length small cases") {
  const auto c103 = refute_length(103, 2, pool());
  REQUIRE(c103.has_value());
  CHECK(verify_certificate(*c103).ok);
  CHECK_FALSE(refute_length(5, 2, pool()).has_value());
  CHECK_FALSE(refute_length(103, 3, pool()).has_value());
  const auto c7 = refute_length(7, 1, pool());
  REQUIRE(c7.has_value());
  CHECK(c7->root->kind == CertNode::Kind::NoLength1);
  CHECK(refute_length(6, 0, pool())->root->kind == CertNode::Kind::NoLength0);
  CHECK_FALSE(refute_length(6, 1, pool()).has_value());
}

TEST_CASE("certificate for 4985 at length 3") {
  const auto cert = refute_length(4985, 3, pool());
  REQUIRE(cert.has_value());
  const auto j = to_json(*cert);
  CHECK(j.at("format") == kCertificateFormat);
  CHECK(j.at("n") == "4985");
  CHECK(verifies(json::parse(j.dump())));
}

TEST_CASE("tampered certificates are rejected") {
  const auto cert = refute_length(103, 2, pool());
  REQUIRE(cert.has_value());
  const json good = to_json(*cert);
  REQUIRE(verifies(good));

  SUBCASE("modulus changed") {
    json bad = good;
    const auto at = find_node(bad.at("root"), json::json_pointer("/root"),
                              [](const json& n) { return n.at("kind") == "no_dp"; });
    REQUIRE(at.has_value());
    bad[*at]["m"] = "1000";
    CHECK_FALSE(verifies(bad));
  }
  SUBCASE("divisor child deleted") {
    // 103 has no {2,3}-divisor, so use a target with one.
    const auto c = refute_length(412, 2, pool());
    REQUIRE(c.has_value());
    json bad = to_json(*c);
    REQUIRE(verifies(bad));
    auto& kids = bad["root"]["children"];
    const auto before = kids.size();
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (kids[i].at("role") == "divisor") {
        kids.erase(i);
        break;
      }
    }
    REQUIRE(kids.size() + 1 == before);
    CHECK_FALSE(verifies(bad));
  }
  SUBCASE("target changed") {
    json bad = good;
    bad["n"] = "5";
    bad["root"]["n"] = "5";
    CHECK_FALSE(verifies(bad));
  }
  SUBCASE("structure broken") {
    json bad = good;
    bad["root"]["children"] = 3;
    CHECK_THROWS_AS(certificate_from_json(bad), MalformedCertificate);
    json worse = good;
    worse.erase("root");
    CHECK_THROWS_AS(certificate_from_json(worse), MalformedCertificate);
  }
  SUBCASE("metadata is ignored") {
    json other = good;
    other["metadata"]["created"] = "1970-01-01T00:00:00Z";
    other["metadata"]["elapsed_seconds"] = 99;
    CHECK(verifies(other));
  }
}

TEST_CASE("refutation soundness on constructed representations") {
  std::mt19937_64 rng(5);
  int tried = 0;
  while (tried < 300) {
    const int r = 2 + static_cast<int>(rng() % 2);
    std::int64_t n = 0;
    for (int i = 0; i < r; ++i) {
      std::int64_t v = 1;
      for (auto k = rng() % 12; k > 0; --k) v *= 2;
      for (auto k = rng() % 8; k > 0; --k) v *= 3;
      n += (rng() & 1) ? v : -v;
    }
    if (n <= 0 || n > 100000) continue;
    ++tried;
    REQUIRE_MESSAGE(!refute_length(n, r, pool()).has_value(), "n = " << n << " r = " << r);
  }
}

TEST_CASE("span_exact") {
  const auto s103 = span_exact(103, pool());
  CHECK(s103.span == 3);
  CHECK(s103.status == SpanStatus::Proved);
  CHECK(s103.witness.to_string() == "103 = 54 + 48 + 1");

  const auto s6 = span_exact(6, pool());
  CHECK(s6.span == 1);
  CHECK(s6.status == SpanStatus::Proved);

  const auto s0 = span_exact(0, pool());
  CHECK(s0.span == 2);
  CHECK(s0.status == SpanStatus::ByConvention);

  const auto neg = span_exact(-103, pool());
  CHECK(neg.span == 3);
  CHECK(neg.status == SpanStatus::Proved);
  CHECK(neg.witness.target == -103);

  const auto j = s103.to_json();
  CHECK(j.at("status") == "proved");
  CHECK(j.at("span") == 3);
}
