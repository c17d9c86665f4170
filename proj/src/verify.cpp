// Certificate checking. The modular leaves are recomputed with a reference
// intersection that shares nothing with the engine in intersect.cpp: the
// residue range is cut into slices, both halves of each slice are generated
// by binary search over the free factor, sorted, and merged.

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "dbns/certify.hpp"
#include "dbns/errors.hpp"

namespace dbns {
namespace {

enum Role { Two, Three, Any };

struct HalfSpec {
  std::vector<Role> roles;  // last role is the free factor
};

std::pair<HalfSpec, HalfSpec> difference_split(int r) {
  HalfSpec a, b;
  const int u = r / 2;
  if (r % 2 == 1) {
    a.roles = {Two, Three};
    a.roles.insert(a.roles.end(), u - 1, Any);
    b.roles.assign(u, Any);
  } else {
    a.roles = {Two};
    a.roles.insert(a.roles.end(), u - 1, Any);
    b.roles = {Three};
    b.roles.insert(b.roles.end(), u - 1, Any);
  }
  return {a, b};
}

class Reference {
 public:
  Reference(const ModContext& ctx, std::uint64_t residue, int r, std::size_t memory_budget)
      : ctx_(ctx), m_(static_cast<std::uint64_t>(ctx.m)), residue_(residue) {
    auto [a, b] = difference_split(r);
    halves_[0] = make_half(a, false);
    halves_[1] = make_half(b, true);
    slice_cap_ = std::max<std::size_t>(memory_budget / 32, std::size_t{1} << 16);
  }

  // Sorted, duplicate-free solution tuples; stops at the first common value
  // when `first_only` (the result is then nonempty but partial).
  std::vector<DpTuple> solve(bool first_only) {
    const u128 biggest = std::max(halves_[0].total, halves_[1].total);
    const u128 slices = std::max<u128>(1, (biggest + slice_cap_ - 1) / slice_cap_);
    std::set<DpTuple> found;
    std::vector<std::uint64_t> va, vb, common;
    for (u128 k = 0; k < slices; ++k) {
      const std::uint64_t lo = static_cast<std::uint64_t>(static_cast<u128>(m_) * k / slices);
      const std::uint64_t hi = static_cast<std::uint64_t>(static_cast<u128>(m_) * (k + 1) / slices);
      if (lo == hi) continue;
      generate(halves_[0], lo, hi, va);
      generate(halves_[1], lo, hi, vb);
      common.clear();
      std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(common));
      for (auto c : common) {
        expand(c, found);
        if (first_only) return {found.begin(), found.end()};
      }
    }
    return {found.begin(), found.end()};
  }

 private:
  struct Half {
    HalfSpec spec;
    bool negated = false;
    std::size_t width = 0;                  // factors per base
    std::vector<std::uint64_t> base_value;  // sum of the base factors mod m
    std::vector<std::uint32_t> base_parts;  // width indices per base
    u128 total = 0;
  };

  const std::vector<std::uint64_t>& set_for(Role role) const {
    return role == Two ? ctx_.twos64 : role == Three ? ctx_.threes64 : ctx_.all64;
  }

  std::uint64_t add(std::uint64_t x, std::uint64_t y) const {
    return static_cast<std::uint64_t>((static_cast<u128>(x) + y) % m_);
  }
  std::uint64_t sub(std::uint64_t x, std::uint64_t y) const { return add(x, m_ - y % m_); }

  // Any-role factors are nondecreasing in index; this is the first index
  // the free factor may take.
  std::size_t free_start(const Half& h, std::size_t base) const {
    const Role free = h.spec.roles.back();
    if (free != Any) return 0;
    for (std::size_t i = h.width; i-- > 0;) {
      if (h.spec.roles[i] == Any) return h.base_parts[base * h.width + i];
    }
    return 0;
  }

  Half make_half(const HalfSpec& spec, bool negated) const {
    Half h;
    h.spec = spec;
    h.negated = negated;
    h.width = spec.roles.size() - 1;
    std::vector<std::uint32_t> parts(h.width);
    auto rec = [&](auto&& self, std::size_t pos, std::uint64_t value, std::uint32_t min_any) -> void {
      if (pos == h.width) {
        h.base_value.push_back(value);
        h.base_parts.insert(h.base_parts.end(), parts.begin(), parts.end());
        return;
      }
      const auto& set = set_for(spec.roles[pos]);
      const std::uint32_t start = spec.roles[pos] == Any ? min_any : 0;
      for (std::uint32_t i = start; i < set.size(); ++i) {
        parts[pos] = i;
        self(self, pos + 1, add(value, set[i]), spec.roles[pos] == Any ? i : min_any);
      }
    };
    rec(rec, 0, 0, 0);
    if (h.base_value.size() > (std::size_t{1} << 31)) throw ResourceError("reference: too many bases");
    const auto& free = set_for(spec.roles.back());
    for (std::size_t b = 0; b < h.base_value.size(); ++b) h.total += free.size() - free_start(h, b);
    return h;
  }

  // Values of the half that fall in [lo, hi), sorted and unique.
  void generate(const Half& h, std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& out) const {
    out.clear();
    const auto& free = set_for(h.spec.roles.back());
    for (std::size_t b = 0; b < h.base_value.size(); ++b) {
      const std::uint64_t v = h.base_value[b];
      // z ranges over a circular window of length hi - lo starting at s.
      const std::uint64_t s = h.negated ? sub(sub(residue_, v), hi - 1) : sub(lo, v);
      const std::uint64_t len = hi - lo;
      auto first = free.begin() + static_cast<std::ptrdiff_t>(free_start(h, b));
      auto emit = [&](std::uint64_t a, std::uint64_t e) {  // z in [a, e)
        for (auto it = std::lower_bound(first, free.end(), a); it != free.end() && *it < e; ++it) {
          out.push_back(h.negated ? sub(sub(residue_, v), *it) : add(v, *it));
        }
      };
      if (s + len <= m_) {
        emit(s, s + len);
      } else {
        emit(s, m_);
        emit(0, len - (m_ - s));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  // Components (as residues, in role order) of every way the half reaches c.
  std::vector<std::vector<std::uint64_t>> parts_reaching(const Half& h, std::uint64_t c) const {
    std::vector<std::vector<std::uint64_t>> out;
    const auto& free = set_for(h.spec.roles.back());
    for (std::size_t b = 0; b < h.base_value.size(); ++b) {
      const std::uint64_t z = h.negated ? sub(sub(residue_, h.base_value[b]), c) : sub(c, h.base_value[b]);
      auto first = free.begin() + static_cast<std::ptrdiff_t>(free_start(h, b));
      if (!std::binary_search(first, free.end(), z)) continue;
      std::vector<std::uint64_t> comps;
      for (std::size_t i = 0; i < h.width; ++i) comps.push_back(set_for(h.spec.roles[i])[h.base_parts[b * h.width + i]]);
      comps.push_back(z);
      out.push_back(std::move(comps));
    }
    return out;
  }

  void expand(std::uint64_t c, std::set<DpTuple>& found) const {
    const auto as = parts_reaching(halves_[0], c);
    const auto bs = parts_reaching(halves_[1], c);
    for (const auto& a : as) {
      for (const auto& b : bs) {
        std::uint64_t two = 0, three = 0;
        std::vector<std::uint64_t> tail;
        auto take = [&](const Half& h, const std::vector<std::uint64_t>& comps) {
          for (std::size_t i = 0; i < comps.size(); ++i) {
            switch (h.spec.roles[i]) {
              case Two: two = comps[i]; break;
              case Three: three = comps[i]; break;
              case Any: tail.push_back(comps[i]); break;
            }
          }
        };
        take(halves_[0], a);
        take(halves_[1], b);
        std::sort(tail.begin(), tail.end());
        DpTuple t{two, three};
        t.insert(t.end(), tail.begin(), tail.end());
        found.insert(std::move(t));
      }
    }
  }

  const ModContext& ctx_;
  std::uint64_t m_;
  std::uint64_t residue_;
  Half halves_[2];
  std::size_t slice_cap_ = 0;
};

class Verifier {
 public:
  explicit Verifier(const EngineOptions& opts) : opts_(opts) {}

  void full(const CertNode& node, const BigInt& n, int r, const std::string& path) {
    expect_target(node, n, r, path);
    if (r == 0) {
      expect_kind(node, CertNode::Kind::NoLength0, path);
      expect_no_children(node, path);
      return;
    }
    if (r == 1) {
      expect_kind(node, CertNode::Kind::NoLength1, path);
      expect_no_children(node, path);
      if (canonicalize(n)) fail(path, n.get_str() + " is a {2,3}-integer");
      ++report.leaves_checked;
      return;
    }
    expect_kind(node, CertNode::Kind::CaseSplit, path);
    if (n < 1) fail(path, "case split target must be positive");

    std::vector<BigInt> divisors = smooth_divisors(n);
    std::set<std::string> seen_divisors;
    bool dp = false, plus = false, minus = false;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& c = node.children[i];
      const std::string cp = path + "/children/" + std::to_string(i) + "/node";
      if (!c.node) fail(cp, "missing node");
      if (c.role == "dp") {
        once(dp, path, "dp");
        no_dp(*c.node, n, r, cp);
      } else if (c.role == "plus" || c.role == "minus") {
        once(c.role == "plus" ? plus : minus, path, c.role);
        neighbour(*c.node, n, r, c.role == "plus" ? 1 : -1, cp);
      } else if (c.role == "divisor") {
        if (std::find(divisors.begin(), divisors.end(), c.d) == divisors.end()) {
          fail(cp, c.d.get_str() + " is not a {2,3}-divisor > 1 of " + n.get_str());
        }
        if (!seen_divisors.insert(c.d.get_str()).second) fail(cp, "divisor " + c.d.get_str() + " repeated");
        primitive(*c.node, n / c.d, r, cp);
      } else {
        fail(cp, "unknown role '" + c.role + "'");
      }
    }
    if (!dp || !plus || !minus) fail(path, "missing dp, plus or minus case");
    if (seen_divisors.size() != divisors.size()) {
      for (const auto& d : divisors) {
        if (!seen_divisors.count(d.get_str())) fail(path, "no case for divisor " + d.get_str());
      }
    }
  }

  struct Failure {
    std::string path, reason;
  };

  VerifyReport report;

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& why) { throw Failure{path, why}; }

  static void expect_target(const CertNode& node, const BigInt& n, int r, const std::string& path) {
    if (node.n != n || node.r != r) {
      fail(path, "node is for (" + node.n.get_str() + ", " + std::to_string(node.r) + "), expected (" + n.get_str() +
                     ", " + std::to_string(r) + ")");
    }
  }
  static void expect_kind(const CertNode& node, CertNode::Kind k, const std::string& path) {
    if (node.kind != k) fail(path, std::string("expected ") + to_string(k) + ", found " + to_string(node.kind));
  }
  static void expect_no_children(const CertNode& node, const std::string& path) {
    if (!node.children.empty()) fail(path, "leaf has children");
  }
  static void once(bool& flag, const std::string& path, const std::string& role) {
    if (flag) fail(path, "role '" + role + "' appears twice");
    flag = true;
  }

  static std::vector<BigInt> smooth_divisors(const BigInt& n) {
    std::vector<BigInt> out;
    for (BigInt p3 = 1; n % p3 == 0; p3 *= 3) {
      for (BigInt d = p3; n % d == 0; d *= 2) {
        if (d > 1) out.push_back(d);
      }
    }
    return out;
  }

  void neighbour(const CertNode& node, const BigInt& n, int r, int sign, const std::string& path) {
    const BigInt shifted = n + sign;
    if (shifted % 6 == 0) {
      full(node, shifted / 6, r - 1, path);
      return;
    }
    expect_kind(node, CertNode::Kind::Vacuous, path);
    expect_target(node, shifted, r - 1, path);
    expect_no_children(node, path);
  }

  void primitive(const CertNode& node, const BigInt& n, int r, const std::string& path) {
    expect_target(node, n, r, path);
    expect_kind(node, CertNode::Kind::PrimitiveSplit, path);
    bool dp = false, plus = false, minus = false;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& c = node.children[i];
      const std::string cp = path + "/children/" + std::to_string(i) + "/node";
      if (!c.node) fail(cp, "missing node");
      if (c.role == "dp") {
        once(dp, path, "dp");
        no_dp(*c.node, n, r, cp);
      } else if (c.role == "plus" || c.role == "minus") {
        once(c.role == "plus" ? plus : minus, path, c.role);
        neighbour(*c.node, n, r, c.role == "plus" ? 1 : -1, cp);
      } else {
        fail(cp, "role '" + c.role + "' not allowed under a primitive split");
      }
    }
    if (!dp || !plus || !minus) fail(path, "missing dp, plus or minus case");
  }

  const ModContext& context(const BigInt& m) {
    auto& slot = contexts_[m.get_str()];
    if (!slot) slot = std::make_unique<ModContext>(build_context(m));
    return *slot;
  }

  void no_dp(const CertNode& node, const BigInt& n, int r, const std::string& path) {
    expect_target(node, n, r, path);
    expect_kind(node, CertNode::Kind::NoDp, path);
    expect_no_children(node, path);
    if (!node.dp) fail(path, "missing refutation");
    const DpRefutation& dp = *node.dp;
    if (dp.n != n || dp.r != r) fail(path, "refutation is for a different target");
    if (r < 2 || r > kMaxDpLength) fail(path, "unsupported length " + std::to_string(r));

    const std::string key = n.get_str() + "|" + std::to_string(r) + "|" + dp.m.get_str() + "|" + dp.m0.get_str() +
                            (dp.mode == DpRefutation::Mode::Lifted ? "|lift" : "|direct");
    if (checked_.count(key)) return;

    const BigInt word_bound = from_u128(kWordModulusBound);
    if (dp.mode == DpRefutation::Mode::Direct) {
      if (dp.m < 1 || dp.m >= word_bound) fail(path, "direct modulus must be in [1, 2^63)");
      const ModContext& ctx = context(dp.m);
      const auto residue = static_cast<std::uint64_t>(mod_u128(n, ctx.m));
      if (!Reference(ctx, residue, r, opts_.memory_budget).solve(true).empty()) {
        fail(path, "residue " + std::to_string(residue) + " has a doubly-primitive representation mod " +
                       dp.m.get_str());
      }
    } else {
      if (dp.m0 < 1 || dp.m0 >= word_bound) fail(path, "m0 must be in [1, 2^63)");
      if (dp.m < 1 || dp.m % dp.m0 != 0) fail(path, "m0 does not divide m");
      if (dp.m / dp.m0 > (1u << 20)) fail(path, "m / m0 too large");
      if (dp.tuples.size() != dp.fiber_sizes.size()) fail(path, "fiber sizes missing");
      const ModContext& ctx0 = context(dp.m0);
      const ModContext& ctx = context(dp.m);
      const auto residue0 = static_cast<std::uint64_t>(mod_u128(n, ctx0.m));
      const auto expected = Reference(ctx0, residue0, r, opts_.memory_budget).solve(false);
      std::vector<DpTuple> listed = dp.tuples;
      std::sort(listed.begin(), listed.end());
      if (listed != expected) {
        fail(path, "listed tuples mod m0 differ from the recomputed set (" + std::to_string(expected.size()) +
                       " tuples)");
      }
      for (std::size_t i = 0; i < dp.tuples.size(); ++i) {
        check_no_lift(ctx0, ctx, n, dp.tuples[i], dp.fiber_sizes[i], path + "/tuples/" + std::to_string(i));
      }
    }
    checked_.insert(key);
    ++report.leaves_checked;
  }

  void check_no_lift(const ModContext& ctx0, const ModContext& ctx, const BigInt& n, const DpTuple& t,
                     const std::vector<std::uint32_t>& sizes, const std::string& path) {
    const u128 m0 = ctx0.m;
    const std::uint32_t q = static_cast<std::uint32_t>(ctx.m / m0);
    if (sizes.size() != t.size()) fail(path, "fiber sizes do not match the tuple");
    // reach[s]: some choice of lifts so far has offsets summing to s mod q.
    std::vector<bool> reach(q, false);
    reach[0] = true;
    BigInt total = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= m0) fail(path, "residue out of range");
      std::vector<std::uint32_t> ks;
      for (std::uint32_t k = 0; k < q; ++k) {
        const u128 y = t[i] + static_cast<u128>(k) * m0;
        const bool in = i == 0 ? ctx.contains_two_power(y) : i == 1 ? ctx.contains_three_power(y) : ctx.contains(y);
        if (in) ks.push_back(k);
      }
      if (ks.size() != sizes[i]) fail(path, "recorded fiber size differs");
      std::vector<bool> next(q, false);
      for (std::uint32_t s = 0; s < q; ++s) {
        if (!reach[s]) continue;
        for (auto k : ks) next[(s + k) % q] = true;
      }
      reach = std::move(next);
      total += from_u128(t[i]);
    }
    // A lift sums to total + m0 * s; it represents n mod m iff that is n.
    const BigInt m0b = from_u128(m0), mb = from_u128(ctx.m);
    BigInt diff = n - total;
    diff %= mb;
    if (diff < 0) diff += mb;
    if (diff % m0b != 0) fail(path, "tuple does not sum to n mod m0");
    const BigInt need = (diff / m0b) % q;
    if (reach[need.get_ui()]) fail(path, "tuple lifts to a representation mod m");
  }


  const EngineOptions& opts_;
  std::map<std::string, std::unique_ptr<ModContext>> contexts_;
  std::set<std::string> checked_;
};

}  // namespace

VerifyReport verify_certificate(const Certificate& cert, const EngineOptions& opts) {
  Verifier v(opts);
  try {
    if (!cert.root) return {false, "/root", "certificate has no root", 0};
    if (cert.n < 0) return {false, "/n", "target must be nonnegative", 0};
    v.full(*cert.root, cert.n, cert.r, "/root");
  } catch (const Verifier::Failure& f) {
    v.report.ok = false;
    v.report.path = f.path;
    v.report.reason = f.reason;
    return v.report;
  } catch (const Error& e) {
    v.report.ok = false;
    v.report.path = "/root";
    v.report.reason = e.what();
    return v.report;
  }
  v.report.ok = true;
  return v.report;
}

}  // namespace dbns
