#include "dbns/certify.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "dbns/errors.hpp"

namespace dbns {

struct StrategyPool::Cache {
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const ModContext>> contexts;
};

namespace {

struct Table1Row {
  unsigned a, b;
  unsigned lift_divisor;  // 0: none
};

constexpr Table1Row kTable1[] = {
    {144, 432, 408}, {288, 144, 0}, {144, 144, 0}, {72, 216, 0}, {144, 48, 0}, {36, 108, 0},
};

BigInt json_bigint(const nlohmann::json& j, const char* what) {
  if (j.is_string()) return parse_bigint(j.get<std::string>());
  if (j.is_number_unsigned()) return BigInt(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return BigInt(std::to_string(j.get<std::int64_t>()));
  throw std::invalid_argument(std::string("pool: ") + what + " must be an integer or decimal string");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// {2,3}-integers d > 1 dividing n (n >= 1), ascending.
std::vector<BigInt> smooth_divisors(const BigInt& n) {
  BigInt rest = n;
  unsigned v2 = static_cast<unsigned>(mpz_scan1(n.get_mpz_t(), 0));
  rest >>= v2;
  unsigned v3 = 0;
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 3)) {
    mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), 3);
    ++v3;
  }
  std::vector<BigInt> out;
  BigInt p3 = 1;
  for (unsigned j = 0; j <= v3; ++j, p3 *= 3) {
    for (unsigned i = 0; i <= v2; ++i) {
      BigInt d = p3 << i;
      if (d > 1) out.push_back(d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Offsets k in [0, q) with x + k*m0 in the set, for each x in `wanted`.
std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> fiber_index(const std::vector<u128>& set, u128 m0,
                                                                          const std::vector<std::uint64_t>& wanted) {
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> out;
  for (auto x : wanted) out.emplace(x, std::vector<std::uint32_t>{});
  for (u128 y : set) {
    auto it = out.find(static_cast<std::uint64_t>(y % m0));
    if (it != out.end()) it->second.push_back(static_cast<std::uint32_t>(y / m0));
  }
  return out;
}

}  // namespace

StrategyPool::StrategyPool() : cache_(std::make_shared<Cache>()) {}

StrategyPool::StrategyPool(std::vector<PoolEntry> entries, ContextLimits limits)
    : entries_(std::move(entries)), limits_(limits), cache_(std::make_shared<Cache>()) {
  for (auto& e : entries_) {
    if (e.m < 1) throw std::invalid_argument("pool: modulus must be positive");
    if (e.label.empty()) {
      e.label = e.a ? "(" + std::to_string(e.a) + "," + std::to_string(e.b) + ")" : "m=" + e.m.get_str();
    }
    if (e.lift_divisor) {
      const BigInt& q = *e.lift_divisor;
      if (q < 1 || e.m % q != 0) {
        throw std::invalid_argument("pool: lift divisor of " + e.label + " does not divide m");
      }
      if (e.m / q >= from_u128(kWordModulusBound)) {
        throw std::invalid_argument("pool: m / lift divisor of " + e.label + " is not below 2^63");
      }
    }
  }
}

StrategyPool StrategyPool::table1() {
  std::vector<PoolEntry> entries;
  for (const auto& row : kTable1) {
    PoolEntry e;
    e.a = row.a;
    e.b = row.b;
    e.m = exponent_recipe(row.a, row.b).m;
    if (row.lift_divisor) e.lift_divisor = BigInt(row.lift_divisor);
    entries.push_back(std::move(e));
  }
  return StrategyPool(std::move(entries));
}

StrategyPool StrategyPool::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("moduli") || !j["moduli"].is_array()) {
    throw std::invalid_argument("pool: expected an object with a \"moduli\" array");
  }
  std::vector<PoolEntry> entries;
  for (const auto& item : j["moduli"]) {
    if (!item.is_object()) throw std::invalid_argument("pool: every modulus entry must be an object");
    PoolEntry e;
    if (item.contains("label")) e.label = item["label"].get<std::string>();
    if (item.contains("a") || item.contains("b")) {
      e.a = item.at("a").get<unsigned>();
      e.b = item.at("b").get<unsigned>();
      e.m = exponent_recipe(e.a, e.b).m;
      if (item.contains("m") && json_bigint(item["m"], "m") != e.m) {
        throw std::invalid_argument("pool: m does not match the exponents of entry (" + std::to_string(e.a) + "," +
                                    std::to_string(e.b) + ")");
      }
    } else if (item.contains("m")) {
      e.m = json_bigint(item["m"], "m");
    } else {
      throw std::invalid_argument("pool: entry needs either a and b or m");
    }
    if (item.contains("lift_divisor")) e.lift_divisor = json_bigint(item["lift_divisor"], "lift_divisor");
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw std::invalid_argument("pool: no moduli");
  return StrategyPool(std::move(entries));
}

StrategyPool StrategyPool::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open pool file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("pool file " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json StrategyPool::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json item{{"label", e.label}, {"m", e.m.get_str()}};
    if (e.a) {
      item["a"] = e.a;
      item["b"] = e.b;
    }
    if (e.lift_divisor) item["lift_divisor"] = e.lift_divisor->get_str();
    list.push_back(item);
  }
  return {{"moduli", list}};
}

std::vector<std::string> StrategyPool::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.label);
  return out;
}

const ModContext& StrategyPool::context(const BigInt& m) const {
  const std::string key = m.get_str();
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->contexts.find(key); it != cache_->contexts.end()) return *it->second;
  }
  auto ctx = std::make_shared<const ModContext>(build_context(m, limits_));
  std::lock_guard lock(cache_->mutex);
  return *cache_->contexts.emplace(key, std::move(ctx)).first->second;
}

std::vector<Strategy> StrategyPool::strategies(int r) const {
  std::vector<Strategy> out;
  if (r < 2 || r > kMaxDpLength) return out;
  for (const auto& e : entries_) {
    const ModContext& ctx = context(e.m);
    if (density_dp(ctx, r).clamped) continue;
    if (ctx.word_sized()) {
      out.push_back({&e, work_factor(ctx, r).ln(), false});
    } else if (e.lift_divisor) {
      const ModContext& ctx0 = context(e.m / *e.lift_divisor);
      out.push_back({&e, work_factor(ctx0, r).ln(), true});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Strategy& x, const Strategy& y) { return x.ln_w < y.ln_w; });
  return out;
}

const char* to_string(CertNode::Kind k) {
  switch (k) {
    case CertNode::Kind::NoLength0: return "no_length0";
    case CertNode::Kind::NoLength1: return "no_length1";
    case CertNode::Kind::NoDp: return "no_dp";
    case CertNode::Kind::CaseSplit: return "case_split";
    case CertNode::Kind::PrimitiveSplit: return "primitive_split";
    case CertNode::Kind::Vacuous: return "vacuous";
  }
  return "?";
}

const char* to_string(SpanStatus s) {
  switch (s) {
    case SpanStatus::Proved: return "proved";
    case SpanStatus::UpperBoundOnly: return "upper_bound_only";
    case SpanStatus::ByConvention: return "by_convention";
  }
  return "?";
}

bool dp_refute_direct(const ModContext& ctx, const BigInt& residue, int r, const EngineOptions& opts) {
  if (!ctx.word_sized()) throw std::invalid_argument("dp_refute_direct needs a modulus below 2^63");
  return dp_intersection_empty(ctx, static_cast<std::uint64_t>(mod_u128(residue, ctx.m)), r, opts);
}

std::vector<DpTuple> dp_enumerate(const ModContext& ctx, const BigInt& residue, int r, const EngineOptions& opts) {
  if (!ctx.word_sized()) throw std::invalid_argument("dp_enumerate needs a modulus below 2^63");
  return dp_solutions(ctx, static_cast<std::uint64_t>(mod_u128(residue, ctx.m)), r, opts);
}

std::optional<DpRefutation> lift_refute(const BigInt& n, int r, const ModContext& ctx0, const ModContext& ctx,
                                        const EngineOptions& opts, std::size_t max_tuples) {
  if (ctx0.m == 0 || ctx.m % ctx0.m != 0) throw std::invalid_argument("lift_refute: m0 does not divide m");
  if (!ctx0.word_sized()) throw std::invalid_argument("lift_refute: m0 must be below 2^63");
  const u128 q128 = ctx.m / ctx0.m;
  if (q128 > (1u << 20)) throw ResourceError("lift_refute: m / m0 above 2^20 is not supported");
  const std::uint32_t q = static_cast<std::uint32_t>(q128);

  DpRefutation ref;
  ref.n = n;
  ref.r = r;
  ref.mode = DpRefutation::Mode::Lifted;
  ref.m = ctx.modulus();
  ref.m0 = ctx0.modulus();
  ref.tuples = dp_enumerate(ctx0, n, r, opts);
  if (ref.tuples.size() > max_tuples) return std::nullopt;

  std::vector<std::uint64_t> first, second, rest;
  for (const auto& t : ref.tuples) {
    first.push_back(t[0]);
    second.push_back(t[1]);
    rest.insert(rest.end(), t.begin() + 2, t.end());
  }
  const auto f2 = fiber_index(ctx.twos, ctx0.m, first);
  const auto f3 = fiber_index(ctx.threes, ctx0.m, second);
  const auto fa = fiber_index(ctx.all, ctx0.m, rest);

  const u128 nm = mod_u128(n, ctx.m);
  std::vector<char> reach(q), next(q);
  for (const auto& t : ref.tuples) {
    std::vector<std::uint32_t> sizes;
    std::fill(reach.begin(), reach.end(), 0);
    reach[0] = 1;
    u128 sum = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& fibers = i == 0 ? f2 : i == 1 ? f3 : fa;
      const auto& ks = fibers.at(t[i]);
      sizes.push_back(static_cast<std::uint32_t>(ks.size()));
      std::fill(next.begin(), next.end(), 0);
      for (std::uint32_t s = 0; s < q; ++s) {
        if (!reach[s]) continue;
        for (auto k : ks) next[(s + k) % q] = 1;
      }
      reach.swap(next);
      sum += t[i];
    }
    // Lifted sum is sum + m0 * sum(k); it must be n mod m.
    const u128 diff = (nm + ctx.m - sum % ctx.m) % ctx.m;
    if (diff % ctx0.m != 0) throw std::logic_error("lift_refute: tuple does not sum to n mod m0");
    if (reach[static_cast<std::uint32_t>(diff / ctx0.m % q)]) return std::nullopt;
    ref.fiber_sizes.push_back(std::move(sizes));
  }
  return ref;
}

std::optional<DpRefutation> lift_refute(const BigInt& n, int r, const BigInt& m0, const BigInt& m,
                                        const EngineOptions& opts, std::size_t max_tuples) {
  if (m0 < 1 || m % m0 != 0) throw std::invalid_argument("lift_refute: m0 does not divide m");
  return lift_refute(n, r, build_context(m0), build_context(m), opts, max_tuples);
}

namespace {

class Refuter {
 public:
  Refuter(const StrategyPool& pool, const RefuteOptions& options) : pool_(pool), options_(options) {}

  // No representation of length r at all.
  CertPtr full(const BigInt& n, int r, int depth) {
    const std::string key = "f" + std::to_string(r) + ":" + n.get_str();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    CertPtr out = build_full(n, r, depth);
    memo_[key] = out;
    return out;
  }

 private:
  CertPtr build_full(const BigInt& n, int r, int depth) {
    auto node = std::make_shared<CertNode>();
    node->n = n;
    node->r = r;
    if (r == 0) {
      node->kind = CertNode::Kind::NoLength0;
      return node;
    }
    if (r == 1) {
      if (is_length1(n)) return nullptr;
      node->kind = CertNode::Kind::NoLength1;
      return node;
    }
    if (n <= 0) return nullptr;  // 0 = 2 - 2 has every length >= 2

    node->kind = CertNode::Kind::CaseSplit;
    if (!add_neighbours(*node, depth)) return nullptr;
    for (const auto& d : smooth_divisors(n)) {
      auto child = primitive(n / d, r, depth + 1);
      if (!child) return nullptr;
      node->children.push_back({"divisor", d, child});
    }
    auto dp = no_dp(n, r, depth);
    if (!dp) return nullptr;
    node->children.insert(node->children.begin(), CertChild{"dp", 0, dp});
    return node;
  }

  // No primitive representation of length r >= 2.
  CertPtr primitive(const BigInt& n, int r, int depth) {
    const std::string key = "p" + std::to_string(r) + ":" + n.get_str();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto node = std::make_shared<CertNode>();
    node->kind = CertNode::Kind::PrimitiveSplit;
    node->n = n;
    node->r = r;
    CertPtr out;
    if (add_neighbours(*node, depth)) {
      if (auto dp = no_dp(n, r, depth)) {
        node->children.insert(node->children.begin(), CertChild{"dp", 0, dp});
        out = node;
      }
    }
    memo_[key] = out;
    return out;
  }

  // Children for (n+1)/6 and (n-1)/6 at length r-1.
  bool add_neighbours(CertNode& node, int depth) {
    for (int sign : {+1, -1}) {
      const BigInt shifted = node.n + sign;
      CertPtr child;
      if (shifted % 6 == 0) {
        child = full(shifted / 6, node.r - 1, depth + 1);
        if (!child) return false;
      } else {
        auto vac = std::make_shared<CertNode>();
        vac->kind = CertNode::Kind::Vacuous;
        vac->n = shifted;
        vac->r = node.r - 1;
        child = vac;
      }
      node.children.push_back({sign > 0 ? "plus" : "minus", 0, child});
    }
    return true;
  }

  CertPtr no_dp(const BigInt& n, int r, int depth) {
    const std::string key = "d" + std::to_string(r) + ":" + n.get_str();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    CertPtr out;
    for (const auto& s : pool_.strategies(r)) {
      report(depth, "n=" + n.get_str() + " r=" + std::to_string(r) + " trying " + s.entry->label +
                        (s.lifted ? " (lifted)" : ""));
      std::optional<DpRefutation> ref;
      const ModContext& ctx = pool_.context(s.entry->m);
      if (s.lifted) {
        const ModContext& ctx0 = pool_.context(s.entry->m / *s.entry->lift_divisor);
        ref = lift_refute(n, r, ctx0, ctx, pool_.engine, options_.max_lift_tuples);
      } else if (dp_refute_direct(ctx, n, r, pool_.engine)) {
        ref = DpRefutation{n, r, DpRefutation::Mode::Direct, ctx.modulus(), 0, {}, {}};
      }
      if (ref) {
        auto node = std::make_shared<CertNode>();
        node->kind = CertNode::Kind::NoDp;
        node->n = n;
        node->r = r;
        node->dp = std::move(ref);
        out = node;
        break;
      }
    }
    if (!out) report(depth, "n=" + n.get_str() + " r=" + std::to_string(r) + " not refuted by the pool");
    memo_[key] = out;
    return out;
  }

  void report(int depth, const std::string& msg) const {
    if (options_.progress) options_.progress(depth, msg);
  }

  const StrategyPool& pool_;
  const RefuteOptions& options_;
  std::unordered_map<std::string, CertPtr> memo_;
};

}  // namespace

std::optional<Certificate> refute_length(const BigInt& n, int r, const StrategyPool& pool,
                                         const RefuteOptions& options) {
  if (n < 0) throw std::invalid_argument("refute_length: n must be nonnegative");
  if (r < 0) throw std::invalid_argument("refute_length: r must be nonnegative");
  const auto start = std::chrono::steady_clock::now();
  Refuter refuter(pool, options);
  CertPtr root = refuter.full(n, r, 0);
  if (!root) return std::nullopt;
  Certificate cert;
  cert.n = n;
  cert.r = r;
  cert.root = std::move(root);
  cert.metadata.pool = pool.labels();
  cert.metadata.created = utc_now();
  cert.metadata.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cert;
}

nlohmann::json SpanResult::to_json() const {
  nlohmann::json j{
      {"n", n.get_str()},
      {"span", span},
      {"status", dbns::to_string(status)},
      {"witness", witness.to_string()},
  };
  nlohmann::json summands = nlohmann::json::array();
  for (const auto& t : witness.summands) summands.push_back(t.value().get_str());
  j["summands"] = summands;
  if (lower_bound) j["certificate"] = dbns::to_json(*lower_bound);
  return j;
}

SpanResult span_exact(const BigInt& n, const StrategyPool& pool, const SearchBounds& bounds,
                      const RefuteOptions& options) {
  SpanResult out;
  out.n = n;
  const SpanUpper upper = span_upper(abs(n), bounds);
  out.span = upper.length;
  out.witness = sgn(n) < 0 ? negate(upper.witness) : upper.witness;
  if (sgn(n) == 0) {
    out.status = SpanStatus::ByConvention;
    return out;
  }
  out.lower_bound = refute_length(abs(n), out.span - 1, pool, options);
  if (out.lower_bound && options.verify) {
    const VerifyReport rep = verify_certificate(*out.lower_bound, pool.engine);
    if (!rep.ok) throw std::logic_error("lower-bound certificate fails verification at " + rep.path + ": " + rep.reason);
  }
  out.status = out.lower_bound ? SpanStatus::Proved : SpanStatus::UpperBoundOnly;
  return out;
}

}  // namespace dbns
