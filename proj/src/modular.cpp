#include "dbns/modular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "dbns/errors.hpp"

namespace dbns {
namespace {

struct U128Hash {
  std::size_t operator()(u128 x) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(x) ^ (static_cast<std::uint64_t>(x >> 64) * 0x9E3779B97F4A7C15ULL);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

constexpr u128 kBitmapModulusLimit = static_cast<u128>(1) << 28;

/// Visited-set over Z/mZ: a bitmap for small m, a hash set otherwise.
class ResidueSet {
 public:
  explicit ResidueSet(u128 m) : m_(m) {
    if (m <= kBitmapModulusLimit) bits_.assign(static_cast<std::size_t>((m + 63) / 64), 0);
  }
  /// Returns true if x was newly inserted.
  bool insert(u128 x) {
    if (!bits_.empty()) {
      auto i = static_cast<std::size_t>(x);
      std::uint64_t mask = std::uint64_t{1} << (i & 63);
      if (bits_[i >> 6] & mask) return false;
      bits_[i >> 6] |= mask;
      return true;
    }
    return hashed_.insert(x).second;
  }

 private:
  u128 m_;
  std::vector<std::uint64_t> bits_;
  std::unordered_set<u128, U128Hash> hashed_;
};

u128 neg_mod(u128 x, u128 m) { return x == 0 ? 0 : m - x; }

std::vector<u128> closure(u128 m, std::initializer_list<unsigned> generators, std::size_t cap) {
  ResidueSet seen(m);
  std::vector<u128> out;
  const u128 one = 1 % m;
  seen.insert(one);
  out.push_back(one);
  for (std::size_t head = 0; head < out.size(); ++head) {
    const u128 x = out[head];
    auto visit = [&](u128 y) {
      if (seen.insert(y)) {
        out.push_back(y);
        if (out.size() > cap) {
          throw ResourceError("residue closure mod " + to_string(m) + " exceeds cardinality cap " +
                              std::to_string(cap));
        }
      }
    };
    for (unsigned g : generators) visit(x * g % m);
    visit(neg_mod(x, m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool sorted_contains(const std::vector<u128>& v, u128 x) { return std::binary_search(v.begin(), v.end(), x); }

std::vector<std::uint64_t> narrow(const std::vector<u128>& v) {
  std::vector<std::uint64_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](u128 x) { return static_cast<std::uint64_t>(x); });
  return out;
}

double ln_mpz(const mpz_class& z) {
  if (sgn(z) <= 0) return -INFINITY;
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

BigInt binomial(std::size_t n, std::size_t k) {
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

BigInt factorial(unsigned n) {
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

Estimate clamp_density(mpq_class q) {
  Estimate e;
  q.canonicalize();
  if (q >= 1) {
    e.exact = 1;
    e.clamped = true;
  } else {
    e.exact = q;
  }
  return e;
}

// Pollard-Brent; returns a nontrivial factor or 0 on giving up.
BigInt pollard_brent(const BigInt& n, unsigned long seed, unsigned long max_iterations) {
  BigInt y = seed, c = seed + 1, g = 1, r = 1, q = 1, x, ys;
  const unsigned long block = 128;
  unsigned long iterations = 0;
  auto f = [&](const BigInt& v) {
    BigInt w = v * v + c;
    mpz_mod(w.get_mpz_t(), w.get_mpz_t(), n.get_mpz_t());
    return w;
  };
  while (g == 1) {
    x = y;
    for (BigInt i = 0; i < r; ++i) y = f(y);
    BigInt k = 0;
    while (k < r && g == 1) {
      ys = y;
      for (unsigned long i = 0; i < block && k + i < r; ++i) {
        y = f(y);
        BigInt d = abs(x - y);
        q = (q * d) % n;
      }
      mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
      k += block;
      iterations += block;
      if (iterations > max_iterations) return 0;
    }
    r *= 2;
  }
  if (g == n) {
    do {
      ys = f(ys);
      BigInt d = abs(x - ys);
      mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    } while (g == 1);
  }
  return g == n ? BigInt(0) : g;
}

void factor_into(const BigInt& n, std::map<BigInt, unsigned, std::less<>>& out, int depth = 0) {
  if (n == 1) return;
  if (mpz_probab_prime_p(n.get_mpz_t(), 30) > 0) {
    ++out[n];
    return;
  }
  for (unsigned long seed = 2; seed < 12 && depth < 64; ++seed) {
    BigInt f = pollard_brent(n, seed, 1UL << 22);
    if (f != 0) {
      factor_into(f, out, depth + 1);
      factor_into(BigInt(n / f), out, depth + 1);
      return;
    }
  }
  throw FactorizationError("could not factor cofactor " + n.get_str());
}

}  // namespace

bool ModContext::contains(u128 x) const { return sorted_contains(all, x); }
bool ModContext::contains_two_power(u128 x) const { return sorted_contains(twos, x); }
bool ModContext::contains_three_power(u128 x) const { return sorted_contains(threes, x); }

ModContext build_context(const BigInt& m_big, const ContextLimits& limits) {
  if (sgn(m_big) <= 0) throw std::invalid_argument("modulus must be positive, got " + m_big.get_str());
  const u128 m = to_u128(m_big);
  if (m > kMaxContextModulus) throw ResourceError("modulus " + m_big.get_str() + " exceeds 2^120");

  ModContext ctx;
  ctx.m = m;
  ctx.all = closure(m, {2, 3}, limits.max_cardinality);
  ctx.twos = closure(m, {2}, limits.max_cardinality);
  ctx.threes = closure(m, {3}, limits.max_cardinality);
  try {
    ctx.lambda = carmichael(m_big);
  } catch (const FactorizationError&) {
    ctx.lambda.reset();
  }
  if (ctx.word_sized()) {
    ctx.all64 = narrow(ctx.all);
    ctx.twos64 = narrow(ctx.twos);
    ctx.threes64 = narrow(ctx.threes);
  }
  return ctx;
}

std::vector<std::pair<BigInt, unsigned>> factorize(const BigInt& m_in) {
  if (sgn(m_in) <= 0) throw std::invalid_argument("factorize: nonpositive argument");
  std::map<BigInt, unsigned, std::less<>> found;
  BigInt m = m_in;
  auto strip = [&](unsigned long p) {
    unsigned e = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
      ++e;
    }
    if (e) found[BigInt(p)] += e;
  };
  strip(2);
  strip(3);
  for (unsigned long p = 5; p < (1UL << 20) && m > 1; p += 6) {
    if (BigInt(p) * p > m) break;
    strip(p);
    strip(p + 2);
  }
  if (m > 1) factor_into(m, found);
  return {found.begin(), found.end()};
}

BigInt carmichael(const BigInt& m) {
  if (sgn(m) <= 0) throw std::invalid_argument("carmichael: modulus must be positive");
  BigInt lambda = 1;
  for (const auto& [p, e] : factorize(m)) {
    BigInt part;
    if (p == 2) {
      part = e == 1 ? 1 : (e == 2 ? 2 : BigInt(BigInt(1) << (e - 2)));
    } else {
      mpz_pow_ui(part.get_mpz_t(), p.get_mpz_t(), e - 1);
      part *= p - 1;
    }
    mpz_lcm(lambda.get_mpz_t(), lambda.get_mpz_t(), part.get_mpz_t());
  }
  return lambda;
}

double Estimate::ln() const { return ln_mpz(exact.get_num()) - ln_mpz(exact.get_den()); }
double Estimate::value() const { return exact.get_d(); }

Estimate density_D(const BigInt& m, std::size_t t, int r) {
  if (r < 2) throw std::invalid_argument("density_D needs r >= 2");
  return clamp_density(mpq_class(binomial(t + r - 1, r), m));
}

Estimate density_dp(const BigInt& m, std::size_t t, std::size_t t2, std::size_t t3, int r) {
  if (r < 2) throw std::invalid_argument("density_dp needs r >= 2");
  BigInt num = BigInt(static_cast<unsigned long>(t2)) * static_cast<unsigned long>(t3) * binomial(t + r - 3, r - 2);
  return clamp_density(mpq_class(num, m));
}

Estimate work_factor(std::size_t t, std::size_t t2, std::size_t t3, int r) {
  if (r < 2) throw std::invalid_argument("work_factor needs r >= 2");
  const unsigned u = static_cast<unsigned>(r / 2);
  BigInt tt = static_cast<unsigned long>(t);
  BigInt t_pow;
  mpz_pow_ui(t_pow.get_mpz_t(), tt.get_mpz_t(), u - 1);
  BigInt lead;
  BigInt denom;
  if (r % 2 == 1) {
    lead = BigInt(u) * static_cast<unsigned long>(t2) * static_cast<unsigned long>(t3) + tt;
    denom = factorial(u);
  } else {
    lead = BigInt(static_cast<unsigned long>(t2)) + static_cast<unsigned long>(t3);
    denom = factorial(u - 1);
  }
  Estimate e;
  e.exact = mpq_class(lead * t_pow, denom);
  e.exact.canonicalize();
  return e;
}

Estimate density_D(const ModContext& ctx, int r) { return density_D(ctx.modulus(), ctx.t(), r); }
Estimate density_dp(const ModContext& ctx, int r) {
  return density_dp(ctx.modulus(), ctx.t(), ctx.t2(), ctx.t3(), r);
}
Estimate work_factor(const ModContext& ctx, int r) { return work_factor(ctx.t(), ctx.t2(), ctx.t3(), r); }

ModulusProfile profile_for_modulus(const ModContext& ctx, int r_lo, int r_hi) {
  ModulusProfile p;
  p.m = ctx.modulus();
  p.t = ctx.t();
  p.t2 = ctx.t2();
  p.t3 = ctx.t3();
  p.lambda = ctx.lambda;
  for (int r = std::max(r_lo, 2); r <= r_hi; ++r) {
    p.ln_D[r] = density_D(ctx, r).ln();
    Estimate d = density_dp(ctx, r);
    p.ln_d[r] = d.ln();
    p.d_clamped[r] = d.clamped;
    p.ln_w[r] = work_factor(ctx, r).ln();
  }
  return p;
}

ModulusRecipe exponent_recipe(unsigned a, unsigned b) {
  if (a < 1 || b < 1) throw std::invalid_argument("modulus_from_exponents: a and b must be >= 1");
  if (a > 20000 || b > 20000) throw ResourceError("exponents above 20000 are not supported");

  ModulusRecipe out;
  mpz_ui_pow_ui(out.u.get_mpz_t(), 2, a);
  out.u -= 1;
  mpz_ui_pow_ui(out.v.get_mpz_t(), 3, b);
  out.v -= 1;
  while (mpz_divisible_ui_p(out.u.get_mpz_t(), 3)) {
    mpz_divexact_ui(out.u.get_mpz_t(), out.u.get_mpz_t(), 3);
    ++out.x;
  }
  out.y = static_cast<unsigned>(mpz_scan1(out.v.get_mpz_t(), 0));
  out.v >>= out.y;
  mpz_gcd(out.g.get_mpz_t(), out.u.get_mpz_t(), out.v.get_mpz_t());
  BigInt p3;
  mpz_ui_pow_ui(p3.get_mpz_t(), 3, out.x);
  out.m = out.g * p3;
  out.m <<= out.y;
  return out;
}

ModulusProfile modulus_from_exponents(unsigned a, unsigned b, int r_lo, int r_hi, const ContextLimits& limits) {
  const ModulusRecipe rec = exponent_recipe(a, b);
  ModulusProfile p = profile_for_modulus(build_context(rec.m, limits), r_lo, r_hi);
  p.a = a;
  p.b = b;
  p.x = rec.x;
  p.y = rec.y;
  p.u = rec.u;
  p.v = rec.v;
  p.g = rec.g;
  return p;
}

nlohmann::json to_json(const ModulusProfile& p) {
  nlohmann::json j;
  j["a"] = p.a;
  j["b"] = p.b;
  j["m"] = p.m.get_str();
  j["x"] = p.x;
  j["y"] = p.y;
  j["t"] = p.t;
  j["t2"] = p.t2;
  j["t3"] = p.t3;
  auto section = [](const std::map<int, double>& values) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [r, v] : values) s[std::to_string(r)] = v;
    return s;
  };
  j["lnD"] = section(p.ln_D);
  j["lnd"] = section(p.ln_d);
  j["lnw"] = section(p.ln_w);
  return j;
}

std::vector<u128> non_representable_residues(const ModContext& ctx, int r, std::uint64_t max_word_ops) {
  if (r < 1) throw std::invalid_argument("non_representable_residues needs r >= 1");
  if (ctx.m > kBitmapModulusLimit) throw ResourceError("modulus too large for exhaustive sumset enumeration");
  const auto m = static_cast<std::size_t>(ctx.m);
  const std::size_t words = (m + 63) / 64;
  const std::uint64_t cost = static_cast<std::uint64_t>(ctx.t()) * words * static_cast<std::uint64_t>(r - 1);
  if (cost > max_word_ops) {
    throw ResourceError("r-fold sumset enumeration mod " + to_string(ctx.m) + " needs ~" + std::to_string(cost) +
                        " word operations");
  }

  auto get = [](const std::vector<std::uint64_t>& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1; };
  std::vector<std::uint64_t> reach(words, 0);
  for (u128 x : ctx.all) reach[static_cast<std::size_t>(x) >> 6] |= std::uint64_t{1} << (x & 63);

  for (int k = 2; k <= r; ++k) {
    // doubled copy: bit j of `twice` is reach[j mod m], so a rotation by s
    // reads a contiguous window starting at m - s
    std::vector<std::uint64_t> twice((2 * m + 63) / 64 + 2, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (get(reach, i)) {
        twice[i >> 6] |= std::uint64_t{1} << (i & 63);
        twice[(i + m) >> 6] |= std::uint64_t{1} << ((i + m) & 63);
      }
    }
    std::vector<std::uint64_t> next(words, 0);
    for (u128 s128 : ctx.all) {
      const auto s = static_cast<std::size_t>(s128);
      const std::size_t start = (m - s) % m;
      for (std::size_t w = 0; w < words; ++w) {
        const std::size_t bit = start + 64 * w;
        const std::size_t q = bit >> 6, sh = bit & 63;
        std::uint64_t chunk = twice[q] >> sh;
        if (sh) chunk |= twice[q + 1] << (64 - sh);
        next[w] |= chunk;
      }
    }
    if (m % 64) next[words - 1] &= (std::uint64_t{1} << (m % 64)) - 1;
    reach.swap(next);
  }

  std::vector<u128> missing;
  for (std::size_t i = 0; i < m; ++i) {
    if (!get(reach, i)) missing.push_back(i);
  }
  return missing;
}

}  // namespace dbns
