#pragma once

// Slow, obviously-correct reference computations for the tests. Nothing
// here calls into the library.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <unordered_set>
#include <vector>

namespace oracle {

struct Images {
  std::vector<std::uint64_t> all, twos, threes;  // ascending
};

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// +-2^i 3^j mod m for i, j <= e. Once 2^i 3^j is already in the image,
/// so is every 2^i 3^k with k > j (it is 3^(k-j) times a value seen
/// before), so the inner loop stops there.
inline Images images(std::uint64_t m, unsigned e) {
  std::vector<char> all(m, 0), twos(m, 0), threes(m, 0);
  auto mark = [m](std::vector<char>& bits, std::uint64_t v) {
    bits[v] = 1;
    bits[(m - v) % m] = 1;
  };
  std::uint64_t p = 1 % m;
  for (unsigned j = 0; j <= e; ++j, p = mulmod(p, 3, m)) mark(threes, p);
  p = 1 % m;
  for (unsigned i = 0; i <= e; ++i, p = mulmod(p, 2, m)) {
    mark(twos, p);
    std::uint64_t v = p;
    for (unsigned j = 0; j <= e && !all[v]; ++j, v = mulmod(v, 3, m)) mark(all, v);
  }
  auto collect = [m](const std::vector<char>& bits) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t x = 0; x < m; ++x) {
      if (bits[x]) out.push_back(x);
    }
    return out;
  };
  return {collect(all), collect(twos), collect(threes)};
}

/// Exponent of (Z/mZ)^* by brute-force multiplicative orders.
inline std::uint64_t carmichael(std::uint64_t m) {
  std::uint64_t l = 1;
  for (std::uint64_t a = 1; a < m; ++a) {
    if (std::gcd(a, m) != 1) continue;
    std::uint64_t x = a % m, k = 1;
    while (x != 1 % m) {
      x = mulmod(x, a, m);
      ++k;
    }
    l = std::lcm(l, k);
  }
  return l;
}

/// reach[x] = x is a sum x1 + x2 + ... + xr mod m with x1 in T2, x2 in T3
/// and the rest in T (r in {2, 3}). Built as the pair sumset, then shifted
/// by every element of T.
inline std::vector<char> dp_reach(const Images& im, std::uint64_t m, int r) {
  std::vector<char> pairs(m, 0);
  for (auto a : im.twos) {
    for (auto b : im.threes) pairs[(a + b) % m] = 1;
  }
  if (r == 2) return pairs;
  std::vector<char> reach(m, 0);
  for (std::uint64_t x = 0; x < m; ++x) {
    if (!pairs[x]) continue;
    for (auto c : im.all) reach[(x + c) % m] = 1;
  }
  return reach;
}

/// All +-2^a 3^b with absolute value at most bound.
inline std::vector<std::int64_t> summands(std::int64_t bound) {
  std::vector<std::int64_t> out;
  for (std::int64_t p = 1; p <= bound; p *= 2) {
    for (std::int64_t v = p; v <= bound; v *= 3) {
      out.push_back(v);
      out.push_back(-v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// len[n] for 0 < n <= limit: smallest r <= max_r such that n is a sum of r
/// summands of absolute value <= summand_bound whose running partial sums
/// stay within partial_bound; 0 when none was found.
inline std::vector<int> shortest_lengths(std::int64_t limit, int max_r, std::int64_t summand_bound,
                                         std::int64_t partial_bound) {
  const auto s = summands(summand_bound);
  std::vector<int> len(limit + 1, 0);
  std::unordered_set<std::int64_t> level{0};
  for (int r = 1; r <= max_r; ++r) {
    std::unordered_set<std::int64_t> next;
    for (auto x : level) {
      for (auto v : s) {
        const std::int64_t y = x + v;
        if (y >= -partial_bound && y <= partial_bound) next.insert(y);
      }
    }
    for (auto y : next) {
      if (y > 0 && y <= limit && len[y] == 0) len[y] = r;
    }
    level.swap(next);
  }
  return len;
}

}  // namespace oracle
