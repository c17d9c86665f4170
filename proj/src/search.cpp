#include "dbns/search.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

#include "dbns/checkpoint.hpp"
#include "dbns/errors.hpp"

namespace dbns {
namespace {

using i128 = __int128;

constexpr std::uint64_t kMaxSummand = static_cast<std::uint64_t>(INT64_MAX);
constexpr std::uint64_t kMaxPartial = std::uint64_t{1} << 62;
constexpr int kMaxHalf = 4;
constexpr int kWideLength = 4;

bool fits64(i128 x) { return x >= INT64_MIN && x <= INT64_MAX; }

// Positions [first, last) of `sorted` holding values in [lo, hi].
std::pair<std::size_t, std::size_t> value_range(const std::vector<std::int64_t>& sorted, i128 lo, i128 hi) {
  lo = std::max<i128>(lo, INT64_MIN);
  hi = std::min<i128>(hi, INT64_MAX);
  if (lo > hi) return {0, 0};
  auto first = std::lower_bound(sorted.begin(), sorted.end(), static_cast<std::int64_t>(lo));
  auto last = std::upper_bound(first, sorted.end(), static_cast<std::int64_t>(hi));
  return {static_cast<std::size_t>(first - sorted.begin()), static_cast<std::size_t>(last - sorted.begin())};
}

void sort_unique(std::vector<std::int64_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Keeps the working buffer of the generators near the size of its distinct
// content.
class Accumulator {
 public:
  void push(std::int64_t x) {
    out_.push_back(x);
    if (out_.size() >= threshold_) {
      sort_unique(out_);
      threshold_ = std::max<std::size_t>(2 * out_.size(), std::size_t{1} << 24);
    }
  }
  std::vector<std::int64_t> take() {
    sort_unique(out_);
    return std::move(out_);
  }

 private:
  std::vector<std::int64_t> out_;
  std::size_t threshold_ = std::size_t{1} << 24;
};

struct PairSum {
  i128 sum;
  std::uint32_t i, j;
};

// All key-ordered pairs i <= j, sorted by (sum, i, j).
std::vector<PairSum> all_pairs(const SummandUniverse& u) {
  std::vector<PairSum> pairs;
  pairs.reserve(u.size() * (u.size() + 1) / 2);
  for (std::uint32_t i = 0; i < u.size(); ++i) {
    for (std::uint32_t j = i; j < u.size(); ++j) {
      pairs.push_back({static_cast<i128>(u.value(i)) + u.value(j), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairSum& x, const PairSum& y) {
    if (x.sum != y.sum) return x.sum < y.sum;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  return pairs;
}

std::int64_t checked_target(const BigInt& n) {
  if (!fits_int64(n) || abs(n) > BigInt(std::to_string(kMaxPartial))) {
    throw ResourceError("target " + n.get_str() + " exceeds the 2^62 search range");
  }
  return n.get_si();
}

std::optional<Representation> find_exact(const SummandUniverse& u, std::int64_t n, int r, std::uint64_t bound) {
  HalfSumIndex index(u, r, bound);
  auto m = index.best_match(n);
  if (!m) return std::nullopt;
  return index.witness(n, *m);
}

bool within(const Representation& rep, std::uint64_t max_abs_summand) {
  const BigInt cap(std::to_string(max_abs_summand));
  return std::all_of(rep.summands.begin(), rep.summands.end(),
                     [&](const TwoThreeInteger& t) { return abs(t.value()) <= cap; });
}

}  // namespace

void SearchBounds::validate() const {
  if (max_abs_summand == 0 || max_abs_summand > kMaxSummand) {
    throw ResourceError("max_abs_summand must be in [1, 2^63-1]");
  }
  if (max_abs_partial && (*max_abs_partial == 0 || *max_abs_partial > kMaxPartial)) {
    throw ResourceError("max_abs_partial must be in [1, 2^62]");
  }
}

std::uint64_t SearchBounds::partial_for(const BigInt& max_abs_target) const {
  validate();
  if (max_abs_partial) return *max_abs_partial;
  BigInt b = 2 * abs(max_abs_target);
  if (b > BigInt(std::to_string(kMaxPartial))) {
    throw ResourceError("partial-sum bound 2*|target| exceeds 2^62");
  }
  return std::max<std::uint64_t>(1, b.get_ui());
}

SummandUniverse::SummandUniverse(std::uint64_t max_abs_summand) {
  if (max_abs_summand == 0 || max_abs_summand > kMaxSummand) {
    throw ResourceError("max_abs_summand must be in [1, 2^63-1]");
  }
  for (std::uint32_t b = 0;; ++b) {
    u128 p3 = 1;
    for (std::uint32_t i = 0; i < b; ++i) p3 *= 3;
    if (p3 > max_abs_summand) break;
    for (std::uint32_t a = 0; (p3 << a) <= max_abs_summand; ++a) {
      by_key_.push_back({1, a, b});
      by_key_.push_back({-1, a, b});
    }
  }
  std::sort(by_key_.begin(), by_key_.end(), key_less);

  values_.reserve(by_key_.size());
  for (std::uint32_t k = 0; k < by_key_.size(); ++k) {
    values_.push_back(*by_key_[k].value_i64());
    index_.emplace(values_.back(), k);
  }
  std::vector<std::uint32_t> order(by_key_.size());
  for (std::uint32_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return values_[x] < values_[y]; });
  sorted_to_key_ = order;
  for (auto k : order) sorted_values_.push_back(values_[k]);
}

std::optional<std::uint32_t> SummandUniverse::index_of(std::int64_t v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::int64_t> half_sums(const SummandUniverse& u, int k, std::uint64_t max_abs_partial) {
  if (k < 0 || k > kMaxHalf) throw std::invalid_argument("half size must be in [0, 4]");
  if (max_abs_partial > kMaxPartial) throw ResourceError("max_abs_partial must be at most 2^62");
  const i128 B = max_abs_partial;
  if (k == 0) return {0};

  const auto& sorted = u.sorted_values();
  Accumulator acc;
  // Appends s + z for every summand z of key index >= min_key with
  // |s + z| <= B.
  auto extend = [&](i128 s, std::uint32_t min_key) {
    auto [first, last] = value_range(sorted, -B - s, B - s);
    for (std::size_t p = first; p < last; ++p) {
      if (u.key_of_sorted(p) >= min_key) acc.push(static_cast<std::int64_t>(s + sorted[p]));
    }
  };

  switch (k) {
    case 1:
      extend(0, 0);
      break;
    case 2:
      for (std::uint32_t i = 0; i < u.size(); ++i) extend(u.value(i), i);
      break;
    case 3:
      for (std::uint32_t i = 0; i < u.size(); ++i) {
        for (std::uint32_t j = i; j < u.size(); ++j) extend(static_cast<i128>(u.value(i)) + u.value(j), j);
      }
      break;
    case 4: {
      const auto pairs = all_pairs(u);
      auto less_sum = [](const PairSum& p, i128 v) { return p.sum < v; };
      for (const auto& p : pairs) {
        auto it = std::lower_bound(pairs.begin(), pairs.end(), -B - p.sum, less_sum);
        for (; it != pairs.end() && it->sum <= B - p.sum; ++it) {
          if (it->i >= p.j) acc.push(static_cast<std::int64_t>(p.sum + it->sum));
        }
      }
      break;
    }
  }
  return acc.take();
}

std::optional<std::vector<TwoThreeInteger>> min_tuple(const SummandUniverse& u, std::int64_t s, int k) {
  if (k < 0 || k > kMaxHalf) throw std::invalid_argument("tuple size must be in [0, 4]");
  auto rest_index = [&](i128 rest, std::uint32_t min_key) -> std::optional<std::uint32_t> {
    if (!fits64(rest)) return std::nullopt;
    auto idx = u.index_of(static_cast<std::int64_t>(rest));
    if (!idx || *idx < min_key) return std::nullopt;
    return idx;
  };
  auto build = [&](std::initializer_list<std::uint32_t> keys) {
    std::vector<TwoThreeInteger> out;
    for (auto key : keys) out.push_back(u.at(key));
    return out;
  };

  switch (k) {
    case 0:
      if (s == 0) return std::vector<TwoThreeInteger>{};
      return std::nullopt;
    case 1:
      if (auto i = rest_index(s, 0)) return build({*i});
      return std::nullopt;
    case 2:
      for (std::uint32_t i = 0; i < u.size(); ++i) {
        if (auto j = rest_index(static_cast<i128>(s) - u.value(i), i)) return build({i, *j});
      }
      return std::nullopt;
    case 3:
      for (std::uint32_t i = 0; i < u.size(); ++i) {
        for (std::uint32_t j = i; j < u.size(); ++j) {
          if (auto l = rest_index(static_cast<i128>(s) - u.value(i) - u.value(j), j)) return build({i, j, *l});
        }
      }
      return std::nullopt;
    default: {
      const auto pairs = all_pairs(u);
      for (std::uint32_t i = 0; i < u.size(); ++i) {
        for (std::uint32_t j = i; j < u.size(); ++j) {
          const i128 rest = static_cast<i128>(s) - u.value(i) - u.value(j);
          auto it = std::lower_bound(pairs.begin(), pairs.end(), rest,
                                     [](const PairSum& p, i128 v) { return p.sum < v; });
          for (; it != pairs.end() && it->sum == rest; ++it) {
            if (it->i >= j) return build({i, j, it->i, it->j});
          }
        }
      }
      return std::nullopt;
    }
  }
}

bool is_length1(const BigInt& n) { return canonicalize(n).has_value(); }

HalfSumIndex::HalfSumIndex(const SummandUniverse& universe, int r, std::uint64_t max_abs_partial)
    : universe_(&universe), k_large_((r + 1) / 2), k_small_(r / 2), bound_(max_abs_partial) {
  if (r < 1 || r > 2 * kMaxHalf) throw std::invalid_argument("length must be in [1, 8]");
  large_ = half_sums(universe, k_large_, bound_);
  small_ = half_sums(universe, k_small_, bound_);
  small_by_abs_ = small_;
  std::sort(small_by_abs_.begin(), small_by_abs_.end(), [](std::int64_t x, std::int64_t y) {
    const auto ax = x < 0 ? -static_cast<i128>(x) : x;
    const auto ay = y < 0 ? -static_cast<i128>(y) : y;
    return ax != ay ? ax < ay : x < y;
  });
}

std::optional<std::pair<std::int64_t, std::int64_t>> HalfSumIndex::match(std::int64_t n) const {
  for (auto h : small_by_abs_) {
    const i128 rest = static_cast<i128>(n) - h;
    if (fits64(rest) && std::binary_search(large_.begin(), large_.end(), static_cast<std::int64_t>(rest))) {
      return std::pair{static_cast<std::int64_t>(rest), h};
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::int64_t, std::int64_t>> HalfSumIndex::best_match(std::int64_t n) const {
  auto mag = [](i128 x) { return x < 0 ? -x : x; };
  std::optional<std::pair<std::int64_t, std::int64_t>> best;
  i128 best_max = 0;
  for (auto h : small_by_abs_) {
    if (best && mag(h) > best_max) break;
    const i128 rest = static_cast<i128>(n) - h;
    if (!fits64(rest) || !std::binary_search(large_.begin(), large_.end(), static_cast<std::int64_t>(rest))) continue;
    const i128 top = std::max(mag(rest), mag(h));
    if (!best || top < best_max) {
      best = std::pair{static_cast<std::int64_t>(rest), h};
      best_max = top;
    }
  }
  return best;
}

Representation HalfSumIndex::witness(std::int64_t n, std::pair<std::int64_t, std::int64_t> m) const {
  auto large = min_tuple(*universe_, m.first, k_large_);
  auto small = min_tuple(*universe_, m.second, k_small_);
  if (!large || !small) throw std::logic_error("half-sum without a summand tuple");
  Representation rep{BigInt(static_cast<long>(n)), std::move(*large)};
  rep.summands.insert(rep.summands.end(), small->begin(), small->end());
  std::sort(rep.summands.begin(), rep.summands.end(),
            [](const TwoThreeInteger& x, const TwoThreeInteger& y) { return key_less(y, x); });
  rep.validate();
  return rep;
}

void HalfSumIndex::cover(std::int64_t lo, std::int64_t hi, std::vector<bool>& covered) const {
  covered.assign(static_cast<std::size_t>(hi - lo) + 1, false);
  for (auto h : small_) {
    auto [first, last] = value_range(large_, static_cast<i128>(lo) - h, static_cast<i128>(hi) - h);
    for (std::size_t p = first; p < last; ++p) {
      covered[static_cast<std::size_t>(large_[p] + h - lo)] = true;
    }
  }
}

std::optional<Representation> find_representation(const BigInt& n, int r, const SearchBounds& bounds) {
  if (r < 1) throw std::invalid_argument("length must be at least 1");
  if (r > 2 * kMaxHalf) throw ResourceError("lengths above 8 are not searched");
  const std::int64_t target = checked_target(n);
  const std::uint64_t bound = bounds.partial_for(n);
  const SummandUniverse u(bounds.max_abs_summand);

  for (int len = r; len >= 1; --len) {
    auto rep = find_exact(u, target, len, bound);
    if (!rep) continue;
    // Lengthen the smallest summand so 3x stays within the summand bound.
    while (static_cast<int>(rep->length()) < r) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < rep->length(); ++i) {
        if (key_less(rep->summands[i], rep->summands[best])) best = i;
      }
      rep = lengthen(*rep, best);
    }
    if (!within(*rep, bounds.max_abs_summand)) return std::nullopt;
    rep->validate();
    return rep;
  }
  return std::nullopt;
}

SpanUpper span_upper(const BigInt& n, const SearchBounds& bounds, int cap) {
  if (sgn(n) == 0) {
    return {2, Representation{0, {{1, 1, 0}, {-1, 1, 0}}}};
  }
  const std::int64_t target = checked_target(n);
  const std::uint64_t bound = bounds.partial_for(n);
  const SummandUniverse u(bounds.max_abs_summand);
  // Short lengths are cheap enough to retry with the half-sum cap lifted
  // to the summand bound, which catches cancelling pairs like 243 - 128.
  const std::uint64_t wide = std::min<std::uint64_t>(kMaxPartial, 2 * bounds.max_abs_summand);
  for (int r = 1; r <= std::min(cap, 2 * kMaxHalf); ++r) {
    if (auto rep = find_exact(u, target, r, bound)) return {r, std::move(*rep)};
    if (r <= kWideLength && !bounds.max_abs_partial && wide > bound) {
      if (auto rep = find_exact(u, target, r, wide)) return {r, std::move(*rep)};
    }
  }
  throw ResourceError("no representation of " + n.get_str() + " found up to length " + std::to_string(cap));
}

nlohmann::json CensusReport::to_json() const {
  nlohmann::json misses_json = nlohmann::json::array();
  for (auto x : misses) misses_json.push_back(std::to_string(x));
  return {
      {"lo", lo.get_str()},
      {"hi", hi.get_str()},
      {"length", length},
      {"max_abs_summand", std::to_string(max_abs_summand)},
      {"max_abs_partial", std::to_string(max_abs_partial)},
      {"misses", misses_json},
      {"miss_count", misses.size()},
      {"note", "misses have no representation within the search bounds; this is not a proof of non-existence"},
      {"checkpoint", checkpoint_path},
      {"intervals_total", intervals_total},
      {"intervals_resumed", intervals_resumed},
      {"witnesses_checked", witnesses_checked},
  };
}

CensusReport census(const BigInt& lo, const BigInt& hi, int r, const SearchBounds& bounds,
                    const CensusOptions& options) {
  if (lo > hi) throw std::invalid_argument("census range is empty (lo > hi)");
  if (r < 1 || r > 2 * kMaxHalf) throw std::invalid_argument("length must be in [1, 8]");
  if (options.interval == 0) throw std::invalid_argument("census interval must be positive");
  const std::int64_t lo64 = checked_target(lo);
  const std::int64_t hi64 = checked_target(hi);

  CensusReport report;
  report.lo = lo;
  report.hi = hi;
  report.length = r;
  report.max_abs_summand = bounds.max_abs_summand;
  report.max_abs_partial = bounds.partial_for(abs(lo) > abs(hi) ? BigInt(abs(lo)) : BigInt(abs(hi)));
  report.checkpoint_path = options.checkpoint_path;

  CensusCheckpoint cp;
  cp.header = {lo64, hi64, static_cast<std::uint32_t>(r), report.max_abs_summand, report.max_abs_partial,
               options.interval};
  if (options.resume && !options.checkpoint_path.empty()) {
    auto saved = read_checkpoint(options.checkpoint_path);
    if (!(saved.header == cp.header)) {
      throw CheckpointError(options.checkpoint_path + " was written for different census parameters");
    }
    cp = std::move(saved);
  }

  const SummandUniverse u(bounds.max_abs_summand);
  const HalfSumIndex index(u, r, report.max_abs_partial);

  const u128 span = static_cast<u128>(static_cast<i128>(hi64) - lo64) + 1;
  report.intervals_total = static_cast<std::size_t>((span + options.interval - 1) / options.interval);
  std::vector<bool> covered;
  for (std::size_t k = 0; k < report.intervals_total; ++k) {
    const std::int64_t a = static_cast<std::int64_t>(lo64 + static_cast<i128>(k) * options.interval);
    const std::int64_t b = static_cast<std::int64_t>(std::min<i128>(static_cast<i128>(a) + options.interval - 1, hi64));
    auto done = std::find_if(cp.done.begin(), cp.done.end(), [&](const auto& iv) { return iv.a == a && iv.b == b; });
    if (done != cp.done.end()) {
      ++report.intervals_resumed;
      continue;
    }

    index.cover(a, b, covered);
    CensusCheckpoint::Interval iv{a, b, {}};
    std::optional<std::int64_t> first, last;
    for (std::size_t i = 0; i < covered.size(); ++i) {
      const std::int64_t n = a + static_cast<std::int64_t>(i);
      if (!covered[i]) {
        iv.misses.push_back(n);
      } else {
        if (!first) first = n;
        last = n;
      }
    }
    for (auto n : {first, last}) {
      if (!n) continue;
      auto m = index.match(*n);
      if (!m) throw std::logic_error("census coverage disagrees with pointwise matching");
      auto rep = index.witness(*n, *m);
      if (static_cast<int>(rep.length()) != r || !within(rep, bounds.max_abs_summand)) {
        throw std::logic_error("census witness violates its bounds");
      }
      ++report.witnesses_checked;
    }
    cp.done.push_back(std::move(iv));
    if (!options.checkpoint_path.empty()) write_checkpoint(options.checkpoint_path, cp);
  }

  std::sort(cp.done.begin(), cp.done.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& iv : cp.done) report.misses.insert(report.misses.end(), iv.misses.begin(), iv.misses.end());
  return report;
}

}  // namespace dbns
