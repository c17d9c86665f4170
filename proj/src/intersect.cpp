#include "dbns/intersect.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dbns/errors.hpp"

namespace dbns {
namespace {

using u64 = std::uint64_t;
using u32 = std::uint32_t;

enum class Role : std::uint8_t { Two, Three, Any };

struct HalfSpec {
  std::vector<Role> factors;  // last factor is streamed
  bool negated = false;       // elements are -x_i (the "n - S2" half)
};

std::pair<HalfSpec, HalfSpec> split_for_length(int r) {
  if (r < 2 || r > kMaxDpLength) {
    throw std::invalid_argument("doubly-primitive length must be in [2, " + std::to_string(kMaxDpLength) + "]");
  }
  const int u = r / 2;
  HalfSpec first{{Role::Two}, false};
  HalfSpec second{{}, true};
  if (r % 2 == 1) {
    first.factors.push_back(Role::Three);
    first.factors.insert(first.factors.end(), u - 1, Role::Any);
    second.factors.assign(u, Role::Any);
  } else {
    first.factors.insert(first.factors.end(), u - 1, Role::Any);
    second.factors.push_back(Role::Three);
    second.factors.insert(second.factors.end(), u - 1, Role::Any);
  }
  return {first, second};
}

const std::vector<u64>& set_for(const ModContext& ctx, Role role) {
  switch (role) {
    case Role::Two: return ctx.twos64;
    case Role::Three: return ctx.threes64;
    case Role::Any: break;
  }
  return ctx.all64;
}

inline u64 add_mod(u64 a, u64 b, u64 m) {
  u64 s = a + b;
  return s >= m ? s - m : s;
}

/// One half of the split: materialized bases plus a streamed last factor.
/// Element values are offset + sum of factor elements (mod m); the "Any"
/// factors are taken with nondecreasing indices so every multiset appears
/// once.
struct Side {
  std::vector<Role> base_roles;
  Role free_role = Role::Any;
  const std::vector<u64>* free = nullptr;
  bool negated = false;

  std::vector<u64> base_value;
  std::vector<u32> base_parts;  // base_roles.size() indices per base
  std::vector<u32> free_begin;
  u64 total = 0;

  std::size_t bases() const { return base_value.size(); }
};

Side build_side(const ModContext& ctx, const HalfSpec& spec, u64 offset, std::size_t memory_budget) {
  Side side;
  side.base_roles.assign(spec.factors.begin(), spec.factors.end() - 1);
  side.free_role = spec.factors.back();
  side.free = &set_for(ctx, side.free_role);
  side.negated = spec.negated;
  const u64 m = static_cast<u64>(ctx.m);
  const std::size_t arity = side.base_roles.size();
  const std::size_t bytes_per_base = 8 + 4 + 4 * arity + 32;

  std::vector<u32> parts(arity);
  auto recurse = [&](auto&& self, std::size_t level, u64 value, long last_any) -> void {
    if (level == arity) {
      u32 begin = (side.free_role == Role::Any && last_any >= 0) ? static_cast<u32>(last_any) : 0;
      side.base_value.push_back(value);
      side.base_parts.insert(side.base_parts.end(), parts.begin(), parts.end());
      side.free_begin.push_back(begin);
      side.total += side.free->size() - begin;
      if (side.base_value.size() * bytes_per_base > memory_budget) {
        throw ResourceError("half-sumset bases exceed the memory budget");
      }
      return;
    }
    const Role role = side.base_roles[level];
    const auto& set = set_for(ctx, role);
    std::size_t start = (role == Role::Any && last_any >= 0) ? static_cast<std::size_t>(last_any) : 0;
    for (std::size_t i = start; i < set.size(); ++i) {
      parts[level] = static_cast<u32>(i);
      self(self, level + 1, add_mod(value, set[i], m), role == Role::Any ? static_cast<long>(i) : last_any);
    }
  };
  recurse(recurse, 0, offset % m, -1);
  return side;
}

/// Walks one base's elements in ascending value order. With c the base
/// value and F the sorted free factor, the values c + F[k] (mod m) for
/// k >= begin form two ascending runs: the wrapped run k in [wrap, n)
/// (values below c) followed by k in [begin, wrap).
struct Cursor {
  u64 c;
  u32 begin;
  u32 wrap;
  u32 pos;
  u32 len;
  u32 len_a;
};

Cursor make_cursor(const Side& side, std::size_t b, u64 m, u64 lo) {
  const auto& f = *side.free;
  Cursor cur{};
  cur.c = side.base_value[b];
  cur.begin = side.free_begin[b];
  const auto first = f.begin() + cur.begin;
  auto wrap_it = cur.c == 0 ? f.end() : std::lower_bound(first, f.end(), m - cur.c);
  cur.wrap = static_cast<u32>(wrap_it - f.begin());
  cur.len = static_cast<u32>(f.size() - cur.begin);
  cur.len_a = static_cast<u32>(f.size() - cur.wrap);
  // position = number of elements with value < lo
  if (lo < cur.c) {
    cur.pos = static_cast<u32>(std::lower_bound(wrap_it, f.end(), lo + m - cur.c) - wrap_it);
  } else {
    cur.pos = cur.len_a + static_cast<u32>(std::lower_bound(first, wrap_it, lo - cur.c) - first);
  }
  return cur;
}

/// Per-bucket membership structure for the hashed half: a blocked Bloom
/// filter in front of an open-addressing table (or an exact bitmap when the
/// whole of Z/mZ is small enough).
class SliceIndex {
 public:
  void build(const std::vector<u64>& values, u64 m, bool whole_range) {
    use_bitmap_ = whole_range && m <= (u64{1} << 24);
    if (use_bitmap_) {
      bitmap_.assign((m + 63) / 64, 0);
      for (u64 v : values) bitmap_[v >> 6] |= u64{1} << (v & 63);
      return;
    }
    std::size_t words = std::bit_ceil(std::max<std::size_t>(1, values.size() / 4));
    filter_mask_ = words - 1;
    filter_.assign(words, 0);
    std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, 2 * values.size()));
    table_shift_ = 64 - static_cast<unsigned>(std::countr_zero(cap));
    table_mask_ = cap - 1;
    table_.assign(cap, kEmpty);
    for (u64 v : values) {
      const u64 h = mix(v);
      filter_[filter_word(h)] |= filter_mask(h);
      std::size_t i = static_cast<std::size_t>(h >> table_shift_);
      while (table_[i] != kEmpty && table_[i] != v) i = (i + 1) & table_mask_;
      table_[i] = v;
    }
  }

  bool contains(u64 v) const {
    if (use_bitmap_) return (bitmap_[v >> 6] >> (v & 63)) & 1;
    const u64 h = mix(v);
    const u64 mask = filter_mask(h);
    if ((filter_[filter_word(h)] & mask) != mask) return false;
    std::size_t i = static_cast<std::size_t>(h >> table_shift_);
    while (table_[i] != kEmpty) {
      if (table_[i] == v) return true;
      i = (i + 1) & table_mask_;
    }
    return false;
  }

 private:
  static constexpr u64 kMul = 0x9E3779B97F4A7C15ULL;
  static constexpr u64 kEmpty = ~u64{0};

  static u64 mix(u64 v) {
    v = (v ^ (v >> 31)) * kMul;
    return v ^ (v >> 32);
  }
  // table index uses the top bits, the filter word the middle, the two
  // filter bit positions the bottom twelve
  std::size_t filter_word(u64 h) const { return static_cast<std::size_t>(h >> 12) & filter_mask_; }
  static u64 filter_mask(u64 h) { return (u64{1} << (h & 63)) | (u64{1} << ((h >> 6) & 63)); }

  bool use_bitmap_ = false;
  std::vector<u64> bitmap_;
  std::vector<u64> filter_;
  std::size_t filter_mask_ = 0;
  std::vector<u64> table_;
  unsigned table_shift_ = 0;
  std::size_t table_mask_ = 0;
};

struct Hit {
  u64 value;
  u32 base;
  u32 k;
};

struct JoinResult {
  bool any = false;
  std::vector<Hit> hits;
  EngineStats stats;
};

class Join {
 public:
  Join(const Side& streamed, const Side& hashed, u64 m, std::size_t buckets, bool stop_at_first)
      : streamed_(streamed), hashed_(hashed), m_(m), buckets_(buckets), stop_at_first_(stop_at_first) {}

  JoinResult run(unsigned threads) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(buckets_)));
    if (threads == 1) {
      work(0, buckets_);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        std::size_t b0 = buckets_ * t / threads, b1 = buckets_ * (t + 1) / threads;
        pool.emplace_back([this, b0, b1] { work(b0, b1); });
      }
    }
    result_.any = found_.load();
    result_.stats.buckets = buckets_;
    return std::move(result_);
  }

 private:
  u64 bound(std::size_t b) const {
    return static_cast<u64>(static_cast<u128>(m_) * b / buckets_);
  }

  void work(std::size_t b0, std::size_t b1) {
    const u64 start = bound(b0);
    std::vector<Cursor> s_cur(streamed_.bases()), h_cur(hashed_.bases());
    for (std::size_t i = 0; i < s_cur.size(); ++i) s_cur[i] = make_cursor(streamed_, i, m_, start);
    for (std::size_t i = 0; i < h_cur.size(); ++i) h_cur[i] = make_cursor(hashed_, i, m_, start);

    const u64* sf = streamed_.free->data();
    const u64* hf = hashed_.free->data();
    std::vector<u64> slice;
    SliceIndex index;
    std::vector<Hit> local_hits;
    EngineStats local;

    for (std::size_t b = b0; b < b1; ++b) {
      if (stop_at_first_ && found_.load(std::memory_order_relaxed)) break;
      const u64 hi = bound(b + 1);

      slice.clear();
      for (auto& c : h_cur) {
        while (c.pos < c.len) {
          u64 v = c.pos < c.len_a ? c.c + hf[c.wrap + c.pos] - m_ : c.c + hf[c.begin + (c.pos - c.len_a)];
          if (v >= hi) break;
          slice.push_back(v);
          ++c.pos;
        }
      }
      local.hashed += slice.size();
      index.build(slice, m_, buckets_ == 1);

      for (std::size_t i = 0; i < s_cur.size(); ++i) {
        Cursor& c = s_cur[i];
        const u64 cbase = c.c;
        while (c.pos < c.len) {
          u32 k;
          u64 v;
          if (c.pos < c.len_a) {
            k = c.wrap + c.pos;
            v = cbase + sf[k] - m_;
          } else {
            k = c.begin + (c.pos - c.len_a);
            v = cbase + sf[k];
          }
          if (v >= hi) break;
          ++c.pos;
          ++local.streamed;
          if (index.contains(v)) {
            ++local.hits;
            found_.store(true, std::memory_order_relaxed);
            if (stop_at_first_) break;
            local_hits.push_back({v, static_cast<u32>(i), k});
          }
        }
        if (stop_at_first_ && found_.load(std::memory_order_relaxed)) break;
      }
    }

    std::lock_guard lock(mutex_);
    result_.hits.insert(result_.hits.end(), local_hits.begin(), local_hits.end());
    result_.stats.streamed += local.streamed;
    result_.stats.hashed += local.hashed;
    result_.stats.hits += local.hits;
  }

  const Side& streamed_;
  const Side& hashed_;
  u64 m_;
  std::size_t buckets_;
  bool stop_at_first_;
  std::atomic<bool> found_{false};
  std::mutex mutex_;
  JoinResult result_;
};

struct Plan {
  Side streamed;
  Side hashed;
  std::size_t buckets = 1;
};

Plan make_plan(const ModContext& ctx, u64 residue, int r, const EngineOptions& opts) {
  if (!ctx.word_sized()) throw std::invalid_argument("intersection engine needs a modulus below 2^63");
  const u64 m = static_cast<u64>(ctx.m);
  auto [spec1, spec2] = split_for_length(r);
  Side s1 = build_side(ctx, spec1, 0, opts.memory_budget);
  Side s2 = build_side(ctx, spec2, residue % m, opts.memory_budget);

  Plan plan;
  if (s1.total >= s2.total) {
    plan.streamed = std::move(s1);
    plan.hashed = std::move(s2);
  } else {
    plan.streamed = std::move(s2);
    plan.hashed = std::move(s1);
  }

  const unsigned threads = std::max(1u, opts.threads);
  const std::size_t cursor_bytes = (plan.streamed.bases() + plan.hashed.bases()) * sizeof(Cursor) * threads;
  if (cursor_bytes > opts.memory_budget) throw ResourceError("cursor state exceeds the memory budget");
  // ~8 bytes of slice, 16 of table and 2 of filter per hashed element
  const std::size_t per_element = 26 * threads;
  const std::size_t room = opts.memory_budget - cursor_bytes;
  std::size_t slice = std::max<std::size_t>(1, std::min(opts.slice_target, room / per_element));
  if (room / per_element < 1024 && plan.hashed.total > slice) {
    throw ResourceError("memory budget too small for a single hashed bucket");
  }
  u64 buckets = (plan.hashed.total + slice - 1) / slice;
  plan.buckets = static_cast<std::size_t>(std::clamp<u64>(buckets, 1, std::max<u64>(1, m)));
  return plan;
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> half_sizes(const ModContext& ctx, int r) {
  auto [spec1, spec2] = split_for_length(r);
  Side s1 = build_side(ctx, spec1, 0, ~std::size_t{0});
  Side s2 = build_side(ctx, spec2, 0, ~std::size_t{0});
  return {s1.total, s2.total};
}

bool dp_intersection_empty(const ModContext& ctx, std::uint64_t residue, int r, const EngineOptions& opts,
                           EngineStats* stats) {
  Plan plan = make_plan(ctx, residue, r, opts);
  Join join(plan.streamed, plan.hashed, static_cast<u64>(ctx.m), plan.buckets, true);
  JoinResult res = join.run(opts.threads);
  if (stats) *stats = res.stats;
  return !res.any;
}

std::vector<DpTuple> dp_solutions(const ModContext& ctx, std::uint64_t residue, int r, const EngineOptions& opts,
                                  EngineStats* stats) {
  Plan plan = make_plan(ctx, residue, r, opts);
  const u64 m = static_cast<u64>(ctx.m);
  Join join(plan.streamed, plan.hashed, m, plan.buckets, false);
  JoinResult res = join.run(opts.threads);
  if (stats) *stats = res.stats;

  auto element = [&](const Side& side, std::size_t base, std::size_t j) {
    const Role role = side.base_roles[j];
    return set_for(ctx, role)[side.base_parts[base * side.base_roles.size() + j]];
  };
  auto append = [&](const Side& side, std::size_t base, u64 free_value, std::vector<std::pair<Role, u64>>& out) {
    auto put = [&](Role role, u64 y) { out.emplace_back(role, side.negated ? (y == 0 ? 0 : m - y) : y); };
    for (std::size_t j = 0; j < side.base_roles.size(); ++j) put(side.base_roles[j], element(side, base, j));
    put(side.free_role, free_value);
  };

  std::vector<DpTuple> out;
  std::vector<std::pair<Role, u64>> parts;
  const Side& hs = plan.hashed;
  const auto& hf = *hs.free;
  for (const Hit& hit : res.hits) {
    for (std::size_t b = 0; b < hs.bases(); ++b) {
      const u64 c = hs.base_value[b];
      const u64 want = hit.value >= c ? hit.value - c : hit.value + m - c;
      auto it = std::lower_bound(hf.begin() + hs.free_begin[b], hf.end(), want);
      if (it == hf.end() || *it != want) continue;
      parts.clear();
      append(plan.streamed, hit.base, (*plan.streamed.free)[hit.k], parts);
      append(hs, b, want, parts);
      DpTuple tuple(2, 0);
      std::vector<u64> tail;
      for (const auto& [role, x] : parts) {
        if (role == Role::Two) tuple[0] = x;
        else if (role == Role::Three) tuple[1] = x;
        else tail.push_back(x);
      }
      std::sort(tail.begin(), tail.end());
      tuple.insert(tuple.end(), tail.begin(), tail.end());
      out.push_back(std::move(tuple));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace dbns
