#pragma once

// Doubly-primitive sumset intersection over Z/mZ for word-sized moduli.
//
// A doubly-primitive length-r representation of a residue n is a tuple
// (x1, x2, x3, ..., xr) with x1 in T2, x2 in T3 and the rest in T, summing
// to n. Writing r = 2u+1 or r = 2u, the tuple is split into two halves
//
//   odd  r:  S1 = T2 + T3 + (u-1) x T      S2 = u x T
//   even r:  S1 = T2 + (u-1) x T           S2 = T3 + (u-1) x T
//
// and n has such a representation iff S1 and n - S2 intersect.
//
// Each half is a list of materialized "bases" (all factors but the last)
// with a free last factor streamed in ascending value order through a
// per-base cursor. The value range [0, m) is cut into buckets; per bucket
// the smaller half is loaded into a filter plus hash table and the larger
// half is streamed against it, so only one bucket's slice is resident.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "dbns/modular.hpp"

namespace dbns {

/// Residues (x1, x2, x3, ..., xr): x1 in T2, x2 in T3, x3.. in T ascending.
using DpTuple = std::vector<std::uint64_t>;

struct EngineOptions {
  std::size_t memory_budget = std::size_t{2} << 30;
  unsigned threads = 1;
  /// Target number of hashed-side elements per bucket.
  std::size_t slice_target = std::size_t{1} << 18;
};

struct EngineStats {
  std::size_t buckets = 0;
  std::uint64_t streamed = 0;
  std::uint64_t hashed = 0;
  std::uint64_t hits = 0;
};

/// Largest length the split machinery accepts.
inline constexpr int kMaxDpLength = 8;

/// True iff `residue` has NO doubly-primitive length-r representation mod m.
/// Requires ctx.word_sized() and 2 <= r <= kMaxDpLength.
bool dp_intersection_empty(const ModContext& ctx, std::uint64_t residue, int r, const EngineOptions& opts = {},
                           EngineStats* stats = nullptr);

/// All doubly-primitive length-r representations of `residue` mod m,
/// duplicate-free, tail in ascending residue order, sorted.
std::vector<DpTuple> dp_solutions(const ModContext& ctx, std::uint64_t residue, int r,
                                  const EngineOptions& opts = {}, EngineStats* stats = nullptr);

/// Exact count of elements (with multiplicity) in each half for length r.
std::pair<std::uint64_t, std::uint64_t> half_sizes(const ModContext& ctx, int r);

}  // namespace dbns
