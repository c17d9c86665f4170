#pragma once

// Constructive side: finding double-base representations by splitting the
// summands into two halves, enumerating bounded half-sums, and matching.
// Everything here is one-sided. A failed search only means nothing was
// found inside the bounds.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dbns/core23.hpp"

namespace dbns {

struct SearchBounds {
  /// Largest |summand| considered.
  std::uint64_t max_abs_summand = std::uint64_t{1} << 61;
  /// Largest |half-sum| kept; defaults to 2 * max |target|.
  std::optional<std::uint64_t> max_abs_partial;

  /// Throws ResourceError when the bounds exceed the 64-bit arithmetic.
  void validate() const;
  std::uint64_t partial_for(const BigInt& max_abs_target) const;
};

/// All {2,3}-integers with |value| <= max_abs_summand, indexed in key order
/// (see compare_key), plus a value-sorted view.
class SummandUniverse {
 public:
  explicit SummandUniverse(std::uint64_t max_abs_summand);

  std::size_t size() const { return by_key_.size(); }
  const TwoThreeInteger& at(std::size_t key_index) const { return by_key_[key_index]; }
  std::int64_t value(std::size_t key_index) const { return values_[key_index]; }
  /// Key index of a value, if it is a summand.
  std::optional<std::uint32_t> index_of(std::int64_t v) const;

  const std::vector<std::int64_t>& sorted_values() const { return sorted_values_; }
  std::uint32_t key_of_sorted(std::size_t i) const { return sorted_to_key_[i]; }

 private:
  std::vector<TwoThreeInteger> by_key_;
  std::vector<std::int64_t> values_;
  std::vector<std::int64_t> sorted_values_;
  std::vector<std::uint32_t> sorted_to_key_;
  std::unordered_map<std::int64_t, std::uint32_t> index_;
};

/// Distinct values of sums of exactly k summands (1 <= k <= 4) whose
/// absolute value is at most `max_abs_partial`, ascending.
std::vector<std::int64_t> half_sums(const SummandUniverse& universe, int k, std::uint64_t max_abs_partial);

/// Smallest (lexicographic in key order) nondecreasing k-tuple of summands
/// adding up to s.
std::optional<std::vector<TwoThreeInteger>> min_tuple(const SummandUniverse& universe, std::int64_t s, int k);

bool is_length1(const BigInt& n);

/// Half-sum sets for length r: the larger half has ceil(r/2) summands, the
/// smaller floor(r/2) (for r = 1 the smaller half is {0}). Both are bounded
/// by the partial-sum bound derived from `max_abs_target`.
class HalfSumIndex {
 public:
  HalfSumIndex(const SummandUniverse& universe, int r, std::uint64_t max_abs_partial);

  int length() const { return k_large_ + k_small_; }
  std::uint64_t max_abs_partial() const { return bound_; }
  const std::vector<std::int64_t>& large() const { return large_; }
  const std::vector<std::int64_t>& small() const { return small_; }

  /// (h_large, h_small) with h_large + h_small = n, choosing the smallest
  /// (|h_small|, h_small); nullopt if n is not covered.
  std::optional<std::pair<std::int64_t, std::int64_t>> match(std::int64_t n) const;

  /// Like match, but minimizes max(|h_large|, |h_small|), then the order
  /// of match. Used for pointwise witnesses.
  std::optional<std::pair<std::int64_t, std::int64_t>> best_match(std::int64_t n) const;

  /// Length-r representation built from a match, each half the
  /// lexicographically smallest tuple for its value.
  Representation witness(std::int64_t n, std::pair<std::int64_t, std::int64_t> m) const;

  /// Marks covered[i] for every n = lo + i in [lo, hi] that is covered.
  void cover(std::int64_t lo, std::int64_t hi, std::vector<bool>& covered) const;

 private:
  const SummandUniverse* universe_;
  int k_large_, k_small_;
  std::uint64_t bound_;
  std::vector<std::int64_t> large_, small_;
  std::vector<std::int64_t> small_by_abs_;
};

/// A length-r representation with every summand and both half-sums within
/// bounds, or nullopt when none was found (not a proof of non-existence).
/// Matching follows HalfSumIndex::match and HalfSumIndex::witness. If no
/// length-r match exists the search falls back to lengthening a shorter
/// representation.
std::optional<Representation> find_representation(const BigInt& n, int r, const SearchBounds& bounds = {});

struct SpanUpper {
  int length;
  Representation witness;
};

/// Smallest r <= cap for which find_representation succeeds. For r <= 4,
/// when no partial bound was set explicitly, a failed search is retried
/// with half-sums up to twice the summand bound. Throws ResourceError past
/// the cap. n = 0 yields the conventional 2 - 2.
SpanUpper span_upper(const BigInt& n, const SearchBounds& bounds = {}, int cap = 8);

struct CensusOptions {
  std::string checkpoint_path;  // empty: no checkpointing
  bool resume = false;
  std::uint64_t interval = std::uint64_t{1} << 20;
};

struct CensusReport {
  BigInt lo, hi;
  int length = 0;
  std::uint64_t max_abs_summand = 0;
  std::uint64_t max_abs_partial = 0;
  /// Integers in [lo, hi] for which no length-r representation was found
  /// within the bounds, ascending.
  std::vector<std::int64_t> misses;
  std::string checkpoint_path;
  std::size_t intervals_total = 0;
  std::size_t intervals_resumed = 0;
  /// Witnesses rechecked from the census sets (first and last covered
  /// integer of each interval).
  std::size_t witnesses_checked = 0;

  nlohmann::json to_json() const;
};

/// Marks every n in [lo, hi] of the form h1 + h2 with h1, h2 bounded
/// half-sums of the two halves of r. The half-sum sets are built once for
/// the whole range. Checkpoints after each completed interval when a path
/// is given; with `resume`, completed intervals are skipped.
CensusReport census(const BigInt& lo, const BigInt& hi, int r, const SearchBounds& bounds = {},
                    const CensusOptions& options = {});

}  // namespace dbns
