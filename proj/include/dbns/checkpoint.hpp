#pragma once

// Census checkpoint file:
//
//   "DBNSCKP1"
//   record*       u32 little-endian payload length, then the payload
//   sha256        32 bytes over everything before it
//
// The first record is the header (type 1): lo, hi, r, summand bound,
// partial bound, interval size. Each later record (type 2) is one
// completed interval: a, b and its misses. Integers are little-endian.

#include <cstdint>
#include <string>
#include <vector>

namespace dbns {

struct CensusCheckpoint {
  struct Header {
    std::int64_t lo = 0, hi = 0;
    std::uint32_t length = 0;
    std::uint64_t max_abs_summand = 0;
    std::uint64_t max_abs_partial = 0;
    std::uint64_t interval = 0;
    bool operator==(const Header&) const = default;
  };
  struct Interval {
    std::int64_t a = 0, b = 0;
    std::vector<std::int64_t> misses;
  };

  Header header;
  std::vector<Interval> done;
};

/// Atomically replaces `path` (write to a sibling temp file, then rename).
void write_checkpoint(const std::string& path, const CensusCheckpoint& cp);

/// Throws CheckpointError on I/O failure, bad framing, or hash mismatch.
CensusCheckpoint read_checkpoint(const std::string& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace dbns
