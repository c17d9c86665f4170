#pragma once

// Run configuration for the command-line tool. Values are layered:
// built-in defaults, then an optional key=value file, then DBNS_*
// environment variables, then command-line flags.
//
// File keys (and their environment names):
//   memory_budget    DBNS_MEMORY_BUDGET    bytes, or with KiB/MiB/GiB suffix
//   threads          DBNS_THREADS
//   format           DBNS_FORMAT           text | json
//   pool             DBNS_POOL             pool JSON file
//   checkpoint_dir   DBNS_CHECKPOINT_DIR
//   max_summand      DBNS_MAX_SUMMAND      e.g. 2^61
//   max_partial      DBNS_MAX_PARTIAL

#include <cstddef>
#include <map>
#include <string>

#include "dbns/intersect.hpp"
#include "dbns/search.hpp"

namespace dbns {

enum class OutputFormat { Text, Json };

struct RunConfig {
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
  SearchBounds bounds;
  std::string pool_path;  // empty: the built-in table pool
  std::string checkpoint_dir;
  OutputFormat format = OutputFormat::Text;
  unsigned threads = 1;

  /// Throws std::invalid_argument on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  /// Applies DBNS_* variables found in `env` (name -> value).
  void apply_env(const std::map<std::string, std::string>& env);
  void apply_process_env();
  /// Budget >= 64 MiB, threads >= 1, bounds representable.
  void validate() const;

  EngineOptions engine() const;
};

/// "4096", "64MiB", "2GiB", "512KiB".
std::size_t parse_byte_size(const std::string& text);

}  // namespace dbns
