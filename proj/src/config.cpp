#include "dbns/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "dbns/bigint.hpp"

namespace dbns {
namespace {

constexpr std::size_t kMinBudget = std::size_t{64} << 20;

const std::map<std::string, std::string> kEnvKeys = {
    {"DBNS_MEMORY_BUDGET", "memory_budget"}, {"DBNS_THREADS", "threads"},
    {"DBNS_FORMAT", "format"},               {"DBNS_POOL", "pool"},
    {"DBNS_CHECKPOINT_DIR", "checkpoint_dir"}, {"DBNS_MAX_SUMMAND", "max_summand"},
    {"DBNS_MAX_PARTIAL", "max_partial"},
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  BigInt v = parse_bigint(value);
  if (v < 0 || !v.fits_ulong_p()) throw std::invalid_argument(key + ": value out of range");
  return v.get_ui();
}

}  // namespace

std::size_t parse_byte_size(const std::string& text) {
  static const std::pair<const char*, std::size_t> units[] = {
      {"KiB", std::size_t{1} << 10}, {"MiB", std::size_t{1} << 20}, {"GiB", std::size_t{1} << 30}};
  const std::string t = trim(text);
  for (const auto& [suffix, scale] : units) {
    const std::string s(suffix);
    if (t.size() > s.size() && t.compare(t.size() - s.size(), s.size(), s) == 0) {
      return parse_u64("memory_budget", trim(t.substr(0, t.size() - s.size()))) * scale;
    }
  }
  return parse_u64("memory_budget", t);
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "memory_budget") {
    memory_budget_bytes = parse_byte_size(value);
  } else if (key == "threads") {
    threads = static_cast<unsigned>(parse_u64(key, value));
  } else if (key == "format") {
    if (value == "text") {
      format = OutputFormat::Text;
    } else if (value == "json") {
      format = OutputFormat::Json;
    } else {
      throw std::invalid_argument("format must be text or json");
    }
  } else if (key == "pool") {
    pool_path = value;
  } else if (key == "checkpoint_dir") {
    checkpoint_dir = value;
  } else if (key == "max_summand") {
    bounds.max_abs_summand = parse_u64(key, value);
  } else if (key == "max_partial") {
    bounds.max_abs_partial = parse_u64(key, value);
  } else {
    throw std::invalid_argument("unknown configuration key '" + key + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::apply_env(const std::map<std::string, std::string>& env) {
  for (const auto& [name, key] : kEnvKeys) {
    if (auto it = env.find(name); it != env.end()) set(key, it->second);
  }
}

void RunConfig::apply_process_env() {
  std::map<std::string, std::string> env;
  for (const auto& [name, key] : kEnvKeys) {
    if (const char* v = std::getenv(name.c_str())) env[name] = v;
  }
  apply_env(env);
}

void RunConfig::validate() const {
  if (memory_budget_bytes < kMinBudget) throw std::invalid_argument("memory budget must be at least 64 MiB");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  bounds.validate();
}

EngineOptions RunConfig::engine() const {
  EngineOptions o;
  o.memory_budget = memory_budget_bytes;
  o.threads = threads;
  return o;
}

}  // namespace dbns
