// dbns: double-base spans, representations, censuses and certificates.
//
// Exit codes: 0 proved / verified / complete, 2 inconclusive, 1 error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbns/certify.hpp"
#include "dbns/config.hpp"
#include "dbns/errors.hpp"
#include "dbns/modular.hpp"
#include "dbns/search.hpp"

using namespace dbns;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInconclusive = 2;

struct Flags {
  std::string config;
  std::string format;
  std::string memory_budget;
  std::string pool;
  std::string checkpoint_dir;
  std::string max_summand;
  std::string max_partial;
  unsigned threads = 0;
  bool progress = false;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg.load_file(f.config);
  cfg.apply_process_env();
  if (!f.format.empty()) cfg.set("format", f.format);
  if (!f.memory_budget.empty()) cfg.set("memory_budget", f.memory_budget);
  if (!f.pool.empty()) cfg.set("pool", f.pool);
  if (!f.checkpoint_dir.empty()) cfg.set("checkpoint_dir", f.checkpoint_dir);
  if (!f.max_summand.empty()) cfg.set("max_summand", f.max_summand);
  if (!f.max_partial.empty()) cfg.set("max_partial", f.max_partial);
  if (f.threads) cfg.threads = f.threads;
  cfg.validate();
  return cfg;
}

StrategyPool make_pool(const RunConfig& cfg) {
  StrategyPool pool = cfg.pool_path.empty() ? StrategyPool::table1() : StrategyPool::load(cfg.pool_path);
  pool.engine = cfg.engine();
  return pool;
}

RefuteOptions refute_options(const Flags& f) {
  RefuteOptions o;
  if (f.progress) {
    o.progress = [](int depth, const std::string& msg) { std::cerr << std::string(2 * depth, ' ') << msg << "\n"; };
  }
  return o;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string fixed2(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << (std::abs(x) < 0.005 ? 0.0 : x);
  return os.str();
}

std::string hint_for(int r) {
  return "no refutation with the current pool; try more moduli, e.g. `dbns moduli --sweep 300 300 --rank-length " +
         std::to_string(std::max(r, 2)) + "` and pass them with --pool";
}

int cmd_span(const RunConfig& cfg, const Flags& flags, const std::string& n_text) {
  const BigInt n = parse_bigint(n_text);
  const StrategyPool pool = make_pool(cfg);
  const SpanResult res = span_exact(n, pool, cfg.bounds, refute_options(flags));
  if (cfg.format == OutputFormat::Json) {
    print_json(res.to_json());
  } else {
    const char* status = res.status == SpanStatus::Proved         ? "proved"
                         : res.status == SpanStatus::ByConvention ? "by convention"
                                                                  : "upper bound only";
    std::cout << "span = " << res.span << " (" << status << ")\n";
    std::cout << "witness: " << res.witness.to_string() << "\n";
    if (res.status == SpanStatus::UpperBoundOnly) std::cout << hint_for(res.span - 1) << "\n";
  }
  return res.status == SpanStatus::UpperBoundOnly ? kInconclusive : kOk;
}

int cmd_represent(const RunConfig& cfg, const std::string& n_text, int r) {
  const BigInt n = parse_bigint(n_text);
  auto rep = find_representation(n, r, cfg.bounds);
  if (cfg.format == OutputFormat::Json) {
    json j{{"n", n.get_str()}, {"length", r}, {"found", rep.has_value()}};
    if (rep) {
      json summands = json::array();
      for (const auto& t : rep->summands) summands.push_back(t.value().get_str());
      j["summands"] = summands;
      j["class"] = to_string(classify(*rep));
    }
    print_json(j);
  } else if (rep) {
    std::cout << rep->to_string() << "  [" << to_string(classify(*rep)) << "]\n";
  } else {
    std::cout << "no length-" << r << " representation of " << n.get_str()
              << " found within the search bounds (this is not a proof that none exists)\n";
  }
  return rep ? kOk : kInconclusive;
}

int cmd_census(const RunConfig& cfg, const std::string& lo, const std::string& hi, int r, std::string checkpoint,
               bool resume, std::uint64_t interval) {
  CensusOptions opts;
  if (!checkpoint.empty() && !cfg.checkpoint_dir.empty() && std::filesystem::path(checkpoint).is_relative()) {
    checkpoint = (std::filesystem::path(cfg.checkpoint_dir) / checkpoint).string();
  }
  opts.checkpoint_path = checkpoint;
  opts.resume = resume;
  if (interval) opts.interval = interval;
  const auto start = std::chrono::steady_clock::now();
  const CensusReport rep = census(parse_bigint(lo), parse_bigint(hi), r, cfg.bounds, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cfg.format == OutputFormat::Json) {
    json j = rep.to_json();
    j["elapsed_seconds"] = secs;
    print_json(j);
  } else {
    std::cout << "census [" << rep.lo.get_str() << ", " << rep.hi.get_str() << "] at length " << r
              << "  (|summand| <= " << rep.max_abs_summand << ", |half-sum| <= " << rep.max_abs_partial << ")\n";
    std::cout << "intervals: " << rep.intervals_total << " (" << rep.intervals_resumed << " resumed), witnesses checked: "
              << rep.witnesses_checked << "\n";
    std::cout << "not found within bounds: " << rep.misses.size() << "\n";
    const std::size_t shown = std::min<std::size_t>(rep.misses.size(), 50);
    for (std::size_t i = 0; i < shown; ++i) std::cout << "  " << rep.misses[i] << "\n";
    if (shown < rep.misses.size()) std::cout << "  ... (" << rep.misses.size() - shown << " more)\n";
  }
  return rep.misses.empty() ? kOk : kInconclusive;
}

void print_profiles(const std::vector<ModulusProfile>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    json arr = json::array();
    for (const auto& p : rows) arr.push_back(to_json(p));
    print_json(arr);
    return;
  }
  std::cout << std::right << std::setw(5) << "a" << std::setw(5) << "b" << std::setw(26) << "m" << std::setw(10) << "t"
            << std::setw(7) << "t2" << std::setw(7) << "t3";
  for (int r = 2; r <= 5; ++r) std::cout << std::setw(9) << ("ln d" + std::to_string(r));
  for (int r = 2; r <= 5; ++r) std::cout << std::setw(9) << ("ln w" + std::to_string(r));
  std::cout << "\n";
  for (const auto& p : rows) {
    std::cout << std::setw(5) << p.a << std::setw(5) << p.b << std::setw(26) << p.m.get_str() << std::setw(10) << p.t
              << std::setw(7) << p.t2 << std::setw(7) << p.t3;
    for (int r = 2; r <= 5; ++r) std::cout << std::setw(9) << fixed2(p.ln_d.at(r));
    for (int r = 2; r <= 5; ++r) std::cout << std::setw(9) << (p.d_clamped.at(r) ? "-" : fixed2(p.ln_w.at(r)));
    std::cout << "\n";
  }
}

int cmd_moduli(const RunConfig& cfg, const std::vector<unsigned>& from, const std::vector<unsigned>& sweep,
               int rank_length, std::size_t max_t, std::size_t top) {
  std::vector<ModulusProfile> rows;
  const int r_hi = std::max(5, rank_length);
  ContextLimits limits;
  limits.max_cardinality = max_t;
  std::size_t skipped = 0;
  if (!from.empty()) {
    rows.push_back(modulus_from_exponents(from[0], from[1], 2, r_hi, limits));
  } else {
    for (unsigned a = 1; a <= sweep[0]; ++a) {
      for (unsigned b = 1; b <= sweep[1]; ++b) {
        try {
          rows.push_back(modulus_from_exponents(a, b, 2, r_hi, limits));
        } catch (const ResourceError&) {
          ++skipped;
        }
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [&](const ModulusProfile& x, const ModulusProfile& y) {
    return x.ln_w.at(rank_length) < y.ln_w.at(rank_length);
  });
  if (top && rows.size() > top) rows.resize(top);
  print_profiles(rows, cfg.format);
  if (skipped) std::cerr << skipped << " (a, b) pairs skipped: t(m) above " << max_t << "\n";
  return kOk;
}

int cmd_table1(const RunConfig& cfg) {
  const std::pair<unsigned, unsigned> rows[] = {{144, 432}, {288, 144}, {144, 144}, {72, 216}, {144, 48}, {36, 108}};
  std::vector<ModulusProfile> profiles;
  for (auto [a, b] : rows) profiles.push_back(modulus_from_exponents(a, b));
  if (cfg.format == OutputFormat::Json) {
    print_profiles(profiles, cfg.format);
    return kOk;
  }
  std::cout << std::right << std::setw(5) << "a" << std::setw(6) << "b" << std::setw(26) << "m";
  for (int r = 2; r <= 5; ++r) std::cout << std::setw(10) << ("ln d" + std::to_string(r));
  std::cout << "\n" << std::setw(37) << "";
  for (int r = 2; r <= 5; ++r) std::cout << std::setw(10) << ("ln w" + std::to_string(r));
  std::cout << "\n";
  for (const auto& p : profiles) {
    std::cout << std::setw(5) << p.a << std::setw(6) << p.b << std::setw(26) << p.m.get_str();
    for (int r = 2; r <= 5; ++r) std::cout << std::setw(10) << fixed2(p.ln_d.at(r));
    std::cout << "\n" << std::setw(37) << "";
    for (int r = 2; r <= 5; ++r) std::cout << std::setw(10) << (p.d_clamped.at(r) ? "-" : fixed2(p.ln_w.at(r)));
    std::cout << "\n";
  }
  return kOk;
}

int cmd_certify(const RunConfig& cfg, const Flags& flags, const std::string& n_text, int r,
                const std::string& output, bool verify) {
  const BigInt n = parse_bigint(n_text);
  const StrategyPool pool = make_pool(cfg);
  auto cert = refute_length(n, r, pool, refute_options(flags));
  if (!cert) {
    if (cfg.format == OutputFormat::Json) {
      print_json({{"n", n.get_str()}, {"r", r}, {"status", "inconclusive"}, {"hint", hint_for(r)}});
    } else {
      std::cout << "inconclusive: " << hint_for(r) << "\n";
    }
    return kInconclusive;
  }
  if (verify) {
    const VerifyReport rep = verify_certificate(*cert, cfg.engine());
    if (!rep.ok) {
      std::cerr << "internal error: emitted certificate fails verification at " << rep.path << ": " << rep.reason
                << "\n";
      return kError;
    }
  }
  const json j = to_json(*cert);
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << j.dump(2) << "\n";
    if (cfg.format == OutputFormat::Json) {
      print_json({{"n", n.get_str()}, {"r", r}, {"status", "proved"}, {"certificate", output}});
    } else {
      std::cout << n.get_str() << " has no representation of length " << r << "; certificate written to " << output
                << "\n";
    }
  } else {
    print_json(j);
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + " is not valid JSON: " + e.what());
  }
  const Certificate cert = certificate_from_json(j);
  const VerifyReport rep = verify_certificate(cert, cfg.engine());
  if (cfg.format == OutputFormat::Json) {
    json out{{"n", cert.n.get_str()}, {"r", cert.r}, {"verified", rep.ok}, {"leaves_checked", rep.leaves_checked}};
    if (!rep.ok) {
      out["path"] = rep.path;
      out["reason"] = rep.reason;
    }
    print_json(out);
  } else if (rep.ok) {
    std::cout << "verified: " << cert.n.get_str() << " has no representation of length " << cert.r << " ("
              << rep.leaves_checked << " leaves rechecked)\n";
  } else {
    std::cout << "verification FAILED at " << rep.path << ": " << rep.reason << "\n";
  }
  return rep.ok ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-base ({2,3}-integer) spans, representations and non-representability certificates"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "key=value configuration file");
  app.add_option("--format", flags.format, "output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--memory-budget", flags.memory_budget, "memory budget, e.g. 2GiB");
  app.add_option("--threads", flags.threads, "worker threads for the intersection engine");
  app.add_option("--pool", flags.pool, "strategy pool JSON file (default: the built-in table)");
  app.add_option("--checkpoint-dir", flags.checkpoint_dir, "directory for relative checkpoint paths");
  app.add_option("--max-summand", flags.max_summand, "largest |summand| searched, e.g. 2^61");
  app.add_option("--max-partial", flags.max_partial, "largest |half-sum| kept (default 2*|target|)");
  app.add_flag("--progress", flags.progress, "report refutation progress on stderr");

  std::string n_text, lo, hi, checkpoint, output, cert_path;
  int length = 0;
  bool resume = false, verify_after = false;
  std::uint64_t interval = 0;
  std::vector<unsigned> from, sweep;
  int rank_length = 5;
  std::size_t max_t = 2'000'000, top = 0;

  auto* span = app.add_subcommand("span", "span of N with witness and lower-bound certificate");
  span->add_option("N", n_text)->required();

  auto* represent = app.add_subcommand("represent", "find a representation of N of a given length");
  represent->add_option("N", n_text)->required();
  represent->add_option("--length,-r", length)->required()->check(CLI::Range(1, 8));

  auto* cens = app.add_subcommand("census", "find representations for every integer in [LO, HI]");
  cens->add_option("LO", lo)->required();
  cens->add_option("HI", hi)->required();
  cens->add_option("--length,-r", length)->required()->check(CLI::Range(1, 8));
  cens->add_option("--checkpoint", checkpoint, "checkpoint file");
  cens->add_flag("--resume", resume, "skip intervals already in the checkpoint");
  cens->add_option("--interval", interval, "integers per checkpointed interval");

  auto* moduli = app.add_subcommand("moduli", "modulus profiles from exponent pairs (a, b)");
  auto* from_opt = moduli->add_option("--from", from, "a b")->expected(2);
  auto* sweep_opt = moduli->add_option("--sweep", sweep, "amax bmax")->expected(2);
  from_opt->excludes(sweep_opt);
  moduli->add_option("--rank-length", rank_length, "sort rows by ln w at this length")->check(CLI::Range(2, 8));
  moduli->add_option("--max-t", max_t, "skip moduli with t(m) above this");
  moduli->add_option("--top", top, "print only the first rows");

  auto* table1 = app.add_subcommand("table1", "densities and work factors of the six reference moduli");

  auto* certify = app.add_subcommand("certify", "prove N has no representation of length R");
  certify->add_option("N", n_text)->required();
  certify->add_option("--length,-r", length)->required()->check(CLI::Range(0, 8));
  certify->add_option("--output,-o", output, "write the certificate here instead of stdout");
  certify->add_flag("--verify", verify_after, "verify the certificate before emitting it");

  auto* verify = app.add_subcommand("verify", "recheck a certificate");
  verify->add_option("CERT", cert_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    const RunConfig cfg = resolve(flags);
    if (*span) return cmd_span(cfg, flags, n_text);
    if (*represent) return cmd_represent(cfg, n_text, length);
    if (*cens) return cmd_census(cfg, lo, hi, length, checkpoint, resume, interval);
    if (*moduli) {
      if (from.empty() && sweep.empty()) throw std::invalid_argument("moduli needs --from a b or --sweep amax bmax");
      return cmd_moduli(cfg, from, sweep, rank_length, max_t, top);
    }
    if (*table1) return cmd_table1(cfg);
    if (*certify) return cmd_certify(cfg, flags, n_text, length, output, verify_after);
    if (*verify) return cmd_verify(cfg, cert_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
