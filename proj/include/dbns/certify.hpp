#pragma once

// Non-representability certificates.
//
// A certificate for (n, r) is a case-split tree. At length r >= 2 a node
// must show that n has no doubly-primitive representation of length r
// (a modular refutation), that (n+1)/6 and (n-1)/6 have no representation
// of length r-1 whenever they are integers, and that for every
// {2,3}-integer d > 1 dividing n, n/d has no primitive representation of
// length r. Length 1 reduces to a membership test.
//
// Modular refutations come in two forms. Direct: the residue of n has no
// doubly-primitive length-r representation mod m (m < 2^63). Lifted: all
// such representations mod a divisor m0 of m are listed, and none of them
// lifts to a representation of n mod m.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbns/core23.hpp"
#include "dbns/intersect.hpp"
#include "dbns/modular.hpp"
#include "dbns/search.hpp"

namespace dbns {

inline constexpr const char* kCertificateFormat = "dbns-certificate/1";
inline constexpr const char* kToolVersion = "0.1.0";

struct PoolEntry {
  std::string label;
  unsigned a = 0, b = 0;  // source exponents, 0 when m was given directly
  BigInt m;
  /// For m >= 2^63: refute mod m0 = m / lift_divisor, then lift to m.
  std::optional<BigInt> lift_divisor;
};

/// One way of attacking a length-r subgoal.
struct Strategy {
  const PoolEntry* entry = nullptr;
  double ln_w = 0;  // work factor at this length (mod m0 for lifts)
  bool lifted = false;
};

/// Moduli available to refute_length, with lazily built contexts.
class StrategyPool {
 public:
  StrategyPool();
  explicit StrategyPool(std::vector<PoolEntry> entries, ContextLimits limits = {});

  /// The six moduli of the published table; (144, 432) lifts through
  /// m / 408.
  static StrategyPool table1();
  /// {"moduli": [{"label"?, "a", "b"} | {"label"?, "m"}, "lift_divisor"?], ...}
  static StrategyPool from_json(const nlohmann::json& j);
  static StrategyPool load(const std::string& path);
  nlohmann::json to_json() const;

  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::vector<std::string> labels() const;

  /// Entries whose expected doubly-primitive density at length r is below
  /// 1, ordered by ascending work factor. Entries that are too large for a
  /// word and have no lift divisor are left out.
  std::vector<Strategy> strategies(int r) const;

  /// Cached context; safe to call from several threads.
  const ModContext& context(const BigInt& m) const;

  EngineOptions engine;

 private:
  struct Cache;

  std::vector<PoolEntry> entries_;
  ContextLimits limits_;
  std::shared_ptr<Cache> cache_;
};

struct DpRefutation {
  enum class Mode { Direct, Lifted };

  BigInt n;
  int r = 0;
  Mode mode = Mode::Direct;
  BigInt m;   // the modulus the refutation holds for
  BigInt m0;  // lifted only
  /// Lifted only: every doubly-primitive representation of n mod m0, each
  /// with the sizes of its fibers in T2(m), T3(m), T(m) per position.
  std::vector<DpTuple> tuples;
  std::vector<std::vector<std::uint32_t>> fiber_sizes;
};

struct CertNode;
using CertPtr = std::shared_ptr<const CertNode>;

struct CertChild {
  /// "dp", "plus" ((n+1)/6 at r-1), "minus" ((n-1)/6 at r-1), "divisor".
  std::string role;
  BigInt d;  // divisor role only
  CertPtr node;
};

struct CertNode {
  enum class Kind {
    NoLength0,       // r = 0: nothing has an empty representation
    NoLength1,       // r = 1: n is not a {2,3}-integer
    NoDp,            // modular refutation of doubly-primitive representations
    CaseSplit,       // all length-r representations
    PrimitiveSplit,  // primitive length-r representations only
    Vacuous,         // case does not apply (6 does not divide n +- 1)
  };

  Kind kind = Kind::Vacuous;
  BigInt n;
  int r = 0;
  std::optional<DpRefutation> dp;
  std::vector<CertChild> children;
};

const char* to_string(CertNode::Kind k);

struct CertificateMetadata {
  std::string tool_version = kToolVersion;
  std::vector<std::string> pool;
  std::string created;  // ISO 8601 UTC
  double elapsed_seconds = 0;
};

struct Certificate {
  BigInt n;
  int r = 0;
  CertPtr root;
  CertificateMetadata metadata;
};

nlohmann::json to_json(const Certificate& cert);
/// Throws MalformedCertificate with a JSON-pointer-like path.
Certificate certificate_from_json(const nlohmann::json& j);

/// True iff `residue` has no doubly-primitive length-r representation mod
/// ctx.m. Requires a word-sized context.
bool dp_refute_direct(const ModContext& ctx, const BigInt& residue, int r, const EngineOptions& opts = {});

/// Every doubly-primitive length-r representation of `residue` mod ctx.m.
std::vector<DpTuple> dp_enumerate(const ModContext& ctx, const BigInt& residue, int r,
                                  const EngineOptions& opts = {});

/// Enumerates mod m0 and tries to lift each tuple to mod m. Returns the
/// refutation when no tuple lifts. Throws std::invalid_argument unless m0
/// divides m.
/// Also returns nullopt when more than `max_tuples` tuples exist mod m0.
std::optional<DpRefutation> lift_refute(const BigInt& n, int r, const ModContext& ctx0, const ModContext& ctx,
                                        const EngineOptions& opts = {}, std::size_t max_tuples = 1'000'000);
std::optional<DpRefutation> lift_refute(const BigInt& n, int r, const BigInt& m0, const BigInt& m,
                                        const EngineOptions& opts = {}, std::size_t max_tuples = 1'000'000);

/// Progress callback: (depth, description).
using ProgressFn = std::function<void(int, const std::string&)>;

struct RefuteOptions {
  ProgressFn progress;
  /// Largest number of mod-m0 tuples a lifted refutation may record.
  std::size_t max_lift_tuples = 1'000'000;
  /// span_exact: recheck the lower-bound certificate before reporting it.
  bool verify = true;
};

/// Recursive refutation tree showing n >= 0 has no length-r
/// representation, or nullopt when some subgoal could not be discharged
/// with the pool. nullopt is inconclusive, never a claim of
/// representability.
std::optional<Certificate> refute_length(const BigInt& n, int r, const StrategyPool& pool,
                                         const RefuteOptions& options = {});

struct VerifyReport {
  bool ok = false;
  std::string path;    // node where verification failed
  std::string reason;  // empty when ok
  std::size_t leaves_checked = 0;
};

/// Rechecks every leaf from scratch with a reference intersection that is
/// independent of the engine, and checks that every node covers all cases.
/// Metadata is ignored.
VerifyReport verify_certificate(const Certificate& cert, const EngineOptions& opts = {});

enum class SpanStatus { Proved, UpperBoundOnly, ByConvention };
const char* to_string(SpanStatus s);

struct SpanResult {
  BigInt n;
  int span = 0;
  Representation witness;
  std::optional<Certificate> lower_bound;  // refutes length span - 1
  SpanStatus status = SpanStatus::UpperBoundOnly;

  nlohmann::json to_json() const;
};

/// Witness from span_upper plus a refutation at one less. For n = 0 the
/// span is 2 by convention (2 - 2). Negative n is handled as -n. With
/// options.verify the certificate must pass verify_certificate to count;
/// a failure throws std::logic_error.
SpanResult span_exact(const BigInt& n, const StrategyPool& pool, const SearchBounds& bounds = {},
                      const RefuteOptions& options = {});

}  // namespace dbns
