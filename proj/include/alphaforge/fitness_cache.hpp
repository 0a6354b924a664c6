#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "alphaforge/fitness.hpp"
#include "alphaforge/program.hpp"
#include "alphaforge/prune.hpp"

namespace alphaforge {

struct CacheCounters {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t pruned_redundant_alphas = 0;
};

/// Evaluates a pruned, non-redundant program.
using Evaluator = std::function<FitnessRecord(const AlphaProgram& pruned)>;

/// Fitness records keyed by the fingerprint of the pruned program. Safe for
/// concurrent use; two workers may evaluate the same fingerprint at once, in
/// which case the later store wins.
class FitnessCache {
 public:
  FitnessCache() = default;
  FitnessCache(const FitnessCache&) = delete;
  FitnessCache& operator=(const FitnessCache&) = delete;

  CacheCounters counters() const;
  std::size_t size() const;
  std::optional<FitnessRecord> find(const Fingerprint& f) const;
  void store(const Fingerprint& f, const FitnessRecord& r);

  /// Writes every non-sentinel record as (fingerprint, ic, returns).
  void save(const std::filesystem::path& path) const;
  /// Merges records from a file written by save(). Counters are untouched.
  void load(const std::filesystem::path& path);

 private:
  friend FitnessRecord lookup_or_evaluate(const AlphaProgram&, FitnessCache&, const Evaluator&);

  mutable std::mutex mu_;
  std::unordered_map<Fingerprint, FitnessRecord, FingerprintHash> records_;
  CacheCounters counters_;
};

/// Prunes p, returns a sentinel for redundant alphas without calling
/// `evaluate`, then serves the cached record or evaluates and stores.
/// Exceptions from `evaluate` propagate and leave the counters balanced.
FitnessRecord lookup_or_evaluate(const AlphaProgram& p, FitnessCache& cache,
                                 const Evaluator& evaluate);

}  // namespace alphaforge
