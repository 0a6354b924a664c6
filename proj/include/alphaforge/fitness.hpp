#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "alphaforge/prune.hpp"

namespace alphaforge {

/// Worst possible score; loses every comparison.
inline constexpr double kSentinelFitness = std::numeric_limits<double>::lowest();

enum class SentinelReason : std::uint8_t { None, Redundant, NonFinite, CutoffViolation };

const char* sentinel_reason_name(SentinelReason r);

struct FitnessRecord {
  double ic = kSentinelFitness;
  std::vector<double> val_portfolio_returns;
  std::optional<double> test_ic;
  std::vector<double> test_portfolio_returns;  // empty unless a test pass ran
  bool sentinel = true;
  SentinelReason reason = SentinelReason::None;

  // Diagnostics and metadata.
  std::uint64_t nan_days = 0;         // validation days with a degenerate correlation
  std::uint64_t pruned_op_count = 0;  // instructions removed before evaluation
  Fingerprint fingerprint;
  bool cache_hit = false;

  /// Sentinel record with empty return vectors.
  static FitnessRecord make_sentinel(SentinelReason why);

  /// Fitness used by selection: ic, or the sentinel score.
  double fitness() const { return sentinel ? kSentinelFitness : ic; }
};

}  // namespace alphaforge
