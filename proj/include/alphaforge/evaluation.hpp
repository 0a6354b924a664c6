#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "alphaforge/executor.hpp"
#include "alphaforge/fitness.hpp"
#include "alphaforge/metrics.hpp"
#include "alphaforge/panel.hpp"
#include "alphaforge/program.hpp"

namespace alphaforge {

/// Stable 64-bit key for a ticker (FNV-1a).
std::uint64_t ticker_key(const std::string& ticker);

/// Read-only view of a panel prepared for repeated evaluation: task layout
/// and, when it fits in memory, every sample's K x f x w feature block.
class EvaluationContext {
 public:
  EvaluationContext(std::shared_ptr<const MarketPanel> panel, const SearchSpaceConfig& search);

  const MarketPanel& panel() const { return *panel_; }
  const SearchSpaceConfig& search() const { return search_; }
  std::shared_ptr<const TaskLayout> layout() const { return layout_; }

  /// Feature block of one sample. `scratch` backs the result when blocks are
  /// not precomputed.
  std::span<const double> block(std::size_t sample, std::vector<double>& scratch) const;

 private:
  std::shared_ptr<const MarketPanel> panel_;
  SearchSpaceConfig search_;
  std::shared_ptr<const TaskLayout> layout_;
  std::vector<double> blocks_;
  std::size_t block_size_ = 0;
};

struct EvalConfig {
  BacktestConfig backtest;
  std::uint64_t seed = 0;  // seeds the executor's random draws
  bool include_test = false;
};

/// Predictions of one run: Setup, one training pass, then inference over
/// validation and test in date order.
struct AlphaRun {
  DayTaskMatrix train;
  DayTaskMatrix valid;
  DayTaskMatrix test;
  ExecutionDiagnostics diagnostics;
};

AlphaRun run_alpha(const AlphaProgram& p, const EvaluationContext& ctx, std::uint64_t seed,
                   bool include_test = true);

/// Labels of one split as a days x tasks matrix.
DayTaskMatrix split_labels(const MarketPanel& panel, Split s);

/// Effective basket size: min(top_n, K / 2).
int effective_top_n(const BacktestConfig& cfg, std::size_t n_tasks);

/// Trains for one epoch and scores on validation (and test when asked).
/// Non-finite validation predictions give a sentinel record.
FitnessRecord train_and_score(const AlphaProgram& p, const EvaluationContext& ctx, const EvalConfig& cfg);

}  // namespace alphaforge
