#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "alphaforge/program.hpp"

namespace alphaforge {

enum class Stage : std::uint8_t { Train, Infer };

enum class Granularity : std::uint8_t { Sector = 0, Industry = 1 };

/// Cross-sectional structure of the task set: group ids per granularity and a
/// stable per-task key used to derive per-task random streams.
struct TaskLayout {
  std::vector<int> sector;
  std::vector<int> industry;
  std::vector<std::uint64_t> keys;

  /// Layout with every task in group 0 and keys 0..n-1.
  static TaskLayout uniform(std::size_t n_tasks);
  std::size_t size() const { return keys.size(); }
  const std::vector<int>& groups(Granularity g) const {
    return g == Granularity::Sector ? sector : industry;
  }
};

// ---------------------------------------------------------------------------
// Relation and temporal primitives. Exposed for direct testing.

/// Normalized average-tie rank within each group (all tasks when `groups` is
/// empty): zero-based rank / (population - 1), singleton populations -> 0.5.
/// NaN ranks below every number. Returns the number of NaN inputs.
std::size_t cross_sectional_rank(std::span<const double> values, std::span<const int> groups,
                                 std::span<double> out);
std::vector<double> cross_sectional_rank(std::span<const double> values,
                                         std::span<const int> groups = {});

/// value - mean(values in the same group).
void group_demean(std::span<const double> values, std::span<const int> groups,
                  std::span<double> out);
std::vector<double> group_demean(std::span<const double> values, std::span<const int> groups);

/// Trailing history of one ts-rank instruction for one task.
struct TsRankBuffer {
  std::deque<double> history;
};

/// Fraction of buffered values strictly below `current` (0.5 when empty); then
/// appends `current`, keeping at most window - 1 values.
double ts_rank(TsRankBuffer& buffer, double current, int window);

// ---------------------------------------------------------------------------

struct ExecutionDiagnostics {
  std::uint64_t instructions_executed = 0;  // instruction x task count
  std::uint64_t nan_rank_inputs = 0;
  std::uint64_t steps = 0;
};

/// Register files for K tasks plus ts-rank histories. Registers are laid out
/// bank-major across tasks so cross-task ops read one contiguous slice.
class ExecutionState {
 public:
  ExecutionState(const SearchSpaceConfig& cfg, std::shared_ptr<const TaskLayout> layout,
                 std::uint64_t seed);

  /// Zeroes every register and clears ts-rank histories and counters.
  void reset();

  std::size_t n_tasks() const { return n_tasks_; }
  const SearchSpaceConfig& config() const { return cfg_; }
  const TaskLayout& layout() const { return *layout_; }
  const ExecutionDiagnostics& diagnostics() const { return diag_; }

  double scalar(std::size_t task, int index) const { return scalars_[index * n_tasks_ + task]; }
  std::span<const double> vector(std::size_t task, int index) const;
  /// For m0 this may alias the feature block of the last timestep.
  std::span<const double> matrix(std::size_t task, int index) const;

  /// Scalar register across tasks.
  std::span<const double> scalar_slice(int index) const {
    return {scalars_.data() + index * n_tasks_, n_tasks_};
  }

 private:
  friend class Interpreter;
  friend std::span<const double> execute_timestep(const AlphaProgram&, ExecutionState&,
                                                  std::span<const double>,
                                                  std::optional<std::span<const double>>, Stage);

  SearchSpaceConfig cfg_;
  std::shared_ptr<const TaskLayout> layout_;
  std::uint64_t seed_;
  std::size_t n_tasks_;
  std::size_t vec_len_;
  std::size_t mat_len_;

  std::vector<double> scalars_;
  std::vector<double> vectors_;
  std::vector<double> matrices_;
  const double* env_features_ = nullptr;  // K x f x w block of the current step
  bool m0_local_ = true;                  // m0 holds a program write rather than env data

  std::array<std::vector<std::vector<TsRankBuffer>>, 3> ts_buffers_;
  std::uint64_t step_ = 0;
  ExecutionDiagnostics diag_;
  std::vector<double> prediction_;

  std::vector<std::vector<int>> sector_members_;
  std::vector<std::vector<int>> industry_members_;
};

/// Runs Setup once, lockstep across tasks.
void run_setup(const AlphaProgram& p, ExecutionState& state);

/// One timestep: writes m0 (and s0 when training) into every bank, runs
/// Predict instruction-major across all tasks, then Update when training.
/// `features` holds K row-major f x w matrices; `labels` is required iff
/// stage == Train. Returns each task's s1, valid until the next call.
std::span<const double> execute_timestep(const AlphaProgram& p, ExecutionState& state,
                                         std::span<const double> features,
                                         std::optional<std::span<const double>> labels,
                                         Stage stage);

}  // namespace alphaforge
