#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphaforge/evaluation.hpp"
#include "alphaforge/fitness_cache.hpp"
#include "alphaforge/metrics.hpp"
#include "alphaforge/program.hpp"
#include "alphaforge/random.hpp"

namespace alphaforge {

class NoViableAlpha : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvolutionConfig {
  int population_size = 100;
  int tournament_size = 10;
  double mutation_prob = 0.9;
  std::uint64_t budget = 20000;  // candidates submitted, initial population included
  std::uint64_t seed = 0;        // search randomness
  std::uint64_t eval_seed = 0;   // executor randomness, fixed for a whole run
  int workers = 1;
  double time_limit_seconds = 0.0;  // 0 disables the wall-clock limit
  int log_every = 100;              // trajectory rows per this many candidates
  SearchSpaceConfig search;
  BacktestConfig backtest;

  void check() const;
};

struct Member {
  AlphaProgram program;
  FitnessRecord record;
  std::uint64_t birth = 0;
};

/// Aging population: once full, every insertion evicts the oldest member.
class Population {
 public:
  explicit Population(std::size_t capacity);

  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return members_.size() == capacity_; }
  const Member& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<Member>& members() const { return members_; }

  /// Returns the evicted member, if any.
  std::optional<Member> insert(Member m);

  /// Index of the best non-sentinel member (ties: lowest birth).
  std::optional<std::size_t> best_index() const;

 private:
  std::size_t capacity_;
  std::size_t oldest_ = 0;
  std::vector<Member> members_;
};

/// One mutation: a uniformly chosen class among randomize, insert and
/// remove. Invalid children are redrawn a bounded number of times, after
/// which the parent is returned unchanged.
AlphaProgram mutate(const AlphaProgram& parent, const SearchSpaceConfig& search, double mutation_prob,
                    Rng& rng);

/// Index of the fittest of `tournament_size` members drawn without
/// replacement; ties go to the lowest birth ordinal.
std::size_t tournament_select(const Population& pop, int tournament_size, Rng& rng);

struct ArchiveEntry {
  std::string name;
  AlphaProgram program;
  std::vector<double> val_returns;
  int round = 0;
  double ic = 0.0;
  std::optional<double> sharpe;
};

struct AlphaArchive {
  std::vector<ArchiveEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  /// Largest defined correlation between `returns` and any entry.
  std::optional<double> max_correlation(std::span<const double> returns) const;
  /// True if `returns` breaks the cutoff against some entry. Undefined
  /// correlations count as no violation.
  bool violates(std::span<const double> returns, const BacktestConfig& cfg) const;
  /// Every pair of entries respects the cutoff.
  bool consistent(const BacktestConfig& cfg) const;
};

struct TrajectoryPoint {
  std::uint64_t iteration = 0;  // 0 for the initial population
  std::uint64_t candidates_evaluated = 0;
  std::uint64_t cache_hits = 0;
  double best_ic = kSentinelFitness;
  std::optional<double> best_sharpe;
};

struct RoundResult {
  Member best;
  std::optional<double> best_sharpe;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t candidates = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cutoff_rejections = 0;
};

struct EvolutionHooks {
  /// Called after every insertion with the population as it now stands.
  std::function<void(const Population&, const Member& inserted, const std::optional<Member>& evicted)>
      on_insert;
};

/// Scores one candidate: cached evaluation, then the archive cutoff.
FitnessRecord evaluate_candidate(const AlphaProgram& p, const EvaluationContext& ctx,
                                 const AlphaArchive& archive, const EvolutionConfig& cfg,
                                 FitnessCache& cache);

/// Aging-tournament search from a seed alpha (or random programs). Throws
/// NoViableAlpha when the final population holds only sentinels.
RoundResult evolve_round(const std::optional<AlphaProgram>& seed_alpha, const EvaluationContext& ctx,
                         const AlphaArchive& archive, const EvolutionConfig& cfg, FitnessCache& cache,
                         const EvolutionHooks& hooks = {});

struct RoundsConfig {
  int rounds = 1;
  /// From the second round on, also start one search from each archived alpha.
  bool seed_with_archive = false;
};

struct RoundsReport {
  AlphaArchive archive;
  std::vector<std::vector<RoundResult>> rounds;  // [round][initialization]
};

/// Per round, runs evolve_round once per initialization and archives the
/// result with the highest validation Sharpe.
RoundsReport run_rounds(const std::vector<std::optional<AlphaProgram>>& seeds, const EvaluationContext& ctx,
                        const EvolutionConfig& cfg, const RoundsConfig& rounds, FitnessCache& cache);

/// Sharpe of validation returns, nullopt when undefined.
std::optional<double> safe_sharpe(std::span<const double> returns, const BacktestConfig& cfg);

}  // namespace alphaforge
