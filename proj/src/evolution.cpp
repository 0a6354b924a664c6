#include "alphaforge/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "alphaforge/generator.hpp"

namespace alphaforge {

void EvolutionConfig::check() const {
  if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
  if (tournament_size < 1 || tournament_size > population_size) {
    throw std::invalid_argument("tournament_size must lie in [1, population_size]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw std::invalid_argument("mutation_prob must lie in [0, 1]");
  }
  if (budget < static_cast<std::uint64_t>(population_size)) {
    throw std::invalid_argument("budget must be at least population_size");
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
  search.check();
  backtest.check();
}

// ---------------------------------------------------------------------------

Population::Population(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("population capacity must be >= 1");
  members_.reserve(capacity);
}

std::optional<Member> Population::insert(Member m) {
  if (!full()) {
    members_.push_back(std::move(m));
    return std::nullopt;
  }
  std::optional<Member> evicted = std::move(members_[oldest_]);
  members_[oldest_] = std::move(m);
  oldest_ = (oldest_ + 1) % capacity_;
  return evicted;
}

namespace {

// a beats b: higher fitness, then earlier birth.
bool better(const Member& a, const Member& b) {
  const double fa = a.record.fitness();
  const double fb = b.record.fitness();
  if (fa != fb) return fa > fb;
  return a.birth < b.birth;
}

}  // namespace

std::optional<std::size_t> Population::best_index() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].record.sentinel) continue;
    if (!best || better(members_[i], members_[*best])) best = i;
  }
  return best;
}

std::size_t tournament_select(const Population& pop, int tournament_size, Rng& rng) {
  const std::size_t n = pop.size();
  const std::size_t t = std::min(static_cast<std::size_t>(tournament_size), n);
  if (n == 0 || t == 0) throw std::invalid_argument("tournament on an empty population");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::size_t best = 0;
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i), static_cast<int>(n - 1)));
    std::swap(idx[i], idx[j]);
    if (i == 0 || better(pop[idx[i]], pop[best])) best = idx[i];
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMutationRetries = 32;

bool is_extraction(Opcode op) { return op_info(op).category == OpCategory::Extraction; }

Instruction resample_opcode(const Instruction& old, Component c, const SearchSpaceConfig& search, Rng& rng) {
  const auto ops = allowed_ops(c);
  const Opcode op = ops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ops.size()) - 1))];
  Instruction fresh = random_instruction_for(op, c, search, rng);
  const OpInfo& info = op_info(op);
  // Keep operands whose bank still fits.
  if (!is_extraction(op)) {
    const OpInfo& old_info = old.info();
    for (int i = 0; i < info.n_in; ++i) {
      if (i < old_info.n_in && old.in[i].bank == info.in[i] && !is_extraction(old.op)) fresh.in[i] = old.in[i];
    }
  }
  if (old.out.bank == info.out) fresh.out = old.out;
  return make_instruction(fresh.op, fresh.out, fresh.in, fresh.imm);
}

Instruction resample_argument(const Instruction& old, Component c, const SearchSpaceConfig& search, Rng& rng) {
  const OpInfo& info = old.info();
  const int free_inputs = is_extraction(old.op) ? 0 : info.n_in;
  const int slots = free_inputs + 1 + info.n_imm;
  const int pick = rng.uniform_int(0, slots - 1);
  Instruction ins = old;
  if (pick < free_inputs) {
    ins.in[pick] = random_register(info.in[pick], c, true, search, rng);
  } else if (pick == free_inputs) {
    ins.out = random_register(info.out, c, false, search, rng);
  } else {
    const int k = pick - free_inputs - 1;
    ins.imm[k] = random_immediate(info.imm[k], search, rng);
  }
  return make_instruction(ins.op, ins.out, ins.in, ins.imm);
}

}  // namespace

AlphaProgram mutate(const AlphaProgram& parent, const SearchSpaceConfig& search, double mutation_prob,
                    Rng& rng) {
  for (int attempt = 0; attempt < kMutationRetries; ++attempt) {
    AlphaProgram child = parent;
    const int cls = rng.uniform_int(0, 2);
    if (cls == 0) {
      for (Component c : kComponents) {
        for (Instruction& ins : child.component(c)) {
          if (!rng.bernoulli(mutation_prob)) continue;
          ins = rng.bernoulli(0.5) ? resample_opcode(ins, c, search, rng) : resample_argument(ins, c, search, rng);
        }
      }
    } else {
      const Component c = kComponents[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      auto& code = child.component(c);
      const int n = static_cast<int>(code.size());
      if (cls == 1) {
        if (n >= search.max_ops(c)) continue;
        const int at = rng.uniform_int(0, n);
        code.insert(code.begin() + at, random_instruction(c, search, rng));
      } else {
        if (n <= search.min_ops) continue;
        code.erase(code.begin() + rng.uniform_int(0, n - 1));
      }
    }
    if (validate_program(child, search).ok()) return child;
  }
  return parent;
}

// ---------------------------------------------------------------------------

std::optional<double> AlphaArchive::max_correlation(std::span<const double> returns) const {
  std::optional<double> best;
  for (const auto& e : entries) {
    try {
      const double c = return_correlation(returns, e.val_returns);
      if (!best || c > *best) best = c;
    } catch (const UndefinedMetric&) {
    }
  }
  return best;
}

bool AlphaArchive::violates(std::span<const double> returns, const BacktestConfig& cfg) const {
  for (const auto& e : entries) {
    try {
      if (violates_cutoff(return_correlation(returns, e.val_returns), cfg)) return true;
    } catch (const UndefinedMetric&) {
    }
  }
  return false;
}

bool AlphaArchive::consistent(const BacktestConfig& cfg) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      try {
        if (violates_cutoff(return_correlation(entries[i].val_returns, entries[j].val_returns), cfg)) return false;
      } catch (const UndefinedMetric&) {
      }
    }
  }
  return true;
}

std::optional<double> safe_sharpe(std::span<const double> returns, const BacktestConfig& cfg) {
  try {
    const double s = sharpe_ratio(returns, cfg);
    if (std::isfinite(s)) return s;
  } catch (const UndefinedMetric&) {
  }
  return std::nullopt;
}

FitnessRecord evaluate_candidate(const AlphaProgram& p, const EvaluationContext& ctx,
                                 const AlphaArchive& archive, const EvolutionConfig& cfg,
                                 FitnessCache& cache) {
  const EvalConfig eval{cfg.backtest, cfg.eval_seed, false};
  FitnessRecord r = lookup_or_evaluate(p, cache, [&](const AlphaProgram& pruned) {
    return train_and_score(pruned, ctx, eval);
  });
  if (!r.sentinel && archive.violates(r.val_portfolio_returns, cfg.backtest)) {
    FitnessRecord s = FitnessRecord::make_sentinel(SentinelReason::CutoffViolation);
    s.fingerprint = r.fingerprint;
    s.cache_hit = r.cache_hit;
    s.pruned_op_count = r.pruned_op_count;
    return s;
  }
  return r;
}

namespace {

class Search {
 public:
  Search(const EvaluationContext& ctx, const AlphaArchive& archive, const EvolutionConfig& cfg,
         FitnessCache& cache, const EvolutionHooks& hooks)
      : ctx_(ctx), archive_(archive), cfg_(cfg), cache_(cache), hooks_(hooks),
        pop_(static_cast<std::size_t>(cfg.population_size)), rng_(cfg.seed),
        start_(std::chrono::steady_clock::now()) {}

  RoundResult run(const std::optional<AlphaProgram>& seed_alpha) {
    while (result_.candidates < n_init()) {
      const std::size_t batch = std::min<std::size_t>(batch_size(), n_init() - result_.candidates);
      std::vector<AlphaProgram> children;
      for (std::size_t i = 0; i < batch; ++i) {
        children.push_back(seed_alpha ? mutate(*seed_alpha, cfg_.search, cfg_.mutation_prob, rng_)
                                      : random_program(cfg_.search, rng_));
      }
      submit(children);
    }
    log_point();
    while (result_.candidates < cfg_.budget && !out_of_time()) {
      const std::size_t batch = std::min<std::size_t>(batch_size(), cfg_.budget - result_.candidates);
      std::vector<AlphaProgram> children;
      for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t parent = tournament_select(pop_, cfg_.tournament_size, rng_);
        children.push_back(mutate(pop_[parent].program, cfg_.search, cfg_.mutation_prob, rng_));
      }
      submit(children);
    }
    if (result_.trajectory.back().candidates_evaluated != result_.candidates) log_point();
    const auto best = pop_.best_index();
    if (!best) throw NoViableAlpha("no viable alpha: every member of the final population has sentinel fitness");
    result_.best = pop_[*best];
    result_.best_sharpe = safe_sharpe(result_.best.record.val_portfolio_returns, cfg_.backtest);
    return std::move(result_);
  }

 private:
  std::size_t batch_size() const { return static_cast<std::size_t>(cfg_.workers); }

  bool out_of_time() const {
    if (cfg_.time_limit_seconds <= 0.0) return false;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    return elapsed.count() >= cfg_.time_limit_seconds;
  }

  void submit(const std::vector<AlphaProgram>& children) {
    std::vector<FitnessRecord> records(children.size());
    if (children.size() == 1) {
      records[0] = evaluate_candidate(children[0], ctx_, archive_, cfg_, cache_);
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(children.size());
      for (std::size_t i = 0; i < children.size(); ++i) {
        threads.emplace_back([&, i] {
          try {
            records[i] = evaluate_candidate(children[i], ctx_, archive_, cfg_, cache_);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    // Insert in submission order so results do not depend on thread timing.
    for (std::size_t i = 0; i < children.size(); ++i) {
      FitnessRecord& r = records[i];
      ++result_.candidates;
      if (r.cache_hit) ++result_.cache_hits;
      if (r.reason == SentinelReason::CutoffViolation) ++result_.cutoff_rejections;
      if (!r.sentinel) {
        if (r.ic > best_ic_) best_ic_ = r.ic;
        const auto s = safe_sharpe(r.val_portfolio_returns, cfg_.backtest);
        if (s && (!best_sharpe_ || *s > *best_sharpe_)) best_sharpe_ = s;
      }
      Member m{children[i], std::move(r), birth_++};
      auto evicted = pop_.insert(m);
      if (hooks_.on_insert) hooks_.on_insert(pop_, m, evicted);
      if (result_.candidates > n_init() && (result_.candidates - n_init()) % log_every() == 0) log_point();
    }
  }

  std::uint64_t n_init() const { return static_cast<std::uint64_t>(cfg_.population_size); }
  std::uint64_t log_every() const { return static_cast<std::uint64_t>(cfg_.log_every); }

  // Iterations count candidates after the initial population.
  void log_point() {
    const std::uint64_t iteration = result_.candidates > n_init() ? result_.candidates - n_init() : 0;
    result_.trajectory.push_back({iteration, result_.candidates, result_.cache_hits, best_ic_, best_sharpe_});
  }

  const EvaluationContext& ctx_;
  const AlphaArchive& archive_;
  const EvolutionConfig& cfg_;
  FitnessCache& cache_;
  const EvolutionHooks& hooks_;
  Population pop_;
  Rng rng_;
  std::chrono::steady_clock::time_point start_;
  RoundResult result_;
  std::uint64_t birth_ = 0;
  double best_ic_ = kSentinelFitness;
  std::optional<double> best_sharpe_;
};

}  // namespace

RoundResult evolve_round(const std::optional<AlphaProgram>& seed_alpha, const EvaluationContext& ctx,
                         const AlphaArchive& archive, const EvolutionConfig& cfg, FitnessCache& cache,
                         const EvolutionHooks& hooks) {
  cfg.check();
  if (seed_alpha) {
    const ValidationReport report = validate_program(*seed_alpha, cfg.search);
    if (!report.ok()) throw std::invalid_argument("seed alpha is invalid: " + report.to_string());
  }
  return Search(ctx, archive, cfg, cache, hooks).run(seed_alpha);
}

RoundsReport run_rounds(const std::vector<std::optional<AlphaProgram>>& seeds, const EvaluationContext& ctx,
                        const EvolutionConfig& cfg, const RoundsConfig& rounds, FitnessCache& cache) {
  if (rounds.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("run_rounds needs at least one initialization");
  RoundsReport report;
  for (int r = 0; r < rounds.rounds; ++r) {
    std::vector<std::optional<AlphaProgram>> inits = seeds;
    if (rounds.seed_with_archive && r > 0) {
      for (const auto& e : report.archive.entries) inits.emplace_back(e.program);
    }
    std::vector<RoundResult> results;
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < inits.size(); ++i) {
      EvolutionConfig c = cfg;
      c.seed = hash_combine(hash_combine(cfg.seed, static_cast<std::uint64_t>(r)), i);
      try {
        results.push_back(evolve_round(inits[i], ctx, report.archive, c, cache));
      } catch (const NoViableAlpha&) {
        continue;
      }
      const RoundResult& res = results.back();
      if (!chosen) {
        chosen = results.size() - 1;
        continue;
      }
      const auto& cur = results[*chosen].best_sharpe;
      const double a = res.best_sharpe.value_or(kSentinelFitness);
      const double b = cur.value_or(kSentinelFitness);
      if (a > b) chosen = results.size() - 1;
    }
    if (!chosen) {
      throw NoViableAlpha("no viable alpha in round " + std::to_string(r + 1));
    }
    const RoundResult& win = results[*chosen];
    ArchiveEntry e;
    e.name = "alpha_r" + std::to_string(r + 1);
    e.program = win.best.program;
    e.val_returns = win.best.record.val_portfolio_returns;
    e.round = r + 1;
    e.ic = win.best.record.ic;
    e.sharpe = win.best_sharpe;
    report.archive.entries.push_back(std::move(e));
    report.rounds.push_back(std::move(results));
  }
  return report;
}

}  // namespace alphaforge
