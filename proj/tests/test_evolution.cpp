#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "alphaforge/evolution.hpp"
#include "alphaforge/generator.hpp"
#include "alphaforge/text_format.hpp"
#include "test_support.hpp"

using namespace alphaforge;

namespace {

Member member(double ic, std::uint64_t birth, bool sentinel = false) {
  Member m;
  m.record.ic = sentinel ? kSentinelFitness : ic;
  m.record.sentinel = sentinel;
  m.birth = birth;
  return m;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

EvolutionConfig small_config(std::uint64_t budget) {
  EvolutionConfig cfg;
  cfg.population_size = 20;
  cfg.tournament_size = 5;
  cfg.budget = budget;
  cfg.seed = 11;
  cfg.log_every = 50;
  cfg.backtest.top_n = 3;
  return cfg;
}

}  // namespace

TEST_CASE("mutation keeps programs valid") {
  const SearchSpaceConfig search;
  Rng rng(1);
  AlphaProgram p = random_program(search, rng);
  int changed = 0;
  for (int i = 0; i < 100000; ++i) {
    AlphaProgram child = mutate(p, search, 0.9, rng);
    REQUIRE(validate_program(child, search).ok());
    if (!(child == p)) ++changed;
    p = (i % 50 == 0) ? random_program(search, rng) : std::move(child);
  }
  CHECK(changed > 90000);
}

TEST_CASE("mutation respects the op-count bounds") {
  const SearchSpaceConfig search;
  Rng rng(2);
  AlphaProgram small = parse_alpha_text("def Setup():\n  s8 = const(0.100000)\ndef Predict():\n"
                                        "  s1 = get_scalar(m0,0,0)\ndef Update():\n  s9 = s9 + s9\n");
  AlphaProgram big = small;
  for (Component c : kComponents) {
    auto& code = big.component(c);
    while (static_cast<int>(code.size()) < search.max_ops(c)) code.insert(code.begin(), code.front());
  }
  REQUIRE(validate_program(big, search).ok());
  for (int i = 0; i < 5000; ++i) {
    const AlphaProgram a = mutate(small, search, 0.9, rng);
    const AlphaProgram b = mutate(big, search, 0.9, rng);
    for (Component c : kComponents) {
      CHECK(a.component(c).size() >= 1);
      CHECK(static_cast<int>(b.component(c).size()) <= search.max_ops(c));
    }
  }
}

TEST_CASE("mutation is deterministic for a seed") {
  const SearchSpaceConfig search;
  Rng g(3);
  const AlphaProgram p = random_program(search, g);
  Rng a(4), b(4);
  for (int i = 0; i < 200; ++i) CHECK(mutate(p, search, 0.9, a) == mutate(p, search, 0.9, b));
}

TEST_CASE("tournament: full-size tournament returns the global best") {
  Population pop(10);
  for (int i = 0; i < 10; ++i) pop.insert(member(std::sin(i * 1.7), i));
  Rng rng(5);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 10; ++i) {
    if (pop[i].record.ic > pop[best].record.ic) best = i;
  }
  for (int i = 0; i < 100; ++i) CHECK(tournament_select(pop, 10, rng) == best);
}

TEST_CASE("tournament: equal fitness goes to the oldest") {
  Population pop(6);
  for (int i = 0; i < 12; ++i) pop.insert(member(0.2, i));  // births 6..11 remain
  Rng rng(6);
  for (int i = 0; i < 50; ++i) CHECK(pop[tournament_select(pop, 6, rng)].birth == 6);
}

TEST_CASE("tournament: selection frequencies match the order-statistic oracle") {
  // The member ranked r-th best (0-based) wins iff it is drawn and no better
  // member is: C(n-1-r, t-1) / C(n, t).
  const int n = 12, t = 4, trials = 60000;
  Population pop(n);
  for (int i = 0; i < n; ++i) pop.insert(member(0.01 * ((i * 5) % n), i));
  std::map<double, int> wins;
  Rng rng(7);
  for (int i = 0; i < trials; ++i) ++wins[pop[tournament_select(pop, t, rng)].record.ic];
  for (int r = 0; r < n; ++r) {
    const double p = binomial(n - 1 - r, t - 1) / binomial(n, t);
    const double observed = static_cast<double>(wins[0.01 * (n - 1 - r)]) / trials;
    CHECK(std::abs(observed - p) <= 5 * std::sqrt(p * (1 - p) / trials) + 1e-12);
  }
}

TEST_CASE("tournament: sentinels lose to any real fitness") {
  Population pop(3);
  pop.insert(member(0, 0, true));
  pop.insert(member(-0.9, 1));
  pop.insert(member(0, 2, true));
  Rng rng(8);
  CHECK(tournament_select(pop, 3, rng) == 1);
  CHECK(pop.best_index() == 1);
}

TEST_CASE("population evicts the oldest member") {
  Population pop(4);
  for (int i = 0; i < 4; ++i) CHECK_FALSE(pop.insert(member(0.1 * i, i)).has_value());
  CHECK(pop.full());
  for (int i = 4; i < 15; ++i) {
    const auto evicted = pop.insert(member(0.0, i));
    REQUIRE(evicted.has_value());
    CHECK(evicted->birth == static_cast<std::uint64_t>(i - 4));
    CHECK(pop.size() == 4);
  }
  Population empty(2);
  CHECK_FALSE(empty.best_index().has_value());
  CHECK_THROWS(Population(0));
}

TEST_CASE("evolve_round: budget, trajectory and aging through hooks") {
  const auto panel = testing::synthetic(12, 160, 1);
  const EvaluationContext ctx(panel, {});
  FitnessCache cache;
  const EvolutionConfig cfg = small_config(300);
  std::uint64_t inserted = 0;
  bool aging_ok = true;
  EvolutionHooks hooks;
  hooks.on_insert = [&](const Population& pop, const Member& m, const std::optional<Member>& evicted) {
    ++inserted;
    if (pop.size() > 20 || m.birth != inserted - 1) aging_ok = false;
    if (inserted <= 20 && evicted) aging_ok = false;
    if (inserted > 20) {
      if (!evicted || evicted->birth != inserted - 21) aging_ok = false;
      for (const Member& x : pop.members()) {
        if (x.birth + 20 < inserted) aging_ok = false;
      }
    }
  };
  const RoundResult r = evolve_round(std::nullopt, ctx, {}, cfg, cache, hooks);
  CHECK(aging_ok);
  CHECK(inserted == 300);
  CHECK(r.candidates == 300);
  CHECK(r.trajectory.front().iteration == 0);
  CHECK(r.trajectory.front().candidates_evaluated == 20);
  CHECK(r.trajectory.back().candidates_evaluated == 300);
  CHECK(r.trajectory.size() == 1 + 280 / 50 + 1);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory[i].best_ic >= r.trajectory[i - 1].best_ic);
    CHECK(r.trajectory[i].cache_hits >= r.trajectory[i - 1].cache_hits);
  }
  CHECK_FALSE(r.best.record.sentinel);
  CHECK(r.best.record.ic <= r.trajectory.back().best_ic);
  const CacheCounters c = cache.counters();
  CHECK(c.lookups == 300);
  CHECK(c.hits + c.evaluations + c.pruned_redundant_alphas == c.lookups);
  CHECK(r.cache_hits == c.hits);
}

TEST_CASE("evolve_round: budget equal to the population size only initializes") {
  const auto panel = testing::synthetic(10, 150, 2);
  const EvaluationContext ctx(panel, {});
  FitnessCache cache;
  const RoundResult r = evolve_round(std::nullopt, ctx, {}, small_config(20), cache);
  CHECK(r.candidates == 20);
  REQUIRE(r.trajectory.size() == 1);
  CHECK(r.trajectory[0].iteration == 0);
}

TEST_CASE("evolve_round: deterministic for a seed, with one or several workers") {
  const auto panel = testing::synthetic(10, 150, 3);
  const EvaluationContext ctx(panel, {});
  for (int workers : {1, 4}) {
    EvolutionConfig cfg = small_config(200);
    cfg.workers = workers;
    FitnessCache c1, c2;
    const RoundResult a = evolve_round(std::nullopt, ctx, {}, cfg, c1);
    const RoundResult b = evolve_round(std::nullopt, ctx, {}, cfg, c2);
    CHECK(a.best.program == b.best.program);
    CHECK(a.best.record.ic == b.best.record.ic);
    CHECK(a.trajectory.size() == b.trajectory.size());
  }
}

TEST_CASE("evolve_round: seeded search starts from mutants of the seed alpha") {
  const auto panel = testing::synthetic(10, 150, 4);
  const EvaluationContext ctx(panel, {});
  const AlphaProgram seed = load_alpha_file((testing::source_dir() / "alphas/oracle.alpha").string());
  FitnessCache cache;
  std::size_t near = 0;
  EvolutionHooks hooks;
  hooks.on_insert = [&](const Population&, const Member& m, const std::optional<Member>&) {
    if (m.birth >= 20) return;
    std::size_t d = 0;
    for (Component c : kComponents) {
      d += std::max(m.program.component(c).size(), seed.component(c).size()) -
           std::min(m.program.component(c).size(), seed.component(c).size());
    }
    if (d <= 1) ++near;
  };
  evolve_round(seed, ctx, {}, small_config(20), cache, hooks);
  CHECK(near == 20);
  AlphaProgram bad = seed;
  bad.predict.clear();
  CHECK_THROWS_AS(evolve_round(bad, ctx, {}, small_config(20), cache), std::invalid_argument);
}

TEST_CASE("evolve_round throws NoViableAlpha exactly when only sentinels remain") {
  const auto panel = testing::synthetic(8, 120, 5);
  const EvaluationContext ctx(panel, {});
  int thrown = 0, returned = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    EvolutionConfig cfg = small_config(1);
    cfg.population_size = 1;
    cfg.tournament_size = 1;
    cfg.seed = seed;
    FitnessCache cache;
    bool all_sentinel = true;
    EvolutionHooks hooks;
    hooks.on_insert = [&](const Population&, const Member& m, const std::optional<Member>&) {
      all_sentinel = all_sentinel && m.record.sentinel;
    };
    try {
      evolve_round(std::nullopt, ctx, {}, cfg, cache, hooks);
      CHECK_FALSE(all_sentinel);
      ++returned;
    } catch (const NoViableAlpha&) {
      CHECK(all_sentinel);
      ++thrown;
    }
  }
  CHECK(thrown > 0);
  CHECK(returned > 0);
}

TEST_CASE("evaluate_candidate rejects returns that break the archive cutoff") {
  const auto panel = testing::synthetic(12, 160, 6);
  const EvaluationContext ctx(panel, {});
  const AlphaProgram p = load_alpha_file((testing::source_dir() / "alphas/oracle.alpha").string());
  EvolutionConfig cfg = small_config(20);
  FitnessCache cache;
  const FitnessRecord free = evaluate_candidate(p, ctx, {}, cfg, cache);
  REQUIRE_FALSE(free.sentinel);
  AlphaArchive archive;
  archive.entries.push_back({"a", p, free.val_portfolio_returns, 1, free.ic, std::nullopt});
  const FitnessRecord blocked = evaluate_candidate(p, ctx, archive, cfg, cache);
  CHECK(blocked.sentinel);
  CHECK(blocked.reason == SentinelReason::CutoffViolation);
  CHECK(blocked.cache_hit);

  std::vector<double> opposite = free.val_portfolio_returns;
  for (double& x : opposite) x = -x;
  archive.entries[0].val_returns = opposite;
  CHECK_FALSE(evaluate_candidate(p, ctx, archive, cfg, cache).sentinel);  // signed cutoff
  cfg.backtest.cutoff_mode = CutoffMode::Absolute;
  CHECK(evaluate_candidate(p, ctx, archive, cfg, cache).sentinel);
}

TEST_CASE("archive correlation helpers") {
  AlphaArchive archive;
  CHECK_FALSE(archive.max_correlation(std::vector<double>{1, 2, 3}).has_value());
  archive.entries.push_back({"a", {}, {1, 2, 3, 4}, 1, 0.1, std::nullopt});
  archive.entries.push_back({"b", {}, {0, 0, 0, 0}, 2, 0.1, std::nullopt});
  CHECK(*archive.max_correlation(std::vector<double>{2, 4, 6, 8}) == doctest::Approx(1.0));
  const BacktestConfig bc;
  CHECK(archive.violates(std::vector<double>{2, 4, 6, 8}, bc));
  CHECK_FALSE(archive.violates(std::vector<double>{4, 3, 2, 1}, bc));
  CHECK(archive.consistent(bc));
  archive.entries.push_back({"c", {}, {1, 2, 3, 5}, 3, 0.1, std::nullopt});
  CHECK_FALSE(archive.consistent(bc));
}

TEST_CASE("run_rounds: archive grows by one per round and respects the cutoff") {
  const auto panel = testing::synthetic(16, 200, 7);
  const EvaluationContext ctx(panel, {});
  EvolutionConfig cfg = small_config(150);
  FitnessCache cache;
  RoundsConfig rc;
  rc.rounds = 3;
  rc.seed_with_archive = true;
  const RoundsReport rep = run_rounds({std::nullopt, std::nullopt}, ctx, cfg, rc, cache);
  REQUIRE(rep.archive.size() == 3);
  CHECK(rep.rounds.size() == 3);
  CHECK(rep.rounds[0].size() == 2);
  CHECK(rep.rounds[1].size() <= 3);
  CHECK(rep.archive.consistent(cfg.backtest));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rep.archive.entries[i].name == "alpha_r" + std::to_string(i + 1));
    CHECK(rep.archive.entries[i].round == static_cast<int>(i + 1));
    // the archived alpha is the round's best by validation Sharpe
    double best = kSentinelFitness;
    for (const auto& r : rep.rounds[i]) best = std::max(best, r.best_sharpe.value_or(kSentinelFitness));
    CHECK(rep.archive.entries[i].sharpe.value_or(kSentinelFitness) == best);
  }

  rc.rounds = 1;
  FitnessCache fresh;
  CHECK(run_rounds({std::nullopt}, ctx, cfg, rc, fresh).archive.size() == 1);
  CHECK_THROWS(run_rounds({}, ctx, cfg, rc, fresh));
}

TEST_CASE("evolution config checks") {
  EvolutionConfig cfg;
  CHECK_NOTHROW(cfg.check());
  cfg.tournament_size = 101;
  CHECK_THROWS(cfg.check());
  cfg = {};
  cfg.budget = 10;
  CHECK_THROWS(cfg.check());
  cfg = {};
  cfg.mutation_prob = 1.5;
  CHECK_THROWS(cfg.check());
}
