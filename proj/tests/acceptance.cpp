// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "alphaforge/cli.hpp"
#include "alphaforge/evaluation.hpp"
#include "alphaforge/evolution.hpp"
#include "alphaforge/executor.hpp"
#include "alphaforge/fitness_cache.hpp"
#include "alphaforge/generator.hpp"
#include "alphaforge/metrics.hpp"
#include "alphaforge/panel.hpp"
#include "alphaforge/prune.hpp"
#include "alphaforge/text_format.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace alphaforge;
using namespace testing::oracles;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Programs on the K=20, T=120 panel.
struct Bench {
  std::shared_ptr<const MarketPanel> panel = testing::synthetic(20, 120, 42);
  EvaluationContext ctx{panel, {}};
};

std::vector<double> predictions(const AlphaProgram& p, const EvaluationContext& ctx) {
  return testing::all_predictions(run_alpha(p, ctx, 7, true));
}

Outcome pruning_equivalence() {
  const Bench b;
  Rng rng(1);
  int mismatches = 0, with_removals = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const AlphaProgram p = random_program(b.ctx.search(), rng);
    const PruneResult pr = prune_redundant_ops(p);
    if (!pr.removed.empty()) ++with_removals;
    if (!testing::bit_identical(predictions(p, b.ctx), predictions(pr.pruned, b.ctx))) ++mismatches;
  }
  return {mismatches == 0 && with_removals > 0,
          fmt("%d programs, %d with removed ops, %d mismatches", n, with_removals, mismatches)};
}

// Same panel with every feature value redrawn.
std::shared_ptr<const MarketPanel> perturbed(const MarketPanel& p, std::mt19937_64& gen) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double scale = std::exp(2.0 * z(gen));
  std::vector<double> series(p.n_tasks() * static_cast<std::size_t>(p.rows()) * p.span_length());
  for (double& x : series) x = scale * z(gen);
  return std::make_shared<MarketPanel>(MarketPanel::from_parts(p.tickers(), p.dates(), p.window(), std::move(series),
                                                               p.labels(), p.sector(), p.industry()));
}

Outcome redundancy_soundness() {
  const Bench b;
  Rng rng(2);
  std::mt19937_64 gen(3);
  int found = 0, changed = 0, drawn = 0;
  while (found < 200) {
    const AlphaProgram p = random_program(b.ctx.search(), rng);
    ++drawn;
    if (!is_redundant_alpha(p)) continue;
    ++found;
    const auto base = predictions(p, b.ctx);
    for (int j = 0; j < 50; ++j) {
      const EvaluationContext moved(perturbed(*b.panel, gen), {});
      if (!testing::bit_identical(base, predictions(p, moved))) {
        ++changed;
        break;
      }
    }
  }
  return {changed == 0, fmt("%d redundant of %d drawn, 50 perturbations each, %d changed", found, drawn, changed)};
}

// Copy of an instruction placed right before it: the original overwrites the
// copy's output without reading it, so the copy is dead.
std::optional<AlphaProgram> dead_variant(const AlphaProgram& p, const SearchSpaceConfig& search) {
  for (Component c : kComponents) {
    auto code = p.component(c);
    if (static_cast<int>(code.size()) >= search.max_ops(c)) continue;
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instruction& ins = code[i];
      bool reads_own_output = false;
      for (int k = 0; k < ins.info().n_in; ++k) reads_own_output = reads_own_output || ins.in[k] == ins.out;
      if (reads_own_output) continue;
      AlphaProgram v = p;
      v.component(c).insert(v.component(c).begin() + static_cast<std::ptrdiff_t>(i), ins);
      return v;
    }
  }
  return std::nullopt;
}

Outcome cache_accounting() {
  const SearchSpaceConfig search;
  Rng rng(4);
  FitnessCache cache;
  std::uint64_t calls = 0, variants = 0, variant_misses = 0, redundant = 0;
  std::set<std::string> distinct;
  const Evaluator eval = [&](const AlphaProgram&) {
    FitnessRecord r;
    r.ic = 0.01 * static_cast<double>(++calls);
    r.sentinel = false;
    return r;
  };
  for (int i = 0; i < 1000; ++i) {
    const AlphaProgram p = random_program(search, rng);
    const bool red = is_redundant_alpha(p);
    if (red) {
      redundant += 2;
    } else {
      distinct.insert(fingerprint(prune_redundant_ops(p).pruned).hex());
    }
    lookup_or_evaluate(p, cache, eval);
    lookup_or_evaluate(p, cache, eval);
    if (const auto v = dead_variant(p, search)) {
      ++variants;
      if (red) ++redundant;
      const FitnessRecord r = lookup_or_evaluate(*v, cache, eval);
      if (!red && !r.cache_hit) ++variant_misses;
    }
  }
  const CacheCounters c = cache.counters();
  const bool ok = c.lookups == 2000 + variants && c.evaluations == distinct.size() && calls == c.evaluations &&
                  c.pruned_redundant_alphas == redundant &&
                  c.hits == c.lookups - c.evaluations - c.pruned_redundant_alphas && variant_misses == 0;
  return {ok, fmt("lookups %llu, evaluations %llu (distinct %zu), hits %llu, redundant %llu, variant misses %llu",
                  static_cast<unsigned long long>(c.lookups), static_cast<unsigned long long>(c.evaluations),
                  distinct.size(), static_cast<unsigned long long>(c.hits),
                  static_cast<unsigned long long>(c.pruned_redundant_alphas),
                  static_cast<unsigned long long>(variant_misses))};
}

std::vector<double> random_walk(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> z(0.0, 0.02);
  std::vector<double> c(n);
  double p = 50.0;
  for (double& x : c) {
    p *= std::exp(z(gen));
    x = p;
  }
  return c;
}

Outcome metric_oracles() {
  std::mt19937_64 gen(5);
  double ic_err = 0, corr_err = 0, sharpe_err = 0, feat_err = 0, label_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DayTaskMatrix p = random_matrix(1 + gen() % 30, 2 + gen() % 30, gen);
    const DayTaskMatrix y = random_matrix(p.days, p.tasks, gen);
    ic_err = std::max(ic_err, std::abs(compute_ic(p, y) - ic_oracle(p, y)));

    const DayTaskMatrix r = random_matrix(2, 3 + gen() % 200, gen);
    const auto a = r.row(0), b = r.row(1);
    corr_err = std::max(corr_err, std::abs(return_correlation(a, b) - static_cast<double>(pearson_ld(a, b))));
    const std::vector<double> ret(a.begin(), a.end());
    BacktestConfig bc;
    bc.risk_free = 0.01 * static_cast<double>(gen() % 5);
    sharpe_err = std::max(sharpe_err, std::abs(sharpe_ratio(ret, bc) - sharpe_oracle(ret, bc.risk_free, 252)));

    const auto c = random_walk(60, gen);
    const FeatureRows fr = compute_features(c, c, c, c, c);
    const FeatureSpec spec;
    for (std::size_t t = 29; t < 60; ++t) {
      for (int i = 0; i < 4; ++i) {
        const int w = spec.ma_windows[i];
        long double sum = 0;
        for (int j = 0; j < w; ++j) sum += c[t - j];
        const long double mean = sum / w;
        long double ss = 0;
        for (int j = 0; j < spec.vol_windows[i]; ++j) {
          const long double m2 = [&] {
            long double s = 0;
            for (int q = 0; q < spec.vol_windows[i]; ++q) s += c[t - q];
            return s / spec.vol_windows[i];
          }();
          ss += (c[t - j] - m2) * (c[t - j] - m2);
        }
        feat_err = std::max(feat_err, std::abs(fr.at(t, i) - static_cast<double>(mean)) / 50.0);
        const double sd = static_cast<double>(std::sqrt(ss / (spec.vol_windows[i] - 1)));
        feat_err = std::max(feat_err, std::abs(fr.at(t, 4 + i) - sd) / 50.0);
      }
    }
    const auto labels = make_labels(c);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      label_err = std::max(label_err, std::abs(labels[t] - static_cast<double>((static_cast<long double>(c[t + 1]) -
                                                                                c[t]) / c[t])));
    }
  }
  DayTaskMatrix up(1, 3), down(1, 3);
  up.data = {1, 2, 3};
  down.data = {3, 2, 1};
  BacktestConfig bc;
  const bool closed = compute_ic(up, up) == 1.0 && compute_ic(down, up) == -1.0 &&
                      sharpe_ratio(std::vector<double>{0.01, -0.01, 0.02, -0.02}, bc) == 0.0 && [] {
                        const std::vector<double> c{1, 2, 3, 4, 5};
                        FeatureSpec s;
                        s.ma_windows = {5, 2, 3, 4};
                        return compute_features(c, c, c, c, c, s).at(4, 0) == 3.0;
                      }();
  const double worst = std::max({ic_err, corr_err, sharpe_err, feat_err, label_err});
  return {worst <= 1e-12 && closed,
          fmt("max abs error ic %.1e corr %.1e sharpe %.1e features(rel) %.1e labels %.1e; closed forms %s", ic_err,
              corr_err, sharpe_err, feat_err, label_err, closed ? "exact" : "wrong")};
}

Outcome ic_fidelity() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  double err = 0, inv = 0;
  std::size_t degenerate = 0;
  for (int trial = 0; trial < 200; ++trial) {
    DayTaskMatrix p = random_matrix(5 + gen() % 30, 3 + gen() % 30, gen);
    const DayTaskMatrix y = random_matrix(p.days, p.tasks, gen);
    std::fill(p.row(0).begin(), p.row(0).end(), 0.5);  // constant day
    p.at(p.days - 1, 0) = std::nan("");                // non-finite day
    const IcResult r = compute_ic_detailed(p, y);
    degenerate += r.degenerate_days;
    err = std::max(err, std::abs(r.ic - ic_oracle(p, y)));
    DayTaskMatrix q = p;
    for (std::size_t d = 0; d < q.days; ++d) {
      const double a = u(gen), b = u(gen) - 5.0;
      for (double& x : q.row(d)) x = a * x + b;
    }
    inv = std::max(inv, std::abs(compute_ic(q, y) - r.ic));
  }
  return {err <= 1e-12 && inv <= 1e-9 && degenerate == 400,
          fmt("oracle error %.1e, scale/shift drift %.1e, degenerate days %zu of 400 planted", err, inv, degenerate)};
}

Outcome relation_oracles() {
  std::mt19937_64 gen(7);
  int rank_bad = 0, demean_bad = 0, singleton_cases = 0, tie_cases = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 10);
    std::vector<double> v(k);
    std::vector<int> g(k);
    for (int i = 0; i < k; ++i) {
      v[i] = trial % 2 ? static_cast<double>(gen() % 4) : std::ldexp(static_cast<double>(gen() % 4096), -7);
      g[i] = static_cast<int>(gen() % 5);
    }
    std::map<int, int> sizes;
    for (int x : g) ++sizes[x];
    for (const auto& [grp, n] : sizes) singleton_cases += n == 1;
    tie_cases += std::set<double>(v.begin(), v.end()).size() < v.size();
    if (cross_sectional_rank(v) != rank_oracle(v, {})) ++rank_bad;
    if (cross_sectional_rank(v, g) != rank_oracle(v, g)) ++rank_bad;
    const auto out = group_demean(v, g);
    for (int i = 0; i < k; ++i) {
      long double sum = 0;
      int n = 0;
      for (int j = 0; j < k; ++j) {
        if (g[j] == g[i]) {
          sum += v[j];
          ++n;
        }
      }
      if (std::abs(out[i] - static_cast<double>(v[i] - sum / n)) > 1e-12) ++demean_bad;
    }
  }
  return {rank_bad == 0 && demean_bad == 0 && singleton_cases > 0 && tie_cases > 0,
          fmt("5000 cases (K<=10, %d with ties, %d singleton groups): rank mismatches %d, demean mismatches %d",
              tie_cases, singleton_cases, rank_bad, demean_bad)};
}

std::shared_ptr<const MarketPanel> planted_panel() {
  SignalSpec s;
  s.planted = true;
  return testing::synthetic(20, 300, 0, s);
}

Outcome evolution_recovery() {
  const auto panel = planted_panel();
  const EvaluationContext ctx(panel, {});
  int hits = 0;
  std::string ics;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EvolutionConfig cfg;
    cfg.seed = seed;
    cfg.budget = 20000;
    FitnessCache cache;
    const RoundResult r = evolve_round(std::nullopt, ctx, {}, cfg, cache);
    const double best = r.trajectory.back().best_ic;
    hits += best >= 0.3;
    ics += fmt("%s%.3f", ics.empty() ? "" : " ", best);
  }
  return {hits >= 4, fmt("best validation IC per seed: %s; %d of 5 >= 0.3", ics.c_str(), hits)};
}

Outcome constraint_preservation() {
  const SearchSpaceConfig search;
  Rng rng(8);
  AlphaProgram p = random_program(search, rng);
  int invalid = 0;
  for (int i = 0; i < 100000; ++i) {
    AlphaProgram child = mutate(p, search, 0.9, rng);
    if (!validate_program(child, search).ok()) ++invalid;
    p = i % 100 == 0 ? random_program(search, rng) : std::move(child);
  }

  const auto panel = planted_panel();
  const EvaluationContext ctx(panel, {});
  EvolutionConfig cfg;
  cfg.budget = 5000;
  cfg.seed = 9;
  FitnessCache cache;
  std::uint64_t inserted = 0, size_errors = 0, eviction_errors = 0;
  std::set<std::uint64_t> live;
  EvolutionHooks hooks;
  hooks.on_insert = [&](const Population& pop, const Member& m, const std::optional<Member>& evicted) {
    ++inserted;
    if (pop.size() != std::min<std::uint64_t>(inserted, 100)) ++size_errors;
    if (evicted) {
      if (live.empty() || evicted->birth != *live.begin()) ++eviction_errors;
      live.erase(evicted->birth);
    } else if (inserted > 100) {
      ++eviction_errors;
    }
    live.insert(m.birth);
  };
  evolve_round(std::nullopt, ctx, {}, cfg, cache, hooks);
  const bool ok = invalid == 0 && inserted == 5000 && size_errors == 0 && eviction_errors == 0;
  return {ok, fmt("%d invalid of 100000 mutations; %llu insertions, %llu size errors, %llu non-oldest evictions",
                  invalid, static_cast<unsigned long long>(inserted), static_cast<unsigned long long>(size_errors),
                  static_cast<unsigned long long>(eviction_errors))};
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"alphaforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// Two identical single-worker mine runs of three rounds; shared by the
// cutoff and determinism criteria.
struct MineRuns {
  fs::path dir = testing::temp_dir("acceptance");
  int code_a = -1, code_b = -1;

  MineRuns() {
    const std::string panel = (dir / "planted.afp").string();
    if (cli({"synth", "--output", panel, "--planted", "true"}) != 0) return;
    const std::vector<std::string> args{"mine", "--data", panel, "--budget", "5000", "--seed", "1", "--rounds", "3",
                                        "--workers", "1"};
    auto with_out = [&](const char* name) {
      auto a = args;
      a.insert(a.end(), {"--out-dir", (dir / name).string()});
      return a;
    };
    code_a = cli(with_out("a"));
    code_b = cli(with_out("b"));
  }
};

MineRuns& mine_runs() {
  static MineRuns runs;
  return runs;
}

std::vector<std::vector<double>> read_returns(const fs::path& path, std::vector<std::string>& names) {
  std::istringstream in(testing::read_file(path));
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string cell;
  std::getline(header, cell, ',');
  while (std::getline(header, cell, ',')) names.push_back(cell);
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::getline(row, cell, ',');
    for (auto& c : cols) {
      std::getline(row, cell, ',');
      c.push_back(std::stod(cell));
    }
  }
  return cols;
}

Outcome cutoff_enforcement() {
  MineRuns& m = mine_runs();
  if (m.code_a != 0) return {false, fmt("mine exited with %d", m.code_a)};
  std::vector<std::string> names;
  const auto cols = read_returns(m.dir / "a" / "returns.csv", names);
  double worst = -1.0;
  int pairs = 0, violations = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      const double c = static_cast<double>(pearson_ld(cols[i], cols[j]));
      if (!std::isfinite(c)) continue;  // a constant series has no correlation
      ++pairs;
      worst = std::max(worst, c);
      if (c > 0.15) ++violations;
    }
  }
  return {names.size() == 3 && violations == 0,
          fmt("%zu archived alphas, %d pairs, max signed correlation %.4f, %d above 0.15", names.size(), pairs, worst,
              violations)};
}

Outcome expressiveness() {
  const auto panel = testing::synthetic(20, 300, 10);
  const EvaluationContext ctx(panel, {});
  std::string detail;
  bool ok = true;
  int count = 0;
  for (const auto& entry : fs::directory_iterator(testing::source_dir() / "tests" / "fixtures")) {
    if (entry.path().extension() != ".alpha") continue;
    ++count;
    const std::string name = entry.path().stem().string();
    try {
      const AlphaProgram p = parse_alpha_text(testing::read_file(entry.path()));
      if (!validate_program(p, ctx.search()).ok()) throw std::runtime_error("invalid");
      prune_redundant_ops(p);
      const AlphaRun run = run_alpha(p, ctx, 0, true);
      std::size_t days = 0, finite = 0;
      for (const DayTaskMatrix* m : {&run.train, &run.valid, &run.test}) {
        for (std::size_t d = 0; d < m->days; ++d) {
          ++days;
          const auto row = m->row(d);
          finite += std::all_of(row.begin(), row.end(), [](double x) { return std::isfinite(x); });
        }
      }
      const double frac = static_cast<double>(finite) / static_cast<double>(days);
      ok = ok && frac >= 0.95;
      detail += fmt("%s%s %.3f", detail.empty() ? "" : ", ", name.c_str(), frac);
    } catch (const std::exception& e) {
      ok = false;
      detail += fmt("%s%s error: %s", detail.empty() ? "" : ", ", name.c_str(), e.what());
    }
  }
  return {ok && count == 5, fmt("finite-day fraction: %s", detail.c_str())};
}

Outcome round_trip_and_determinism() {
  const SearchSpaceConfig search;
  Rng rng(11);
  int broken = 0;
  for (int i = 0; i < 1000; ++i) {
    const AlphaProgram p = random_program(search, rng);
    const std::string text = serialize_alpha_text(p);
    if (!(parse_alpha_text(text) == p) || serialize_alpha_text(parse_alpha_text(text)) != text) ++broken;
  }
  MineRuns& m = mine_runs();
  if (m.code_a != 0 || m.code_b != 0) return {false, fmt("mine exited with %d and %d", m.code_a, m.code_b)};
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(m.dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), m.dir / "a");
    if (rel == "effective_config.txt") continue;  // names its own output directory
    ++files;
    if (testing::read_file(entry.path()) != testing::read_file(m.dir / "b" / rel)) ++differing;
  }
  return {broken == 0 && files > 0 && differing == 0,
          fmt("%d of 1000 round trips broken; %d manifest files, %d differ between runs", broken, files, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pruning equivalence", pruning_equivalence},
      {"redundant-alpha soundness", redundancy_soundness},
      {"cache accounting", cache_accounting},
      {"metric oracles", metric_oracles},
      {"IC fidelity", ic_fidelity},
      {"relation op oracles", relation_oracles},
      {"evolution recovery", evolution_recovery},
      {"constraint preservation", constraint_preservation},
      {"cutoff enforcement", cutoff_enforcement},
      {"expressiveness fixtures", expressiveness},
      {"round-trip and determinism", round_trip_and_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" (%.1fs)", took.count())
              << std::endl;
  }
  fs::remove_all(mine_runs().dir);
  return failed == 0 ? 0 : 1;
}
