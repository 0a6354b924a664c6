#include "alphaforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "alphaforge/config.hpp"
#include "alphaforge/evaluation.hpp"
#include "alphaforge/evolution.hpp"
#include "alphaforge/fitness_cache.hpp"
#include "alphaforge/panel.hpp"
#include "alphaforge/prune.hpp"
#include "alphaforge/text_format.hpp"

namespace alphaforge {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

const fs::path& require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("--") + what + " is required");
  if (!fs::is_regular_file(p)) throw MissingFile(std::string(what) + " file not found: " + p.string());
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

MarketPanel load_panel(const RunConfig& cfg) {
  return MarketPanel::load(require_file(cfg.data, "data"));
}

AlphaProgram load_alpha(const RunConfig& cfg, const std::string& path) {
  require_file(path, "alpha");
  AlphaProgram p = load_alpha_file(path, cfg.evolution.search);
  const ValidationReport report = validate_program(p, cfg.evolution.search);
  if (!report.ok()) throw std::runtime_error(path + ": invalid alpha: " + report.to_string());
  return p;
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.empty()) throw UsageError("--output is required");
  const MarketPanel panel = generate_synthetic_panel(cfg.synth_k, cfg.synth_t, cfg.signal, cfg.synth_seed);
  panel.save(cfg.output);
  out << "wrote " << cfg.output << ": " << panel.n_tasks() << " tasks, " << panel.n_samples()
      << " samples (train " << panel.split().train << ", valid " << panel.split().valid << ", test "
      << panel.split().test << ")\n";
  if (!cfg.csv_dir.empty()) {
    fs::create_directories(cfg.csv_dir);
    const auto stocks = generate_synthetic_stocks(cfg.synth_k, cfg.synth_t, cfg.synth_seed);
    std::string groups = "ticker,sector,industry\n";
    for (const auto& s : stocks) {
      write_ohlcv_csv(fs::path(cfg.csv_dir) / (s.ticker + ".csv"), s.data);
      groups += s.ticker + "," + std::to_string(s.sector) + "," + std::to_string(s.industry) + "\n";
    }
    write_text(fs::path(cfg.csv_dir) / "groups.csv", groups);
    out << "wrote " << stocks.size() << " OHLCV files and groups.csv to " << cfg.csv_dir << "\n";
    if (cfg.signal.planted) out << "note: planted labels exist only in the panel file, not in the CSVs\n";
  }
  return exit_code::kOk;
}

int cmd_prepare(const RunConfig& cfg, std::ostream& out) {
  if (cfg.csv_dir.empty()) throw UsageError("--csv-dir is required");
  if (cfg.output.empty()) throw UsageError("--output is required");
  if (!fs::is_directory(cfg.csv_dir)) throw MissingFile("csv directory not found: " + cfg.csv_dir);
  const fs::path groups = cfg.groups.empty() ? fs::path(cfg.csv_dir) / "groups.csv" : fs::path(cfg.groups);
  require_file(groups, "groups");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cfg.csv_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (fs::equivalent(entry.path(), groups)) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  const MarketPanel panel = load_csv_panel(files, groups, cfg.panel);
  panel.save(cfg.output);
  out << "wrote " << cfg.output << ": " << panel.n_tasks() << " of " << files.size() << " tickers kept, "
      << panel.n_samples() << " samples (train " << panel.split().train << ", valid " << panel.split().valid
      << ", test " << panel.split().test << ")\n";
  return exit_code::kOk;
}

int cmd_prune(const RunConfig& cfg, std::ostream& out) {
  const AlphaProgram p = load_alpha(cfg, cfg.alpha);
  const PruneResult r = prune_redundant_ops(p);
  out << "# fingerprint " << fingerprint(r.pruned).hex() << "\n";
  out << "# redundant " << (is_redundant_alpha(r.pruned) ? "true" : "false") << "\n";
  out << "# removed " << r.removed.size() << "\n";
  for (const InstructionId& id : r.removed) {
    out << "#   " << component_name(id.component) << "[" << id.index
        << "]: " << format_instruction(p.component(id.component)[static_cast<std::size_t>(id.index)]) << "\n";
  }
  out << serialize_alpha_text(r.pruned);
  return exit_code::kOk;
}

struct SplitScore {
  DayTaskMatrix predictions;
  DayTaskMatrix labels;
  IcResult ic;
  bool finite = true;
  std::vector<double> returns;
  std::optional<double> sharpe;
};

SplitScore score_split(const AlphaProgram& p, const MarketPanel& panel, const RunConfig& cfg, Split split) {
  const EvaluationContext ctx(std::make_shared<MarketPanel>(panel), cfg.evolution.search);
  AlphaRun run = run_alpha(p, ctx, cfg.evolution.eval_seed, split == Split::Test);
  SplitScore s;
  s.predictions = split == Split::Train ? std::move(run.train) : split == Split::Valid ? std::move(run.valid) : std::move(run.test);
  s.labels = split_labels(panel, split);
  s.ic = compute_ic_detailed(s.predictions, s.labels);
  s.finite = std::all_of(s.predictions.data.begin(), s.predictions.data.end(), [](double v) { return std::isfinite(v); });
  if (s.finite) {
    BacktestConfig bt = cfg.evolution.backtest;
    bt.top_n = effective_top_n(bt, panel.n_tasks());
    s.returns = portfolio_returns(s.predictions, s.labels, bt);
    s.sharpe = safe_sharpe(s.returns, bt);
  }
  return s;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const AlphaProgram p = load_alpha(cfg, cfg.alpha);
  const MarketPanel panel = load_panel(cfg);
  const Split split = parse_split(cfg.split);
  const SplitScore s = score_split(p, panel, cfg, split);
  out << "split=" << to_string(split) << "\n";
  out << "ic=" << short_num(s.ic.ic) << "\n";
  out << "sharpe=" << (s.sharpe ? short_num(*s.sharpe) : std::string("undefined")) << "\n";
  out << "n_days=" << s.predictions.days << "\n";
  out << "nan_days=" << s.ic.degenerate_days << "\n";
  out << "finite=" << (s.finite ? "true" : "false") << "\n";
  out << "redundant=" << (is_redundant_alpha(prune_redundant_ops(p).pruned) ? "true" : "false") << "\n";
  return exit_code::kOk;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
  const AlphaProgram p = load_alpha(cfg, cfg.alpha);
  const MarketPanel panel = load_panel(cfg);
  const Split split = parse_split(cfg.split);
  const SplitScore s = score_split(p, panel, cfg, split);
  if (!s.finite) throw std::runtime_error("alpha produced non-finite predictions on the " + to_string(split) + " split");
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "effective_config.txt", cfg.to_text());
  const auto [first, count] = panel.split_range(split);
  const std::vector<double> nav = nav_series(s.returns);
  std::string csv = "date,portfolio_return,nav\n";
  for (std::size_t d = 0; d < count; ++d) {
    csv += panel.dates()[first + d] + "," + num(s.returns[d]) + "," + num(nav[d]) + "\n";
  }
  const fs::path csv_path = fs::path(cfg.out_dir) / ("backtest_" + to_string(split) + ".csv");
  write_text(csv_path, csv);
  std::string summary = "{\n";
  summary += "  \"ic\": " + num(s.ic.ic) + ",\n";
  summary += "  \"sharpe\": " + (s.sharpe ? num(*s.sharpe) : std::string("null")) + ",\n";
  summary += "  \"n_days\": " + std::to_string(count) + ",\n";
  summary += "  \"nan_days\": " + std::to_string(s.ic.degenerate_days) + "\n}\n";
  write_text(fs::path(cfg.out_dir) / ("summary_" + to_string(split) + ".txt"), summary);
  out << "wrote " << csv_path.string() << "\n" << summary;
  return exit_code::kOk;
}

int cmd_mine(const RunConfig& cfg, std::ostream& out) {
  auto panel = std::make_shared<MarketPanel>(load_panel(cfg));
  const EvaluationContext ctx(panel, cfg.evolution.search);
  std::vector<std::optional<AlphaProgram>> seeds(static_cast<std::size_t>(cfg.inits));
  for (const auto& path : cfg.seed_alphas) seeds.emplace_back(load_alpha(cfg, path));
  if (seeds.empty()) throw UsageError("nothing to search from: inits is 0 and no seed_alphas given");

  FitnessCache cache;
  if (!cfg.cache_file.empty() && fs::exists(cfg.cache_file)) cache.load(cfg.cache_file);

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir / "archive");
  write_text(dir / "effective_config.txt", cfg.to_text());

  const RoundsReport report = run_rounds(seeds, ctx, cfg.evolution, cfg.rounds, cache);

  std::string summary = "name,ic,sharpe,max_corr_with_archive\n";
  for (std::size_t i = 0; i < report.archive.size(); ++i) {
    const ArchiveEntry& e = report.archive.entries[i];
    write_text(dir / "archive" / (e.name + ".alpha"), serialize_alpha_text(e.program));
    AlphaArchive others;
    for (std::size_t j = 0; j < report.archive.size(); ++j) {
      if (j != i) others.entries.push_back(report.archive.entries[j]);
    }
    const auto corr = others.max_correlation(e.val_returns);
    summary += e.name + "," + num(e.ic) + "," + (e.sharpe ? num(*e.sharpe) : "") + "," +
               (corr ? num(*corr) : "") + "\n";
  }
  write_text(dir / "summary.csv", summary);

  const auto [vfirst, vcount] = panel->split_range(Split::Valid);
  std::string returns = "date";
  for (const auto& e : report.archive.entries) returns += "," + e.name;
  returns += "\n";
  for (std::size_t d = 0; d < vcount; ++d) {
    returns += panel->dates()[vfirst + d];
    for (const auto& e : report.archive.entries) returns += "," + num(e.val_returns[d]);
    returns += "\n";
  }
  write_text(dir / "returns.csv", returns);

  for (std::size_t r = 0; r < report.rounds.size(); ++r) {
    for (std::size_t i = 0; i < report.rounds[r].size(); ++i) {
      std::string csv = "iteration,candidates_evaluated,cache_hits,best_ic,best_sharpe\n";
      for (const TrajectoryPoint& t : report.rounds[r][i].trajectory) {
        csv += std::to_string(t.iteration) + "," + std::to_string(t.candidates_evaluated) + "," +
               std::to_string(t.cache_hits) + "," + (t.best_ic == kSentinelFitness ? "" : num(t.best_ic)) + "," +
               (t.best_sharpe ? num(*t.best_sharpe) : "") + "\n";
      }
      write_text(dir / ("trajectory_r" + std::to_string(r + 1) + "_i" + std::to_string(i + 1) + ".csv"), csv);
    }
  }
  if (!cfg.cache_file.empty()) cache.save(cfg.cache_file);

  const CacheCounters c = cache.counters();
  for (const auto& e : report.archive.entries) {
    out << e.name << ": ic=" << short_num(e.ic) << " sharpe=" << (e.sharpe ? short_num(*e.sharpe) : "undefined")
        << "\n";
  }
  out << "searched " << c.lookups << " alphas: " << c.evaluations << " evaluated, " << c.hits << " cache hits, "
      << c.pruned_redundant_alphas << " redundant\n";
  out << "wrote " << dir.string() << "\n";
  return exit_code::kOk;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary alpha mining: search, prune, evaluate and backtest alpha programs."};
  app.name("alphaforge");
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  auto add_keys = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const std::string& key : RunConfig::keys()) {
      std::string names = "--" + dashed(key);
      if (dashed(key) != key) names += ",--" + key;
      options[sub->get_name() + "/" + key] = sub->add_option(names, values[key], "configuration key " + key);
    }
  };

  CLI::App* mine = app.add_subcommand("mine", "run evolution rounds and write an archive manifest");
  CLI::App* evaluate = app.add_subcommand("evaluate", "score one alpha on a split");
  CLI::App* backtest = app.add_subcommand("backtest", "write the long-short return and NAV series of an alpha");
  CLI::App* prune = app.add_subcommand("prune", "print the pruned alpha, removed operations and fingerprint");
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic panel");
  CLI::App* data = app.add_subcommand("data", "data preparation");
  data->require_subcommand(1);
  CLI::App* prepare = data->add_subcommand("prepare", "build a panel cache from OHLCV CSV files");
  for (CLI::App* sub : {mine, evaluate, backtest, prune, synth, prepare}) add_keys(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sub : {mine, evaluate, backtest, prune, synth, prepare}) {
    if (sub->parsed()) active = sub;
  }

  try {
    RunConfig cfg;
    std::set<std::string> explicit_keys;
    if (!config_path.empty()) {
      if (!fs::is_regular_file(config_path)) throw MissingFile("config file not found: " + config_path);
      for (const auto& k : cfg.apply_file(config_path)) explicit_keys.insert(k);
    }
    for (const std::string& key : RunConfig::keys()) {
      if (options.at(active->get_name() + "/" + key)->count() > 0) {
        cfg.set(key, values[key]);
        explicit_keys.insert(key);
      }
    }
    if (!explicit_keys.count("seed")) {
      if (const char* env = std::getenv("ALPHAFORGE_SEED"); env != nullptr && *env != '\0') cfg.set("seed", env);
    }
    cfg.check();

    if (active == mine) return cmd_mine(cfg, out);
    if (active == evaluate) return cmd_evaluate(cfg, out);
    if (active == backtest) return cmd_backtest(cfg, out);
    if (active == prune) return cmd_prune(cfg, out);
    if (active == synth) return cmd_synth(cfg, out);
    return cmd_prepare(cfg, out);
  } catch (const UsageError& e) {
    err << "alphaforge: usage error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const ConfigError& e) {
    err << "alphaforge: configuration error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const MissingFile& e) {
    err << "alphaforge: " << e.what() << "\n";
    return exit_code::kMissingFile;
  } catch (const NoViableAlpha& e) {
    err << "alphaforge: " << e.what() << "\n";
    return exit_code::kNoViableAlpha;
  } catch (const std::exception& e) {
    err << "alphaforge: error: " << e.what() << "\n";
    return exit_code::kError;
  }
}

}  // namespace alphaforge
