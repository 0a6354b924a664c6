#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphaforge/evolution.hpp"
#include "alphaforge/metrics.hpp"
#include "alphaforge/panel.hpp"
#include "alphaforge/program.hpp"

namespace alphaforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command can be configured with. Each field has a flat key
/// usable both in a `key = value` file and as a `--key` flag (underscores
/// may be written as dashes on the command line).
struct RunConfig {
  EvolutionConfig evolution;  // also holds the search space and backtest settings
  RoundsConfig rounds;
  int inits = 1;                         // random initializations per round
  std::vector<std::string> seed_alphas;  // alpha files used as extra initializations
  PanelBuildConfig panel;
  SignalSpec signal;
  std::size_t synth_k = 20;
  std::size_t synth_t = 300;
  std::uint64_t synth_seed = 0;

  std::string data;        // panel cache to read
  std::string csv_dir;     // OHLCV CSV directory (data prepare, synth export)
  std::string groups;      // ticker,sector,industry metadata
  std::string output;      // file written by synth and data prepare
  std::string out_dir = "out";
  std::string alpha;       // alpha file for evaluate, backtest, prune
  std::string split = "valid";
  std::string cache_file;  // optional persistent fitness cache

  /// All keys in echo order.
  static const std::vector<std::string>& keys();
  static bool has_key(const std::string& key);

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Applies `key = value` lines; `#` starts a comment. Returns the keys set.
  std::vector<std::string> apply_text(const std::string& text, const std::string& origin = "config");
  std::vector<std::string> apply_file(const std::filesystem::path& path);

  /// Effective configuration as `key = value` lines.
  std::string to_text() const;

  /// Cross-field checks (search space, evolution and backtest settings).
  void check() const;
};

}  // namespace alphaforge
