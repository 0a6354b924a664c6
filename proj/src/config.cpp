#include "alphaforge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace alphaforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::array<int, 4> parse_windows(const std::string& key, const std::string& v) {
  const auto items = parse_list(v);
  if (items.size() != 4) throw ConfigError(key + " needs exactly four comma-separated windows");
  std::array<int, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = parse_integer<int>(key, items[i]);
  return out;
}

std::string fmt(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt(bool b) { return b ? "true" : "false"; }

template <class T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string join(const std::array<int, 4>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define AF_INT(name, expr, type)                                                             \
  Field {                                                                                    \
    name, [](RunConfig& c, const std::string& v) { expr = parse_integer<type>(name, v); }, \
        [](const RunConfig& c) { return fmt_int(expr); }                                    \
  }
#define AF_DOUBLE(name, expr)                                                       \
  Field {                                                                           \
    name, [](RunConfig& c, const std::string& v) { expr = parse_double(name, v); }, \
        [](const RunConfig& c) { return fmt(expr); }                               \
  }
#define AF_BOOL(name, expr)                                                       \
  Field {                                                                         \
    name, [](RunConfig& c, const std::string& v) { expr = parse_bool(name, v); }, \
        [](const RunConfig& c) { return fmt(expr); }                             \
  }
#define AF_STRING(name, expr)                                        \
  Field {                                                            \
    name, [](RunConfig& c, const std::string& v) { expr = v; },      \
        [](const RunConfig& c) { return std::string(expr); }         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      // search space
      AF_INT("n_scalars", c.evolution.search.n_scalars, int),
      AF_INT("n_vectors", c.evolution.search.n_vectors, int),
      AF_INT("n_matrices", c.evolution.search.n_matrices, int),
      AF_INT("min_ops", c.evolution.search.min_ops, int),
      AF_INT("max_ops_setup", c.evolution.search.max_ops_setup, int),
      AF_INT("max_ops_predict", c.evolution.search.max_ops_predict, int),
      AF_INT("max_ops_update", c.evolution.search.max_ops_update, int),
      AF_INT("feature_rows", c.evolution.search.feature_rows, int),
      AF_INT("feature_cols", c.evolution.search.feature_cols, int),
      // evolution
      AF_INT("population_size", c.evolution.population_size, int),
      AF_INT("tournament_size", c.evolution.tournament_size, int),
      AF_DOUBLE("mutation_prob", c.evolution.mutation_prob),
      AF_INT("budget", c.evolution.budget, std::uint64_t),
      AF_INT("seed", c.evolution.seed, std::uint64_t),
      AF_INT("eval_seed", c.evolution.eval_seed, std::uint64_t),
      AF_INT("workers", c.evolution.workers, int),
      AF_DOUBLE("time_limit", c.evolution.time_limit_seconds),
      AF_INT("log_every", c.evolution.log_every, int),
      AF_INT("rounds", c.rounds.rounds, int),
      AF_BOOL("seed_with_archive", c.rounds.seed_with_archive),
      AF_INT("inits", c.inits, int),
      Field{"seed_alphas", [](RunConfig& c, const std::string& v) { c.seed_alphas = parse_list(v); },
            [](const RunConfig& c) { return join(c.seed_alphas); }},
      // backtest
      AF_INT("top_n", c.evolution.backtest.top_n, int),
      AF_DOUBLE("risk_free", c.evolution.backtest.risk_free),
      AF_INT("trading_days", c.evolution.backtest.trading_days, int),
      AF_DOUBLE("cutoff", c.evolution.backtest.cutoff),
      Field{"cutoff_mode",
            [](RunConfig& c, const std::string& v) {
              try {
                c.evolution.backtest.cutoff_mode = parse_cutoff_mode(v);
              } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
              }
            },
            [](const RunConfig& c) { return to_string(c.evolution.backtest.cutoff_mode); }},
      // data
      Field{"ma_windows", [](RunConfig& c, const std::string& v) { c.panel.spec.ma_windows = parse_windows("ma_windows", v); },
            [](const RunConfig& c) { return join(c.panel.spec.ma_windows); }},
      Field{"vol_windows", [](RunConfig& c, const std::string& v) { c.panel.spec.vol_windows = parse_windows("vol_windows", v); },
            [](const RunConfig& c) { return join(c.panel.spec.vol_windows); }},
      AF_INT("window", c.panel.spec.window, int),
      AF_DOUBLE("min_coverage", c.panel.min_coverage),
      AF_DOUBLE("min_close", c.panel.min_close),
      AF_BOOL("train_only_normalization", c.panel.train_only_normalization),
      AF_STRING("data", c.data),
      AF_STRING("csv_dir", c.csv_dir),
      AF_STRING("groups", c.groups),
      AF_STRING("output", c.output),
      AF_STRING("out_dir", c.out_dir),
      AF_STRING("alpha", c.alpha),
      AF_STRING("split", c.split),
      AF_STRING("cache_file", c.cache_file),
      // synthetic panel
      AF_INT("synth_k", c.synth_k, std::size_t),
      AF_INT("synth_t", c.synth_t, std::size_t),
      AF_INT("synth_seed", c.synth_seed, std::uint64_t),
      AF_BOOL("planted", c.signal.planted),
      AF_INT("signal_row", c.signal.row, int),
      AF_INT("signal_col", c.signal.col, int),
      AF_DOUBLE("signal_beta", c.signal.beta),
      AF_DOUBLE("signal_noise", c.signal.noise),
  };
  return f;
}

#undef AF_INT
#undef AF_DOUBLE
#undef AF_BOOL
#undef AF_STRING

const Field& field(const std::string& key) {
  for (const Field& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const Field& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return k;
}

bool RunConfig::has_key(const std::string& key) {
  for (const Field& f : fields()) {
    if (key == f.key) return true;
  }
  return false;
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

std::vector<std::string> RunConfig::apply_text(const std::string& text, const std::string& origin) {
  std::vector<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    seen.push_back(key);
  }
  return seen;
}

std::vector<std::string> RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_text(ss.str(), path.string());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::check() const {
  try {
    evolution.check();
    panel.spec.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (rounds.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (inits < 0) throw ConfigError("inits must be >= 0");
  if (evolution.search.feature_cols != panel.spec.window) {
    throw ConfigError("feature_cols must equal the sample window");
  }
}

}  // namespace alphaforge
