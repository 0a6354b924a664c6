#include "alphaforge/panel.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "alphaforge/random.hpp"

namespace alphaforge {

int FeatureSpec::longest() const {
  int m = 1;
  for (int w : ma_windows) m = std::max(m, w);
  for (int w : vol_windows) m = std::max(m, w);
  return m;
}

void FeatureSpec::check() const {
  for (int w : ma_windows) {
    if (w < 1) throw std::invalid_argument("moving-average windows must be >= 1");
  }
  for (int w : vol_windows) {
    if (w < 2) throw std::invalid_argument("volatility windows must be >= 2");
  }
  if (window < 1) throw std::invalid_argument("sample window must be >= 1");
}

FeatureRows compute_features(std::span<const double> closes, std::span<const double> opens,
                             std::span<const double> highs, std::span<const double> lows,
                             std::span<const double> volumes, const FeatureSpec& spec) {
  spec.check();
  const std::size_t n = closes.size();
  if (opens.size() != n || highs.size() != n || lows.size() != n || volumes.size() != n) {
    throw std::invalid_argument("OHLCV series differ in length");
  }
  constexpr int kR = FeatureSpec::kRows;
  FeatureRows fr;
  fr.n_dates = n;
  fr.values.assign(n * kR, std::nan(""));
  for (std::size_t t = 0; t < n; ++t) {
    double* row = fr.values.data() + t * kR;
    for (int i = 0; i < 4; ++i) {
      const std::size_t w = static_cast<std::size_t>(spec.ma_windows[i]);
      if (t + 1 >= w) {
        double s = 0.0;
        for (std::size_t j = t + 1 - w; j <= t; ++j) s += closes[j];
        row[i] = s / static_cast<double>(w);
      }
    }
    for (int i = 0; i < 4; ++i) {
      const std::size_t w = static_cast<std::size_t>(spec.vol_windows[i]);
      if (t + 1 >= w) {
        double s = 0.0;
        for (std::size_t j = t + 1 - w; j <= t; ++j) s += closes[j];
        const double mean = s / static_cast<double>(w);
        double ss = 0.0;
        for (std::size_t j = t + 1 - w; j <= t; ++j) ss += (closes[j] - mean) * (closes[j] - mean);
        row[4 + i] = std::sqrt(ss / static_cast<double>(w - 1));
      }
    }
    row[8] = opens[t];
    row[9] = highs[t];
    row[10] = lows[t];
    row[11] = closes[t];
    row[12] = volumes[t];
  }
  return fr;
}

std::vector<double> make_labels(std::span<const double> closes) {
  if (closes.size() < 2) throw std::invalid_argument("labels need at least two closes");
  std::vector<double> labels(closes.size() - 1);
  for (std::size_t t = 0; t + 1 < closes.size(); ++t) {
    if (closes[t] == 0.0) throw std::invalid_argument("zero close price");
    labels[t] = (closes[t + 1] - closes[t]) / closes[t];
  }
  return labels;
}

void normalize_rows(std::span<double> rows, std::size_t n_rows, std::size_t n_dates,
                    std::size_t max_extent) {
  if (rows.size() != n_rows * n_dates) throw std::invalid_argument("normalize_rows shape mismatch");
  max_extent = std::min(max_extent, n_dates);
  for (std::size_t r = 0; r < n_rows; ++r) {
    double* row = rows.data() + r * n_dates;
    double m = 0.0;
    for (std::size_t d = 0; d < max_extent; ++d) {
      if (std::isfinite(row[d])) m = std::max(m, std::fabs(row[d]));
    }
    if (m == 0.0) continue;
    for (std::size_t d = 0; d < n_dates; ++d) row[d] /= m;
  }
}

SplitSizes split_sizes(std::size_t n_samples) {
  SplitSizes s;
  s.valid = static_cast<std::size_t>(std::llround(static_cast<double>(n_samples) * 116.0 / 1220.0));
  s.test = s.valid;
  if (2 * s.valid > n_samples) throw std::invalid_argument("too few samples to split");
  s.train = n_samples - 2 * s.valid;
  return s;
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("split must be train, valid or test, got '" + s + "'");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::pair<std::size_t, std::size_t> MarketPanel::split_range(Split s) const {
  switch (s) {
    case Split::Train: return {0, split_.train};
    case Split::Valid: return {split_.train, split_.valid};
    case Split::Test: return {split_.train + split_.valid, split_.test};
  }
  return {0, 0};
}

void MarketPanel::fill_window(std::size_t sample, std::size_t task, double* out) const {
  const std::size_t len = span_length();
  const std::size_t w = static_cast<std::size_t>(window_);
  for (int r = 0; r < FeatureSpec::kRows; ++r) {
    const double* src = series_.data() + (task * FeatureSpec::kRows + r) * len + sample;
    std::copy_n(src, w, out + static_cast<std::size_t>(r) * w);
  }
}

std::vector<double> MarketPanel::window_block(std::size_t sample) const {
  const std::size_t m = static_cast<std::size_t>(FeatureSpec::kRows * window_);
  std::vector<double> block(n_tasks() * m);
  for (std::size_t k = 0; k < n_tasks(); ++k) fill_window(sample, k, block.data() + k * m);
  return block;
}

MarketPanel MarketPanel::from_parts(std::vector<std::string> tickers, std::vector<std::string> dates,
                                    int window, std::vector<double> series, DayTaskMatrix labels,
                                    std::vector<int> sector, std::vector<int> industry) {
  MarketPanel p;
  const std::size_t k = tickers.size();
  const std::size_t n = dates.size();
  if (k == 0 || n == 0) throw std::invalid_argument("panel needs at least one task and one date");
  if (window < 1) throw std::invalid_argument("panel window must be >= 1");
  if (series.size() != k * FeatureSpec::kRows * (n + window - 1)) {
    throw std::invalid_argument("panel feature series has the wrong size");
  }
  if (labels.days != n || labels.tasks != k) throw std::invalid_argument("panel labels have the wrong shape");
  if (sector.size() != k || industry.size() != k) throw std::invalid_argument("panel groups have the wrong size");
  for (double v : series) {
    if (!std::isfinite(v)) throw std::invalid_argument("panel features must be finite");
  }
  p.tickers_ = std::move(tickers);
  p.dates_ = std::move(dates);
  p.window_ = window;
  p.series_ = std::move(series);
  p.labels_ = std::move(labels);
  p.sector_ = std::move(sector);
  p.industry_ = std::move(industry);
  p.split_ = split_sizes(n);
  if (p.split_.train == 0 || p.split_.valid == 0) {
    throw std::invalid_argument("panel has " + std::to_string(n) + " samples, too few for a train/valid/test split");
  }
  return p;
}

void MarketPanel::set_labels(DayTaskMatrix labels) {
  if (labels.days != labels_.days || labels.tasks != labels_.tasks) {
    throw std::invalid_argument("replacement labels have the wrong shape");
  }
  labels_ = std::move(labels);
}

// ---------------------------------------------------------------------------

MarketPanel build_panel(const std::vector<StockInput>& stocks, const PanelBuildConfig& cfg) {
  cfg.spec.check();
  if (stocks.empty()) throw std::invalid_argument("no stocks to build a panel from");
  const std::size_t n = stocks.front().data.size();
  for (const auto& s : stocks) {
    if (s.data.size() != n || s.data.dates != stocks.front().data.dates) {
      throw std::invalid_argument("stocks must share one date axis");
    }
  }
  const std::size_t warmup = static_cast<std::size_t>(cfg.spec.warmup());
  const std::size_t w = static_cast<std::size_t>(cfg.spec.window);
  if (n <= warmup + 1) {
    throw std::invalid_argument("need more than " + std::to_string(warmup + 1) + " dates, got " +
                                std::to_string(n));
  }
  const std::size_t first_defined = static_cast<std::size_t>(cfg.spec.longest()) - 1;
  const std::size_t t0 = first_defined + w - 1;  // first sample date
  const std::size_t n_samples = n - 1 - t0;      // the last date has no label
  const std::size_t span = n_samples + w - 1;
  const SplitSizes split = split_sizes(n_samples);
  const std::size_t extent = cfg.train_only_normalization ? split.train + w - 1 : span;

  const std::size_t k = stocks.size();
  constexpr int kR = FeatureSpec::kRows;
  std::vector<double> series(k * kR * span);
  DayTaskMatrix labels(n_samples, k);
  std::vector<std::string> tickers, dates;
  std::vector<int> sector, industry;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& d = stocks[i].data;
    const FeatureRows fr = compute_features(d.close, d.open, d.high, d.low, d.volume, cfg.spec);
    std::span<double> rows(series.data() + i * kR * span, kR * span);
    for (int r = 0; r < kR; ++r) {
      for (std::size_t j = 0; j < span; ++j) rows[r * span + j] = fr.at(first_defined + j, r);
    }
    normalize_rows(rows, kR, span, extent);
    const std::vector<double> lab = make_labels(d.close);
    for (std::size_t s = 0; s < n_samples; ++s) labels.at(s, i) = lab[t0 + s];
    tickers.push_back(stocks[i].ticker);
    sector.push_back(stocks[i].sector);
    industry.push_back(stocks[i].industry);
  }
  const auto& all_dates = stocks.front().data.dates;
  dates.assign(all_dates.begin() + static_cast<std::ptrdiff_t>(t0),
               all_dates.begin() + static_cast<std::ptrdiff_t>(t0 + n_samples));
  return MarketPanel::from_parts(std::move(tickers), std::move(dates), cfg.spec.window,
                                 std::move(series), std::move(labels), std::move(sector),
                                 std::move(industry));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, const std::string& where) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::runtime_error(where + ": malformed number '" + std::string(s) + "'");
  }
  return v;
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

}  // namespace

OhlcvSeries read_ohlcv_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  OhlcvSeries s;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cells = split_commas(view);
    if (!header) {
      if (cells.size() != 6 || trim(cells[0]) != "date" || trim(cells[1]) != "open" ||
          trim(cells[2]) != "high" || trim(cells[3]) != "low" || trim(cells[4]) != "close" ||
          trim(cells[5]) != "volume") {
        throw std::runtime_error(where + ": expected header date,open,high,low,close,volume");
      }
      header = true;
      continue;
    }
    if (cells.size() != 6) throw std::runtime_error(where + ": expected 6 columns");
    const std::string_view date = trim(cells[0]);
    if (!is_iso_date(date)) throw std::runtime_error(where + ": malformed date '" + std::string(date) + "'");
    if (!s.dates.empty() && std::string(date) <= s.dates.back()) {
      throw std::runtime_error(where + ": dates must be strictly ascending");
    }
    s.dates.emplace_back(date);
    s.open.push_back(parse_number(cells[1], where));
    s.high.push_back(parse_number(cells[2], where));
    s.low.push_back(parse_number(cells[3], where));
    s.close.push_back(parse_number(cells[4], where));
    s.volume.push_back(parse_number(cells[5], where));
  }
  if (!header) throw std::runtime_error(path.string() + ": empty file");
  return s;
}

void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "date,open,high,low,close,volume\n";
  char buf[256];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.dates[i].c_str(), s.open[i],
                  s.high[i], s.low[i], s.close[i], s.volume[i]);
    out << buf;
  }
}

MarketPanel load_csv_panel(const std::vector<std::filesystem::path>& paths,
                           const std::filesystem::path& group_metadata, const PanelBuildConfig& cfg) {
  if (paths.empty()) throw std::invalid_argument("no OHLCV files given");
  struct Loaded {
    std::string ticker;
    OhlcvSeries data;
  };
  std::vector<Loaded> loaded;
  std::set<std::string> union_dates;
  for (const auto& p : paths) {
    Loaded l{p.stem().string(), read_ohlcv_csv(p)};
    union_dates.insert(l.data.dates.begin(), l.data.dates.end());
    loaded.push_back(std::move(l));
  }
  std::sort(loaded.begin(), loaded.end(), [](const Loaded& a, const Loaded& b) { return a.ticker < b.ticker; });
  for (std::size_t i = 1; i < loaded.size(); ++i) {
    if (loaded[i].ticker == loaded[i - 1].ticker) throw std::invalid_argument("duplicate ticker " + loaded[i].ticker);
  }

  // Coverage and price-floor filtering.
  std::vector<Loaded> kept;
  for (auto& l : loaded) {
    if (l.data.size() == 0) continue;
    const double coverage = static_cast<double>(l.data.size()) / static_cast<double>(union_dates.size());
    const double min_close = *std::min_element(l.data.close.begin(), l.data.close.end());
    if (coverage >= cfg.min_coverage && min_close >= cfg.min_close) kept.push_back(std::move(l));
  }
  if (kept.empty()) throw std::invalid_argument("every ticker was filtered out");

  // Common date range: from the latest first date to the earliest last date.
  std::string first = kept.front().data.dates.front();
  std::string last = kept.front().data.dates.back();
  for (const auto& l : kept) {
    first = std::max(first, l.data.dates.front());
    last = std::min(last, l.data.dates.back());
  }
  std::vector<std::string> axis;
  for (const auto& d : union_dates) {
    if (d >= first && d <= last) axis.push_back(d);
  }

  // Group metadata.
  std::ifstream meta(group_metadata);
  if (!meta) throw std::runtime_error("cannot open " + group_metadata.string());
  std::map<std::string, std::pair<std::string, std::string>> groups;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(meta, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_commas(view);
    const std::string where = group_metadata.string() + ":" + std::to_string(line_no);
    if (cells.size() != 3) throw std::runtime_error(where + ": expected ticker,sector,industry");
    if (!header) {
      if (trim(cells[0]) != "ticker") throw std::runtime_error(where + ": expected header ticker,sector,industry");
      header = true;
      continue;
    }
    groups[std::string(trim(cells[0]))] = {std::string(trim(cells[1])), std::string(trim(cells[2]))};
  }
  std::map<std::string, int> sector_ids, industry_ids;
  for (const auto& l : kept) {
    auto it = groups.find(l.ticker);
    if (it == groups.end()) throw std::invalid_argument("no group metadata for ticker " + l.ticker);
    sector_ids.emplace(it->second.first, 0);
    industry_ids.emplace(it->second.second, 0);
  }
  int next = 0;
  for (auto& [name, id] : sector_ids) id = next++;
  next = 0;
  for (auto& [name, id] : industry_ids) id = next++;

  std::vector<StockInput> stocks;
  for (const auto& l : kept) {
    StockInput s;
    s.ticker = l.ticker;
    s.sector = sector_ids.at(groups.at(l.ticker).first);
    s.industry = industry_ids.at(groups.at(l.ticker).second);
    s.data.dates = axis;
    std::size_t j = 0;
    std::size_t last_seen = 0;
    bool seen = false;
    for (const auto& d : axis) {
      while (j < l.data.size() && l.data.dates[j] < d) ++j;
      if (j < l.data.size() && l.data.dates[j] == d) {
        last_seen = j;
        seen = true;
      }
      if (!seen) throw std::logic_error("date axis starts before a retained ticker");
      // Missing days repeat the previous row.
      s.data.open.push_back(l.data.open[last_seen]);
      s.data.high.push_back(l.data.high[last_seen]);
      s.data.low.push_back(l.data.low[last_seen]);
      s.data.close.push_back(l.data.close[last_seen]);
      s.data.volume.push_back(l.data.volume[last_seen]);
    }
    stocks.push_back(std::move(s));
  }
  return build_panel(stocks, cfg);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> weekday_dates(std::size_t n) {
  using namespace std::chrono;
  std::vector<std::string> out;
  sys_days day = sys_days{year{2010} / January / 4};
  char buf[16];
  while (out.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day};
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

}  // namespace

std::vector<StockInput> generate_synthetic_stocks(std::size_t k, std::size_t t, std::uint64_t seed) {
  if (k < 4) throw std::invalid_argument("synthetic panel needs k >= 4");
  if (t < 60) throw std::invalid_argument("synthetic panel needs t >= 60");
  const std::vector<std::string> dates = weekday_dates(t);
  std::vector<StockInput> stocks(k);
  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(hash_combine(seed, i));
    StockInput& s = stocks[i];
    char name[32];
    std::snprintf(name, sizeof name, "SYN%03zu", i);
    s.ticker = name;
    s.industry = static_cast<int>(i % 8);
    s.sector = s.industry % 4;
    s.data.dates = dates;
    const double drift = rng.uniform(-0.0005, 0.001);
    const double vol = rng.uniform(0.01, 0.03);
    const double base_volume = std::exp(rng.uniform(11.0, 15.0));
    double close = rng.uniform(10.0, 100.0);
    for (std::size_t d = 0; d < t; ++d) {
      const double open = close * std::exp(0.25 * vol * rng.normal());
      close = open * std::exp(drift - 0.5 * vol * vol + vol * rng.normal());
      const double hi = std::max(open, close) * (1.0 + 0.5 * vol * std::fabs(rng.normal()));
      const double lo = std::min(open, close) * (1.0 - 0.5 * vol * std::fabs(rng.normal()));
      s.data.open.push_back(open);
      s.data.high.push_back(hi);
      s.data.low.push_back(lo);
      s.data.close.push_back(close);
      s.data.volume.push_back(std::round(base_volume * std::exp(0.3 * rng.normal())));
    }
  }
  return stocks;
}

MarketPanel generate_synthetic_panel(std::size_t k, std::size_t t, const SignalSpec& signal,
                                     std::uint64_t seed) {
  MarketPanel panel = build_panel(generate_synthetic_stocks(k, t, seed), PanelBuildConfig{});
  if (!signal.planted) return panel;
  if (signal.row < 0 || signal.row >= FeatureSpec::kRows || signal.col < 0 || signal.col >= panel.window()) {
    throw std::invalid_argument("planted feature element out of range");
  }
  Rng rng(hash_combine(seed, 0x5157ULL));
  DayTaskMatrix labels(panel.n_samples(), k);
  std::vector<double> x(k);
  for (std::size_t s = 0; s < panel.n_samples(); ++s) {
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = panel.series(i, signal.row, s + static_cast<std::size_t>(signal.col));
      mean += x[i];
    }
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const double z = sd > 0.0 ? (x[i] - mean) / sd : 0.0;
      labels.at(s, i) = signal.beta * (z + signal.noise * rng.normal());
    }
  }
  panel.set_labels(std::move(labels));
  return panel;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kPanelMagic[4] = {'A', 'F', 'P', '1'};

struct Writer {
  std::ostream& os;
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
};

struct Reader {
  std::istream& is;
  std::uint64_t u64() {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated panel file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::uint64_t count(std::uint64_t limit) {
    const std::uint64_t n = u64();
    if (n > limit) throw std::runtime_error("corrupt panel file (implausible length)");
    return n;
  }
  std::string str() {
    std::string s(count(1 << 20), '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(s.size()))) throw std::runtime_error("truncated panel file");
    return s;
  }
};

}  // namespace

void MarketPanel::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kPanelMagic, 4);
  Writer w{os};
  w.u64(n_tasks());
  w.u64(n_samples());
  w.u64(static_cast<std::uint64_t>(window_));
  for (const auto& t : tickers_) w.str(t);
  for (const auto& d : dates_) w.str(d);
  for (std::size_t k = 0; k < n_tasks(); ++k) {
    w.i64(sector_[k]);
    w.i64(industry_[k]);
  }
  for (double v : series_) w.f64(v);
  for (double v : labels_.data) w.f64(v);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

MarketPanel MarketPanel::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kPanelMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a panel file (expected AFP1 header)");
  }
  Reader r{is};
  const std::uint64_t k = r.count(1 << 20);
  const std::uint64_t n = r.count(1 << 24);
  const int window = static_cast<int>(r.count(1024));
  std::vector<std::string> tickers, dates;
  for (std::uint64_t i = 0; i < k; ++i) tickers.push_back(r.str());
  for (std::uint64_t i = 0; i < n; ++i) dates.push_back(r.str());
  std::vector<int> sector(k), industry(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    sector[i] = static_cast<int>(r.i64());
    industry[i] = static_cast<int>(r.i64());
  }
  std::vector<double> series(k * FeatureSpec::kRows * (n + window - 1));
  for (double& v : series) v = r.f64();
  DayTaskMatrix labels(n, k);
  for (double& v : labels.data) v = r.f64();
  return from_parts(std::move(tickers), std::move(dates), window, std::move(series), std::move(labels),
                    std::move(sector), std::move(industry));
}

}  // namespace alphaforge
