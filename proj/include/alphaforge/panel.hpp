#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "alphaforge/metrics.hpp"

namespace alphaforge {

/// 13 feature rows: close MAs over ma_windows, close volatilities over
/// vol_windows, then open, high, low, close, volume. Each sample is the
/// trailing `window` days of these rows; column window-1 is the sample date.
struct FeatureSpec {
  std::array<int, 4> ma_windows{5, 10, 20, 30};
  std::array<int, 4> vol_windows{5, 10, 20, 30};
  int window = 13;

  static constexpr int kRows = 13;
  int longest() const;
  /// Leading dates without a full sample: longest lookback + window - 1.
  int warmup() const { return longest() + window - 1; }
  void check() const;
};

struct OhlcvSeries {
  std::vector<std::string> dates;
  std::vector<double> open, high, low, close, volume;

  std::size_t size() const { return dates.size(); }
};

/// Raw feature rows per date, row-major [date][13]. Rows whose lookback is not
/// yet full are NaN.
struct FeatureRows {
  std::size_t n_dates = 0;
  std::vector<double> values;

  double at(std::size_t date, int row) const { return values[date * FeatureSpec::kRows + row]; }
};

FeatureRows compute_features(std::span<const double> closes, std::span<const double> opens,
                             std::span<const double> highs, std::span<const double> lows,
                             std::span<const double> volumes, const FeatureSpec& spec = {});

/// label[t] = (close[t+1] - close[t]) / close[t]; one fewer entry than closes.
std::vector<double> make_labels(std::span<const double> closes);

/// Divides each row of `rows` (n_rows x n_dates, row-major) by its maximum
/// absolute finite value over dates [0, max_extent). All-zero rows stay zero.
void normalize_rows(std::span<double> rows, std::size_t n_rows, std::size_t n_dates,
                    std::size_t max_extent);

struct SplitSizes {
  std::size_t train = 0, valid = 0, test = 0;

  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

/// valid = test = round(n * 116 / 1220); train gets the rest.
SplitSizes split_sizes(std::size_t n_samples);

enum class Split { Train, Valid, Test };
Split parse_split(const std::string& s);
std::string to_string(Split s);

/// Normalized features, next-day labels and group ids for K stocks over N
/// consecutive sample dates.
class MarketPanel {
 public:
  MarketPanel() = default;

  std::size_t n_tasks() const { return tickers_.size(); }
  std::size_t n_samples() const { return dates_.size(); }
  int rows() const { return FeatureSpec::kRows; }
  int window() const { return window_; }
  std::size_t span_length() const { return n_samples() + static_cast<std::size_t>(window_) - 1; }

  const std::vector<std::string>& tickers() const { return tickers_; }
  const std::vector<std::string>& dates() const { return dates_; }
  const std::vector<int>& sector() const { return sector_; }
  const std::vector<int>& industry() const { return industry_; }
  const DayTaskMatrix& labels() const { return labels_; }
  const SplitSizes& split() const { return split_; }

  /// First sample index and count of a split.
  std::pair<std::size_t, std::size_t> split_range(Split s) const;

  /// Normalized feature value of (task, row) on span day `day`; sample s's
  /// window covers span days [s, s + window).
  double series(std::size_t task, int row, std::size_t day) const {
    return series_[(task * FeatureSpec::kRows + static_cast<std::size_t>(row)) * span_length() + day];
  }

  /// Writes the rows x window matrix of (task, sample) in row-major order.
  void fill_window(std::size_t sample, std::size_t task, double* out) const;
  /// K matrices for one sample, task-major.
  std::vector<double> window_block(std::size_t sample) const;

  void save(const std::filesystem::path& path) const;
  static MarketPanel load(const std::filesystem::path& path);

  /// Assembles a panel from parts; validates shapes.
  static MarketPanel from_parts(std::vector<std::string> tickers, std::vector<std::string> dates,
                                int window, std::vector<double> series, DayTaskMatrix labels,
                                std::vector<int> sector, std::vector<int> industry);

  /// Replaces labels (same shape).
  void set_labels(DayTaskMatrix labels);

  friend bool operator==(const MarketPanel&, const MarketPanel&) = default;

 private:
  std::vector<std::string> tickers_;
  std::vector<std::string> dates_;
  int window_ = 13;
  std::vector<double> series_;  // [task][row][span day]
  DayTaskMatrix labels_;        // samples x tasks
  std::vector<int> sector_;
  std::vector<int> industry_;
  SplitSizes split_;
};

struct PanelBuildConfig {
  FeatureSpec spec;
  double min_coverage = 0.98;
  double min_close = 1.0;
  bool train_only_normalization = false;
};

struct StockInput {
  std::string ticker;
  OhlcvSeries data;
  int sector = 0;
  int industry = 0;
};

/// Features, normalization, labels and splits for stocks that share one
/// date axis (no filtering).
MarketPanel build_panel(const std::vector<StockInput>& stocks, const PanelBuildConfig& cfg);

/// Parses `date,open,high,low,close,volume`. Errors name the file and line.
OhlcvSeries read_ohlcv_csv(const std::filesystem::path& path);

/// Filters by coverage and price floor, aligns dates (forward-filling gaps),
/// attaches groups from `ticker,sector,industry` metadata and builds a panel.
MarketPanel load_csv_panel(const std::vector<std::filesystem::path>& paths,
                           const std::filesystem::path& group_metadata, const PanelBuildConfig& cfg);

/// Optional linear dependence of labels on one normalized feature element.
struct SignalSpec {
  bool planted = false;
  int row = 3;
  int col = 12;
  double beta = 0.01;  // label scale per cross-sectional standard deviation
  double noise = 1.0;  // noise standard deviation relative to the signal
};

/// Geometric random walks with round-robin groups (industry = k mod 8,
/// sector = industry mod 4). With a planted signal, each day's labels are
/// beta * (z + noise * eps) where z is the cross-sectionally standardized
/// feature element (row, col).
MarketPanel generate_synthetic_panel(std::size_t k, std::size_t t, const SignalSpec& signal,
                                     std::uint64_t seed);

/// Raw OHLCV series behind generate_synthetic_panel, for CSV export.
std::vector<StockInput> generate_synthetic_stocks(std::size_t k, std::size_t t, std::uint64_t seed);

void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& s);

}  // namespace alphaforge
