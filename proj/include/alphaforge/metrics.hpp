#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphaforge {

/// Row-major days x tasks table of doubles.
struct DayTaskMatrix {
  std::size_t days = 0;
  std::size_t tasks = 0;
  std::vector<double> data;

  DayTaskMatrix() = default;
  DayTaskMatrix(std::size_t d, std::size_t k, double fill = 0.0) : days(d), tasks(k), data(d * k, fill) {}

  std::span<double> row(std::size_t d) { return {data.data() + d * tasks, tasks}; }
  std::span<const double> row(std::size_t d) const { return {data.data() + d * tasks, tasks}; }
  double& at(std::size_t d, std::size_t k) { return data[d * tasks + k]; }
  double at(std::size_t d, std::size_t k) const { return data[d * tasks + k]; }

  friend bool operator==(const DayTaskMatrix&, const DayTaskMatrix&) = default;
};

/// A statistic that is mathematically undefined for the given input, such as
/// a Sharpe ratio of constant returns.
class UndefinedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CutoffMode { Signed, Absolute };

struct BacktestConfig {
  int top_n = 50;
  double risk_free = 0.0;
  int trading_days = 252;
  double cutoff = 0.15;
  CutoffMode cutoff_mode = CutoffMode::Signed;

  void check() const;
};

/// Sample Pearson correlation. Throws UndefinedMetric when either side has
/// zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct IcResult {
  double ic = 0.0;
  std::size_t degenerate_days = 0;  // constant or non-finite days, scored as 0
};

IcResult compute_ic_detailed(const DayTaskMatrix& predictions, const DayTaskMatrix& labels);
double compute_ic(const DayTaskMatrix& predictions, const DayTaskMatrix& labels);

/// Daily long-short return: half the difference between the mean realized
/// return of the top_n and bottom_n predicted tasks. Ties break toward the
/// lower task index.
std::vector<double> portfolio_returns(const DayTaskMatrix& predictions, const DayTaskMatrix& realized,
                                      const BacktestConfig& cfg);

/// NAV^t = NAV^{t-1} (1 + R^t) with NAV^0 = 1; one entry per return.
std::vector<double> nav_series(std::span<const double> returns);

/// (mean * trading_days - risk_free) / (sample std * sqrt(trading_days)).
double sharpe_ratio(std::span<const double> returns, const BacktestConfig& cfg);

/// Sample Pearson correlation of two return series.
double return_correlation(std::span<const double> a, std::span<const double> b);

/// Whether a correlation breaks the archive cutoff under the configured mode.
bool violates_cutoff(double correlation, const BacktestConfig& cfg);

std::string to_string(CutoffMode m);
CutoffMode parse_cutoff_mode(const std::string& s);

}  // namespace alphaforge
