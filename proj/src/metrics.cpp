#include "alphaforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alphaforge {

void BacktestConfig::check() const {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  if (trading_days < 1) throw std::invalid_argument("trading_days must be >= 1");
  if (!(cutoff >= -1.0 && cutoff <= 1.0)) throw std::invalid_argument("cutoff must lie in [-1, 1]");
}

namespace {

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("correlation inputs differ in length");
  if (a.size() < 2) throw UndefinedMetric("correlation needs at least two points");
  // an exactly constant side can still leave rounding noise in the sums
  if (is_constant(a) || is_constant(b)) throw UndefinedMetric("correlation of a constant series");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetric("correlation of a constant series");
  return sab / std::sqrt(saa * sbb);
}

IcResult compute_ic_detailed(const DayTaskMatrix& predictions, const DayTaskMatrix& labels) {
  if (predictions.days != labels.days || predictions.tasks != labels.tasks) {
    throw std::invalid_argument("prediction and label shapes differ");
  }
  if (predictions.days < 1) throw std::invalid_argument("IC needs at least one day");
  if (predictions.tasks < 2) throw std::invalid_argument("IC needs at least two tasks");
  IcResult result;
  double sum = 0.0;
  for (std::size_t d = 0; d < predictions.days; ++d) {
    const auto p = predictions.row(d);
    const auto y = labels.row(d);
    if (!all_finite(p) || !all_finite(y) || is_constant(p) || is_constant(y)) {
      ++result.degenerate_days;
      continue;
    }
    double c;
    try {
      c = pearson(p, y);
    } catch (const UndefinedMetric&) {
      ++result.degenerate_days;  // variance underflow
      continue;
    }
    if (!std::isfinite(c)) {
      ++result.degenerate_days;  // overflow in the sums
      continue;
    }
    sum += c;
  }
  result.ic = sum / static_cast<double>(predictions.days);
  return result;
}

double compute_ic(const DayTaskMatrix& predictions, const DayTaskMatrix& labels) {
  return compute_ic_detailed(predictions, labels).ic;
}

std::vector<double> portfolio_returns(const DayTaskMatrix& predictions, const DayTaskMatrix& realized,
                                      const BacktestConfig& cfg) {
  if (predictions.days != realized.days || predictions.tasks != realized.tasks) {
    throw std::invalid_argument("prediction and realized-return shapes differ");
  }
  const std::size_t k = predictions.tasks;
  const std::size_t n = static_cast<std::size_t>(cfg.top_n);
  if (cfg.top_n < 1 || 2 * n > k) {
    throw std::invalid_argument("portfolio needs 2 * top_n <= number of tasks");
  }
  std::vector<double> out(predictions.days);
  std::vector<std::size_t> order(k);
  for (std::size_t d = 0; d < predictions.days; ++d) {
    const auto p = predictions.row(d);
    const auto r = realized.row(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    double longs = 0.0, shorts = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      longs += r[order[i]];
      shorts += r[order[k - 1 - i]];
    }
    out[d] = 0.5 * (longs / static_cast<double>(n) - shorts / static_cast<double>(n));
  }
  return out;
}

std::vector<double> nav_series(std::span<const double> returns) {
  std::vector<double> nav;
  nav.reserve(returns.size());
  double v = 1.0;
  for (double r : returns) {
    v *= 1.0 + r;
    nav.push_back(v);
  }
  return nav;
}

double sharpe_ratio(std::span<const double> returns, const BacktestConfig& cfg) {
  if (returns.size() < 2) throw UndefinedMetric("Sharpe ratio needs at least two returns");
  if (is_constant(returns)) throw UndefinedMetric("Sharpe ratio of zero-volatility returns");
  const double n = static_cast<double>(returns.size());
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0 || !std::isfinite(sd)) throw UndefinedMetric("Sharpe ratio of zero-volatility returns");
  const double days = static_cast<double>(cfg.trading_days);
  return (mean * days - cfg.risk_free) / (sd * std::sqrt(days));
}

double return_correlation(std::span<const double> a, std::span<const double> b) {
  return pearson(a, b);
}

bool violates_cutoff(double correlation, const BacktestConfig& cfg) {
  const double c = cfg.cutoff_mode == CutoffMode::Absolute ? std::fabs(correlation) : correlation;
  return c > cfg.cutoff;
}

std::string to_string(CutoffMode m) { return m == CutoffMode::Signed ? "signed" : "absolute"; }

CutoffMode parse_cutoff_mode(const std::string& s) {
  if (s == "signed" || s == "Signed") return CutoffMode::Signed;
  if (s == "absolute" || s == "Absolute") return CutoffMode::Absolute;
  throw std::invalid_argument("cutoff_mode must be signed or absolute, got '" + s + "'");
}

}  // namespace alphaforge
