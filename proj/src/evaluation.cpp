#include "alphaforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphaforge {

std::uint64_t ticker_key(const std::string& ticker) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : ticker) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::size_t kMaxPrecomputedBytes = std::size_t{256} << 20;

}  // namespace

EvaluationContext::EvaluationContext(std::shared_ptr<const MarketPanel> panel,
                                     const SearchSpaceConfig& search)
    : panel_(std::move(panel)), search_(search) {
  search_.check();
  if (!panel_) throw std::invalid_argument("evaluation needs a panel");
  if (search_.feature_rows != panel_->rows() || search_.feature_cols != panel_->window()) {
    throw std::invalid_argument("search space feature shape does not match the panel");
  }
  auto layout = std::make_shared<TaskLayout>();
  layout->sector = panel_->sector();
  layout->industry = panel_->industry();
  for (const auto& t : panel_->tickers()) layout->keys.push_back(ticker_key(t));
  layout_ = std::move(layout);

  block_size_ = panel_->n_tasks() * static_cast<std::size_t>(panel_->rows() * panel_->window());
  if (block_size_ * panel_->n_samples() * sizeof(double) <= kMaxPrecomputedBytes) {
    blocks_.resize(block_size_ * panel_->n_samples());
    const std::size_t m = static_cast<std::size_t>(panel_->rows() * panel_->window());
    for (std::size_t s = 0; s < panel_->n_samples(); ++s) {
      for (std::size_t k = 0; k < panel_->n_tasks(); ++k) {
        panel_->fill_window(s, k, blocks_.data() + s * block_size_ + k * m);
      }
    }
  }
}

std::span<const double> EvaluationContext::block(std::size_t sample, std::vector<double>& scratch) const {
  if (!blocks_.empty()) return {blocks_.data() + sample * block_size_, block_size_};
  scratch = panel_->window_block(sample);
  return scratch;
}

DayTaskMatrix split_labels(const MarketPanel& panel, Split s) {
  const auto [first, count] = panel.split_range(s);
  DayTaskMatrix out(count, panel.n_tasks());
  const auto& labels = panel.labels();
  std::copy(labels.data.begin() + static_cast<std::ptrdiff_t>(first * panel.n_tasks()),
            labels.data.begin() + static_cast<std::ptrdiff_t>((first + count) * panel.n_tasks()),
            out.data.begin());
  return out;
}

int effective_top_n(const BacktestConfig& cfg, std::size_t n_tasks) {
  return std::max(1, std::min(cfg.top_n, static_cast<int>(n_tasks / 2)));
}

namespace {

// Runs inference over [first, first + count) into `out`; returns false as
// soon as `stop_on_non_finite` sees a non-finite prediction.
bool infer_range(const AlphaProgram& p, ExecutionState& state, const EvaluationContext& ctx,
                 std::size_t first, std::size_t count, DayTaskMatrix& out, bool stop_on_non_finite,
                 std::vector<double>& scratch) {
  out = DayTaskMatrix(count, ctx.panel().n_tasks());
  for (std::size_t d = 0; d < count; ++d) {
    const auto pred = execute_timestep(p, state, ctx.block(first + d, scratch), std::nullopt, Stage::Infer);
    std::copy(pred.begin(), pred.end(), out.row(d).begin());
    if (stop_on_non_finite &&
        !std::all_of(pred.begin(), pred.end(), [](double v) { return std::isfinite(v); })) {
      return false;
    }
  }
  return true;
}

void train_range(const AlphaProgram& p, ExecutionState& state, const EvaluationContext& ctx,
                 DayTaskMatrix* out, std::vector<double>& scratch) {
  const MarketPanel& panel = ctx.panel();
  const auto [first, count] = panel.split_range(Split::Train);
  if (out) *out = DayTaskMatrix(count, panel.n_tasks());
  for (std::size_t d = 0; d < count; ++d) {
    const auto labels = panel.labels().row(first + d);
    const auto pred = execute_timestep(p, state, ctx.block(first + d, scratch), labels, Stage::Train);
    if (out) std::copy(pred.begin(), pred.end(), out->row(d).begin());
  }
}

bool all_finite(const DayTaskMatrix& m) {
  return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

AlphaRun run_alpha(const AlphaProgram& p, const EvaluationContext& ctx, std::uint64_t seed,
                   bool include_test) {
  ExecutionState state(ctx.search(), ctx.layout(), seed);
  std::vector<double> scratch;
  AlphaRun run;
  run_setup(p, state);
  train_range(p, state, ctx, &run.train, scratch);
  const auto [vf, vc] = ctx.panel().split_range(Split::Valid);
  infer_range(p, state, ctx, vf, vc, run.valid, false, scratch);
  if (include_test) {
    const auto [tf, tc] = ctx.panel().split_range(Split::Test);
    infer_range(p, state, ctx, tf, tc, run.test, false, scratch);
  }
  run.diagnostics = state.diagnostics();
  return run;
}

FitnessRecord train_and_score(const AlphaProgram& p, const EvaluationContext& ctx, const EvalConfig& cfg) {
  const MarketPanel& panel = ctx.panel();
  BacktestConfig bt = cfg.backtest;
  bt.top_n = effective_top_n(bt, panel.n_tasks());

  ExecutionState state(ctx.search(), ctx.layout(), cfg.seed);
  std::vector<double> scratch;
  run_setup(p, state);
  train_range(p, state, ctx, nullptr, scratch);

  DayTaskMatrix valid;
  const auto [vf, vc] = panel.split_range(Split::Valid);
  if (!infer_range(p, state, ctx, vf, vc, valid, true, scratch)) {
    return FitnessRecord::make_sentinel(SentinelReason::NonFinite);
  }
  const DayTaskMatrix valid_labels = split_labels(panel, Split::Valid);
  const IcResult ic = compute_ic_detailed(valid, valid_labels);

  FitnessRecord r;
  r.sentinel = false;
  r.ic = ic.ic;
  r.nan_days = ic.degenerate_days;
  r.val_portfolio_returns = portfolio_returns(valid, valid_labels, bt);

  if (cfg.include_test && panel.split().test > 0) {
    DayTaskMatrix test;
    const auto [tf, tc] = panel.split_range(Split::Test);
    infer_range(p, state, ctx, tf, tc, test, false, scratch);
    const DayTaskMatrix test_labels = split_labels(panel, Split::Test);
    r.test_ic = compute_ic(test, test_labels);
    if (all_finite(test)) r.test_portfolio_returns = portfolio_returns(test, test_labels, bt);
  }
  return r;
}

}  // namespace alphaforge
