#include "alphaforge/executor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "alphaforge/random.hpp"

namespace alphaforge {

TaskLayout TaskLayout::uniform(std::size_t n_tasks) {
  TaskLayout layout;
  layout.sector.assign(n_tasks, 0);
  layout.industry.assign(n_tasks, 0);
  layout.keys.resize(n_tasks);
  std::iota(layout.keys.begin(), layout.keys.end(), std::uint64_t{0});
  return layout;
}

namespace {

// NaN orders below every number and ties with other NaNs.
bool rank_less(double a, double b) {
  if (std::isnan(a)) return !std::isnan(b);
  if (std::isnan(b)) return false;
  return a < b;
}

std::vector<std::vector<int>> members_by_group(std::span<const int> groups, std::size_t n) {
  if (groups.empty()) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return {std::move(all)};
  }
  if (groups.size() != n) throw std::invalid_argument("group vector size differs from value count");
  int max_group = -1;
  for (int g : groups) {
    if (g < 0) throw std::invalid_argument("negative group id");
    max_group = std::max(max_group, g);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(max_group + 1));
  for (std::size_t k = 0; k < n; ++k) members[groups[k]].push_back(static_cast<int>(k));
  std::erase_if(members, [](const std::vector<int>& m) { return m.empty(); });
  return members;
}

std::size_t rank_members(std::span<const double> values, const std::vector<int>& members,
                         std::span<double> out, std::vector<int>& scratch) {
  std::size_t nan_count = 0;
  const std::size_t n = members.size();
  if (n == 1) {
    out[members[0]] = 0.5;
    return std::isnan(values[members[0]]) ? 1 : 0;
  }
  scratch.assign(members.begin(), members.end());
  std::sort(scratch.begin(), scratch.end(), [&](int a, int b) {
    if (rank_less(values[a], values[b])) return true;
    if (rank_less(values[b], values[a])) return false;
    return a < b;
  });
  const double denom = static_cast<double>(n - 1);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && !rank_less(values[scratch[i]], values[scratch[j]])) ++j;
    const double avg = static_cast<double>(i + j - 1) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      out[scratch[k]] = avg / denom;
      if (std::isnan(values[scratch[k]])) ++nan_count;
    }
    i = j;
  }
  return nan_count;
}

// Sums in sorted order so the mean does not depend on task order.
void demean_members(std::span<const double> values, const std::vector<int>& members,
                    std::span<double> out, std::vector<double>& scratch) {
  scratch.clear();
  for (int k : members) scratch.push_back(values[k]);
  std::sort(scratch.begin(), scratch.end(), rank_less);
  double sum = 0.0;
  for (double v : scratch) sum += v;
  const double mean = sum / static_cast<double>(members.size());
  for (int k : members) out[k] = values[k] - mean;
}

}  // namespace

std::size_t cross_sectional_rank(std::span<const double> values, std::span<const int> groups,
                                 std::span<double> out) {
  if (out.size() != values.size()) throw std::invalid_argument("rank output size mismatch");
  std::vector<double> tmp(values.begin(), values.end());
  std::vector<int> scratch;
  std::size_t nans = 0;
  for (const auto& members : members_by_group(groups, values.size())) {
    nans += rank_members(tmp, members, out, scratch);
  }
  return nans;
}

std::vector<double> cross_sectional_rank(std::span<const double> values,
                                         std::span<const int> groups) {
  std::vector<double> out(values.size());
  cross_sectional_rank(values, groups, out);
  return out;
}

void group_demean(std::span<const double> values, std::span<const int> groups,
                  std::span<double> out) {
  if (out.size() != values.size()) throw std::invalid_argument("demean output size mismatch");
  std::vector<double> tmp(values.begin(), values.end());
  std::vector<double> scratch;
  for (const auto& members : members_by_group(groups, values.size())) {
    demean_members(tmp, members, out, scratch);
  }
}

std::vector<double> group_demean(std::span<const double> values, std::span<const int> groups) {
  std::vector<double> out(values.size());
  group_demean(values, groups, out);
  return out;
}

double ts_rank(TsRankBuffer& buffer, double current, int window) {
  if (window < 1) throw std::invalid_argument("ts_rank window must be >= 1");
  double result = 0.5;
  if (!buffer.history.empty()) {
    std::size_t below = 0;
    for (double v : buffer.history) {
      if (v < current) ++below;
    }
    result = static_cast<double>(below) / static_cast<double>(buffer.history.size());
  }
  buffer.history.push_back(current);
  while (buffer.history.size() > static_cast<std::size_t>(window - 1)) buffer.history.pop_front();
  return result;
}

// ---------------------------------------------------------------------------

ExecutionState::ExecutionState(const SearchSpaceConfig& cfg, std::shared_ptr<const TaskLayout> layout,
                               std::uint64_t seed)
    : cfg_(cfg), layout_(std::move(layout)), seed_(seed) {
  cfg_.check();
  if (!layout_ || layout_->size() == 0) throw std::invalid_argument("execution needs at least one task");
  n_tasks_ = layout_->size();
  if (layout_->sector.size() != n_tasks_ || layout_->industry.size() != n_tasks_) {
    throw std::invalid_argument("task layout group vectors have the wrong size");
  }
  vec_len_ = static_cast<std::size_t>(cfg_.feature_cols);
  mat_len_ = static_cast<std::size_t>(cfg_.feature_rows) * vec_len_;
  scalars_.resize(static_cast<std::size_t>(cfg_.n_scalars) * n_tasks_);
  vectors_.resize(static_cast<std::size_t>(cfg_.n_vectors) * n_tasks_ * vec_len_);
  matrices_.resize(static_cast<std::size_t>(cfg_.n_matrices) * n_tasks_ * mat_len_);
  sector_members_ = members_by_group(layout_->sector, n_tasks_);
  industry_members_ = members_by_group(layout_->industry, n_tasks_);
}

void ExecutionState::reset() {
  std::fill(scalars_.begin(), scalars_.end(), 0.0);
  std::fill(vectors_.begin(), vectors_.end(), 0.0);
  std::fill(matrices_.begin(), matrices_.end(), 0.0);
  env_features_ = nullptr;
  m0_local_ = true;
  for (auto& per_component : ts_buffers_) per_component.clear();
  step_ = 0;
  diag_ = {};
}

std::span<const double> ExecutionState::vector(std::size_t task, int index) const {
  return {vectors_.data() + (index * n_tasks_ + task) * vec_len_, vec_len_};
}

std::span<const double> ExecutionState::matrix(std::size_t task, int index) const {
  if (index == 0 && !m0_local_) return {env_features_ + task * mat_len_, mat_len_};
  return {matrices_.data() + (index * n_tasks_ + task) * mat_len_, mat_len_};
}

// ---------------------------------------------------------------------------

namespace {

enum class Fn : std::uint8_t {
  Sin, Cos, Tan, Arcsin, Arccos, Arctan, Exp, Log, Abs, Reciprocal, Heaviside,
  Add, Sub, Mul, Div, Min, Max,
  NormM, NormAxisM, NormV, MeanM, MeanV, StdM, StdV, Matmul, Transpose, BroadcastS, BroadcastV,
  Const, VectorUniform, GetScalar, GetRow, GetCol, Rank, RelationRank, RelationDemean, TsRank,
};

Fn elementwise_fn(std::string_view name) {
  static constexpr std::pair<std::string_view, Fn> kNames[] = {
      {"sin", Fn::Sin},       {"cos", Fn::Cos},       {"tan", Fn::Tan},
      {"arcsin", Fn::Arcsin}, {"arccos", Fn::Arccos}, {"arctan", Fn::Arctan},
      {"exp", Fn::Exp},       {"log", Fn::Log},       {"abs", Fn::Abs},
      {"reciprocal", Fn::Reciprocal}, {"heaviside", Fn::Heaviside},
      {"+", Fn::Add},         {"-", Fn::Sub},         {"*", Fn::Mul},
      {"/", Fn::Div},         {"min", Fn::Min},       {"max", Fn::Max},
  };
  for (const auto& [n, fn] : kNames) {
    if (n == name) return fn;
  }
  throw std::logic_error("not an elementwise op");
}

std::vector<Fn> build_fn_table() {
  std::vector<Fn> table;
  for (const OpInfo& info : op_catalog()) {
    Fn fn;
    switch (info.op) {
      case Opcode::NormM: fn = Fn::NormM; break;
      case Opcode::NormAxisM: fn = Fn::NormAxisM; break;
      case Opcode::NormV: fn = Fn::NormV; break;
      case Opcode::MeanM: fn = Fn::MeanM; break;
      case Opcode::MeanV: fn = Fn::MeanV; break;
      case Opcode::StdM: fn = Fn::StdM; break;
      case Opcode::StdV: fn = Fn::StdV; break;
      case Opcode::Matmul: fn = Fn::Matmul; break;
      case Opcode::Transpose: fn = Fn::Transpose; break;
      case Opcode::BroadcastS: fn = Fn::BroadcastS; break;
      case Opcode::BroadcastV: fn = Fn::BroadcastV; break;
      case Opcode::Const: fn = Fn::Const; break;
      case Opcode::VectorUniform: fn = Fn::VectorUniform; break;
      case Opcode::GetScalar: fn = Fn::GetScalar; break;
      case Opcode::GetRow: fn = Fn::GetRow; break;
      case Opcode::GetCol: fn = Fn::GetCol; break;
      case Opcode::Rank: fn = Fn::Rank; break;
      case Opcode::RelationRank: fn = Fn::RelationRank; break;
      case Opcode::RelationDemean: fn = Fn::RelationDemean; break;
      case Opcode::TsRank: fn = Fn::TsRank; break;
      default: fn = elementwise_fn(info.name); break;
    }
    table.push_back(fn);
  }
  return table;
}

Fn fn_of(Opcode op) {
  static const std::vector<Fn> table = build_fn_table();
  return table[static_cast<std::size_t>(op)];
}

double heaviside(double x, double at_zero) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  if (x == 0.0) return at_zero;
  return x;  // NaN
}

void apply_unary(Fn fn, double c, const double* x, double* y, std::size_t n) {
  switch (fn) {
    case Fn::Sin: for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(x[i]); break;
    case Fn::Cos: for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(x[i]); break;
    case Fn::Tan: for (std::size_t i = 0; i < n; ++i) y[i] = std::tan(x[i]); break;
    case Fn::Arcsin: for (std::size_t i = 0; i < n; ++i) y[i] = std::asin(x[i]); break;
    case Fn::Arccos: for (std::size_t i = 0; i < n; ++i) y[i] = std::acos(x[i]); break;
    case Fn::Arctan: for (std::size_t i = 0; i < n; ++i) y[i] = std::atan(x[i]); break;
    case Fn::Exp: for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]); break;
    case Fn::Log: for (std::size_t i = 0; i < n; ++i) y[i] = std::log(x[i]); break;
    case Fn::Abs: for (std::size_t i = 0; i < n; ++i) y[i] = std::fabs(x[i]); break;
    case Fn::Reciprocal: for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / x[i]; break;
    case Fn::Heaviside: for (std::size_t i = 0; i < n; ++i) y[i] = heaviside(x[i], c); break;
    default: throw std::logic_error("not a unary op");
  }
}

void apply_binary(Fn fn, const double* a, const double* b, double* y, std::size_t n) {
  switch (fn) {
    case Fn::Add: for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i]; break;
    case Fn::Sub: for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i]; break;
    case Fn::Mul: for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i]; break;
    case Fn::Div: for (std::size_t i = 0; i < n; ++i) y[i] = a[i] / b[i]; break;
    case Fn::Min: for (std::size_t i = 0; i < n; ++i) y[i] = std::min(a[i], b[i]); break;
    case Fn::Max: for (std::size_t i = 0; i < n; ++i) y[i] = std::max(a[i], b[i]); break;
    default: throw std::logic_error("not a binary op");
  }
}

double sum_of(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_sq(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

// Population standard deviation.
double stddev(const double* x, std::size_t n) {
  const double mean = sum_of(x, n) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x[i] - mean) * (x[i] - mean);
  return std::sqrt(s / static_cast<double>(n));
}

std::uint64_t instruction_key(const Instruction& ins) {
  std::uint64_t h = static_cast<std::uint64_t>(ins.op);
  h = hash_combine(h, (static_cast<std::uint64_t>(ins.out.bank) << 8) | ins.out.index);
  h = hash_combine(h, std::bit_cast<std::uint64_t>(ins.imm[0]));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(ins.imm[1]));
  return h;
}

}  // namespace

class Interpreter {
 public:
  Interpreter(ExecutionState& s, Component c) : s_(s), component_(c), k_(s.n_tasks_) {}

  void run(const std::vector<Instruction>& code) {
    for (std::size_t i = 0; i < code.size(); ++i) exec(code[i], i);
    s_.diag_.instructions_executed += code.size() * k_;
  }

 private:
  std::size_t len(Bank b) const {
    switch (b) {
      case Bank::Scalar: return 1;
      case Bank::Vector: return s_.vec_len_;
      case Bank::Matrix: break;
    }
    return s_.mat_len_;
  }

  const double* in_ptr(Register r, std::size_t t) const {
    switch (r.bank) {
      case Bank::Scalar: return s_.scalars_.data() + r.index * k_ + t;
      case Bank::Vector: return s_.vectors_.data() + (r.index * k_ + t) * s_.vec_len_;
      case Bank::Matrix: break;
    }
    if (r.index == 0 && !s_.m0_local_) return s_.env_features_ + t * s_.mat_len_;
    return s_.matrices_.data() + (r.index * k_ + t) * s_.mat_len_;
  }

  double* out_ptr(Register r, std::size_t t) {
    switch (r.bank) {
      case Bank::Scalar: return s_.scalars_.data() + r.index * k_ + t;
      case Bank::Vector: return s_.vectors_.data() + (r.index * k_ + t) * s_.vec_len_;
      case Bank::Matrix: break;
    }
    return s_.matrices_.data() + (r.index * k_ + t) * s_.mat_len_;
  }

  std::vector<TsRankBuffer>& ts_buffers(std::size_t index) {
    auto& per_instruction = s_.ts_buffers_[static_cast<int>(component_)];
    if (per_instruction.size() <= index) per_instruction.resize(index + 1);
    auto& buffers = per_instruction[index];
    if (buffers.size() != k_) buffers.resize(k_);
    return buffers;
  }

  void exec(const Instruction& ins, std::size_t index) {
    const OpInfo& info = ins.info();
    const Fn fn = fn_of(ins.op);
    const std::size_t d = static_cast<std::size_t>(s_.cfg_.feature_cols);
    const std::size_t n_out = len(info.out);

    switch (fn) {
      case Fn::Sin: case Fn::Cos: case Fn::Tan: case Fn::Arcsin: case Fn::Arccos:
      case Fn::Arctan: case Fn::Exp: case Fn::Log: case Fn::Abs: case Fn::Reciprocal:
      case Fn::Heaviside:
        for (std::size_t t = 0; t < k_; ++t) {
          apply_unary(fn, ins.imm[0], in_ptr(ins.in[0], t), out_ptr(ins.out, t), n_out);
        }
        break;
      case Fn::Add: case Fn::Sub: case Fn::Mul: case Fn::Div: case Fn::Min: case Fn::Max:
        for (std::size_t t = 0; t < k_; ++t) {
          apply_binary(fn, in_ptr(ins.in[0], t), in_ptr(ins.in[1], t), out_ptr(ins.out, t), n_out);
        }
        break;
      case Fn::NormM: case Fn::NormV:
        for (std::size_t t = 0; t < k_; ++t) {
          *out_ptr(ins.out, t) = std::sqrt(sum_sq(in_ptr(ins.in[0], t), len(info.in[0])));
        }
        break;
      case Fn::MeanM: case Fn::MeanV:
        for (std::size_t t = 0; t < k_; ++t) {
          const std::size_t n = len(info.in[0]);
          *out_ptr(ins.out, t) = sum_of(in_ptr(ins.in[0], t), n) / static_cast<double>(n);
        }
        break;
      case Fn::StdM: case Fn::StdV:
        for (std::size_t t = 0; t < k_; ++t) {
          *out_ptr(ins.out, t) = stddev(in_ptr(ins.in[0], t), len(info.in[0]));
        }
        break;
      case Fn::NormAxisM:
        for (std::size_t t = 0; t < k_; ++t) {
          const double* m = in_ptr(ins.in[0], t);
          double* v = out_ptr(ins.out, t);
          for (std::size_t a = 0; a < d; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < d; ++b) {
              const double x = ins.imm[0] == 0.0 ? m[b * d + a] : m[a * d + b];
              s += x * x;
            }
            v[a] = std::sqrt(s);
          }
        }
        break;
      case Fn::Matmul:
        for (std::size_t t = 0; t < k_; ++t) {
          const double* a = in_ptr(ins.in[0], t);
          const double* b = in_ptr(ins.in[1], t);
          scratch_.assign(n_out, 0.0);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
              const double aik = a[i * d + k];
              for (std::size_t j = 0; j < d; ++j) scratch_[i * d + j] += aik * b[k * d + j];
            }
          }
          std::copy(scratch_.begin(), scratch_.end(), out_ptr(ins.out, t));
        }
        break;
      case Fn::Transpose:
        for (std::size_t t = 0; t < k_; ++t) {
          const double* a = in_ptr(ins.in[0], t);
          scratch_.resize(n_out);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) scratch_[j * d + i] = a[i * d + j];
          }
          std::copy(scratch_.begin(), scratch_.end(), out_ptr(ins.out, t));
        }
        break;
      case Fn::BroadcastS:
        for (std::size_t t = 0; t < k_; ++t) {
          const double x = *in_ptr(ins.in[0], t);
          std::fill_n(out_ptr(ins.out, t), n_out, x);
        }
        break;
      case Fn::BroadcastV:
        for (std::size_t t = 0; t < k_; ++t) {
          const double* v = in_ptr(ins.in[0], t);
          double* m = out_ptr(ins.out, t);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) m[i * d + j] = ins.imm[0] == 0.0 ? v[j] : v[i];
          }
        }
        break;
      case Fn::Const:
        for (std::size_t t = 0; t < k_; ++t) *out_ptr(ins.out, t) = ins.imm[0];
        break;
      case Fn::VectorUniform: {
        const double lo = ins.imm[0];
        const double hi = ins.imm[1];
        std::uint64_t key = hash_combine(s_.seed_, static_cast<std::uint64_t>(component_));
        key = hash_combine(key, s_.step_);
        key = hash_combine(key, instruction_key(ins));
        for (std::size_t t = 0; t < k_; ++t) {
          const std::uint64_t task_key = hash_combine(key, s_.layout_->keys[t]);
          double* v = out_ptr(ins.out, t);
          for (std::size_t i = 0; i < n_out; ++i) {
            v[i] = lo + (hi - lo) * unit_from_key(hash_combine(task_key, i));
          }
        }
        break;
      }
      case Fn::GetScalar: {
        const std::size_t at = static_cast<std::size_t>(ins.imm[0]) * d + static_cast<std::size_t>(ins.imm[1]);
        for (std::size_t t = 0; t < k_; ++t) *out_ptr(ins.out, t) = in_ptr(ins.in[0], t)[at];
        break;
      }
      case Fn::GetRow: {
        const std::size_t row = static_cast<std::size_t>(ins.imm[0]);
        for (std::size_t t = 0; t < k_; ++t) {
          const double* m = in_ptr(ins.in[0], t);
          std::copy_n(m + row * d, d, out_ptr(ins.out, t));
        }
        break;
      }
      case Fn::GetCol: {
        const std::size_t col = static_cast<std::size_t>(ins.imm[0]);
        for (std::size_t t = 0; t < k_; ++t) {
          const double* m = in_ptr(ins.in[0], t);
          double* v = out_ptr(ins.out, t);
          for (std::size_t i = 0; i < d; ++i) v[i] = m[i * d + col];
        }
        break;
      }
      case Fn::Rank: case Fn::RelationRank: {
        const std::span<const double> values(in_ptr(ins.in[0], 0), k_);
        scratch_.resize(k_);
        if (fn == Fn::Rank) {
          all_members_.resize(k_);
          std::iota(all_members_.begin(), all_members_.end(), 0);
          s_.diag_.nan_rank_inputs += rank_members(values, all_members_, scratch_, int_scratch_);
        } else {
          const auto& groups = ins.imm[0] == 0.0 ? s_.sector_members_ : s_.industry_members_;
          for (const auto& members : groups) {
            s_.diag_.nan_rank_inputs += rank_members(values, members, scratch_, int_scratch_);
          }
        }
        std::copy(scratch_.begin(), scratch_.end(), out_ptr(ins.out, 0));
        break;
      }
      case Fn::RelationDemean: {
        const std::span<const double> values(in_ptr(ins.in[0], 0), k_);
        scratch_.resize(k_);
        const auto& groups = ins.imm[0] == 0.0 ? s_.sector_members_ : s_.industry_members_;
        for (const auto& members : groups) demean_members(values, members, scratch_, sum_scratch_);
        std::copy(scratch_.begin(), scratch_.end(), out_ptr(ins.out, 0));
        break;
      }
      case Fn::TsRank: {
        auto& buffers = ts_buffers(index);
        const int window = static_cast<int>(ins.imm[0]);
        for (std::size_t t = 0; t < k_; ++t) {
          const double x = *in_ptr(ins.in[0], t);
          *out_ptr(ins.out, t) = ts_rank(buffers[t], x, window);
        }
        break;
      }
    }
    if (ins.out == kFeatureRegister) s_.m0_local_ = true;
  }

  ExecutionState& s_;
  Component component_;
  std::size_t k_;
  std::vector<double> scratch_;
  std::vector<double> sum_scratch_;
  std::vector<int> int_scratch_;
  std::vector<int> all_members_;
};

void run_setup(const AlphaProgram& p, ExecutionState& state) {
  Interpreter(state, Component::Setup).run(p.setup);
}

std::span<const double> execute_timestep(const AlphaProgram& p, ExecutionState& state,
                                         std::span<const double> features,
                                         std::optional<std::span<const double>> labels,
                                         Stage stage) {
  const std::size_t k = state.n_tasks();
  const auto& cfg = state.config();
  if (features.size() != k * static_cast<std::size_t>(cfg.feature_rows * cfg.feature_cols)) {
    throw std::invalid_argument("feature block must hold one f x w matrix per task");
  }
  if ((stage == Stage::Train) != labels.has_value()) {
    throw std::invalid_argument("labels must be given exactly for training steps");
  }
  if (labels && labels->size() != k) throw std::invalid_argument("one label per task required");

  ++state.step_;
  ++state.diag_.steps;
  state.env_features_ = features.data();
  state.m0_local_ = false;
  if (labels) std::copy(labels->begin(), labels->end(), state.scalars_.begin());

  Interpreter(state, Component::Predict).run(p.predict);
  // Copy predictions out before Update may overwrite s1.
  state.prediction_.assign(state.scalars_.begin() + k, state.scalars_.begin() + 2 * k);
  if (stage == Stage::Train) Interpreter(state, Component::Update).run(p.update);
  return state.prediction_;
}

}  // namespace alphaforge
