#include "alphaforge/program.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace alphaforge {

std::string to_string(Register r) {
  return std::string(1, bank_letter(r.bank)) + std::to_string(r.index);
}

double quantize_immediate(double x) {
  double q = std::round(x * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;
}

Instruction make_instruction(Opcode op, Register out, std::array<Register, 2> in,
                             std::array<double, 2> imm) {
  const OpInfo& info = op_info(op);
  Instruction ins;
  ins.op = op;
  ins.out = out;
  for (int i = 0; i < 2; ++i) {
    if (i < info.n_in) ins.in[i] = in[i];
    if (i < info.n_imm) {
      ins.imm[i] = info.imm[i] == ImmKind::Real ? quantize_immediate(imm[i]) : std::round(imm[i]);
      if (ins.imm[i] == 0.0) ins.imm[i] = 0.0;
    }
  }
  return ins;
}

const char* component_name(Component c) {
  switch (c) {
    case Component::Setup:
      return "Setup";
    case Component::Predict:
      return "Predict";
    case Component::Update:
      return "Update";
  }
  return "?";
}

std::vector<Instruction>& AlphaProgram::component(Component c) {
  switch (c) {
    case Component::Setup:
      return setup;
    case Component::Predict:
      return predict;
    case Component::Update:
      break;
  }
  return update;
}

const std::vector<Instruction>& AlphaProgram::component(Component c) const {
  return const_cast<AlphaProgram*>(this)->component(c);
}

int SearchSpaceConfig::max_ops(Component c) const {
  switch (c) {
    case Component::Setup:
      return max_ops_setup;
    case Component::Predict:
      return max_ops_predict;
    case Component::Update:
      break;
  }
  return max_ops_update;
}

int SearchSpaceConfig::bank_size(Bank b) const {
  switch (b) {
    case Bank::Scalar:
      return n_scalars;
    case Bank::Vector:
      return n_vectors;
    case Bank::Matrix:
      break;
  }
  return n_matrices;
}

void SearchSpaceConfig::check() const {
  if (feature_rows != feature_cols) {
    throw std::invalid_argument("feature matrix must be square (f == w)");
  }
  if (feature_rows < 1) throw std::invalid_argument("feature dimension must be positive");
  if (n_scalars < 2 || n_vectors < 1 || n_matrices < 1) {
    throw std::invalid_argument("need at least 2 scalars, 1 vector and 1 matrix register");
  }
  if (n_scalars > 256 || n_vectors > 256 || n_matrices > 256) {
    throw std::invalid_argument("at most 256 registers per bank");
  }
  if (min_ops < 1) throw std::invalid_argument("min_ops must be at least 1");
  for (Component c : kComponents) {
    if (max_ops(c) < min_ops) {
      throw std::invalid_argument(std::string("max ops below min ops for ") + component_name(c));
    }
  }
}

bool op_allowed(Component c, Opcode op) {
  switch (op_info(op).category) {
    case OpCategory::Arithmetic:
    case OpCategory::Init:
      return true;
    case OpCategory::Extraction:
    case OpCategory::Temporal:
      return c != Component::Setup;
    case OpCategory::Relation:
      return c == Component::Predict;
  }
  return false;
}

const char* violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::TooManyOps:
      return "op count exceeded";
    case ViolationKind::TooFewOps:
      return "op count below minimum";
    case ViolationKind::LabelRead:
      return "label read in setup/predict";
    case ViolationKind::MissingPrediction:
      return "predict never writes s1";
    case ViolationKind::OpNotAllowed:
      return "op not allowed in component";
    case ViolationKind::RegisterOutOfRange:
      return "register out of range";
    case ViolationKind::ImmediateOutOfRange:
      return "immediate out of range";
    case ViolationKind::ExtractionSource:
      return "extraction must read m0";
    case ViolationKind::NonCanonical:
      return "unused slot not canonical";
  }
  return "?";
}

bool ValidationReport::has(ViolationKind k) const {
  for (const Violation& v : violations) {
    if (v.kind == k) return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const Violation& v : violations) {
    os << component_name(v.component);
    if (v.instruction >= 0) os << "[" << v.instruction << "]";
    os << ": " << violation_name(v.kind);
    if (!v.message.empty()) os << " (" << v.message << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

bool immediate_in_range(ImmKind kind, double x, const SearchSpaceConfig& cfg) {
  auto integral_in = [&](double lo, double hi) {
    return std::isfinite(x) && x == std::floor(x) && x >= lo && x < hi;
  };
  switch (kind) {
    case ImmKind::None:
      return x == 0.0;
    case ImmKind::Real:
      return std::isfinite(x) && x == quantize_immediate(x);
    case ImmKind::Row:
      return integral_in(0, cfg.feature_rows);
    case ImmKind::Col:
      return integral_in(0, cfg.feature_cols);
    case ImmKind::Axis:
    case ImmKind::Group:
      return integral_in(0, 2);
    case ImmKind::Window:
      return integral_in(1, 1e6);
  }
  return false;
}

}  // namespace

ValidationReport validate_instruction(const Instruction& ins, Component c, int index,
                                      const SearchSpaceConfig& cfg) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg) {
    report.violations.push_back({c, index, kind, std::move(msg)});
  };
  if (static_cast<std::size_t>(ins.op) >= op_count()) {
    add(ViolationKind::OpNotAllowed, "unknown opcode");
    return report;
  }
  const OpInfo& info = ins.info();
  if (!op_allowed(c, ins.op)) add(ViolationKind::OpNotAllowed, std::string(info.name));

  auto check_reg = [&](Register r, Bank expected, const char* what) {
    if (r.bank != expected || r.index >= cfg.bank_size(r.bank)) {
      add(ViolationKind::RegisterOutOfRange, std::string(what) + " " + to_string(r));
    }
  };
  check_reg(ins.out, info.out, "output");
  for (int i = 0; i < 2; ++i) {
    if (i < info.n_in) {
      check_reg(ins.in[i], info.in[i], "input");
      if (c != Component::Update && ins.in[i] == kLabelRegister) {
        add(ViolationKind::LabelRead, "");
      }
    } else if (!(ins.in[i] == Register{})) {
      add(ViolationKind::NonCanonical, "input slot");
    }
    const ImmKind kind = i < info.n_imm ? info.imm[i] : ImmKind::None;
    if (!immediate_in_range(kind, ins.imm[i], cfg)) {
      add(kind == ImmKind::None ? ViolationKind::NonCanonical : ViolationKind::ImmediateOutOfRange,
          std::to_string(ins.imm[i]));
    }
  }
  if (info.category == OpCategory::Extraction && !(ins.in[0] == kFeatureRegister)) {
    add(ViolationKind::ExtractionSource, to_string(ins.in[0]));
  }
  return report;
}

ValidationReport validate_program(const AlphaProgram& p, const SearchSpaceConfig& cfg,
                                  ValidationMode mode) {
  ValidationReport report;
  for (Component c : kComponents) {
    const auto& list = p.component(c);
    const int n = static_cast<int>(list.size());
    if (n > cfg.max_ops(c)) {
      report.violations.push_back({c, -1, ViolationKind::TooManyOps,
                                   std::to_string(n) + " > " + std::to_string(cfg.max_ops(c))});
    }
    if (mode == ValidationMode::Full && n < cfg.min_ops) {
      report.violations.push_back({c, -1, ViolationKind::TooFewOps, std::to_string(n)});
    }
    for (int i = 0; i < n; ++i) {
      ValidationReport one = validate_instruction(list[i], c, i, cfg);
      for (Violation& v : one.violations) report.violations.push_back(std::move(v));
    }
  }
  bool writes_prediction = false;
  for (const Instruction& ins : p.predict) {
    if (ins.out == kPredictionRegister) writes_prediction = true;
  }
  if (!writes_prediction) {
    report.violations.push_back({Component::Predict, -1, ViolationKind::MissingPrediction, ""});
  }
  return report;
}

}  // namespace alphaforge
