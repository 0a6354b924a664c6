#include "alphaforge/generator.hpp"

#include <array>
#include <vector>

namespace alphaforge {

namespace {

std::array<std::vector<Opcode>, 3> build_allow_lists() {
  std::array<std::vector<Opcode>, 3> lists;
  for (Component c : kComponents) {
    for (const OpInfo& info : op_catalog()) {
      if (op_allowed(c, info.op)) lists[static_cast<int>(c)].push_back(info.op);
    }
  }
  return lists;
}

const std::array<std::vector<Opcode>, 3>& allow_lists() {
  static const auto lists = build_allow_lists();
  return lists;
}

}  // namespace

std::span<const Opcode> allowed_ops(Component c) { return allow_lists()[static_cast<int>(c)]; }

Register random_register(Bank bank, Component c, bool is_input, const SearchSpaceConfig& cfg,
                         Rng& rng) {
  const int n = cfg.bank_size(bank);
  const int lo = (bank == Bank::Scalar && is_input && c != Component::Update) ? 1 : 0;
  return Register{bank, static_cast<std::uint8_t>(rng.uniform_int(lo, n - 1))};
}

double random_immediate(ImmKind kind, const SearchSpaceConfig& cfg, Rng& rng) {
  switch (kind) {
    case ImmKind::None:
      return 0.0;
    case ImmKind::Real:
      return quantize_immediate(rng.uniform(-1.0, 1.0));
    case ImmKind::Row:
      return rng.uniform_int(0, cfg.feature_rows - 1);
    case ImmKind::Col:
      return rng.uniform_int(0, cfg.feature_cols - 1);
    case ImmKind::Axis:
    case ImmKind::Group:
      return rng.uniform_int(0, 1);
    case ImmKind::Window:
      return kTsRankWindows[rng.uniform_int(0, static_cast<int>(kTsRankWindows.size()) - 1)];
  }
  return 0.0;
}

Instruction random_instruction_for(Opcode op, Component c, const SearchSpaceConfig& cfg, Rng& rng) {
  const OpInfo& info = op_info(op);
  std::array<Register, 2> in{};
  std::array<double, 2> imm{};
  for (int i = 0; i < info.n_in; ++i) {
    in[i] = info.category == OpCategory::Extraction ? kFeatureRegister
                                                    : random_register(info.in[i], c, true, cfg, rng);
  }
  for (int i = 0; i < info.n_imm; ++i) imm[i] = random_immediate(info.imm[i], cfg, rng);
  const Register out = random_register(info.out, c, false, cfg, rng);
  return make_instruction(op, out, in, imm);
}

Instruction random_instruction(Component c, const SearchSpaceConfig& cfg, Rng& rng) {
  const auto ops = allowed_ops(c);
  const Opcode op = ops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ops.size()) - 1))];
  return random_instruction_for(op, c, cfg, rng);
}

AlphaProgram random_program(const SearchSpaceConfig& cfg, Rng& rng) {
  AlphaProgram p;
  for (Component c : kComponents) {
    auto& list = p.component(c);
    for (;;) {
      list.clear();
      const int n = rng.uniform_int(cfg.min_ops, cfg.max_ops(c));
      bool writes_prediction = false;
      for (int i = 0; i < n; ++i) {
        list.push_back(random_instruction(c, cfg, rng));
        writes_prediction = writes_prediction || list.back().out == kPredictionRegister;
      }
      if (c != Component::Predict || writes_prediction) break;
    }
  }
  return p;
}

}  // namespace alphaforge
