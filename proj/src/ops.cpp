#include "alphaforge/ops.hpp"

#include <algorithm>

namespace alphaforge {

namespace {

constexpr Bank S = Bank::Scalar;
constexpr Bank V = Bank::Vector;
constexpr Bank M = Bank::Matrix;
// Placeholder for an unused input slot; n_in decides what is read.
constexpr Bank N = Bank::Scalar;

constexpr int count_inputs(bool a, bool b) { return (a ? 1 : 0) + (b ? 1 : 0); }

#define ALPHAFORGE_ROW(id, nm, cat, out, in0, in1, imm0, imm1, fix)                     \
  OpInfo{Opcode::id,                                                                   \
         nm,                                                                           \
         OpCategory::cat,                                                              \
         out,                                                                          \
         count_inputs(#in0[0] != 'N', #in1[0] != 'N'),                                 \
         {in0, in1},                                                                   \
         count_inputs(ImmKind::imm0 != ImmKind::None, ImmKind::imm1 != ImmKind::None), \
         {ImmKind::imm0, ImmKind::imm1},                                               \
         fix},

constexpr OpInfo kCatalog[] = {ALPHAFORGE_OPS(ALPHAFORGE_ROW)};

#undef ALPHAFORGE_ROW

constexpr bool catalog_is_ordered() {
  for (std::size_t i = 0; i < std::size(kCatalog); ++i) {
    if (static_cast<std::size_t>(kCatalog[i].op) != i) return false;
  }
  return true;
}
static_assert(catalog_is_ordered());

}  // namespace

std::span<const OpInfo> op_catalog() { return kCatalog; }

const OpInfo& op_info(Opcode op) { return kCatalog[static_cast<std::size_t>(op)]; }

std::size_t op_count() { return std::size(kCatalog); }

std::optional<Opcode> find_op(std::string_view name, std::span<const Bank> inputs,
                              int n_imm, Bank out) {
  for (const OpInfo& info : kCatalog) {
    if (info.name != name || info.n_in != static_cast<int>(inputs.size()) ||
        info.n_imm != n_imm || info.out != out) {
      continue;
    }
    if (std::equal(inputs.begin(), inputs.end(), info.in.begin())) return info.op;
  }
  return std::nullopt;
}

bool is_op_name(std::string_view name) {
  return std::any_of(std::begin(kCatalog), std::end(kCatalog),
                     [&](const OpInfo& info) { return info.name == name; });
}

char bank_letter(Bank b) {
  switch (b) {
    case Bank::Scalar:
      return 's';
    case Bank::Vector:
      return 'v';
    case Bank::Matrix:
      return 'm';
  }
  return '?';
}

}  // namespace alphaforge
