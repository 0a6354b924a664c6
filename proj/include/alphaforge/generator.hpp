#pragma once

#include <span>

#include "alphaforge/program.hpp"
#include "alphaforge/random.hpp"

namespace alphaforge {

/// Opcodes permitted in a component, in catalog order.
std::span<const Opcode> allowed_ops(Component c);

/// Uniform register of `bank`. Inputs drawn for Setup/Predict never pick s0;
/// extraction inputs are pinned to m0 by the caller.
Register random_register(Bank bank, Component c, bool is_input, const SearchSpaceConfig& cfg,
                         Rng& rng);

double random_immediate(ImmKind kind, const SearchSpaceConfig& cfg, Rng& rng);

/// Fresh instruction with the given opcode; operands and immediates uniform.
Instruction random_instruction_for(Opcode op, Component c, const SearchSpaceConfig& cfg, Rng& rng);

/// Opcode uniform over the component's allow-list.
Instruction random_instruction(Component c, const SearchSpaceConfig& cfg, Rng& rng);

/// Uniform lengths in [min_ops, max] per component; Predict is redrawn until
/// it writes s1, so the result always passes validate_program.
AlphaProgram random_program(const SearchSpaceConfig& cfg, Rng& rng);

}  // namespace alphaforge
