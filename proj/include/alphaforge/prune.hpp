#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "alphaforge/program.hpp"

namespace alphaforge {

struct InstructionId {
  Component component = Component::Predict;
  int index = 0;

  friend auto operator<=>(const InstructionId&, const InstructionId&) = default;
};

/// Abstract blocks of one evaluation: Setup once, then training steps
/// (Predict then Update) and inference steps (Predict only).
enum class Block : std::uint8_t { Setup, PredictTrain, Update, PredictInfer };

enum class NodeKind : std::uint8_t { Zero, EnvFeatures, EnvLabel, Instruction };

struct GraphNode {
  NodeKind kind = NodeKind::Zero;
  Block block = Block::Setup;
  InstructionId id;  // meaningful for NodeKind::Instruction
};

/// Def-use graph over instruction copies. A Predict instruction appears twice,
/// once in the training block and once in the inference block. inputs[n]
/// lists every definition that may reach a read of node n, including
/// definitions from earlier timesteps through the Update -> Predict edge and
/// the ts_rank history an instruction carries across steps.
struct DependencyGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::vector<int>> inputs;
  std::vector<int> roots;  // definitions of s1 visible when Predict finishes

  static constexpr int kZero = 0;
  static constexpr int kEnvFeatures = 1;
  static constexpr int kEnvLabel = 2;
};

DependencyGraph build_dependency_graph(const AlphaProgram& p);

/// Instructions with at least one copy that can reach a root.
std::vector<InstructionId> live_instructions(const AlphaProgram& p);

struct PruneResult {
  AlphaProgram pruned;
  std::vector<InstructionId> removed;  // ids in the original program
};

PruneResult prune_redundant_ops(const AlphaProgram& p);

/// True iff the environment's feature matrix cannot influence any prediction.
bool is_redundant_alpha(const AlphaProgram& p);

struct Fingerprint {
  std::array<std::uint8_t, 16> bytes{};

  std::string hex() const;
  static Fingerprint from_hex(const std::string& text);
  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const noexcept;
};

/// Canonical byte serialization hashed by fingerprint(): per component a
/// length, then per instruction the opcode id, output and input registers and
/// the bit patterns of both immediates, all little-endian.
std::vector<std::uint8_t> canonical_bytes(const AlphaProgram& p);

/// 128-bit BLAKE2b digest of canonical_bytes. Expects a pruned program.
Fingerprint fingerprint(const AlphaProgram& pruned);

}  // namespace alphaforge
