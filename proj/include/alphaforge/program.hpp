#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "alphaforge/ops.hpp"

namespace alphaforge {

struct Register {
  Bank bank = Bank::Scalar;
  std::uint8_t index = 0;

  friend bool operator==(const Register&, const Register&) = default;
};

inline constexpr Register kFeatureRegister{Bank::Matrix, 0};  // m0
inline constexpr Register kLabelRegister{Bank::Scalar, 0};     // s0
inline constexpr Register kPredictionRegister{Bank::Scalar, 1};  // s1

std::string to_string(Register r);

/// One operation. Unused input slots hold s0 and unused immediates hold 0.0
/// so that structural equality is plain member-wise equality.
struct Instruction {
  Opcode op = Opcode::AddS;
  std::array<Register, 2> in{};
  Register out{};
  std::array<double, 2> imm{};

  const OpInfo& info() const { return op_info(op); }
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Rounds a float immediate to the 6-decimal grid used by the text format
/// and clears negative zero.
double quantize_immediate(double x);

/// Builds an instruction with unused slots canonicalized.
Instruction make_instruction(Opcode op, Register out, std::array<Register, 2> in = {},
                             std::array<double, 2> imm = {});

enum class Component : std::uint8_t { Setup, Predict, Update };

inline constexpr std::array<Component, 3> kComponents{Component::Setup, Component::Predict,
                                                      Component::Update};

const char* component_name(Component c);

struct AlphaProgram {
  std::vector<Instruction> setup;
  std::vector<Instruction> predict;
  std::vector<Instruction> update;

  std::vector<Instruction>& component(Component c);
  const std::vector<Instruction>& component(Component c) const;
  std::size_t size() const { return setup.size() + predict.size() + update.size(); }

  friend bool operator==(const AlphaProgram&, const AlphaProgram&) = default;
};

struct SearchSpaceConfig {
  int n_scalars = 10;
  int n_vectors = 16;
  int n_matrices = 4;
  int min_ops = 1;
  int max_ops_setup = 21;
  int max_ops_predict = 21;
  int max_ops_update = 45;
  int feature_rows = 13;  // f
  int feature_cols = 13;  // w

  int max_ops(Component c) const;
  int bank_size(Bank b) const;
  /// Throws std::invalid_argument when the configuration is unusable
  /// (f != w, register counts too small to hold m0/s0/s1, bad op limits).
  void check() const;
};

/// Opcode allow-list per component. Setup: arithmetic and init ops. Predict:
/// everything. Update: everything but relation ops.
bool op_allowed(Component c, Opcode op);

enum class ViolationKind : std::uint8_t {
  TooManyOps,
  TooFewOps,
  LabelRead,
  MissingPrediction,
  OpNotAllowed,
  RegisterOutOfRange,
  ImmediateOutOfRange,
  ExtractionSource,
  NonCanonical,
};

const char* violation_name(ViolationKind k);

struct Violation {
  Component component;
  int instruction;  // -1 for component-level violations
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const;
  std::string to_string() const;
};

/// Pruned programs may have empty components; everything else still applies.
enum class ValidationMode : std::uint8_t { Full, Pruned };

ValidationReport validate_program(const AlphaProgram& p, const SearchSpaceConfig& cfg,
                                  ValidationMode mode = ValidationMode::Full);

/// Checks one instruction in isolation (signature, ranges, allow-list, s0 rule).
ValidationReport validate_instruction(const Instruction& ins, Component c, int index,
                                      const SearchSpaceConfig& cfg);

inline constexpr std::array<int, 4> kTsRankWindows{5, 10, 20, 30};

}  // namespace alphaforge
