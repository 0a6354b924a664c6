#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace alphaforge {

enum class Bank : std::uint8_t { Scalar, Vector, Matrix };

/// Kind of a constant carried inside an instruction.
enum class ImmKind : std::uint8_t {
  None,
  Real,    // free float, stored quantized to 1e-6
  Row,     // feature-matrix row index in [0, f)
  Col,     // feature-matrix column index in [0, w)
  Axis,    // 0 or 1
  Group,   // 0 = sector, 1 = industry
  Window,  // ts-rank lookback length
};

enum class OpCategory : std::uint8_t {
  Arithmetic,  // elementwise math, reductions, linear algebra, broadcasts
  Init,        // constants and uniform draws
  Extraction,  // reads out of the feature matrix m0
  Relation,    // cross-task ops: rank, relation_rank, relation_demean
  Temporal,    // ts_rank
};

// Catalog columns: id, text name, category, output bank, input banks (N = unused),
// immediate kinds, infix symbol (0 when printed as a call).
#define ALPHAFORGE_UNARY_OPS(X, B, b)                                   \
  X(Sin##B, "sin", Arithmetic, b, b, N, None, None, 0)                 \
  X(Cos##B, "cos", Arithmetic, b, b, N, None, None, 0)                 \
  X(Tan##B, "tan", Arithmetic, b, b, N, None, None, 0)                 \
  X(Arcsin##B, "arcsin", Arithmetic, b, b, N, None, None, 0)           \
  X(Arccos##B, "arccos", Arithmetic, b, b, N, None, None, 0)           \
  X(Arctan##B, "arctan", Arithmetic, b, b, N, None, None, 0)           \
  X(Exp##B, "exp", Arithmetic, b, b, N, None, None, 0)                 \
  X(Log##B, "log", Arithmetic, b, b, N, None, None, 0)                 \
  X(Abs##B, "abs", Arithmetic, b, b, N, None, None, 0)                 \
  X(Reciprocal##B, "reciprocal", Arithmetic, b, b, N, None, None, 0)   \
  X(Heaviside##B, "heaviside", Arithmetic, b, b, N, Real, None, 0)

#define ALPHAFORGE_BINARY_OPS(X, B, b)                      \
  X(Add##B, "+", Arithmetic, b, b, b, None, None, '+')     \
  X(Sub##B, "-", Arithmetic, b, b, b, None, None, '-')     \
  X(Mul##B, "*", Arithmetic, b, b, b, None, None, '*')     \
  X(Div##B, "/", Arithmetic, b, b, b, None, None, '/')     \
  X(Min##B, "min", Arithmetic, b, b, b, None, None, 0)     \
  X(Max##B, "max", Arithmetic, b, b, b, None, None, 0)

#define ALPHAFORGE_OPS(X)                                                  \
  ALPHAFORGE_UNARY_OPS(X, S, S)                                            \
  ALPHAFORGE_UNARY_OPS(X, V, V)                                            \
  ALPHAFORGE_UNARY_OPS(X, M, M)                                            \
  ALPHAFORGE_BINARY_OPS(X, S, S)                                           \
  ALPHAFORGE_BINARY_OPS(X, V, V)                                           \
  ALPHAFORGE_BINARY_OPS(X, M, M)                                           \
  X(NormM, "norm", Arithmetic, S, M, N, None, None, 0)                     \
  X(NormAxisM, "norm", Arithmetic, V, M, N, Axis, None, 0)                 \
  X(NormV, "norm", Arithmetic, S, V, N, None, None, 0)                     \
  X(MeanM, "mean", Arithmetic, S, M, N, None, None, 0)                     \
  X(MeanV, "mean", Arithmetic, S, V, N, None, None, 0)                     \
  X(StdM, "std", Arithmetic, S, M, N, None, None, 0)                       \
  X(StdV, "std", Arithmetic, S, V, N, None, None, 0)                       \
  X(Matmul, "matmul", Arithmetic, M, M, M, None, None, 0)                  \
  X(Transpose, "transpose", Arithmetic, M, M, N, None, None, 0)            \
  X(BroadcastS, "broadcast", Arithmetic, V, S, N, None, None, 0)           \
  X(BroadcastV, "broadcast", Arithmetic, M, V, N, Axis, None, 0)           \
  X(Const, "const", Init, S, N, N, Real, None, 0)                          \
  X(VectorUniform, "vector_uniform", Init, V, N, N, Real, Real, 0)         \
  X(GetScalar, "get_scalar", Extraction, S, M, N, Row, Col, 0)             \
  X(GetRow, "get_row", Extraction, V, M, N, Row, None, 0)                  \
  X(GetCol, "get_col", Extraction, V, M, N, Col, None, 0)                  \
  X(Rank, "rank", Relation, S, S, N, None, None, 0)                        \
  X(RelationRank, "relation_rank", Relation, S, S, N, Group, None, 0)      \
  X(RelationDemean, "relation_demean", Relation, S, S, N, Group, None, 0)  \
  X(TsRank, "tsrank", Temporal, S, S, N, Window, None, 0)

enum class Opcode : std::uint16_t {
#define ALPHAFORGE_ENUM(id, ...) id,
  ALPHAFORGE_OPS(ALPHAFORGE_ENUM)
#undef ALPHAFORGE_ENUM
};

struct OpInfo {
  Opcode op;
  std::string_view name;
  OpCategory category;
  Bank out;
  int n_in;
  std::array<Bank, 2> in;
  int n_imm;
  std::array<ImmKind, 2> imm;
  char infix;
};

std::span<const OpInfo> op_catalog();
const OpInfo& op_info(Opcode op);
std::size_t op_count();

/// Resolves a textual call to its catalog entry by name, input banks,
/// number of immediates and output bank.
std::optional<Opcode> find_op(std::string_view name, std::span<const Bank> inputs,
                              int n_imm, Bank out);

/// True when some catalog entry carries this name.
bool is_op_name(std::string_view name);

char bank_letter(Bank b);

}  // namespace alphaforge
