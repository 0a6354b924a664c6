#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alphaforge/generator.hpp"
#include "alphaforge/ops.hpp"
#include "alphaforge/program.hpp"
#include "alphaforge/text_format.hpp"
#include "test_support.hpp"

using namespace alphaforge;
using testing::program;

TEST_CASE("validate: minimal program is ok") {
  const AlphaProgram p = program("  s1 = s2 + s3\n");
  CHECK(validate_program(p, {}).ok());
}

TEST_CASE("validate: label read in predict") {
  const AlphaProgram p = program("  s4 = s0 * s2\n  s1 = s4 + s4\n");
  const ValidationReport r = validate_program(p, {});
  REQUIRE_FALSE(r.ok());
  CHECK(r.has(ViolationKind::LabelRead));
  CHECK(r.violations[0].component == Component::Predict);
  CHECK(r.violations[0].instruction == 0);
}

TEST_CASE("validate: label read in setup, allowed in update") {
  AlphaProgram p = program("  s1 = s2 + s3\n", "  s5 = s0 * s2\n");
  CHECK(validate_program(p, {}).ok());
  p.setup[0] = make_instruction(Opcode::AddS, {Bank::Scalar, 4}, {{{Bank::Scalar, 0}, {Bank::Scalar, 2}}});
  CHECK(validate_program(p, {}).has(ViolationKind::LabelRead));
}

TEST_CASE("validate: op count limits") {
  std::string body;
  for (int i = 0; i < 22; ++i) body += "  s1 = s2 + s3\n";
  const ValidationReport r = validate_program(program(body), {});
  CHECK(r.has(ViolationKind::TooManyOps));

  AlphaProgram empty_update = program("  s1 = s2 + s3\n");
  empty_update.update.clear();
  CHECK(validate_program(empty_update, {}).has(ViolationKind::TooFewOps));
  CHECK(validate_program(empty_update, {}, ValidationMode::Pruned).ok());
}

TEST_CASE("validate: predict must write s1") {
  CHECK(validate_program(program("  s2 = s3 + s4\n"), {}).has(ViolationKind::MissingPrediction));
}

TEST_CASE("validate: allow-lists") {
  SearchSpaceConfig cfg;
  CHECK(validate_program(program("  s1 = s2 + s3\n", "  s4 = rank(s5)\n"), cfg).has(ViolationKind::OpNotAllowed));
  CHECK(validate_program(program("  s1 = s2 + s3\n", "  s9 = s9 + s9\n", "  s4 = get_scalar(m0,1,1)\n"), cfg)
            .has(ViolationKind::OpNotAllowed));
  CHECK(validate_program(program("  s1 = rank(s2)\n", "  s4 = tsrank(s2,5)\n"), cfg).ok());
  for (Opcode op : allowed_ops(Component::Predict)) CHECK(op_allowed(Component::Predict, op));
}

TEST_CASE("validate: register and immediate ranges") {
  SearchSpaceConfig small;
  small.n_scalars = 5;
  CHECK(validate_program(program("  s1 = s2 + s7\n"), small).has(ViolationKind::RegisterOutOfRange));
  AlphaProgram p = program("  s1 = get_scalar(m0,3,12)\n");
  p.predict[0].imm[0] = 13;
  CHECK(validate_program(p, {}).has(ViolationKind::ImmediateOutOfRange));
  p = program("  s1 = get_scalar(m0,3,12)\n");
  p.predict[0].in[0] = {Bank::Matrix, 2};
  CHECK(validate_program(p, {}).has(ViolationKind::ExtractionSource));
}

TEST_CASE("validate is pure") {
  const AlphaProgram p = program("  s4 = s0 * s2\n  s2 = s3 + s4\n");
  CHECK(validate_program(p, {}).to_string() == validate_program(p, {}).to_string());
}

TEST_CASE("search space check") {
  SearchSpaceConfig cfg;
  cfg.feature_cols = 12;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg = {};
  cfg.n_scalars = 1;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("parse: infix subtraction") {
  const AlphaProgram p = parse_alpha_text("def Predict():\n  s5 = s6 - s9\n");
  REQUIRE(p.predict.size() == 1);
  CHECK(p.predict[0] == make_instruction(Opcode::SubS, {Bank::Scalar, 5}, {{{Bank::Scalar, 6}, {Bank::Scalar, 9}}}));
  CHECK(p.setup.empty());
  CHECK(p.update.empty());
}

TEST_CASE("parse: frobenius norm of m0") {
  const AlphaProgram p = parse_alpha_text("def Predict():\n  s3 = norm(m0)\n");
  CHECK(p.predict[0].op == Opcode::NormM);
  CHECK(p.predict[0].in[0] == kFeatureRegister);
  CHECK(p.predict[0].out == Register{Bank::Scalar, 3});
}

TEST_CASE("parse: vector_uniform with two immediates") {
  const AlphaProgram p = parse_alpha_text("def Update():\n  v2 = vector_uniform(0.314561,-0.187581)\n");
  CHECK(p.update[0].op == Opcode::VectorUniform);
  CHECK(p.update[0].imm[0] == 0.314561);
  CHECK(p.update[0].imm[1] == -0.187581);
}

TEST_CASE("parse: overloads resolve by operand banks") {
  const AlphaProgram p = parse_alpha_text(
      "def Predict():\n  v1 = norm(m2,axis=1)\n  s2 = norm(v1)\n  m3 = broadcast(v1,axis=0)\n  v4 = broadcast(s2)\n"
      "  s5 = relation_demean(s2,industry)\n  s6 = heaviside(s5,1.000000)\n");
  CHECK(p.predict[0].op == Opcode::NormAxisM);
  CHECK(p.predict[0].imm[0] == 1);
  CHECK(p.predict[1].op == Opcode::NormV);
  CHECK(p.predict[2].op == Opcode::BroadcastV);
  CHECK(p.predict[3].op == Opcode::BroadcastS);
  CHECK(p.predict[4].op == Opcode::RelationDemean);
  CHECK(p.predict[4].imm[0] == 1);
  CHECK(p.predict[5].op == Opcode::HeavisideS);
}

TEST_CASE("parse errors") {
  auto kind_of = [](const std::string& text) {
    try {
      parse_alpha_text(text);
    } catch (const ParseError& e) {
      return e.kind();
    }
    FAIL("no parse error");
    return ParseErrorKind::Syntax;
  };
  CHECK(kind_of("def Predict():\n  s1 = frobnicate(s2)\n") == ParseErrorKind::UnknownOpcode);
  CHECK(kind_of("def Predict():\n  s1 = sin(s2,s3)\n") == ParseErrorKind::ArityMismatch);
  CHECK(kind_of("def Predict():\n  s1 = s2 + s30\n") == ParseErrorKind::RegisterOutOfRange);
  CHECK(kind_of("def Predict():\n  s1 = s2 +\n") == ParseErrorKind::Syntax);
  CHECK(kind_of("def Update():\n  s4 = s2 + s3\ndef Predict():\n  s1 = s2 + s3\n") == ParseErrorKind::Syntax);
  try {
    parse_alpha_text("def Predict():\n  s1 = s2 ? s3\n");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("serialize: 1-op update prints header plus one line") {
  const AlphaProgram p = program("  s1 = s2 + s3\n", "  s4 = s5 * s6\n", "  s7 = const(0.250000)\n");
  const std::string text = serialize_alpha_text(p);
  CHECK(text ==
        "def Setup():\n  s7 = const(0.250000)\n"
        "def Predict():\n  s1 = s2 + s3\n"
        "def Update():\n  s4 = s5 * s6\n");
}

TEST_CASE("serialize: infix for + - * /, call syntax otherwise") {
  const AlphaProgram p = program("  s1 = s2 / s3\n  s1 = min(s1,s4)\n  m2 = m1 - m3\n  v3 = v1 * v2\n");
  const std::string text = serialize_alpha_text(p);
  CHECK(text.find("s1 = s2 / s3") != std::string::npos);
  CHECK(text.find("s1 = min(s1,s4)") != std::string::npos);
  CHECK(text.find("m2 = m1 - m3") != std::string::npos);
  CHECK(text.find("v3 = v1 * v2") != std::string::npos);
}

TEST_CASE("serialize: fixtures round-trip to their canonical form") {
  for (const char* name : {"evolved_d0", "evolved_nn1", "evolved_r2", "evolved_d3", "evolved_b4"}) {
    CAPTURE(name);
    const auto path = testing::source_dir() / "tests" / "fixtures" / (std::string(name) + ".alpha");
    const AlphaProgram p = load_alpha_file(path.string());
    CHECK(validate_program(p, {}).ok());
    const std::string canonical = serialize_alpha_text(p);
    CHECK(serialize_alpha_text(parse_alpha_text(canonical)) == canonical);
    CHECK(parse_alpha_text(canonical) == p);
  }
}

TEST_CASE("immediates are quantized to six decimals") {
  const AlphaProgram p = parse_alpha_text("def Setup():\n  s2 = const(0.1234567)\n");
  CHECK(p.setup[0].imm[0] == 0.123457);
  CHECK(quantize_immediate(-0.0000001) == 0.0);
  CHECK_FALSE(std::signbit(quantize_immediate(-0.0000001)));
}

TEST_CASE("random_program: determinism") {
  Rng a(42), b(42);
  CHECK(random_program({}, a) == random_program({}, b));
}

TEST_CASE("random_program: 10,000 samples are valid and within length bounds") {
  SearchSpaceConfig cfg;
  Rng rng(7);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const AlphaProgram p = random_program(cfg, rng);
    if (!validate_program(p, cfg).ok()) ++violations;
    for (Component c : kComponents) {
      const int n = static_cast<int>(p.component(c).size());
      CHECK(n >= 1);
      CHECK(n <= cfg.max_ops(c));
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("random_program: no s0 read in setup or predict") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const AlphaProgram p = random_program({}, rng);
    for (Component c : {Component::Setup, Component::Predict}) {
      for (const Instruction& ins : p.component(c)) {
        for (int k = 0; k < ins.info().n_in; ++k) CHECK_FALSE(ins.in[k] == kLabelRegister);
      }
    }
  }
}

TEST_CASE("random_program: lengths cover the whole range") {
  Rng rng(3);
  std::vector<int> seen(22, 0);
  for (int i = 0; i < 5000; ++i) seen[random_program({}, rng).setup.size()]++;
  for (int n = 1; n <= 21; ++n) CHECK(seen[n] > 0);
}

TEST_CASE("parse(serialize(p)) == p over 1,000 random programs") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const AlphaProgram p = random_program({}, rng);
    REQUIRE(parse_alpha_text(serialize_alpha_text(p)) == p);
  }
}

TEST_CASE("catalog covers every operator the evolved alphas use") {
  for (const char* name : {"sin", "cos", "tan", "arcsin", "arccos", "arctan", "exp", "log", "abs", "heaviside",
                           "reciprocal", "min", "max", "norm", "mean", "std", "matmul", "transpose", "broadcast",
                           "vector_uniform", "const", "get_scalar", "get_row", "get_col", "rank", "relation_rank",
                           "relation_demean", "tsrank"}) {
    CAPTURE(name);
    CHECK(is_op_name(name));
  }
}
