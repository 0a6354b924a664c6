#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "alphaforge/program.hpp"

namespace alphaforge {

enum class ParseErrorKind : std::uint8_t { Syntax, UnknownOpcode, ArityMismatch, RegisterOutOfRange };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, int column, const std::string& what);

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  ParseErrorKind kind_;
  int line_;
  int column_;
};

/// Reads the listing format:
///
///   def Setup():
///     s4 = const(0.500000)
///   def Predict():
///     s3 = norm(m0)
///     s1 = s3 * s3
///   def Update():
///     m1 = m1 + m0
///
/// Headers appear at most once each, in this order; an omitted header leaves
/// that component empty. Blank lines and `#` comments are skipped. Float
/// immediates are quantized to 6 decimals on input.
AlphaProgram parse_alpha_text(std::string_view text, const SearchSpaceConfig& cfg = {});

std::string serialize_alpha_text(const AlphaProgram& p);

/// Right-hand side of one instruction, e.g. "s6 - s9" or "get_scalar(m0,3,12)".
std::string format_expression(const Instruction& ins);
std::string format_instruction(const Instruction& ins);

AlphaProgram load_alpha_file(const std::string& path, const SearchSpaceConfig& cfg = {});
void save_alpha_file(const std::string& path, const AlphaProgram& p);

}  // namespace alphaforge
