#include "alphaforge/text_format.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace alphaforge {

ParseError::ParseError(ParseErrorKind kind, int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      message_(what),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string format_immediate(ImmKind kind, double x) {
  switch (kind) {
    case ImmKind::Real:
      return format_real(x);
    case ImmKind::Axis:
      return "axis=" + std::to_string(static_cast<long>(x));
    case ImmKind::Group:
      return x == 0.0 ? "sector" : "industry";
    default:
      return std::to_string(static_cast<long>(x));
  }
}

struct Arg {
  enum class Kind { Reg, Number, Axis, Group } kind;
  Register reg{};
  double value = 0.0;
  int column = 0;
};

class LineScanner {
 public:
  LineScanner(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= line_.size();
  }
  int column() const { return static_cast<int>(pos_) + 1; }
  char peek() {
    skip_space();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(ParseErrorKind::Syntax, std::string("expected '") + c + "'");
  }
  std::string_view identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < line_.size() &&
           (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_')) {
      ++pos_;
    }
    return line_.substr(start, pos_ - start);
  }
  double number() {
    skip_space();
    const std::string rest(line_.substr(pos_));
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || errno == ERANGE) fail(ParseErrorKind::Syntax, "expected number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return v;
  }
  [[noreturn]] void fail(ParseErrorKind kind, const std::string& what) const {
    throw ParseError(kind, line_no_, column(), what);
  }
  [[noreturn]] void fail_at(ParseErrorKind kind, int col, const std::string& what) const {
    throw ParseError(kind, line_no_, col, what);
  }

 private:
  std::string_view line_;
  int line_no_;
  std::size_t pos_ = 0;
};

std::optional<Register> register_from_token(std::string_view tok) {
  if (tok.size() < 2) return std::nullopt;
  Bank bank;
  switch (tok[0]) {
    case 's':
      bank = Bank::Scalar;
      break;
    case 'v':
      bank = Bank::Vector;
      break;
    case 'm':
      bank = Bank::Matrix;
      break;
    default:
      return std::nullopt;
  }
  unsigned value = 0;
  for (char ch : tok.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    value = value * 10 + static_cast<unsigned>(ch - '0');
    if (value > 255) return Register{bank, 255};
  }
  return Register{bank, static_cast<std::uint8_t>(value)};
}

Register parse_register(LineScanner& sc, const SearchSpaceConfig& cfg) {
  const int col = (sc.skip_space(), sc.column());
  const std::string_view tok = sc.identifier();
  auto reg = register_from_token(tok);
  if (!reg) sc.fail_at(ParseErrorKind::Syntax, col, "expected register, got '" + std::string(tok) + "'");
  if (reg->index >= cfg.bank_size(reg->bank) || tok.size() > 4) {
    sc.fail_at(ParseErrorKind::RegisterOutOfRange, col, "register " + std::string(tok) + " out of range");
  }
  return *reg;
}

Arg parse_arg(LineScanner& sc, const SearchSpaceConfig& cfg) {
  sc.skip_space();
  Arg arg;
  arg.column = sc.column();
  const char c = sc.peek();
  if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
    arg.kind = Arg::Kind::Number;
    arg.value = sc.number();
    return arg;
  }
  LineScanner probe = sc;
  const std::string_view word = probe.identifier();
  if (word == "axis") {
    sc.identifier();
    sc.expect('=');
    arg.kind = Arg::Kind::Axis;
    arg.value = sc.number();
    return arg;
  }
  if (word == "sector" || word == "industry") {
    sc.identifier();
    arg.kind = Arg::Kind::Group;
    arg.value = word == "sector" ? 0.0 : 1.0;
    return arg;
  }
  arg.kind = Arg::Kind::Reg;
  arg.reg = parse_register(sc, cfg);
  return arg;
}

bool immediate_kind_accepts(ImmKind kind, Arg::Kind arg) {
  switch (kind) {
    case ImmKind::Axis:
      return arg == Arg::Kind::Axis || arg == Arg::Kind::Number;
    case ImmKind::Group:
      return arg == Arg::Kind::Group;
    case ImmKind::None:
      return false;
    default:
      return arg == Arg::Kind::Number;
  }
}

Instruction parse_instruction(LineScanner& sc, const SearchSpaceConfig& cfg) {
  const Register out = parse_register(sc, cfg);
  sc.expect('=');
  sc.skip_space();
  const int expr_col = sc.column();

  // Infix form: <reg> <op> <reg>.
  {
    LineScanner probe = sc;
    const std::string_view first = probe.identifier();
    const char sym = probe.peek();
    if (register_from_token(first) && (sym == '+' || sym == '-' || sym == '*' || sym == '/')) {
      const Register a = parse_register(sc, cfg);
      sc.expect(sym);
      const Register b = parse_register(sc, cfg);
      if (!sc.done()) sc.fail(ParseErrorKind::Syntax, "trailing input");
      const std::array<Bank, 2> banks{a.bank, b.bank};
      const auto op = find_op(std::string_view(&sym, 1), banks, 0, out.bank);
      if (!op) {
        sc.fail_at(ParseErrorKind::ArityMismatch, expr_col,
                   std::string("operand banks do not match '") + sym + "'");
      }
      return make_instruction(*op, out, {a, b});
    }
  }

  const std::string_view name = sc.identifier();
  if (name.empty()) sc.fail(ParseErrorKind::Syntax, "expected expression");
  if (!is_op_name(name)) {
    sc.fail_at(ParseErrorKind::UnknownOpcode, expr_col, "unknown op '" + std::string(name) + "'");
  }
  sc.expect('(');
  std::vector<Arg> args;
  if (!sc.accept(')')) {
    do {
      args.push_back(parse_arg(sc, cfg));
    } while (sc.accept(','));
    sc.expect(')');
  }
  if (!sc.done()) sc.fail(ParseErrorKind::Syntax, "trailing input");

  std::vector<Bank> banks;
  std::vector<Register> regs;
  std::size_t i = 0;
  for (; i < args.size() && args[i].kind == Arg::Kind::Reg; ++i) {
    banks.push_back(args[i].reg.bank);
    regs.push_back(args[i].reg);
  }
  const int n_imm = static_cast<int>(args.size() - i);
  for (std::size_t j = i; j < args.size(); ++j) {
    if (args[j].kind == Arg::Kind::Reg) {
      sc.fail_at(ParseErrorKind::Syntax, args[j].column, "registers must precede constants");
    }
  }
  const auto op = find_op(name, banks, n_imm, out.bank);
  if (!op) {
    sc.fail_at(ParseErrorKind::ArityMismatch, expr_col,
               "no signature of '" + std::string(name) + "' matches these operands");
  }
  const OpInfo& info = op_info(*op);
  std::array<Register, 2> in{};
  std::array<double, 2> imm{};
  for (std::size_t r = 0; r < regs.size(); ++r) in[r] = regs[r];
  for (int k = 0; k < n_imm; ++k) {
    const Arg& a = args[i + k];
    if (!immediate_kind_accepts(info.imm[k], a.kind)) {
      sc.fail_at(ParseErrorKind::ArityMismatch, a.column, "constant of the wrong kind");
    }
    if (info.imm[k] != ImmKind::Real && a.value != std::floor(a.value)) {
      sc.fail_at(ParseErrorKind::Syntax, a.column, "expected integer constant");
    }
    imm[k] = a.value;
  }
  return make_instruction(*op, out, in, imm);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_expression(const Instruction& ins) {
  const OpInfo& info = ins.info();
  if (info.infix != 0) {
    return to_string(ins.in[0]) + " " + info.infix + " " + to_string(ins.in[1]);
  }
  std::string s(info.name);
  s += '(';
  bool first = true;
  auto sep = [&] {
    if (!first) s += ',';
    first = false;
  };
  for (int i = 0; i < info.n_in; ++i) {
    sep();
    s += to_string(ins.in[i]);
  }
  for (int i = 0; i < info.n_imm; ++i) {
    sep();
    s += format_immediate(info.imm[i], ins.imm[i]);
  }
  s += ')';
  return s;
}

std::string format_instruction(const Instruction& ins) {
  return to_string(ins.out) + " = " + format_expression(ins);
}

std::string serialize_alpha_text(const AlphaProgram& p) {
  std::string out;
  for (Component c : kComponents) {
    out += "def ";
    out += component_name(c);
    out += "():\n";
    for (const Instruction& ins : p.component(c)) {
      out += "  ";
      out += format_instruction(ins);
      out += '\n';
    }
  }
  return out;
}

AlphaProgram parse_alpha_text(std::string_view text, const SearchSpaceConfig& cfg) {
  AlphaProgram p;
  int next_header = 0;  // index into kComponents of the next expected header
  std::vector<Instruction>* current = nullptr;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (const std::size_t hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.substr(0, 4) == "def ") {
      std::string compact;
      for (char ch : line) {
        if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
      }
      int found = -1;
      for (int i = 0; i < 3; ++i) {
        if (compact == std::string("def") + component_name(kComponents[i]) + "():") found = i;
      }
      if (found < 0) throw ParseError(ParseErrorKind::Syntax, line_no, 1, "unknown header '" + std::string(line) + "'");
      if (found < next_header) {
        throw ParseError(ParseErrorKind::Syntax, line_no, 1,
                         std::string("header 'def ") + component_name(kComponents[found]) + "():' out of order");
      }
      current = &p.component(kComponents[found]);
      next_header = found + 1;
      continue;
    }
    if (current == nullptr) {
      throw ParseError(ParseErrorKind::Syntax, line_no, 1, "instruction before the first header");
    }
    LineScanner sc(raw, line_no);
    current->push_back(parse_instruction(sc, cfg));
  }
  return p;
}

AlphaProgram load_alpha_file(const std::string& path, const SearchSpaceConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alpha file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_alpha_text(ss.str(), cfg);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.line(), e.column(), path + ": " + e.message());
  }
}

void save_alpha_file(const std::string& path, const AlphaProgram& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write alpha file: " + path);
  out << serialize_alpha_text(p);
}

}  // namespace alphaforge
