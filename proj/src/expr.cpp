#include "paramflux/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "paramflux/error.hpp"

namespace paramflux {

Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{node::Number{0.0}})) {}

Expr Expr::number(double value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{node::Number{value}}));
}

Expr Expr::state(std::size_t index, std::string name) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{node::Symbol{SymbolKind::State, index, std::move(name)}}));
}

Expr Expr::param(std::size_t index, std::string name) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{node::Symbol{SymbolKind::Param, index, std::move(name)}}));
}

Expr Expr::time() {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{node::Symbol{SymbolKind::Time, 0, std::string(kTimeSymbol)}}));
}

Expr Expr::negate(Expr operand) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{node::Negate{std::move(operand)}}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{node::Binary{op, std::move(lhs), std::move(rhs)}}));
}

Expr Expr::call(Function fn, std::vector<Expr> args) {
  const std::size_t arity = fn == Function::Pow ? 2 : 1;
  if (args.size() != arity) {
    throw InvalidArgument("function called with " + std::to_string(args.size()) +
                          " arguments, expected " + std::to_string(arity));
  }
  return Expr(std::make_shared<const ExprNode>(ExprNode{node::Call{fn, std::move(args)}}));
}

namespace {

struct FunctionName {
  std::string_view name;
  Function fn;
};

constexpr std::array<FunctionName, 6> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"exp", Function::Exp},
    {"log", Function::Log},
    {"abs", Function::Abs},
    {"pow", Function::Pow},
}};

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
public:
  Parser(std::string_view text, std::span<const std::string> states,
         std::span<const std::string> params)
      : text_(text), states_(states), params_(params) {}

  Expr parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

private:
  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_product();
      } else if (accept('-')) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::negate(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary(BinaryOp::Pow, std::move(base), parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (is_digit(text_[pos_]) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        while (p < text_.size() && is_digit(text_[p])) ++p;
        pos_ = p;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    return Expr::number(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                                   [&](const FunctionName& f) { return f.name == name; });
      if (it == kFunctions.end()) throw UnknownIdentifierError(name);
      ++pos_;
      std::vector<Expr> args;
      args.push_back(parse_sum());
      while (accept(',')) args.push_back(parse_sum());
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      const std::size_t arity = it->fn == Function::Pow ? 2 : 1;
      if (args.size() != arity) {
        throw ParseError(name + " expects " + std::to_string(arity) + " argument(s)", start);
      }
      return Expr::call(it->fn, std::move(args));
    }

    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (states_[i] == name) return Expr::state(i, name);
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i] == name) return Expr::param(i, name);
    }
    if (name == kTimeSymbol) return Expr::time();
    throw UnknownIdentifierError(name);
  }

  std::string_view text_;
  std::span<const std::string> states_;
  std::span<const std::string> params_;
  std::size_t pos_ = 0;
};

// Precedence levels used when printing.
constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPower = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Number>) {
          return n.value < 0 || std::signbit(n.value) ? kPrecUnary : kPrecAtom;
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          return kPrecUnary;
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          switch (n.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
              return kPrecSum;
            case BinaryOp::Mul:
            case BinaryOp::Div:
              return kPrecProduct;
            case BinaryOp::Pow:
              return kPrecPower;
          }
          return kPrecAtom;
        } else {
          return kPrecAtom;
        }
      },
      e.node().v);
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add:
      return '+';
    case BinaryOp::Sub:
      return '-';
    case BinaryOp::Mul:
      return '*';
    case BinaryOp::Div:
      return '/';
    case BinaryOp::Pow:
      return '^';
  }
  return '?';
}

void print(std::ostream& os, const Expr& e);

void print_wrapped(std::ostream& os, const Expr& e, bool parens) {
  if (parens) os << '(';
  print(os, e);
  if (parens) os << ')';
}

void print(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Number>) {
          if (std::signbit(n.value)) {
            os << '-' << format_number(-n.value);
          } else {
            os << format_number(n.value);
          }
        } else if constexpr (std::is_same_v<T, node::Symbol>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          os << '-';
          print_wrapped(os, n.operand, precedence(n.operand) < kPrecUnary);
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          const int p = precedence(e);
          if (n.op == BinaryOp::Pow) {
            print_wrapped(os, n.lhs, precedence(n.lhs) <= kPrecPower);
            os << '^';
            print_wrapped(os, n.rhs, precedence(n.rhs) < kPrecUnary);
          } else {
            print_wrapped(os, n.lhs, precedence(n.lhs) < p);
            os << ' ' << op_char(n.op) << ' ';
            print_wrapped(os, n.rhs, precedence(n.rhs) <= p);
          }
        } else {
          os << function_name(n.fn) << '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) os << ", ";
            print(os, n.args[i]);
          }
          os << ')';
        }
      },
      e.node().v);
}

void print_sexpr(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Number>) {
          os << format_number(n.value);
        } else if constexpr (std::is_same_v<T, node::Symbol>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          os << "(neg ";
          print_sexpr(os, n.operand);
          os << ')';
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          os << '(' << op_char(n.op) << ' ';
          print_sexpr(os, n.lhs);
          os << ' ';
          print_sexpr(os, n.rhs);
          os << ')';
        } else {
          os << '(' << function_name(n.fn);
          for (const auto& a : n.args) {
            os << ' ';
            print_sexpr(os, a);
          }
          os << ')';
        }
      },
      e.node().v);
}

double checked_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) throw DomainError("0 raised to a negative power");
  if (base < 0.0 && exponent != std::floor(exponent)) {
    throw DomainError("negative base raised to a non-integer power");
  }
  return std::pow(base, exponent);
}

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> states,
                std::span<const std::string> params) {
  return Parser(text, states, params).parse();
}

std::string to_string(const Expr& expr) {
  std::ostringstream os;
  print(os, expr);
  return os.str();
}

std::string to_sexpr(const Expr& expr) {
  std::ostringstream os;
  print_sexpr(os, expr);
  return os.str();
}

bool references_time(const Expr& expr) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Symbol>) {
          return n.kind == SymbolKind::Time;
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          return references_time(n.operand);
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          return references_time(n.lhs) || references_time(n.rhs);
        } else if constexpr (std::is_same_v<T, node::Call>) {
          return std::any_of(n.args.begin(), n.args.end(),
                             [](const Expr& a) { return references_time(a); });
        } else {
          return false;
        }
      },
      expr.node().v);
}

CompiledExpr::CompiledExpr(const Expr& expr) { emit(expr, 1); }

void CompiledExpr::emit(const Expr& expr, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Number>) {
          code_.push_back({Op::Const, 0, n.value});
        } else if constexpr (std::is_same_v<T, node::Symbol>) {
          const Op op = n.kind == SymbolKind::State   ? Op::State
                        : n.kind == SymbolKind::Param ? Op::Param
                                                      : Op::Time;
          code_.push_back({op, static_cast<std::uint32_t>(n.index), 0.0});
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          emit(n.operand, depth);
          code_.push_back({Op::Neg, 0, 0.0});
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          emit(n.lhs, depth);
          emit(n.rhs, depth + 1);
          static constexpr Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
          code_.push_back({ops[static_cast<int>(n.op)], 0, 0.0});
        } else {
          if (n.fn == Function::Pow) {
            emit(n.args[0], depth);
            emit(n.args[1], depth + 1);
            code_.push_back({Op::Pow, 0, 0.0});
          } else {
            emit(n.args[0], depth);
            static constexpr Op ops[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Abs};
            code_.push_back({ops[static_cast<int>(n.fn)], 0, 0.0});
          }
        }
      },
      expr.node().v);
}

double CompiledExpr::eval(std::span<const double> x, std::span<const double> p, double t) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const:
        stack[sp++] = in.value;
        break;
      case Op::State:
        stack[sp++] = x[in.index];
        break;
      case Op::Param:
        stack[sp++] = p[in.index];
        break;
      case Op::Time:
        stack[sp++] = t;
        break;
      case Op::Add:
        --sp;
        stack[sp - 1] += stack[sp];
        break;
      case Op::Sub:
        --sp;
        stack[sp - 1] -= stack[sp];
        break;
      case Op::Mul:
        --sp;
        stack[sp - 1] *= stack[sp];
        break;
      case Op::Div:
        --sp;
        stack[sp - 1] /= stack[sp];
        break;
      case Op::Pow:
        --sp;
        stack[sp - 1] = checked_pow(stack[sp - 1], stack[sp]);
        break;
      case Op::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::Sin:
        stack[sp - 1] = std::sin(stack[sp - 1]);
        break;
      case Op::Cos:
        stack[sp - 1] = std::cos(stack[sp - 1]);
        break;
      case Op::Exp:
        stack[sp - 1] = std::exp(stack[sp - 1]);
        break;
      case Op::Log:
        if (!(stack[sp - 1] > 0.0)) throw DomainError("log of a non-positive value");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Op::Abs:
        stack[sp - 1] = std::abs(stack[sp - 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace paramflux
