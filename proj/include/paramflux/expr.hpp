#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace paramflux {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Exp, Log, Abs, Pow };
enum class SymbolKind { State, Param, Time };

struct ExprNode;

/// Immutable expression tree over states, parameters and the time symbol `t`.
/// Copies share structure.
class Expr {
public:
  Expr();  // the literal 0

  static Expr number(double value);
  static Expr state(std::size_t index, std::string name);
  static Expr param(std::size_t index, std::string name);
  static Expr time();
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(Function fn, std::vector<Expr> args);

  const ExprNode& node() const { return *node_; }

private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

namespace node {
struct Number {
  double value;
};
struct Symbol {
  SymbolKind kind;
  std::size_t index;  // into the state or parameter list; 0 for time
  std::string name;
};
struct Negate {
  Expr operand;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Call {
  Function fn;
  std::vector<Expr> args;
};
}  // namespace node

struct ExprNode {
  std::variant<node::Number, node::Symbol, node::Negate, node::Binary, node::Call> v;
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(BinaryOp::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(BinaryOp::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::binary(BinaryOp::Div, std::move(a), std::move(b)); }

/// Name of the independent variable inside expressions.
inline constexpr std::string_view kTimeSymbol = "t";

/// Parses infix text. `^` is right-associative and binds tightest, then unary
/// minus, then `*` `/`, then `+` `-`. Identifiers must name a state, a
/// parameter, or `t`; functions are sin, cos, exp, log, abs and pow(a, b).
/// Throws ParseError (with byte offset) or UnknownIdentifierError.
Expr parse_expr(std::string_view text, std::span<const std::string> states,
                std::span<const std::string> params);

/// Infix rendering with the minimum parentheses needed to reparse to the same tree.
std::string to_string(const Expr& expr);

/// Fully parenthesized prefix form, e.g. `(- (* a x) (* d y))`. Used to compare trees.
std::string to_sexpr(const Expr& expr);

bool references_time(const Expr& expr);

/// Flattened stack program for fast repeated evaluation.
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& expr);

  /// Throws DomainError for log of a non-positive value, 0 to a negative power,
  /// or a negative base with a non-integer exponent.
  double eval(std::span<const double> x, std::span<const double> p, double t) const;

  bool empty() const { return code_.empty(); }

private:
  enum class Op : std::uint8_t {
    Const, State, Param, Time, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Abs
  };
  struct Instr {
    Op op;
    std::uint32_t index;
    double value;
  };
  void emit(const Expr& expr, std::size_t depth);

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace paramflux
