#pragma once

// Closed-form expressions for metric entries and densities.
//
// Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | identifier | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tan | exp | log | sqrt | cosh | sinh
//   constant:= pi | e

#include "hololab/dual.hpp"
#include "hololab/error.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hololab {

enum class ExprKind { Number, Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Cosh, Sinh };

struct ExprNode {
  ExprKind kind = ExprKind::Number;
  double number = 0.0;       // Number and Constant
  std::string name;          // Variable, Constant, Call
  Func func = Func::Sin;     // Call
  int slot = -1;             // Variable index once bound to a chart
  bool constant = true;      // subtree free of variables
  std::size_t offset = 0;    // byte offset in the source
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Immutable expression tree.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  const ExprNode& root() const { return *root_; }
  bool empty() const noexcept { return root_ == nullptr; }

  /// Variables named in the expression, sorted and unique.
  std::vector<std::string> variables() const;

  /// Resolves every variable against `names`; throws UnknownIdentifier for a
  /// name outside the list.
  Expr bind(std::span<const std::string> names) const;

  bool is_bound() const;

 private:
  std::shared_ptr<const ExprNode> root_;
};

Expr parse(std::string_view src);

/// Canonical, fully parenthesized rendering; parse(print(e)) prints identically.
std::string print(const Expr& e);

using Environment = std::map<std::string, double, std::less<>>;

double eval(const Expr& e, const Environment& env);

struct ValueAndDerivative {
  double value;
  double derivative;
};

ValueAndDerivative eval_dual(const Expr& e, const Environment& env, std::string_view wrt);

namespace detail {

[[noreturn]] void throw_domain(const ExprNode& node, const std::string& what);

/// Value of a variable-free subtree.
double constant_value(const ExprNode& node);

template <class T>
T apply(Func f, const T& a, const ExprNode& node) {
  const double re = real_part(a);
  switch (f) {
    case Func::Sin: return sin(a);
    case Func::Cos: return cos(a);
    case Func::Tan: return tan(a);
    case Func::Exp: return exp(a);
    case Func::Log:
      if (!(re > 0.0)) throw_domain(node, "log of nonpositive value");
      return log(a);
    case Func::Sqrt:
      if (re < 0.0) throw_domain(node, "sqrt of negative value");
      if (re == 0.0 && is_dual<T>::value) throw_domain(node, "sqrt not differentiable at 0");
      return sqrt(a);
    case Func::Cosh: return cosh(a);
    case Func::Sinh: return sinh(a);
  }
  return a;
}

template <class T, class Lookup>
T evaluate(const ExprNode& n, const Lookup& lookup) {
  switch (n.kind) {
    case ExprKind::Number:
    case ExprKind::Constant:
      return T(n.number);
    case ExprKind::Variable:
      return lookup(n);
    case ExprKind::Neg:
      return -evaluate<T>(*n.lhs, lookup);
    case ExprKind::Add:
      return evaluate<T>(*n.lhs, lookup) + evaluate<T>(*n.rhs, lookup);
    case ExprKind::Sub:
      return evaluate<T>(*n.lhs, lookup) - evaluate<T>(*n.rhs, lookup);
    case ExprKind::Mul:
      return evaluate<T>(*n.lhs, lookup) * evaluate<T>(*n.rhs, lookup);
    case ExprKind::Div: {
      T den = evaluate<T>(*n.rhs, lookup);
      if (real_part(den) == 0.0) throw_domain(n, "division by zero");
      return evaluate<T>(*n.lhs, lookup) / den;
    }
    case ExprKind::Pow: {
      T base = evaluate<T>(*n.lhs, lookup);
      if (n.rhs->constant) {
        const double k = constant_value(*n.rhs);
        if (k == std::nearbyint(k) && std::abs(k) < 1e9) {
          if (real_part(base) == 0.0 && k < 0) throw_domain(n, "zero base with negative exponent");
          return int_pow(base, static_cast<long>(k));
        }
        if (!(real_part(base) > 0.0)) throw_domain(n, "non-integer power of nonpositive base");
        return exp(T(k) * log(base));
      }
      if (!(real_part(base) > 0.0)) throw_domain(n, "variable exponent needs positive base");
      return exp(evaluate<T>(*n.rhs, lookup) * log(base));
    }
    case ExprKind::Call:
      return apply(n.func, evaluate<T>(*n.lhs, lookup), n);
  }
  return T(0.0);
}

}  // namespace detail

/// Evaluates a bound expression at chart coordinates of any scalar type
/// (double, Dual<double>, Dual<Dual<double>>).
template <class T>
T eval_at(const Expr& e, std::span<const T> coords) {
  return detail::evaluate<T>(e.root(), [&](const ExprNode& n) -> T {
    if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= coords.size())
      throw Error(ErrorCode::UnboundVariable, n.name);
    return coords[static_cast<std::size_t>(n.slot)];
  });
}

}  // namespace hololab
