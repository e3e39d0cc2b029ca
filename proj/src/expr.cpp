#include "hololab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>
#include <set>

namespace hololab {

namespace detail {

void throw_domain(const ExprNode& node, const std::string& what) {
  throw Error(ErrorCode::DomainError, what + " (offset " + std::to_string(node.offset) + ")");
}

namespace {

struct NoVariables {
  double operator()(const ExprNode& n) const {
    throw Error(ErrorCode::UnboundVariable, n.name);
  }
};

}  // namespace

double constant_value(const ExprNode& node) { return evaluate<double>(node, NoVariables{}); }

}  // namespace detail

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr FuncName kFunctions[] = {
    {"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan},   {"exp", Func::Exp},
    {"log", Func::Log},   {"sqrt", Func::Sqrt}, {"cosh", Func::Cosh}, {"sinh", Func::Sinh},
};

std::string_view func_name(Func f) {
  for (const auto& entry : kFunctions)
    if (entry.func == f) return entry.name;
  return "?";
}

NodePtr make_binary(ExprKind kind, NodePtr lhs, NodePtr rhs, std::size_t offset) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->offset = offset;
  n->constant = lhs->constant && rhs->constant;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "operator or end of input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make_binary(ExprKind::Add, lhs, parse_term(), at);
      } else if (accept('-')) {
        lhs = make_binary(ExprKind::Sub, lhs, parse_term(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make_binary(ExprKind::Mul, lhs, parse_unary(), at);
      } else if (accept('/')) {
        lhs = make_binary(ExprKind::Div, lhs, parse_unary(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprKind::Neg;
      n->offset = at;
      n->lhs = parse_unary();
      n->constant = n->lhs->constant;
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return make_binary(ExprKind::Pow, base, parse_unary(), at);
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    const std::size_t at = pos_;
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      const std::string name(src_.substr(pos_, end - pos_));
      pos_ = end;
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        auto it = std::find_if(std::begin(kFunctions), std::end(kFunctions),
                               [&](const FuncName& f) { return f.name == name; });
        if (it == std::end(kFunctions)) throw Error(ErrorCode::UnknownIdentifier, name);
        ++pos_;
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprKind::Call;
        n->func = it->func;
        n->name = name;
        n->offset = at;
        n->lhs = parse_expr();
        n->constant = n->lhs->constant;
        if (!accept(')')) throw SyntaxError(pos_, "')'");
        return n;
      }
      auto n = std::make_shared<ExprNode>();
      n->offset = at;
      n->name = name;
      if (name == "pi") {
        n->kind = ExprKind::Constant;
        n->number = std::numbers::pi;
      } else if (name == "e") {
        n->kind = ExprKind::Constant;
        n->number = std::numbers::e;
      } else if (std::any_of(std::begin(kFunctions), std::end(kFunctions),
                             [&](const FuncName& f) { return f.name == name; })) {
        throw SyntaxError(pos_, "'(' after function name");
      } else {
        n->kind = ExprKind::Variable;
        n->constant = false;
      }
      return n;
    }
    throw SyntaxError(pos_, "expression");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    bool digits = false;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
      ++end;
      digits = true;
    }
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
        ++end;
        digits = true;
      }
    }
    if (!digits) throw SyntaxError(start, "digits");
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp_end = end + 1;
      if (exp_end < src_.size() && (src_[exp_end] == '+' || src_[exp_end] == '-')) ++exp_end;
      if (exp_end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp_end]))) {
        while (exp_end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp_end])))
          ++exp_end;
        end = exp_end;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (res.ec != std::errc()) throw SyntaxError(start, "number");
    pos_ = end;
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Number;
    n->number = value;
    n->offset = start;
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void collect_variables(const ExprNode& n, std::set<std::string>& out) {
  if (n.kind == ExprKind::Variable) out.insert(n.name);
  if (n.lhs) collect_variables(*n.lhs, out);
  if (n.rhs) collect_variables(*n.rhs, out);
}

NodePtr bind_node(const NodePtr& n, std::span<const std::string> names) {
  auto copy = std::make_shared<ExprNode>(*n);
  if (n->kind == ExprKind::Variable) {
    auto it = std::find(names.begin(), names.end(), n->name);
    if (it == names.end()) throw Error(ErrorCode::UnknownIdentifier, n->name);
    copy->slot = static_cast<int>(it - names.begin());
  }
  if (n->lhs) copy->lhs = bind_node(n->lhs, names);
  if (n->rhs) copy->rhs = bind_node(n->rhs, names);
  return copy;
}

bool bound_node(const ExprNode& n) {
  if (n.kind == ExprKind::Variable && n.slot < 0) return false;
  return (!n.lhs || bound_node(*n.lhs)) && (!n.rhs || bound_node(*n.rhs));
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const ExprNode& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case ExprKind::Number: out += format_number(n.number); break;
    case ExprKind::Constant:
    case ExprKind::Variable: out += n.name; break;
    case ExprKind::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      break;
    case ExprKind::Add: binary(" + "); break;
    case ExprKind::Sub: binary(" - "); break;
    case ExprKind::Mul: binary(" * "); break;
    case ExprKind::Div: binary(" / "); break;
    case ExprKind::Pow: binary(" ^ "); break;
    case ExprKind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      break;
  }
}

template <class T>
T eval_env(const Expr& e, const Environment& env, std::string_view wrt) {
  return detail::evaluate<T>(e.root(), [&](const ExprNode& n) -> T {
    auto it = env.find(n.name);
    if (it == env.end()) throw Error(ErrorCode::UnboundVariable, n.name);
    if constexpr (std::is_same_v<T, double>) {
      return it->second;
    } else {
      return T(it->second, n.name == wrt ? 1.0 : 0.0);
    }
  });
}

}  // namespace

std::vector<std::string> Expr::variables() const {
  std::set<std::string> names;
  if (root_) collect_variables(*root_, names);
  return {names.begin(), names.end()};
}

Expr Expr::bind(std::span<const std::string> names) const { return Expr(bind_node(root_, names)); }

bool Expr::is_bound() const { return root_ && bound_node(*root_); }

Expr parse(std::string_view src) { return Expr(Parser(src).parse_all()); }

std::string print(const Expr& e) {
  std::string out;
  print_node(e.root(), out);
  return out;
}

double eval(const Expr& e, const Environment& env) { return eval_env<double>(e, env, {}); }

ValueAndDerivative eval_dual(const Expr& e, const Environment& env, std::string_view wrt) {
  const auto d = eval_env<Dual<double>>(e, env, wrt);
  return {d.val, d.eps};
}

}  // namespace hololab
