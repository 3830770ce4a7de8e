#include "nblab/expr.hpp"

#include "nblab/error.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <numbers>
#include <utility>

namespace nblab::expr {

char var_name(Var v) {
  switch (v) {
    case Var::X: return 'x';
    case Var::Y: return 'y';
    case Var::T: return 't';
  }
  return '?';
}

std::string VarSet::to_string() const {
  std::string out = "{";
  for (Var v : {Var::X, Var::Y, Var::T}) {
    if (!contains(v)) continue;
    if (out.size() > 1) out += ',';
    out += var_name(v);
  }
  return out + "}";
}

namespace {

using NodePtr = std::shared_ptr<const Node>;

VarSet union_of(VarSet s, const NodePtr& n) {
  if (!n) return s;
  for (Var v : {Var::X, Var::Y, Var::T})
    if (n->vars.contains(v)) s = s.with(v);
  return s;
}

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, NodePtr c = nullptr, NodePtr d = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->vars = union_of(union_of(union_of(union_of({}, a), b), c), d);
  n->a = std::move(a);
  n->b = std::move(b);
  n->c = std::move(c);
  n->d = std::move(d);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(Var v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = v;
  n->vars = VarSet{v};
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// Constructors with the trivial foldings the differentiator relies on to keep trees small.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
  return make(Op::Add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  return make(Op::Neg, std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
  return make(Op::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
  return make(Op::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return make(Op::Div, std::move(a), std::move(b));
}

NodePtr pow_node(NodePtr a, NodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return make_const(1.0);
  return make(Op::Pow, std::move(a), std::move(b));
}

// ---------------------------------------------------------------- parser

class Parser {
public:
  Parser(std::string_view text, VarSet arity) : text_(text), arity_(arity) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "empty expression");
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(pos_, fmt::format("unexpected '{}'", text_[pos_]));
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(std::string_view tok) {
    skip_ws();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) {
      if (pos_ >= text_.size()) throw ParseError(pos_, fmt::format("expected '{}' but reached end of input", tok));
      throw ParseError(pos_, fmt::format("expected '{}'", tok));
    }
  }

  std::pair<NodePtr, NodePtr> parse_comparison(Cmp& cmp) {
    NodePtr lhs = parse_sum();
    if (accept("<=") || accept("≤")) {
      cmp = Cmp::LessEq;
    } else if (accept(">=") || accept("≥")) {
      cmp = Cmp::GreaterEq;
    } else if (accept("<")) {
      cmp = Cmp::Less;
    } else if (accept(">")) {
      cmp = Cmp::Greater;
    } else {
      throw ParseError(pos_, "expected comparison operator in piecewise guard");
    }
    return {lhs, parse_sum()};
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept("+")) {
        lhs = make(Op::Add, lhs, parse_product());
      } else if (peek("-")) {
        ++pos_;
        lhs = make(Op::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept("*")) {
        lhs = make(Op::Mul, lhs, parse_unary());
      } else if (accept("/")) {
        lhs = make(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept("-")) return make(Op::Neg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept("^")) return make(Op::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(literal, &used);
    } catch (const std::exception&) {
      throw ParseError(start, fmt::format("malformed number '{}'", literal));
    }
    if (used != literal.size()) throw ParseError(start, fmt::format("malformed number '{}'", literal));
    return make_const(v);
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of input");
    const char ch = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return parse_number();
    if (ch == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(")");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      return parse_identifier(name, start);
    }
    throw ParseError(pos_, fmt::format("unexpected '{}'", ch));
  }

  NodePtr parse_identifier(std::string_view name, std::size_t start) {
    if (name.size() == 1 && (name[0] == 'x' || name[0] == 'y' || name[0] == 't')) {
      const Var v = name[0] == 'x' ? Var::X : name[0] == 'y' ? Var::Y : Var::T;
      if (!arity_.contains(v))
        throw ParseError(start, fmt::format("variable '{}' not allowed here (arity {})", name, arity_.to_string()));
      return make_var(v);
    }
    if (name == "pi") return make_const(std::numbers::pi);

    static constexpr std::pair<std::string_view, Op> kUnary[] = {
        {"exp", Op::Exp}, {"ln", Op::Ln},     {"sin", Op::Sin},
        {"cos", Op::Cos}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
    };
    for (const auto& [fname, op] : kUnary) {
      if (name != fname) continue;
      expect("(");
      NodePtr arg = parse_sum();
      expect(")");
      return make(op, arg);
    }
    if (name == "min" || name == "max") {
      expect("(");
      NodePtr a = parse_sum();
      expect(",");
      NodePtr b = parse_sum();
      expect(")");
      return make(name == "min" ? Op::Min : Op::Max, a, b);
    }
    if (name == "piecewise") {
      expect("(");
      Cmp cmp = Cmp::Less;
      auto [lhs, rhs] = parse_comparison(cmp);
      expect("?");
      NodePtr then_branch = parse_sum();
      expect(":");
      NodePtr else_branch = parse_sum();
      expect(")");
      auto n = std::const_pointer_cast<Node>(make(Op::Piecewise, lhs, rhs, then_branch, else_branch));
      n->cmp = cmp;
      return n;
    }
    throw ParseError(start, fmt::format("unknown identifier '{}'", name));
  }

  std::string_view text_;
  VarSet arity_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- evaluation

double eval_node(const Node& n, const Bindings& b) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return n.var == Var::X ? b.x : n.var == Var::Y ? b.y : b.t;
    case Op::Neg: return -eval_node(*n.a, b);
    case Op::Add: return eval_node(*n.a, b) + eval_node(*n.b, b);
    case Op::Sub: return eval_node(*n.a, b) - eval_node(*n.b, b);
    case Op::Mul: return eval_node(*n.a, b) * eval_node(*n.b, b);
    case Op::Div: {
      const double num = eval_node(*n.a, b);
      const double den = eval_node(*n.b, b);
      if (den == 0.0) throw EvalError("division by zero");
      return num / den;
    }
    case Op::Pow: {
      const double base = eval_node(*n.a, b);
      const double ex = eval_node(*n.b, b);
      if (base < 0.0 && ex != std::floor(ex)) throw EvalError(fmt::format("negative base {} to non-integer power {}", base, ex));
      if (base == 0.0 && ex < 0.0) throw EvalError("zero to a negative power");
      return std::pow(base, ex);
    }
    case Op::Exp: return std::exp(eval_node(*n.a, b));
    case Op::Ln: {
      const double v = eval_node(*n.a, b);
      if (!(v > 0.0)) throw EvalError(fmt::format("ln of nonpositive value {}", v));
      return std::log(v);
    }
    case Op::Sin: return std::sin(eval_node(*n.a, b));
    case Op::Cos: return std::cos(eval_node(*n.a, b));
    case Op::Sqrt: {
      const double v = eval_node(*n.a, b);
      if (v < 0.0) throw EvalError(fmt::format("sqrt of negative value {}", v));
      return std::sqrt(v);
    }
    case Op::Abs: return std::abs(eval_node(*n.a, b));
    case Op::Min: return std::min(eval_node(*n.a, b), eval_node(*n.b, b));
    case Op::Max: return std::max(eval_node(*n.a, b), eval_node(*n.b, b));
    case Op::Piecewise: {
      const double l = eval_node(*n.a, b);
      const double r = eval_node(*n.b, b);
      bool take = false;
      switch (n.cmp) {
        case Cmp::Less: take = l < r; break;
        case Cmp::LessEq: take = l <= r; break;
        case Cmp::Greater: take = l > r; break;
        case Cmp::GreaterEq: take = l >= r; break;
      }
      return take ? eval_node(*n.c, b) : eval_node(*n.d, b);
    }
  }
  throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------- differentiation

NodePtr diff(const NodePtr& n, Var v) {
  if (!n->vars.contains(v)) return make_const(0.0);
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(1.0);
    case Op::Neg: return neg(diff(a, v));
    case Op::Add: return add(diff(a, v), diff(b, v));
    case Op::Sub: return sub(diff(a, v), diff(b, v));
    case Op::Mul: return add(mul(diff(a, v), b), mul(a, diff(b, v)));
    case Op::Div:
      // (a'b - ab') / b^2
      return div(sub(mul(diff(a, v), b), mul(a, diff(b, v))), pow_node(b, make_const(2.0)));
    case Op::Pow: {
      if (!b->vars.contains(v)) {
        // b * a^(b-1) * a'
        NodePtr lowered = b->op == Op::Const ? make_const(b->value - 1.0) : sub(b, make_const(1.0));
        return mul(mul(b, pow_node(a, lowered)), diff(a, v));
      }
      // a^b * (b' ln a + b a'/a)
      return mul(n, add(mul(diff(b, v), make(Op::Ln, a)), div(mul(b, diff(a, v)), a)));
    }
    case Op::Exp: return mul(n, diff(a, v));
    case Op::Ln: return div(diff(a, v), a);
    case Op::Sin: return mul(make(Op::Cos, a), diff(a, v));
    case Op::Cos: return neg(mul(make(Op::Sin, a), diff(a, v)));
    case Op::Sqrt: return div(diff(a, v), mul(make_const(2.0), n));
    case Op::Abs:
    case Op::Min:
    case Op::Max:
    case Op::Piecewise:
      throw DifferentiationError(fmt::format("cannot differentiate non-smooth construct with respect to {}", var_name(v)));
  }
  throw DifferentiationError("corrupt expression node");
}

// ---------------------------------------------------------------- printing

std::string print_node(const Node& n) {
  auto un = [&](const char* f) { return fmt::format("{}({})", f, print_node(*n.a)); };
  auto bin = [&](const char* op) { return fmt::format("({} {} {})", print_node(*n.a), op, print_node(*n.b)); };
  switch (n.op) {
    case Op::Const: {
      std::string s = fmt::format("{:.17g}", n.value);
      return n.value < 0.0 ? "(" + s + ")" : s;
    }
    case Op::Var: return std::string(1, var_name(n.var));
    case Op::Neg: return fmt::format("(-{})", print_node(*n.a));
    case Op::Add: return bin("+");
    case Op::Sub: return bin("-");
    case Op::Mul: return bin("*");
    case Op::Div: return bin("/");
    case Op::Pow: return bin("^");
    case Op::Exp: return un("exp");
    case Op::Ln: return un("ln");
    case Op::Sin: return un("sin");
    case Op::Cos: return un("cos");
    case Op::Sqrt: return un("sqrt");
    case Op::Abs: return un("abs");
    case Op::Min: return fmt::format("min({}, {})", print_node(*n.a), print_node(*n.b));
    case Op::Max: return fmt::format("max({}, {})", print_node(*n.a), print_node(*n.b));
    case Op::Piecewise: {
      const char* cmp = n.cmp == Cmp::Less ? "<" : n.cmp == Cmp::LessEq ? "<=" : n.cmp == Cmp::Greater ? ">" : ">=";
      return fmt::format("piecewise({} {} {} ? {} : {})", print_node(*n.a), cmp, print_node(*n.b), print_node(*n.c),
                         print_node(*n.d));
    }
  }
  return "?";
}

}  // namespace

Expr::Expr() : root_(make_const(0.0)) {}

Expr Expr::constant(double value) { return Expr(make_const(value)); }

Expr Expr::variable(Var v) { return Expr(make_var(v)); }

double Expr::eval(const Bindings& b) const {
  const double v = eval_node(*root_, b);
  if (std::isnan(v)) throw EvalError("expression evaluated to NaN");
  return v;
}

Expr Expr::derivative(Var v) const { return Expr(diff(root_, v)); }

VarSet Expr::free_vars() const { return root_->vars; }

std::string Expr::to_string() const { return print_node(*root_); }

Expr parse(std::string_view text, VarSet arity) { return Expr(Parser(text, arity).parse_all()); }

}  // namespace nblab::expr
