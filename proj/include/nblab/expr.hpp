#pragma once

// Closed expression language for coefficient functions of (x, y, t).
//
// Grammar (lowest to highest precedence):
//   comparison := sum [ ('<' | '<=' | '>' | '>=') sum ]     (only as a piecewise guard)
//   sum        := product { ('+' | '-') product }
//   product    := unary { ('*' | '/') unary }
//   unary      := '-' unary | power
//   power      := primary [ '^' unary ]                       (right associative)
//   primary    := number | 'pi' | variable | call | '(' sum ')'
//   call       := name '(' sum ')'                 name in exp ln sin cos sqrt abs
//               | ('min' | 'max') '(' sum ',' sum ')'
//               | 'piecewise' '(' comparison '?' sum ':' sum ')'

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace nblab::expr {

enum class Var : std::uint8_t { X = 0, Y = 1, T = 2 };

char var_name(Var v);

/// Set of admissible variables for an expression (its arity).
class VarSet {
public:
  constexpr VarSet() = default;
  constexpr VarSet(std::initializer_list<Var> vars) {
    for (Var v : vars) bits_ |= bit(v);
  }
  constexpr bool contains(Var v) const { return (bits_ & bit(v)) != 0; }
  constexpr VarSet with(Var v) const {
    VarSet s = *this;
    s.bits_ |= bit(v);
    return s;
  }
  constexpr bool subset_of(VarSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const VarSet&) const = default;
  std::string to_string() const;

private:
  static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
  std::uint8_t bits_ = 0;
};

inline constexpr VarSet kVarsX{Var::X};
inline constexpr VarSet kVarsT{Var::T};
inline constexpr VarSet kVarsXT{Var::X, Var::T};
inline constexpr VarSet kVarsXYT{Var::X, Var::Y, Var::T};

struct Bindings {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

struct Node;

/// Immutable expression tree. Cheap to copy (shared structure).
class Expr {
public:
  Expr();  // the literal 0

  static Expr constant(double value);
  static Expr variable(Var v);

  double eval(const Bindings& b) const;
  double operator()(double x, double y, double t) const { return eval({x, y, t}); }

  /// Symbolic derivative; throws DifferentiationError on kinks along `v`.
  Expr derivative(Var v) const;

  /// Variables that actually occur in the tree.
  VarSet free_vars() const;
  bool depends_on(Var v) const { return free_vars().contains(v); }
  bool is_constant() const { return free_vars().empty(); }

  /// Fully parenthesised text that parses back to the same tree.
  std::string to_string() const;

  const Node& node() const { return *root_; }
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

private:
  std::shared_ptr<const Node> root_;
};

/// Parses `text`; every variable used must belong to `arity`.
Expr parse(std::string_view text, VarSet arity);

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Exp,
  Ln,
  Sin,
  Cos,
  Sqrt,
  Abs,
  Min,
  Max,
  Piecewise,
};

enum class Cmp : std::uint8_t { Less, LessEq, Greater, GreaterEq };

struct Node {
  Op op = Op::Const;
  double value = 0.0;           // Const
  Var var = Var::X;             // Var
  Cmp cmp = Cmp::Less;          // Piecewise guard
  VarSet vars;                  // variables occurring in this subtree
  std::shared_ptr<const Node> a, b, c, d;  // operands; piecewise: (a cmp b) ? c : d
};

}  // namespace nblab::expr
