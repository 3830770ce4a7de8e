#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nblab/error.hpp"
#include "nblab/expr.hpp"

#include <cmath>
#include <random>

using namespace nblab;
using namespace nblab::expr;

TEST_CASE("parse builds the expected trees") {
  const Expr e = parse("exp(-t)*x", kVarsXT);
  CHECK(e.node().op == Op::Mul);
  CHECK(e(2.0, 0.0, 0.0) == doctest::Approx(2.0));

  const Expr f = parse("1/(1+t)^2", kVarsT);
  CHECK(f.node().op == Op::Div);
  CHECK(f.node().b->op == Op::Pow);
  CHECK(f(0.0, 0.0, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("2^3^2", {}).eval({}) == 512.0);
  CHECK(parse("-2^2", {}).eval({}) == -4.0);
  CHECK(parse("1 - 2 - 3", {}).eval({}) == -4.0);
  CHECK(parse("8 / 4 / 2", {}).eval({}) == 1.0);
  CHECK(parse("  1+2 * 3 ", {}).eval({}) == 7.0);
  CHECK(parse("2*-3", {}).eval({}) == -6.0);
  CHECK(parse("1e-3 * 2.5E2", {}).eval({}) == doctest::Approx(0.25));
  CHECK(parse("pi", {}).eval({}) == doctest::Approx(M_PI));
}

TEST_CASE("functions and piecewise guards") {
  CHECK(parse("min(x, 2)", kVarsX).eval({5.0}) == 2.0);
  CHECK(parse("max(x, 2)", kVarsX).eval({5.0}) == 5.0);
  CHECK(parse("abs(x)", kVarsX).eval({-3.0}) == 3.0);
  CHECK(parse("sqrt(4)", {}).eval({}) == 2.0);
  CHECK(parse("ln(exp(2))", {}).eval({}) == doctest::Approx(2.0));
  CHECK(parse("sin(0) + cos(0)", {}).eval({}) == 1.0);
  const Expr pw = parse("piecewise(t < 1 ? 2 : 3)", kVarsT);
  CHECK(pw.eval({0, 0, 0.5}) == 2.0);
  CHECK(pw.eval({0, 0, 1.0}) == 3.0);
  CHECK(parse("piecewise(t <= 1 ? 2 : 3)", kVarsT).eval({0, 0, 1.0}) == 2.0);
  CHECK(parse("piecewise(x >= 0.5 ? x : 0)", kVarsX).eval({0.5}) == 0.5);
}

TEST_CASE("syntax errors carry offsets") {
  try {
    parse("x*", kVarsX);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(parse("", kVarsX), ParseError);
  CHECK_THROWS_AS(parse("foo(x)", kVarsX), ParseError);
  CHECK_THROWS_AS(parse("(x", kVarsX), ParseError);
  CHECK_THROWS_AS(parse("x y", kVarsX), ParseError);
  CHECK_THROWS_AS(parse("x < 1", kVarsX), ParseError);
}

TEST_CASE("variables outside the arity are rejected") {
  CHECK_THROWS_AS(parse("y", kVarsXT), ParseError);
  CHECK_THROWS_AS(parse("t", kVarsX), ParseError);
  CHECK_NOTHROW(parse("x*y*t", kVarsXYT));
}

TEST_CASE("evaluation errors are explicit") {
  CHECK(parse("exp(-t)", kVarsT).eval({0, 0, 0}) == 1.0);
  CHECK(parse("1/(1+t)", kVarsT).eval({0, 0, 1}) == 0.5);
  CHECK_THROWS_AS(parse("ln(t)", kVarsT).eval({0, 0, 0}), EvalError);
  CHECK_THROWS_AS(parse("1/x", kVarsX).eval({0}), EvalError);
  CHECK_THROWS_AS(parse("sqrt(x)", kVarsX).eval({-1}), EvalError);
  CHECK_THROWS_AS(parse("x^0.5", kVarsX).eval({-1}), EvalError);
  CHECK(parse("x^2", kVarsX).eval({-3}) == 9.0);
}

TEST_CASE("symbolic derivatives") {
  const Expr d = parse("x^2", kVarsX).derivative(Var::X);
  CHECK(d.eval({2.0}) == doctest::Approx(4.0));
  const Expr e = parse("exp(-2*t)", kVarsT).derivative(Var::T);
  CHECK(e.eval({0, 0, 0.3}) == doctest::Approx(-2.0 * std::exp(-0.6)));
  CHECK_THROWS_AS(parse("abs(x)", kVarsX).derivative(Var::X), DifferentiationError);
  // Kinks in other variables are fine.
  CHECK(parse("abs(t)*x", kVarsXT).derivative(Var::X).eval({0, 0, -2}) == 2.0);
  CHECK(parse("5", {}).derivative(Var::X).eval({}) == 0.0);
}

namespace {

const char* kSmoothCatalog[] = {
    "exp(-t)*x",
    "1/(1+t)^2 + x*y",
    "sin(x)*cos(2*t) + 3",
    "sqrt(1 + x^2) * ln(2 + t)",
    "(x + 0.5)^1.5 / (1 + y^2)",
    "exp(-(x - 0.3)^2 / 0.1) * t^3",
    "-x^3 + 2*x*t - y/(2 + t)",
    "cos(pi*x)*exp(-pi^2*t)",
};

}  // namespace

TEST_CASE("print round trip evaluates identically") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (const char* text : kSmoothCatalog) {
    const Expr e = parse(text, kVarsXYT);
    const Expr back = parse(e.to_string(), kVarsXYT);
    for (int i = 0; i < 100; ++i) {
      const Bindings b{dist(rng), dist(rng), dist(rng)};
      CHECK(back.eval(b) == e.eval(b));
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.1, 1.9);
  const double step = 1e-6;
  for (const char* text : kSmoothCatalog) {
    const Expr e = parse(text, kVarsXYT);
    for (Var v : {Var::X, Var::Y, Var::T}) {
      const Expr d = e.derivative(v);
      for (int i = 0; i < 20; ++i) {
        Bindings b{dist(rng), dist(rng), dist(rng)};
        Bindings lo = b, hi = b;
        double* lo_v = v == Var::X ? &lo.x : v == Var::Y ? &lo.y : &lo.t;
        double* hi_v = v == Var::X ? &hi.x : v == Var::Y ? &hi.y : &hi.t;
        *lo_v -= step;
        *hi_v += step;
        const double fd = (e.eval(hi) - e.eval(lo)) / (2.0 * step);
        const double exact = d.eval(b);
        CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("free variables") {
  const Expr e = parse("x + 0*t", kVarsXT);
  CHECK(e.depends_on(Var::X));
  CHECK(e.depends_on(Var::T));  // structural, no simplification
  CHECK(parse("3", kVarsXT).is_constant());
}
