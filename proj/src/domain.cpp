#include "nblab/domain.hpp"

#include "nblab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace nblab {

Domain1D::Domain1D(double length) : length_(length) {
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidSpec(fmt::format("domain length must be positive, got {}", length));
}

ExponentPair::ExponentPair(double p_, double l_) : p(p_), l(l_) {
  if (!(p > 0.0) || !(l > 0.0)) throw InvalidSpec(fmt::format("exponents must be positive, got p={} l={}", p, l));
}

ProblemSpec ProblemSpec::make(double length, double p, double l, const std::string& c, const std::string& k,
                              const std::string& u0) {
  ProblemSpec s;
  s.domain = Domain1D(length);
  s.exponents = ExponentPair(p, l);
  s.c = expr::parse(c, expr::kVarsXT);
  s.k = expr::parse(k, expr::kVarsXYT);
  s.u0 = expr::parse(u0, expr::kVarsX);
  s.c_text = c;
  s.k_text = k;
  s.u0_text = u0;
  return s;
}

void validate(const ProblemSpec& spec, double t_check, int n_x, int n_t) {
  const double L = spec.length();
  for (int i = 0; i < n_x; ++i) {
    const double x = L * i / (n_x - 1);
    const double u = spec.u0.eval({x, 0.0, 0.0});
    if (u < 0.0) throw InvalidSpec(fmt::format("u0({}) = {} is negative", x, u));
    for (int j = 0; j < n_t; ++j) {
      const double t = t_check * j / (n_t - 1);
      const double c = spec.c.eval({x, 0.0, t});
      if (c < 0.0) throw InvalidSpec(fmt::format("c({}, {}) = {} is negative", x, t, c));
      for (double xb : {0.0, L}) {
        const double k = spec.k.eval({xb, x, t});
        if (k < 0.0) throw InvalidSpec(fmt::format("k({}, {}, {}) = {} is negative", xb, x, t, k));
      }
    }
  }
}

json to_json(const ProblemSpec& spec) {
  return json{{"L", spec.length()}, {"p", spec.p()}, {"l", spec.l()},
              {"c", spec.c_text},   {"k", spec.k_text}, {"u0", spec.u0_text}};
}

namespace {

double number_field(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(fmt::format("missing field '{}'", key));
  }
  if (!j[key].is_number()) throw ConfigError(fmt::format("field '{}' must be a number", key));
  return j[key].get<double>();
}

std::string expr_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("missing field '{}'", key));
  if (j[key].is_number()) return fmt::format("{:.17g}", j[key].get<double>());
  if (!j[key].is_string()) throw ConfigError(fmt::format("field '{}' must be an expression string", key));
  return j[key].get<std::string>();
}

}  // namespace

ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("problem description must be a JSON object");
  return ProblemSpec::make(number_field(j, "L", 1.0), number_field(j, "p"), number_field(j, "l"), expr_field(j, "c"),
                           expr_field(j, "k"), expr_field(j, "u0"));
}

// ---------------------------------------------------------------- reductions

struct ReducedCoefficients::State {
  ProblemSpec spec;
  int n;
  double h;
  bool c_uses_x;
  bool k_uses_y;
  bool k_uses_xb;

  double trapezoid(auto&& f) const {
    double s = 0.5 * (f(0.0) + f(spec.length()));
    for (int i = 1; i < n - 1; ++i) s += f(i * h);
    return s * h;
  }

  double c_inf(double t) const {
    if (!c_uses_x) return spec.c.eval({0.0, 0.0, t});
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::min(m, spec.c.eval({i * h, 0.0, t}));
    return m;
  }

  double c_sup(double t) const {
    if (!c_uses_x) return spec.c.eval({0.0, 0.0, t});
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::max(m, spec.c.eval({i * h, 0.0, t}));
    return m;
  }

  double k_boundary_sum(double y, double t) const {
    const double left = spec.k.eval({0.0, y, t});
    return k_uses_xb ? left + spec.k.eval({spec.length(), y, t}) : 2.0 * left;
  }

  double k_inf_over_y(double t) const {
    if (!k_uses_y) return k_boundary_sum(0.0, t);
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::min(m, k_boundary_sum(i * h, t));
    return m;
  }

  double k_sup(double t) const {
    double m = -std::numeric_limits<double>::infinity();
    const int ny = k_uses_y ? n : 1;
    for (double xb : {0.0, spec.length()}) {
      for (int i = 0; i < ny; ++i) m = std::max(m, spec.k.eval({xb, i * h, t}));
      if (!k_uses_xb) break;
    }
    return m;
  }

  double c0(double t) const { return std::pow(spec.length(), 1.0 - spec.p()) * c_inf(t); }
  double k0(double t) const { return std::pow(spec.length(), 1.0 - spec.l()) * k_inf_over_y(t); }
  double cbar(double t) const {
    if (!c_uses_x) return spec.length() * spec.c.eval({0.0, 0.0, t});
    return trapezoid([&](double x) { return spec.c.eval({x, 0.0, t}); });
  }
  double kbar(double t) const {
    if (!k_uses_y) return spec.length() * k_boundary_sum(0.0, t);
    return trapezoid([&](double y) { return k_boundary_sum(y, t); });
  }
};

ReducedCoefficients::ReducedCoefficients(const ProblemSpec& spec, int n_samples) {
  if (n_samples < 3) throw ConfigError("n_samples must be at least 3");
  state_ = std::make_shared<const State>(State{spec, n_samples, spec.length() / (n_samples - 1),
                                               spec.c.depends_on(expr::Var::X), spec.k.depends_on(expr::Var::Y),
                                               spec.k.depends_on(expr::Var::X)});
}

ReducedValues ReducedCoefficients::at(double t) const {
  return {c0(t), k0(t), cbar(t), kbar(t), c1(t), k1(t)};
}

double ReducedCoefficients::c0(double t) const { return state_->c0(t); }
double ReducedCoefficients::k0(double t) const { return state_->k0(t); }
double ReducedCoefficients::cbar(double t) const { return state_->cbar(t); }
double ReducedCoefficients::kbar(double t) const { return state_->kbar(t); }
double ReducedCoefficients::c1(double t) const { return state_->c_sup(t); }
double ReducedCoefficients::k1(double t) const { return state_->k_sup(t); }

TimeFunction ReducedCoefficients::c0_fn() const { return TimeFunction([s = state_](double t) { return s->c0(t); }); }
TimeFunction ReducedCoefficients::k0_fn() const { return TimeFunction([s = state_](double t) { return s->k0(t); }); }
TimeFunction ReducedCoefficients::cbar_fn() const { return TimeFunction([s = state_](double t) { return s->cbar(t); }); }
TimeFunction ReducedCoefficients::kbar_fn() const { return TimeFunction([s = state_](double t) { return s->kbar(t); }); }
TimeFunction ReducedCoefficients::c1_fn() const { return TimeFunction([s = state_](double t) { return s->c_sup(t); }); }
TimeFunction ReducedCoefficients::k1_fn() const { return TimeFunction([s = state_](double t) { return s->k_sup(t); }); }

const ProblemSpec& ReducedCoefficients::spec() const { return state_->spec; }

ReducedValues reduce_coefficients(const ProblemSpec& spec, double t, int n_samples) {
  return ReducedCoefficients(spec, n_samples).at(t);
}

// ---------------------------------------------------------------- compatibility

CompatibilityResult check_compatibility(const ProblemSpec& spec, double tol) {
  const double L = spec.length();
  const double l = spec.l();
  auto u0 = [&](double x) {
    const double v = spec.u0.eval({x, 0.0, 0.0});
    if (v < 0.0) throw InvalidSpec(fmt::format("u0({}) = {} is negative; u0^l undefined", x, v));
    return v;
  };

  CompatibilityResult out;
  std::array<double, 2> slope{};
  try {
    const expr::Expr du = spec.u0.derivative(expr::Var::X);
    slope = {du.eval({0.0, 0.0, 0.0}), du.eval({L, 0.0, 0.0})};
  } catch (const DifferentiationError&) {
    out.analytic = false;
    const double h = 1e-3 * L;
    slope[0] = (-3.0 * u0(0.0) + 4.0 * u0(h) - u0(2.0 * h)) / (2.0 * h);
    slope[1] = (3.0 * u0(L) - 4.0 * u0(L - h) + u0(L - 2.0 * h)) / (2.0 * h);
  }
  if (tol <= 0.0) tol = out.analytic ? 1e-8 : 1e-4;

  const std::array<Side, 2> sides{Side::Left, Side::Right};
  for (std::size_t s = 0; s < 2; ++s) {
    const double xb = spec.domain.boundary_point(sides[s]);
    const TimeFunction integrand([&](double y) {
      const double u = u0(y);
      return spec.k.eval({xb, y, 0.0}) * std::pow(u, l);
    });
    const double flux = integrate(integrand, 0.0, L, 1e-13);
    out.residuals[s] = Domain1D::normal(sides[s]) * slope[s] - flux;
  }
  out.report.name = "compatibility";
  out.report.pass = std::abs(out.residuals[0]) <= tol && std::abs(out.residuals[1]) <= tol;
  out.report.verdict = out.report.pass ? "Compatible" : "Incompatible";
  out.report.quantities = {{"residual_left", out.residuals[0]},
                           {"residual_right", out.residuals[1]},
                           {"tolerance", tol},
                           {"analytic_derivative", out.analytic}};
  return out;
}

// ---------------------------------------------------------------- regimes

Regime classify_exponent_regime(const ExponentPair& e) {
  const double p = e.p;
  const double l = e.l;
  if (std::max(p, l) <= 1.0) return Regime::SublinearAllGlobal;
  if (std::min(p, l) > 1.0) return Regime::SuperlinearBoth;
  if (p == 1.0) return Regime::P1Lg1;
  if (l == 1.0) return Regime::L1Pg1;
  if (p > 1.0) return Regime::Pg1Only;
  return Regime::Lg1Only;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::SublinearAllGlobal: return "SUBLINEAR_ALL_GLOBAL";
    case Regime::SuperlinearBoth: return "SUPERLINEAR_BOTH";
    case Regime::P1Lg1: return "P1_LG1";
    case Regime::L1Pg1: return "L1_PG1";
    case Regime::Pg1Only: return "PG1_ONLY";
    case Regime::Lg1Only: return "LG1_ONLY";
  }
  return "?";
}

}  // namespace nblab
