#include "nblab/auxiliary_linear.hpp"

#include "nblab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nblab {

// ---------------------------------------------------------------- Neumann heat flow

double NeumannHeatProblem::initial(double x) const {
  if (v0) return v0(x);
  const double d = x - 0.5 * length;
  return 1.0 + g(0.0) * d * d / length;
}

Trajectory solve_neumann_heat(const NeumannHeatProblem& prob, const Grid1D& grid, const SolverConfig& cfg) {
  if (!prob.g) throw ConfigError("Neumann heat problem needs a flux g");
  if (std::abs(grid.length - prob.length) > 1e-12 * prob.length) throw ConfigError("grid length differs from domain");
  std::vector<double> v0(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v0[i] = prob.initial(grid.x[i]);
    if (v0[i] < 0.0) throw InvalidSpec(fmt::format("v0({}) = {} is negative", grid.x[i], v0[i]));
  }
  if (!cfg.waive_compatibility) {
    const double L = prob.length;
    const double h = 1e-3 * L;
    auto f = [&](double x) { return prob.initial(x); };
    const double left = -(-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
    const double right = (3.0 * f(L) - 4.0 * f(L - h) + f(L - 2.0 * h)) / (2.0 * h);
    const double g0 = prob.g(0.0);
    if (std::abs(left - g0) > 1e-4 || std::abs(right - g0) > 1e-4)
      throw InvalidSpec(fmt::format("v0 is not compatible with g(0) = {} (normal derivatives {:.6g}, {:.6g})", g0, left,
                                    right));
  }
  PrescribedFluxModel model(prob.g, prob.g);
  return integrate(model, grid, std::move(v0), cfg);
}

// ---------------------------------------------------------------- boundedness criteria

std::vector<double> window_sample_times(double alpha, double horizon) {
  std::vector<double> ts{alpha};
  for (double t = std::ceil(alpha); t <= horizon; t += 1.0) ts.push_back(t);
  for (double t = 1.0; t <= horizon; t *= 2.0)
    if (t >= alpha) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

namespace {

struct WindowScan {
  std::vector<double> t;
  std::vector<double> value;
  double sup = 0.0;
  double sup_half = 0.0;
  bool stabilizes = false;
};

template <class Window>
WindowScan scan_windows(const BoundednessOptions& opt, Window&& window) {
  if (!(opt.t0 > 0.0)) throw ConfigError("window length t0 must be positive");
  if (!(opt.alpha > opt.t0)) throw ConfigError("alpha must exceed t0");
  if (!(opt.horizon >= 2.0 * opt.alpha)) throw ConfigError("horizon must be at least 2 alpha");
  WindowScan s;
  s.t = window_sample_times(opt.alpha, opt.horizon);
  for (double t : s.t) {
    const double v = window(t);
    s.value.push_back(v);
    s.sup = std::max(s.sup, v);
    if (t <= 0.5 * opt.horizon) s.sup_half = std::max(s.sup_half, v);
  }
  s.stabilizes = std::isfinite(s.sup) && s.sup - s.sup_half <= opt.stabilize_tol * std::max(s.sup, 1e-300);
  return s;
}

}  // namespace

CriterionReport BoundednessCriteria::report() const {
  CriterionReport r;
  r.name = "neumann_boundedness";
  r.pass = bounded();
  r.verdict = verdict();
  r.quantities = {{"integral_of_g", integral_of_g.value},
                  {"integral_status", integral_of_g.divergent() ? "Divergent" : "Converged"},
                  {"integral_horizon", integral_of_g.horizon},
                  {"t0", t0},
                  {"alpha", alpha},
                  {"window_sup", window_sup},
                  {"window_sup_half_horizon", window_sup_half},
                  {"window_stabilizes", window_stabilizes}};
  if (integral_of_g.divergent()) r.detail = "criterion (i) fails: the integral of g diverges";
  else if (!window_stabilizes) r.detail = "criterion (ii) fails: the singular window integral keeps growing";
  return r;
}

BoundednessCriteria check_boundedness_criteria(const TimeFunction& g, const BoundednessOptions& opt) {
  BoundednessCriteria out;
  out.t0 = opt.t0;
  out.alpha = opt.alpha;
  const WindowScan scan = scan_windows(opt, [&](double t) { return singular_window_integral(g, t, opt.t0); });
  out.integral_of_g = integrate_to_infinity(g, opt.policy);
  out.window_sup = scan.sup;
  out.window_sup_half = scan.sup_half;
  out.window_stabilizes = scan.stabilizes;
  out.sample_t = scan.t;
  out.sample_window = scan.value;
  return out;
}

namespace {

/// g(anchor - d), with s = n + n^-6 - t formed from the exact difference n - anchor.
double counterexample_before(double a, double anchor, double d) {
  const double t = anchor - d;
  if (t < 2.0 - 0.125) return 0.0;
  const double n = std::ceil(t);
  const double gap = (n - anchor) + d;  // n - t
  if (gap > 1.0 / (n * n * n)) return 0.0;
  const double s = gap + std::pow(n, -6.0);
  return 1.0 / (std::sqrt(s) * std::pow(std::abs(std::log(s)), a));
}

/// Endpoints of each O_n plus points graded toward t = n, where g peaks at height ~n^3.
std::vector<double> counterexample_breaks(double a, double b) {
  std::vector<double> pts;
  const double first = std::max(2.0, std::floor(a));
  for (double n = first; n <= std::ceil(b) + 1.0; n += 1.0) {
    const double width = 1.0 / (n * n * n);
    const double finest = std::pow(n, -6.0);
    for (double d = width; d > finest; d /= 8.0) pts.push_back(n - d);
    pts.push_back(n);
  }
  return pts;
}

}  // namespace

TimeFunction counterexample_g(double alpha_exp) {
  if (!(alpha_exp > 0.5 && alpha_exp < 1.0)) throw ConfigError("counterexample exponent must lie in (1/2, 1)");
  return TimeFunction([alpha_exp](double t) { return counterexample_before(alpha_exp, t, 0.0); },
                      [](double a, double b) { return counterexample_breaks(a, b); },
                      [alpha_exp](double anchor, double d) { return counterexample_before(alpha_exp, anchor, d); });
}

double counterexample_window(double alpha_exp, int n) {
  if (n < 2) throw ConfigError("counterexample windows start at n = 2");
  return singular_window_integral(counterexample_g(alpha_exp), static_cast<double>(n), 1.0);
}

HolderCheck check_holder_sufficient(const TimeFunction& g, double q, const BoundednessOptions& opt) {
  if (!(q > 1.0)) throw ConfigError("Hoelder exponent must exceed 1");
  HolderCheck out;
  const WindowScan scan = scan_windows(opt, [&](double t) { return power_window_integral(g, t, opt.t0, q); });
  out.power_window_sup = scan.sup;
  out.power_window_stabilizes = scan.stabilizes;
  out.boundedness = check_boundedness_criteria(g, opt);
  out.implication_asserted = q > 2.0;
  out.implication_holds = !(out.implication_asserted && scan.stabilizes) || out.boundedness.window_stabilizes;

  CriterionReport& r = out.report;
  r.name = "hoelder_window";
  r.pass = scan.stabilizes;
  r.verdict = scan.stabilizes ? "Stabilizes" : "Grows";
  r.quantities = {{"q", q},
                  {"power_window_sup", scan.sup},
                  {"power_window_sup_half_horizon", scan.sup_half},
                  {"singular_window_stabilizes", out.boundedness.window_stabilizes},
                  {"implication_asserted", out.implication_asserted},
                  {"implication_holds", out.implication_holds}};
  if (!out.implication_asserted) r.detail = "q <= 2: the Hoelder bound does not control the singular window";
  return out;
}

// ---------------------------------------------------------------- elliptic nonlocal problem

std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() != n || sup.size() != n || rhs.size() != n) throw ConfigError("tridiagonal sizes differ");
  std::vector<double> c(n);
  double beta = diag[0];
  if (beta == 0.0) throw ConvergenceError("zero pivot in tridiagonal solve");
  c[0] = sup[0] / beta;
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = diag[i] - sub[i] * c[i - 1];
    if (beta == 0.0) throw ConvergenceError("zero pivot in tridiagonal solve");
    c[i] = sup[i] / beta;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

double elliptic_closed_form(double g0, double gL, double length, double x) {
  const double r = std::sqrt(g0 + gL);
  return (g0 * std::cosh(r * (length - x)) + gL * std::cosh(r * x)) / (r * std::sinh(r * length));
}

EllipticNonlocal solve_elliptic_nonlocal(double g0, double gL, const Grid1D& grid, double scale) {
  if (!(g0 >= 0.0 && gL >= 0.0)) throw ConfigError("boundary data must be nonnegative");
  const double a = g0 + gL;
  if (!(a > 0.0)) throw ConfigError("a = g0 + gL must be positive");
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  const std::size_t n = grid.size();
  const double h = grid.h;
  // -(v_{i-1} - 2 v_i + v_{i+1}) + a h^2 v_i = 0 with ghosts v_{-1} = v_1 + 2h g0, v_N = v_{N-2} + 2h gL.
  std::vector<double> sub(n, -1.0), diag(n, 2.0 + a * h * h), sup(n, -1.0), rhs(n, 0.0);
  sub[0] = 0.0;
  sup[0] = -2.0;
  sub[n - 1] = -2.0;
  sup[n - 1] = 0.0;
  rhs[0] = 2.0 * h * g0;
  rhs[n - 1] = 2.0 * h * gL;

  EllipticNonlocal out;
  out.g0 = g0;
  out.gL = gL;
  out.a = a;
  out.scale = scale;
  out.x = grid.x;
  out.v = solve_tridiagonal(sub, diag, sup, std::move(rhs));
  for (double v : out.v)
    if (!(v >= 0.0)) throw ConvergenceError("elliptic solution has a negative node");
  out.integral_v = mass(grid, out.v);
  out.normalization_residual = a * out.integral_v - (g0 + gL);
  out.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.h[i] = scale * out.v[i];
  return out;
}

std::array<double, 2> nonlocal_boundary_residuals(const std::vector<double>& h, const Grid1D& grid, double g0,
                                                  double gL) {
  const std::size_t n = grid.size();
  const double integral = mass(grid, h);
  const double left = -(-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * grid.h);
  const double right = (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * grid.h);
  return {left - g0 * integral, right - gL * integral};
}

// ---------------------------------------------------------------- psi

double psi_closed_form(double length, double C, double x) { return 0.5 * x * x - 0.5 * length * x + C; }

std::vector<double> solve_psi(const Grid1D& grid, double C) {
  const double L = grid.length;
  if (!(C > L * L / 8.0))
    throw HypothesisError(fmt::format("psi needs C > L^2/8 = {} to stay positive, got C = {}", L * L / 8.0, C));
  const double gamma = L / Domain1D::boundary_measure();
  const double h = grid.h;
  const std::size_t n = grid.size();
  std::vector<double> psi(n);
  psi[0] = C;
  // Boundary row with ghost psi_{-1} = psi_1 + 2 h gamma, then the interior recurrence.
  psi[1] = psi[0] - h * gamma + 0.5 * h * h;
  for (std::size_t i = 1; i + 1 < n; ++i) psi[i + 1] = 2.0 * psi[i] - psi[i - 1] + h * h;
  return psi;
}

}  // namespace nblab
