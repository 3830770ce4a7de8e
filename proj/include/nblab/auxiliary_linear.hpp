#pragma once

#include "nblab/pde_solver.hpp"
#include "nblab/quadrature.hpp"
#include "nblab/report.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nblab {

// ---------------------------------------------------------------- Neumann heat flow

/// v_t = v_xx on (0, L), dv/dnu = g(t) at both endpoints, v(x, 0) = v0(x).
struct NeumannHeatProblem {
  double length = 1.0;
  TimeFunction g;
  std::function<double(double)> v0;  // empty: 1 + g(0) (x - L/2)^2 / L, which is compatible

  double initial(double x) const;
};

/// Reuses the method-of-lines core with c = 0 and the prescribed flux in place of the nonlocal one.
Trajectory solve_neumann_heat(const NeumannHeatProblem& prob, const Grid1D& grid, const SolverConfig& cfg);

// ---------------------------------------------------------------- boundedness criteria

struct BoundednessOptions {
  double t0 = 1.0;        // window length
  double alpha = 2.0;     // window sup taken over t >= alpha
  double horizon = 64.0;  // last sampled t
  double stabilize_tol = 1e-6;
  DoublingPolicy policy;
};

/// Criterion (i): \int_0^inf g < inf. Criterion (ii): sup_{t >= alpha} \int_{t-t0}^t g / sqrt(t - tau) < inf.
/// The window sup "stabilizes" when sampling up to the horizon raises it by at most stabilize_tol
/// (relative) over sampling up to half the horizon.
struct BoundednessCriteria {
  InfiniteIntegral integral_of_g;
  double t0 = 1.0;
  double alpha = 2.0;
  double window_sup = 0.0;
  double window_sup_half = 0.0;
  bool window_stabilizes = false;
  std::vector<double> sample_t;
  std::vector<double> sample_window;
  bool bounded() const { return !integral_of_g.divergent() && window_stabilizes; }
  std::string verdict() const { return bounded() ? "Bounded" : "Unbounded"; }
  CriterionReport report() const;
};

/// Unit grid from ceil(alpha) plus alpha itself and powers of two, all up to the horizon.
std::vector<double> window_sample_times(double alpha, double horizon);

BoundednessCriteria check_boundedness_criteria(const TimeFunction& g, const BoundednessOptions& opt = {});

/// g_n(t) = 1 / (sqrt(n + n^-6 - t) |ln(n + n^-6 - t)|^a) on O_n = [n - n^-3, n], n >= 2; zero elsewhere.
/// Breakpoints are the endpoints of the O_n.
TimeFunction counterexample_g(double alpha_exp);

/// \int_{n - n^-3}^{n} g(tau) / sqrt(n - tau) dtau for the counterexample.
double counterexample_window(double alpha_exp, int n);

struct HolderCheck {
  CriterionReport report;
  BoundednessCriteria boundedness;
  double power_window_sup = 0.0;
  bool power_window_stabilizes = false;
  bool implication_asserted = false;  // only for q > 2
  bool implication_holds = true;      // pass at q > 2 implies the window condition
};

/// Window sup of \int_{t-t0}^t g^q. q <= 2 is allowed to demonstrate that the implication needs q > 2.
HolderCheck check_holder_sufficient(const TimeFunction& g, double q, const BoundednessOptions& opt = {});

// ---------------------------------------------------------------- elliptic nonlocal problem

/// Solves the tridiagonal system sub_i x_{i-1} + diag_i x_i + sup_i x_{i+1} = rhs_i (Thomas algorithm).
/// Throws ConvergenceError on a zero pivot.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, std::vector<double> rhs);

/// v'' = a v, -v'(0) = g0, v'(L) = gL with a = g0 + gL; \int v = 1 follows by integration.
struct EllipticNonlocal {
  double g0 = 0.0;
  double gL = 0.0;
  double a = 0.0;
  double scale = 1.0;          // h = scale * v
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> h;
  double integral_v = 0.0;     // trapezoid
  double normalization_residual = 0.0;  // a \int v - (g0 + gL)
};

EllipticNonlocal solve_elliptic_nonlocal(double g0, double gL, const Grid1D& grid, double scale = 1.0);

/// [g0 cosh(sqrt(a)(L - x)) + gL cosh(sqrt(a) x)] / (sqrt(a) sinh(sqrt(a) L)).
double elliptic_closed_form(double g0, double gL, double length, double x);

/// dh/dnu - g_b \int h at both ends; the normal derivative by one-sided second-order differences.
std::array<double, 2> nonlocal_boundary_residuals(const std::vector<double>& h, const Grid1D& grid, double g0,
                                                  double gL);

// ---------------------------------------------------------------- psi

/// psi'' = 1, dpsi/dnu = gamma = |Omega| / |dOmega| = L/2, psi(0) = C; closed form x^2/2 - L x/2 + C.
/// Throws HypothesisError unless min psi = C - L^2/8 > 0.
std::vector<double> solve_psi(const Grid1D& grid, double C);
double psi_closed_form(double length, double C, double x);

}  // namespace nblab
