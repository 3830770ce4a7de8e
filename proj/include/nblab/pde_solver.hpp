#pragma once

#include "nblab/domain.hpp"
#include "nblab/quadrature.hpp"
#include "nblab/rk23.hpp"

#include <array>
#include <span>
#include <vector>

namespace nblab {

/// Uniform nodes x_i = i h on [0, L] with composite trapezoid weights.
struct Grid1D {
  std::size_t n;
  double length;
  double h;
  std::vector<double> x;
  std::vector<double> w;

  Grid1D(double length, std::size_t n);
  std::size_t size() const { return n; }
};

struct State {
  double t = 0.0;
  std::vector<double> u;
};

struct SolverConfig {
  double t_end = 1.0;
  double dt_init = 1e-6;
  double dt_min = 1e-13;
  double dt_max = 0.1;
  double safety = 0.9;          // dt <= safety * h^2 / 2
  double u_max = 1e8;
  double rtol = 1e-6;
  double atol = 1e-9;
  std::vector<double> output_times;
  double interior_margin = -1.0;  // Omega' = [m, L - m]; negative selects L/4
  bool waive_compatibility = false;

  /// Throws ConfigError when the invariants 0 < dt_min <= dt_init <= dt_max etc. are violated.
  void validate() const;
};

json to_json(const SolverConfig& cfg);
/// Overrides the fields present in `j` (a "solver" block).
SolverConfig solver_config_from_json(const json& j, SolverConfig base = {});

struct DiagnosticRecord {
  double t = 0.0;
  double mass = 0.0;
  double sup = 0.0;
  double J = 0.0;
  double dt = 0.0;
  double mass_rate = 0.0;     // sum_i w_i du_i/dt = \int c u^p + I_0 + I_L
  double boundary_max = 0.0;  // max(u(0), u(L))
  double interior_max = 0.0;  // max over Omega'
};

struct Trajectory {
  std::vector<State> snapshots;
  std::vector<DiagnosticRecord> diagnostics;
  Verdict verdict;
  State final_state;
  long accepted_steps = 0;
  long rejected_steps = 0;
  long clamp_events = 0;
  double worst_undershoot = 0.0;
  double l = 1.0;             // exponent used for J
  double interior_margin = 0.0;
};

/// The pieces of a semilinear problem the method of lines needs: reaction and boundary flux.
class ParabolicModel {
public:
  virtual ~ParabolicModel() = default;
  /// out_i = c(x_i, t) u_i^p (zero for the linear heat problem).
  virtual void reaction(double t, std::span<const double> u, std::span<double> out) = 0;
  /// Outward normal derivatives du/dnu at x = 0 and x = L.
  virtual std::array<double, 2> flux(double t, std::span<const double> u) = 0;
  /// Exponent l in J(t) = \int_0^t \int u^l.
  virtual double j_exponent() const = 0;
};

/// The nonlocal problem: reaction c u^p, flux I_b = sum_j w_j k(x_b, x_j, t) u_j^l.
class NonlocalModel final : public ParabolicModel {
public:
  NonlocalModel(const ProblemSpec& spec, const Grid1D& grid);
  void reaction(double t, std::span<const double> u, std::span<double> out) override;
  std::array<double, 2> flux(double t, std::span<const double> u) override;
  double j_exponent() const override { return l_; }

private:
  const ProblemSpec& spec_;
  const Grid1D& grid_;
  double p_;
  double l_;
  bool c_zero_;
  bool c_static_;
  std::vector<double> c_nodes_;
  bool k_zero_;
  bool k_static_;
  bool k_uses_y_;
  bool k_uses_xb_;
  std::array<std::vector<double>, 2> k_weights_;  // w_j k(x_b, x_j) when k is time independent
  std::vector<double> ul_;
};

/// Linear heat flow with prescribed flux dv/dnu = g_b(t) at each endpoint.
class PrescribedFluxModel final : public ParabolicModel {
public:
  PrescribedFluxModel(TimeFunction left, TimeFunction right) : left_(std::move(left)), right_(std::move(right)) {}
  void reaction(double, std::span<const double>, std::span<double> out) override;
  std::array<double, 2> flux(double t, std::span<const double>) override { return {left_(t), right_(t)}; }
  double j_exponent() const override { return 1.0; }

private:
  TimeFunction left_;
  TimeFunction right_;
};

/// Second-order ghost-node discretization; returns false if any entry is not finite.
bool semidiscrete_rhs(ParabolicModel& model, const Grid1D& grid, double t, std::span<const double> u,
                      std::span<double> du);
std::vector<double> semidiscrete_rhs(const ProblemSpec& spec, const Grid1D& grid, const State& state);

std::vector<double> sample_initial(const ProblemSpec& spec, const Grid1D& grid);

/// Method of lines + Bogacki-Shampine 3(2), dt additionally capped by safety * h^2 / 2.
Trajectory integrate(ParabolicModel& model, const Grid1D& grid, std::vector<double> u0, const SolverConfig& cfg);
/// Validates spec and config; unless waived, requires the compatibility condition at t = 0.
Trajectory solve(const ProblemSpec& spec, const Grid1D& grid, const SolverConfig& cfg);

double mass(const Grid1D& grid, std::span<const double> u);
double sup_norm(std::span<const double> u);
/// dt * \int u^l with the trapezoid rule in space.
double j_increment(const Grid1D& grid, std::span<const double> u, double dt, double l);

}  // namespace nblab
