#pragma once

#include "nblab/expr.hpp"
#include "nblab/quadrature.hpp"
#include "nblab/report.hpp"

#include <array>
#include <memory>
#include <string>

namespace nblab {

enum class Side { Left, Right };

/// The interval (0, L). Its boundary is the two endpoints with counting measure.
class Domain1D {
public:
  explicit Domain1D(double length);
  double length() const { return length_; }
  double measure() const { return length_; }
  static constexpr double boundary_measure() { return 2.0; }
  double boundary_point(Side s) const { return s == Side::Left ? 0.0 : length_; }
  /// Outward unit normal at an endpoint: -1 at x = 0, +1 at x = L.
  static constexpr double normal(Side s) { return s == Side::Left ? -1.0 : 1.0; }

private:
  double length_;
};

struct ExponentPair {
  double p;
  double l;
  ExponentPair(double p_, double l_);
};

/// A problem instance: u_t = u_xx + c(x,t) u^p on (0, L), du/dnu = \int k(x_b, y, t) u^l(y) dy at x_b in {0, L}.
struct ProblemSpec {
  Domain1D domain{1.0};
  ExponentPair exponents{1.0, 1.0};
  expr::Expr c;    // c(x, t)
  expr::Expr k;    // k(x, y, t), x a boundary point
  expr::Expr u0;   // u0(x)
  std::string c_text = "0";
  std::string k_text = "0";
  std::string u0_text = "0";

  double p() const { return exponents.p; }
  double l() const { return exponents.l; }
  double length() const { return domain.length(); }

  /// Builds and parses a spec; throws ParseError / InvalidSpec.
  static ProblemSpec make(double length, double p, double l, const std::string& c, const std::string& k,
                          const std::string& u0);
};

/// Samples c, k, u0 for nonnegativity over Omega x [0, t_check]; throws InvalidSpec on a negative value.
void validate(const ProblemSpec& spec, double t_check = 10.0, int n_x = 101, int n_t = 21);

json to_json(const ProblemSpec& spec);
/// Reads {L, p, l, c, k, u0}. Throws ConfigError on missing / mistyped fields.
ProblemSpec problem_from_json(const json& j);

/// (c0, k0, cbar, kbar, c1, k1) at one instant.
struct ReducedValues {
  double c0 = 0.0;
  double k0 = 0.0;
  double cbar = 0.0;
  double kbar = 0.0;
  double c1 = 0.0;
  double k1 = 0.0;
};

/// Scalar-in-time reductions of c and k used by every criterion:
///   c0 = |Omega|^{1-p} inf_x c,   k0 = |Omega|^{1-l} inf_y sum_{x_b} k(x_b, y, t),
///   cbar = \int c dx,             kbar = sum_{x_b} \int k(x_b, y, t) dy,
///   c1 = sup_x c,                 k1 = sup_{x_b, y} k.
/// inf / sup are taken over n_samples equispaced nodes (endpoints included); integrals by trapezoid.
class ReducedCoefficients {
public:
  explicit ReducedCoefficients(const ProblemSpec& spec, int n_samples = 1001);

  ReducedValues at(double t) const;
  double c0(double t) const;
  double k0(double t) const;
  double cbar(double t) const;
  double kbar(double t) const;
  double c1(double t) const;
  double k1(double t) const;

  // Function objects share the evaluator state, so they stay valid after *this is gone.
  TimeFunction c0_fn() const;
  TimeFunction k0_fn() const;
  TimeFunction cbar_fn() const;
  TimeFunction kbar_fn() const;
  TimeFunction c1_fn() const;
  TimeFunction k1_fn() const;

  const ProblemSpec& spec() const;

  struct State;

private:
  std::shared_ptr<const State> state_;
};

ReducedValues reduce_coefficients(const ProblemSpec& spec, double t, int n_samples = 1001);

/// Residuals of du0/dnu = \int k(x_b, y, 0) u0^l dy at both endpoints.
struct CompatibilityResult {
  CriterionReport report;
  std::array<double, 2> residuals{};  // left, right
  bool analytic = true;               // false when the derivative was differenced
};

/// `tol <= 0` selects the default: 1e-8 for analytic derivatives, 1e-4 for differenced ones.
CompatibilityResult check_compatibility(const ProblemSpec& spec, double tol = 0.0);

enum class Regime { SublinearAllGlobal, SuperlinearBoth, P1Lg1, L1Pg1, Pg1Only, Lg1Only };

Regime classify_exponent_regime(const ExponentPair& e);
std::string to_string(Regime r);

}  // namespace nblab
