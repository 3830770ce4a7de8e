#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nblab {

/// A scalar function of time, optionally with known discontinuities that integrators should split at.
class TimeFunction {
public:
  using Fn = std::function<double(double)>;
  using BreakFn = std::function<std::vector<double>(double, double)>;
  /// back(anchor, d) = f(anchor - d), for functions that can evaluate this more accurately than
  /// after rounding anchor - d (steep features pinned to representable anchors).
  using BackFn = std::function<double(double, double)>;

  TimeFunction() = default;
  TimeFunction(Fn f, BreakFn breaks = {}, BackFn back = {})
      : f_(std::move(f)), breaks_(std::move(breaks)), back_(std::move(back)) {}

  double operator()(double t) const { return f_(t); }
  double before(double anchor, double d) const { return back_ ? back_(anchor, d) : f_(anchor - d); }
  explicit operator bool() const { return static_cast<bool>(f_); }

  /// Interior discontinuities within (a, b), sorted.
  std::vector<double> breakpoints(double a, double b) const;

private:
  Fn f_;
  BreakFn breaks_;
  BackFn back_;
};

/// Adaptive Gauss-Kronrod integral of `f` over [a, b], split at the function's breakpoints.
/// Each piece is integrated backward from its right end through TimeFunction::before.
double integrate(const TimeFunction& f, double a, double b, double rel_tol = 1e-12);

enum class Convergence { Converged, Divergent };

struct InfiniteIntegral {
  double value = 0.0;        // best estimate of the integral over [0, inf) (partial sum if divergent)
  Convergence status = Convergence::Converged;
  double horizon = 0.0;      // last horizon reached by doubling
  double last_increment = 0.0;
  int doublings = 0;
  bool divergent() const { return status == Convergence::Divergent; }
};

struct DoublingPolicy {
  double start = 1.0;                    // first horizon
  double increment_tol = 1e-10;          // converged once a doubling adds less than this
  double divergence_horizon = 1048576.0; // 2^20: growth test only applies beyond this horizon
  double divergence_factor = 1.5;        // I(2H) >= factor * I(H) => divergent
  double max_horizon = 1125899906842624.0;  // 2^50
  // Ratio test: past ratio_test_from, `ratio_run` consecutive increment ratios <= ratio_max mean
  // geometric decay; the remaining tail is extrapolated and the integral declared convergent.
  // Extrapolation waits until successive ratios agree to within ratio_stability.
  double ratio_test_from = 1024.0;
  double ratio_max = 0.8;
  int ratio_run = 4;
  double ratio_stability = 1e-5;
};

/// Integral over [0, inf) realised by horizon doubling.
///
/// Converged when an increment over [H, 2H] drops below `increment_tol` or the increments decay
/// geometrically (ratio test); divergent when the
/// integral grows by `divergence_factor` per doubling past `divergence_horizon`, when the
/// increments stop decaying there (logarithmic growth), or when a partial integral overflows.
InfiniteIntegral integrate_to_infinity(const TimeFunction& f, const DoublingPolicy& policy = {});

/// Integral over [t, inf) computed by doubling outward from t (no cancellation against a total).
InfiniteIntegral integrate_tail(const TimeFunction& f, double t, double rel_tol = 1e-10);

/// Tabulated running integral F(t) = \int_0^t f for repeated queries at arbitrary t >= 0.
class CumulativeIntegral {
public:
  explicit CumulativeIntegral(TimeFunction f, int panels_per_octave = 32);
  double operator()(double t) const;

private:
  void extend_to(double t) const;

  TimeFunction f_;
  int panels_per_octave_;
  mutable std::vector<double> nodes_;
  mutable std::vector<double> values_;
};

/// \int_{t-t0}^{t} g(tau) / sqrt(t - tau) dtau with the singular endpoint removed by tau = t - s^2.
double singular_window_integral(const TimeFunction& g, double t, double t0);

/// \int_{t-t0}^{t} g(tau)^q dtau.
double power_window_integral(const TimeFunction& g, double t, double t0, double q);

}  // namespace nblab
