#pragma once

#include "nblab/quadrature.hpp"
#include "nblab/report.hpp"
#include "nblab/rk23.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nblab {

/// w' = c0 w^p (C0_P), w' = k0 w^l (K0_L) or w' = c0 w^p + k0 w^l (SUM), w(0) = w0.
enum class OdeKind { C0_P, K0_L, SUM };

std::string to_string(OdeKind k);

struct ComparisonODE {
  OdeKind kind = OdeKind::SUM;
  double p = 1.0;
  double l = 1.0;
  TimeFunction c0;
  TimeFunction k0;
  double w0 = 0.0;

  /// Throws ConfigError unless w0 >= 0 and the exponents fit the kind.
  void validate() const;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double w_max = 1e8;   // same cap as the PDE solver
  double dt_min = 1e-13;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<double> w;
  Verdict verdict;
  /// Stop time plus the local tail w^{1-q} / ((q-1) a) with a = w'/w^q at the stop.
  std::optional<double> blowup_time;
};

OdeSolution solve_comparison_ode(const ComparisonODE& ode, double t_end, const OdeOptions& opt = {});

/// T = w0^{1-q} / ((q-1) a) for w' = a w^q with constant a > 0, q > 1.
double closed_form_blowup_time(double q, double a, double w0);

/// The five threshold cases of the mass comparison.
enum class RemarkCase { C0_P, K0_L, P1_LG1, L1_PG1, BOTH };

std::string to_string(RemarkCase c);

struct ThresholdReport {
  RemarkCase which = RemarkCase::C0_P;
  double threshold = 0.0;     // 0 when the defining integral diverges
  double w0 = 0.0;
  bool blows_up = false;      // w0 > threshold
  std::vector<InfiniteIntegral> integrals;  // one, or two for BOTH
  std::string verdict() const { return blows_up ? "BlowsUp" : "Inconclusive"; }
};

json to_json(const ThresholdReport& r);

/// Evaluates the threshold of `which`. Throws ConfigError when p, l do not fit the case.
ThresholdReport blowup_threshold(RemarkCase which, double p, double l, const TimeFunction& c0, const TimeFunction& k0,
                                 double w0, const DoublingPolicy& policy = {});

enum class LimitVerdict { Diverges, ConvergesOrBounded, Undetermined, NotApplicable };

std::string to_string(LimitVerdict v);

/// One branch of the all-nontrivial-blow-up criterion:
///   \int_0^inf a < inf  and  lim_{t -> inf} \int_0^t b * (\int_t^inf a)^{1/(q-1)} = inf,
/// with (q, a, b) = (p, c0, kbar) or (l, k0, cbar).
struct NontrivialBranch {
  double q = 2.0;
  InfiniteIntegral integral_a;
  std::vector<double> times;    // 2^k
  std::vector<double> products;
  LimitVerdict verdict = LimitVerdict::NotApplicable;
  std::string note;
};

NontrivialBranch evaluate_nontrivial_branch(double q, const TimeFunction& a, const TimeFunction& b,
                                            double horizon = 1073741824.0);

/// Both branches where the exponents allow; pass iff some branch Diverges.
CriterionReport nontrivial_blowup_criterion(double p, double l, const TimeFunction& c0, const TimeFunction& k0,
                                            const TimeFunction& cbar, const TimeFunction& kbar,
                                            double horizon = 1073741824.0);

}  // namespace nblab
