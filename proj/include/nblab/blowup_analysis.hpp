#pragma once

#include "nblab/domain.hpp"
#include "nblab/pde_solver.hpp"
#include "nblab/report.hpp"

#include <string>
#include <vector>

namespace nblab {

enum class EstimateMethod { RATE_FIT, STEP_COLLAPSE_TIME };
std::string to_string(EstimateMethod m);

struct BlowupEstimate {
  double T_est = 0.0;
  EstimateMethod method = EstimateMethod::RATE_FIT;
  double q_fit = 0.0;
  double r2 = 0.0;
  double t_last = 0.0;      // last accepted time
  std::size_t n_points = 0;  // points in the fit
};

json to_json(const BlowupEstimate& e);

/// Fits sup^{1-q} = alpha + beta t on the last decade of growth (sup >= sup_last / 10, widened to
/// the last 20 points with sup > 100 if needed) for each q > 1 in q_candidates plus the trajectory's
/// l; keeps the best R^2 and returns the zero crossing. Throws InsufficientData when fewer than 20
/// records exceed 100, unless the run ended in StepCollapse (then the collapse time is returned).
BlowupEstimate estimate_blowup_time(const Trajectory& tr, std::vector<double> q_candidates = {});

/// (i) empirical c7 = min J' / J^l over the final half of the run (J' by differences);
/// (ii) slope of log J against log(T_est - t) on the last decade of J, which must lie in
/// [-1.25 / (l - 1), 0]. Throws HypothesisError for l <= 1, k_inf <= 0 or a run that did not blow up.
CriterionReport j_inequality_check(const Trajectory& tr, double k_inf, double l);

/// J nondecreasing everywhere; the mass nondecreasing up to tol * mass when c, k >= 0.
bool monotone_diagnostics(const Trajectory& tr, bool mass_too, double tol = 1e-10);

struct LocalizationConfig {
  double eps_dist = -1.0;  // interior Omega' = [eps, L - eps]; <= 0 selects L/4
  double l = 2.0;
};

struct LocalizationReport {
  Trajectory trajectory;
  BlowupEstimate estimate;
  double boundary_at_stop = 0.0;
  double interior_at_stop = 0.0;
  double ratio_at_stop = 0.0;
  bool boundary_blows_up = false;  // boundary max > U_max / 2 at stop
  double fit_C = 0.0;              // least squares interior ~ C (T - t)^{-1/(l-1)} on the last decade
  double fit_r2 = 0.0;
  double bound_C = 0.0;            // smallest C with interior <= C (T - t)^{-1/(l-1)} there
  std::size_t fit_points = 0;
  CriterionReport report;
};

/// Requires p <= 1 < l and inf k > 0 (sampled); runs solve and measures the boundary and interior
/// maxima. "Last decade" means records whose boundary max is within a factor 10 of its final value.
LocalizationReport interior_localization(const ProblemSpec& spec, const Grid1D& grid, const SolverConfig& cfg,
                                         const LocalizationConfig& loc = {});

/// Ordinary least squares y = a + b x; returns {a, b, R^2}.
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nblab
