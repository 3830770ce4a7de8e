#include "nblab/blowup_analysis.hpp"

#include "nblab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nblab {

std::string to_string(EstimateMethod m) { return m == EstimateMethod::RATE_FIT ? "RATE_FIT" : "STEP_COLLAPSE_TIME"; }

json to_json(const BlowupEstimate& e) {
  return json{{"T_est", e.T_est}, {"method", to_string(e.method)}, {"q_fit", e.q_fit},
              {"r2", e.r2},       {"t_last", e.t_last},            {"n_points", e.n_points}};
}

std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InsufficientData("linear fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("linear fit on a single abscissa");
  const double b = sxy / sxx;
  const double a = my - b * mx;
  const double r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return {a, b, r2};
}

namespace {

constexpr double kGrowthFloor = 100.0;
constexpr std::size_t kMinPoints = 20;

// Indices of the last decade of growth of `value`, widened to the last kMinPoints records above the floor.
std::vector<std::size_t> last_decade(const std::vector<DiagnosticRecord>& d, double DiagnosticRecord::*value,
                                     double floor, std::size_t min_points) {
  std::vector<std::size_t> above;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i].*value > floor) above.push_back(i);
  if (above.empty()) return {};
  const double top = d[above.back()].*value;
  std::vector<std::size_t> out;
  for (std::size_t i : above)
    if (d[i].*value >= top / 10.0) out.push_back(i);
  if (out.size() < min_points) {
    const std::size_t take = std::min(min_points, above.size());
    out.assign(above.end() - static_cast<std::ptrdiff_t>(take), above.end());
  }
  return out;
}

}  // namespace

BlowupEstimate estimate_blowup_time(const Trajectory& tr, std::vector<double> q_candidates) {
  const auto& d = tr.diagnostics;
  BlowupEstimate est;
  est.t_last = d.empty() ? 0.0 : d.back().t;
  const std::vector<std::size_t> idx = last_decade(d, &DiagnosticRecord::sup, kGrowthFloor, kMinPoints);
  if (idx.size() < kMinPoints) {
    if (tr.verdict.kind == Termination::StepCollapse) {
      est.method = EstimateMethod::STEP_COLLAPSE_TIME;
      est.T_est = std::max(tr.verdict.t_stop, est.t_last);
      est.n_points = idx.size();
      return est;
    }
    throw InsufficientData("fewer than 20 records with sup > 100");
  }
  q_candidates.push_back(tr.l);
  std::sort(q_candidates.begin(), q_candidates.end());
  q_candidates.erase(std::unique(q_candidates.begin(), q_candidates.end()), q_candidates.end());

  bool found = false;
  std::vector<double> t(idx.size()), y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = d[idx[i]].t;
  for (double q : q_candidates) {
    if (!(q > 1.0)) continue;
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = std::pow(d[idx[i]].sup, 1.0 - q);
    const auto [a, b, r2] = linear_fit(t, y);
    if (!(b < 0.0)) continue;
    const double T = -a / b;
    if (!(T > est.t_last) || !std::isfinite(T)) continue;
    if (!found || r2 > est.r2) {
      found = true;
      est.T_est = T;
      est.q_fit = q;
      est.r2 = r2;
    }
  }
  est.n_points = idx.size();
  if (!found) {
    if (tr.verdict.kind == Termination::StepCollapse) {
      est.method = EstimateMethod::STEP_COLLAPSE_TIME;
      est.T_est = std::max(tr.verdict.t_stop, est.t_last);
      return est;
    }
    throw InsufficientData("no exponent candidate gives a decreasing fit beyond the last time");
  }
  return est;
}

bool monotone_diagnostics(const Trajectory& tr, bool mass_too, double tol) {
  const auto& d = tr.diagnostics;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i].J < d[i - 1].J) return false;
    if (mass_too && d[i].mass < d[i - 1].mass - tol * std::abs(d[i - 1].mass)) return false;
  }
  return true;
}

CriterionReport j_inequality_check(const Trajectory& tr, double k_inf, double l) {
  if (!(l > 1.0)) throw HypothesisError("J inequality needs l > 1");
  if (!(k_inf > 0.0)) throw HypothesisError("J inequality needs inf k > 0");
  if (tr.verdict.kind == Termination::ReachedTEnd) throw HypothesisError("run did not blow up");
  const BlowupEstimate est = estimate_blowup_time(tr);
  const auto& d = tr.diagnostics;

  // (i) J' >= c J^l over the final half.
  const double t_half = 0.5 * est.t_last;
  double c7 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i].t < t_half) continue;
    const double dt = d[i].t - d[i - 1].t;
    if (!(dt > 0.0) || !(d[i].J > 0.0)) continue;
    c7 = std::min(c7, (d[i].J - d[i - 1].J) / dt / std::pow(d[i].J, l));
  }
  if (!std::isfinite(c7)) throw InsufficientData("J vanishes over the final half");

  // (ii) log J against log(T - t) on the last decade of J.
  std::vector<double> x, y;
  for (std::size_t i : last_decade(d, &DiagnosticRecord::J, 0.0, kMinPoints)) {
    if (!(d[i].t < est.T_est)) continue;
    x.push_back(std::log(est.T_est - d[i].t));
    y.push_back(std::log(d[i].J));
  }
  const auto [a, slope, r2] = linear_fit(x, y);
  const double floor = -1.25 / (l - 1.0);

  CriterionReport r;
  r.name = "j_inequality";
  r.pass = c7 > 0.0 && slope >= floor && slope <= 0.0;
  r.verdict = r.pass ? "Consistent" : "Inconsistent";
  r.quantities = {{"c7", c7},           {"slope", slope}, {"slope_floor", floor}, {"slope_r2", r2},
                  {"T_est", est.T_est}, {"q_fit", est.q_fit}, {"points", x.size()}};
  (void)a;
  return r;
}

LocalizationReport interior_localization(const ProblemSpec& spec, const Grid1D& grid, const SolverConfig& cfg,
                                         const LocalizationConfig& loc) {
  const double p = spec.p();
  if (!(p <= 1.0) || !(loc.l > 1.0)) throw HypothesisError("localization needs p <= 1 < l");
  if (loc.l != spec.l()) throw ConfigError("localization l differs from the problem's l");
  const double L = spec.length();
  double k_inf = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= 20; ++it) {
    const double t = cfg.t_end * it / 20.0;
    for (double xb : {0.0, L})
      for (int j = 0; j <= 100; ++j) k_inf = std::min(k_inf, spec.k.eval({xb, L * j / 100.0, t}));
  }
  if (!(k_inf > 0.0)) throw HypothesisError("localization needs inf k > 0");

  SolverConfig run = cfg;
  run.interior_margin = loc.eps_dist > 0.0 ? loc.eps_dist : L / 4.0;
  if (!(run.interior_margin < L / 2.0)) throw ConfigError("interior margin must be below L/2");

  LocalizationReport out;
  out.trajectory = solve(spec, grid, run);
  const auto& d = out.trajectory.diagnostics;
  if (out.trajectory.verdict.kind == Termination::ReachedTEnd || d.empty())
    throw HypothesisError("run reached t_end without blow-up");
  out.estimate = estimate_blowup_time(out.trajectory);
  out.boundary_at_stop = d.back().boundary_max;
  out.interior_at_stop = d.back().interior_max;
  out.ratio_at_stop = out.interior_at_stop / out.boundary_at_stop;
  out.boundary_blows_up = out.boundary_at_stop > 0.5 * run.u_max;

  // Interior against C (T - t)^{-1/(l-1)} on the last decade of boundary growth.
  const double expo = -1.0 / (loc.l - 1.0);
  std::vector<double> xs, ys;
  for (std::size_t i : last_decade(d, &DiagnosticRecord::boundary_max, kGrowthFloor, kMinPoints)) {
    if (!(d[i].t < out.estimate.T_est)) continue;
    xs.push_back(std::pow(out.estimate.T_est - d[i].t, expo));
    ys.push_back(d[i].interior_max);
  }
  out.fit_points = xs.size();
  double sxy = 0.0, sxx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
    my += ys[i];
    out.bound_C = std::max(out.bound_C, ys[i] / xs[i]);
  }
  if (!xs.empty()) {
    my /= xs.size();
    out.fit_C = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ss_res += (ys[i] - out.fit_C * xs[i]) * (ys[i] - out.fit_C * xs[i]);
      ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    out.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  }

  CriterionReport& r = out.report;
  r.name = "interior_localization";
  const bool localized = out.ratio_at_stop < 0.2;
  const bool fits = out.fit_r2 >= 0.9;
  r.pass = out.boundary_blows_up && localized && fits;
  r.verdict = !out.boundary_blows_up ? "NoBoundaryBlowUp"
              : !localized           ? "NotLocalized"
              : !fits                ? "LocalizedNoRateFit"
                                     : "Localized";
  r.quantities = {{"T_est", out.estimate.T_est},
                  {"boundary_at_stop", out.boundary_at_stop},
                  {"interior_at_stop", out.interior_at_stop},
                  {"ratio_at_stop", out.ratio_at_stop},
                  {"interior_margin", run.interior_margin},
                  {"fit_C", out.fit_C},
                  {"fit_r2", out.fit_r2},
                  {"bound_C", out.bound_C},
                  {"fit_points", out.fit_points},
                  {"k_inf", k_inf}};
  if (out.boundary_blows_up && localized && !fits)
    r.detail = "interior max stays bounded while the boundary blows up; the (T - t) power law has no explanatory power";
  return out;
}

}  // namespace nblab
