#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nblab/blowup_analysis.hpp"
#include "nblab/error.hpp"

#include <cmath>

using namespace nblab;

namespace {

// Flat data and no flux reduce the problem to u' = u^p, which blows up at 1 / ((p - 1) u0^{p-1}).
double ode_blowup_time(double p, double u0) { return 1.0 / ((p - 1.0) * std::pow(u0, p - 1.0)); }

Trajectory flat_run(double p, double u0, std::size_t n = 21, double u_max = 1e8) {
  const ProblemSpec spec = ProblemSpec::make(1, p, 2, "1", "0", std::to_string(u0));
  SolverConfig cfg;
  cfg.t_end = 2.0;
  cfg.u_max = u_max;
  return solve(spec, Grid1D(1.0, n), cfg);
}

}  // namespace

TEST_CASE("linear fit") {
  const auto [a, b, r2] = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(a == doctest::Approx(1.0));
  CHECK(b == doctest::Approx(2.0));
  CHECK(r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(linear_fit({1}, {1}), InsufficientData);
}

TEST_CASE("blow-up time of flat problems") {
  SUBCASE("quadratic") {
    const Trajectory tr = flat_run(2, 2);
    REQUIRE(tr.verdict.kind == Termination::BlowUpDetected);
    const BlowupEstimate e = estimate_blowup_time(tr, {2.0});
    CHECK(e.method == EstimateMethod::RATE_FIT);
    CHECK(std::abs(e.T_est - ode_blowup_time(2, 2)) < 0.01 * ode_blowup_time(2, 2));
    CHECK(e.q_fit == 2.0);
    CHECK(e.r2 > 0.99);
    CHECK(e.T_est > e.t_last);
  }
  SUBCASE("cubic") {
    const Trajectory tr = flat_run(3, 1);
    const BlowupEstimate e = estimate_blowup_time(tr, {3.0});
    CHECK(std::abs(e.T_est - ode_blowup_time(3, 1)) < 0.01 * ode_blowup_time(3, 1));
    CHECK(e.q_fit == 3.0);
  }
  SUBCASE("stable under refinement and cap") {
    const double base = estimate_blowup_time(flat_run(2, 2), {2.0}).T_est;
    CHECK(std::abs(estimate_blowup_time(flat_run(2, 2, 41), {2.0}).T_est - base) < 0.02 * base);
    CHECK(std::abs(estimate_blowup_time(flat_run(2, 2, 21, 1e9), {2.0}).T_est - base) < 0.02 * base);
  }
  SUBCASE("global run has no estimate") {
    const ProblemSpec spec = ProblemSpec::make(1, 1, 1, "1", "0", "1");
    SolverConfig cfg;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(estimate_blowup_time(solve(spec, Grid1D(1.0, 21), cfg)), InsufficientData);
  }
}

TEST_CASE("J inequality for boundary-driven blow-up") {
  const ProblemSpec spec = ProblemSpec::make(1, 1, 2, "0", "1", "20");
  SolverConfig cfg;
  cfg.t_end = 5.0;
  cfg.waive_compatibility = true;
  const Trajectory tr = solve(spec, Grid1D(1.0, 41), cfg);
  REQUIRE(tr.verdict.kind == Termination::BlowUpDetected);
  CHECK(monotone_diagnostics(tr, true));
  const CriterionReport r = j_inequality_check(tr, 1.0, 2.0);
  INFO(r.quantities.dump());
  CHECK(r.pass);
  CHECK(r.quantities["c7"].get<double>() > 0.0);
  const double slope = r.quantities["slope"].get<double>();
  CHECK(slope <= 0.0);
  CHECK(slope >= -1.25);

  CHECK_THROWS_AS(j_inequality_check(tr, 0.0, 2.0), HypothesisError);
  CHECK_THROWS_AS(j_inequality_check(tr, 1.0, 1.0), HypothesisError);
}

TEST_CASE("interior localization") {
  const ProblemSpec spec = ProblemSpec::make(1, 1, 2, "0", "5", "1");
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.waive_compatibility = true;
  const LocalizationReport r = interior_localization(spec, Grid1D(1.0, 51), cfg, {-1.0, 2.0});
  INFO(r.report.quantities.dump());
  CHECK(r.boundary_blows_up);
  CHECK(r.ratio_at_stop < 0.2);
  CHECK(r.interior_at_stop < 10.0);
  // The bound with the fitted constant holds on the last decade.
  CHECK(r.bound_C > 0.0);
  CHECK(r.fit_points >= 20);

  CHECK_THROWS_AS(interior_localization(ProblemSpec::make(1, 2, 2, "0", "5", "1"), Grid1D(1.0, 21), cfg, {-1.0, 2.0}),
                  HypothesisError);
  CHECK_THROWS_AS(interior_localization(ProblemSpec::make(1, 1, 2, "0", "x*y", "1"), Grid1D(1.0, 21), cfg,
                                        {-1.0, 2.0}),
                  HypothesisError);
}
