#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nblab/domain.hpp"
#include "nblab/error.hpp"
#include "nblab/ode_comparison.hpp"
#include "nblab/pde_solver.hpp"

#include <cmath>

using namespace nblab;

namespace {

TimeFunction constant(double v) {
  return TimeFunction([v](double) { return v; });
}

TimeFunction fn(double (*f)(double)) { return TimeFunction(f); }

ComparisonODE make(OdeKind kind, double p, double l, TimeFunction c0, TimeFunction k0, double w0) {
  ComparisonODE o;
  o.kind = kind;
  o.p = p;
  o.l = l;
  o.c0 = std::move(c0);
  o.k0 = std::move(k0);
  o.w0 = w0;
  return o;
}

}  // namespace

TEST_CASE("thresholds from closed-form integrals") {
  const auto decay = fn([](double t) { return std::exp(-t); });
  const ThresholdReport a = blowup_threshold(RemarkCase::C0_P, 2, 1, decay, constant(0), 2.0);
  CHECK(std::abs(a.threshold - 1.0) < 1e-8);
  CHECK(a.blows_up);
  const ThresholdReport b = blowup_threshold(RemarkCase::K0_L, 1, 2, constant(0), decay, 0.5);
  CHECK(std::abs(b.threshold - 1.0) < 1e-8);
  CHECK_FALSE(b.blows_up);
  CHECK(b.verdict() == "Inconclusive");

  const ThresholdReport c = blowup_threshold(RemarkCase::C0_P, 2, 1, constant(1), constant(0), 1e-9);
  CHECK(c.threshold == 0.0);
  CHECK(c.integrals[0].divergent());
  CHECK(c.blows_up);

  // p = 3, c0 = 2 e^{-2t}: \int = 1, threshold (2)^{-1/2}.
  const ThresholdReport d =
      blowup_threshold(RemarkCase::C0_P, 3, 1, fn([](double t) { return 2 * std::exp(-2 * t); }), constant(0), 1.0);
  CHECK(std::abs(d.threshold - 1.0 / std::sqrt(2.0)) < 1e-8);

  // Zero coefficient: no finite threshold.
  CHECK(std::isinf(blowup_threshold(RemarkCase::C0_P, 2, 1, constant(0), constant(0), 5.0).threshold));
  CHECK_THROWS_AS(blowup_threshold(RemarkCase::C0_P, 1, 2, decay, decay, 1.0), ConfigError);
  CHECK_THROWS_AS(blowup_threshold(RemarkCase::P1_LG1, 2, 2, decay, decay, 1.0), ConfigError);
}

TEST_CASE("thresholds with exponential weights") {
  // p = 1, l = 2, c0 = e^{-t}, k0 = e^{-2t}: \int e^{-2t} exp(1 - e^{-t}) dt = [substitute s = e^{-t}]
  // \int_0^1 s e^{1-s} ds = e (1 - 2/e) = e - 2.
  const ThresholdReport r = blowup_threshold(RemarkCase::P1_LG1, 1, 2, fn([](double t) { return std::exp(-t); }),
                                             fn([](double t) { return std::exp(-2 * t); }), 1.0);
  CHECK(std::abs(r.threshold - 1.0 / (std::exp(1.0) - 2.0)) < 1e-7);
  // l = 1, p = 2 with constant k0 > 0 and c0 = e^{-t}: integrand e^{-t} e^{k t}, divergent for k >= 1.
  const ThresholdReport s =
      blowup_threshold(RemarkCase::L1_PG1, 2, 1, fn([](double t) { return std::exp(-t); }), constant(2.0), 1e-6);
  CHECK(s.threshold == 0.0);
  // BOTH: min of the two thresholds.
  const ThresholdReport m = blowup_threshold(RemarkCase::BOTH, 2, 2, fn([](double t) { return std::exp(-t); }),
                                             fn([](double t) { return 4 * std::exp(-t); }), 0.5);
  CHECK(std::abs(m.threshold - 0.25) < 1e-8);
  CHECK(m.blows_up);
}

TEST_CASE("ODE blow-up times against closed forms") {
  SUBCASE("examples") {
    const OdeSolution a = solve_comparison_ode(make(OdeKind::C0_P, 2, 1, constant(1), {}, 2.0), 2.0);
    CHECK(a.verdict.kind == Termination::BlowUpDetected);
    REQUIRE(a.blowup_time);
    CHECK(std::abs(*a.blowup_time - 0.5) < 1e-6);
    const OdeSolution b = solve_comparison_ode(make(OdeKind::K0_L, 1, 3, {}, constant(2), 1.0), 1.0);
    REQUIRE(b.blowup_time);
    CHECK(std::abs(*b.blowup_time - 0.25) < 1e-6);
  }
  SUBCASE("relative error over initial masses") {
    for (double w0 : {0.5, 1.0, 2.0, 10.0}) {
      for (auto [q, a] : {std::pair{2.0, 1.0}, std::pair{3.0, 0.5}, std::pair{1.5, 2.0}}) {
        const double exact = closed_form_blowup_time(q, a, w0);
        const OdeSolution s = solve_comparison_ode(make(OdeKind::C0_P, q, 1, constant(a), {}, w0), 2.0 * exact);
        REQUIRE(s.blowup_time);
        CHECK(std::abs(*s.blowup_time - exact) <= 1e-6 * exact);
      }
    }
  }
}

TEST_CASE("linear sum is global") {
  const OdeSolution s = solve_comparison_ode(make(OdeKind::SUM, 1, 1, constant(1), constant(1), 1.0), 2.0);
  CHECK(s.verdict.kind == Termination::ReachedTEnd);
  CHECK_FALSE(s.blowup_time);
  CHECK(s.w.back() == doctest::Approx(std::exp(4.0)).epsilon(1e-8));
}

TEST_CASE("blow-up time is monotone in w0 and c0") {
  double prev_row = std::numeric_limits<double>::infinity();
  for (double c : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    double prev = std::numeric_limits<double>::infinity();
    double first = 0.0;
    for (double w0 : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const OdeSolution s = solve_comparison_ode(make(OdeKind::C0_P, 2, 1, constant(c), {}, w0), 10.0);
      REQUIRE(s.blowup_time);
      CHECK(*s.blowup_time <= prev);
      prev = *s.blowup_time;
      if (w0 == 0.5) first = prev;
    }
    CHECK(first <= prev_row);
    prev_row = first;
  }
}

TEST_CASE("invalid kinds") {
  CHECK_THROWS_AS(solve_comparison_ode(make(OdeKind::C0_P, 1, 1, constant(1), {}, 1.0), 1.0), ConfigError);
  CHECK_THROWS_AS(solve_comparison_ode(make(OdeKind::SUM, 0.5, 1, constant(1), constant(1), 1.0), 1.0), ConfigError);
  CHECK_THROWS_AS(solve_comparison_ode(make(OdeKind::C0_P, 2, 1, constant(1), {}, -1.0), 1.0), ConfigError);
}

TEST_CASE("flat PDE solution follows the ODE") {
  const ProblemSpec spec = ProblemSpec::make(1, 2, 1, "1", "0", "2");
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.rtol = 1e-9;
  cfg.atol = 1e-12;
  const Trajectory tr = solve(spec, Grid1D(1.0, 21), cfg);
  const OdeSolution ode = solve_comparison_ode(make(OdeKind::C0_P, 2, 1, constant(1), {}, 2.0), 1.0);
  int compared = 0;
  for (const auto& r : tr.diagnostics) {
    if (r.sup > 1e4) break;
    const double exact = 1.0 / (0.5 - r.t);
    CHECK(std::abs(r.sup - exact) <= 1e-4 * exact);
    ++compared;
  }
  CHECK(compared > 100);
  // The ODE integrator itself agrees with the same closed form along its own steps.
  for (std::size_t i = 0; i < ode.t.size(); ++i) {
    if (ode.w[i] > 1e4) break;
    CHECK(std::abs(ode.w[i] - 1.0 / (0.5 - ode.t[i])) <= 1e-6 * ode.w[i]);
  }
}

TEST_CASE("all-nontrivial criterion on the hand oracles") {
  const auto cubic = fn([](double t) { return std::pow(1 + t, -3.0); });
  SUBCASE("bounded product") {
    const NontrivialBranch br = evaluate_nontrivial_branch(2, cubic, constant(1));
    CHECK(br.verdict == LimitVerdict::ConvergesOrBounded);
    // Oracle: t * (1+t)^{-2} / 2.
    const double t = br.times.back();
    CHECK(br.products.back() == doctest::Approx(t / (2 * (1 + t) * (1 + t))).epsilon(1e-6));
  }
  SUBCASE("constant limit") {
    const NontrivialBranch br = evaluate_nontrivial_branch(2, cubic, fn([](double t) { return 1 + t; }));
    CHECK(br.verdict == LimitVerdict::Undetermined);
    CHECK(br.products.back() == doctest::Approx(0.25).epsilon(1e-4));
  }
  SUBCASE("exponential decay") {
    const NontrivialBranch br = evaluate_nontrivial_branch(2, fn([](double t) { return std::exp(-t); }), constant(1));
    CHECK(br.verdict == LimitVerdict::ConvergesOrBounded);
  }
  SUBCASE("divergent product") {
    const NontrivialBranch br = evaluate_nontrivial_branch(2, cubic, fn([](double t) { return (1 + t) * (1 + t); }));
    CHECK(br.verdict == LimitVerdict::Diverges);
  }
  SUBCASE("first integral diverges") {
    const NontrivialBranch br = evaluate_nontrivial_branch(2, constant(1), constant(1));
    CHECK(br.verdict == LimitVerdict::NotApplicable);
  }
  SUBCASE("report combines branches") {
    const CriterionReport r = nontrivial_blowup_criterion(2, 0.5, cubic, constant(0), constant(0),
                                                          fn([](double t) { return (1 + t) * (1 + t); }));
    CHECK(r.pass);
    CHECK(r.verdict == "Diverges");
    CHECK(r.quantities.contains("reaction_branch"));
    CHECK_FALSE(r.quantities.contains("boundary_branch"));
  }
}
