#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nblab/domain.hpp"
#include "nblab/error.hpp"

#include <cmath>

using namespace nblab;

TEST_CASE("domain and exponent invariants") {
  const Domain1D d(2.5);
  CHECK(d.measure() == 2.5);
  CHECK(Domain1D::boundary_measure() == 2.0);
  CHECK(Domain1D::normal(Side::Left) == -1.0);
  CHECK(Domain1D::normal(Side::Right) == 1.0);
  CHECK(d.boundary_point(Side::Right) == 2.5);
  CHECK_THROWS_AS(Domain1D(0.0), InvalidSpec);
  CHECK_THROWS_AS(Domain1D(-1.0), InvalidSpec);
  CHECK_THROWS_AS(ExponentPair(0.0, 1.0), InvalidSpec);
  CHECK_THROWS_AS(ExponentPair(1.0, -2.0), InvalidSpec);
}

TEST_CASE("validate rejects negative data") {
  CHECK_NOTHROW(validate(ProblemSpec::make(1, 2, 2, "exp(-t)", "1", "x")));
  CHECK_THROWS_AS(validate(ProblemSpec::make(1, 2, 2, "x - 0.5", "1", "1")), InvalidSpec);
  CHECK_THROWS_AS(validate(ProblemSpec::make(1, 2, 2, "0", "y - 0.5", "1")), InvalidSpec);
  CHECK_THROWS_AS(validate(ProblemSpec::make(1, 2, 2, "0", "0", "x - 0.5")), InvalidSpec);
}

TEST_CASE("json round trip") {
  const ProblemSpec s = ProblemSpec::make(2.0, 1.5, 2.0, "exp(-t)", "x + y", "1 + x");
  const ProblemSpec back = problem_from_json(to_json(s));
  CHECK(back.length() == 2.0);
  CHECK(back.p() == 1.5);
  CHECK(back.k_text == "x + y");
  const ProblemSpec numeric = problem_from_json(json{{"p", 2}, {"l", 2}, {"c", 1}, {"k", 0}, {"u0", 2}});
  CHECK(numeric.length() == 1.0);
  CHECK(numeric.c.eval({}) == 1.0);
  CHECK_THROWS_AS(problem_from_json(json{{"p", 2}, {"c", 1}, {"k", 0}, {"u0", 2}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"p", "two"}, {"l", 2}, {"c", 1}, {"k", 0}, {"u0", 2}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json::array()), ConfigError);
}

TEST_CASE("reduced coefficients: constant cases are exact") {
  const ReducedValues a = reduce_coefficients(ProblemSpec::make(1, 2, 2, "2", "0", "0"), 0.0);
  CHECK(a.c0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.c1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.cbar == doctest::Approx(2.0).epsilon(1e-12));

  const ReducedValues b = reduce_coefficients(ProblemSpec::make(1, 2, 2, "0", "1", "0"), 0.0);
  CHECK(b.k0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.kbar == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.k1 == doctest::Approx(1.0).epsilon(1e-12));

  // |Omega| = 3 scales the inf-based reductions by |Omega|^{1-p}.
  const ReducedValues c = reduce_coefficients(ProblemSpec::make(3, 2, 3, "0.5", "0.25", "0"), 4.0);
  CHECK(std::abs(c.c0 - 0.5 / 3.0) < 1e-12);
  CHECK(std::abs(c.cbar - 1.5) < 1e-12);
  CHECK(std::abs(c.k0 - 0.5 / 9.0) < 1e-12);
  CHECK(std::abs(c.kbar - 1.5) < 1e-12);
}

TEST_CASE("reduced coefficients: linear c matches the exact integral") {
  const ReducedValues r = reduce_coefficients(ProblemSpec::make(1, 2, 2, "x*exp(-t)", "0", "0"), 0.0);
  CHECK(r.c0 == 0.0);
  CHECK(std::abs(r.c1 - 1.0) < 1e-14);
  CHECK(std::abs(r.cbar - 0.5) < 1e-10);
}

TEST_CASE("reduced coefficients: kernel depending on the boundary point") {
  // k(0, y) = 1 + y, k(1, y) = 2 + y on (0, 1): sum = 3 + 2y, inf 3, integral 4, sup 3.
  const ReducedCoefficients rc(ProblemSpec::make(1, 2, 2, "0", "1 + x + y", "0"));
  CHECK(std::abs(rc.k0(0.0) - 3.0) < 1e-12);
  CHECK(std::abs(rc.kbar(0.0) - 4.0) < 1e-10);
  CHECK(std::abs(rc.k1(0.0) - 3.0) < 1e-12);
}

TEST_CASE("inf below sup for sampled times") {
  const ProblemSpec s = ProblemSpec::make(2.0, 1.5, 2, "(1 + x)*exp(-t) + 0.1*sin(x*t)^2", "exp(-t)*(1+y)", "0");
  const ReducedCoefficients rc(s);
  for (double t = 0.0; t <= 10.0; t += 0.5) {
    const ReducedValues v = rc.at(t);
    CHECK(std::pow(2.0, 0.5) * v.c0 <= v.c1 + 1e-15);
    CHECK(v.c0 >= 0.0);
    CHECK(v.k0 >= 0.0);
    CHECK(v.cbar >= 0.0);
    CHECK(v.kbar >= 0.0);
  }
}

TEST_CASE("reduced function objects outlive the evaluator") {
  TimeFunction f;
  {
    const ReducedCoefficients rc(ProblemSpec::make(1, 2, 2, "exp(-t)", "0", "0"));
    f = rc.c0_fn();
  }
  CHECK(f(0.0) == doctest::Approx(1.0));
}

TEST_CASE("compatibility") {
  SUBCASE("zero datum") {
    const auto r = check_compatibility(ProblemSpec::make(1, 2, 2, "0", "3", "0"), 1e-8);
    CHECK(r.report.pass);
    CHECK(r.residuals[0] == 0.0);
    CHECK(r.residuals[1] == 0.0);
  }
  SUBCASE("u0 = x fails at the right end") {
    const auto r = check_compatibility(ProblemSpec::make(1, 2, 2, "0", "0", "x"), 1e-8);
    CHECK_FALSE(r.report.pass);
    CHECK(r.residuals[1] == doctest::Approx(1.0));
    CHECK(r.residuals[0] == doctest::Approx(-1.0));
  }
  SUBCASE("cosine datum with zero kernel") {
    const auto r = check_compatibility(ProblemSpec::make(1, 2, 2, "0", "0", "1 + cos(pi*x)"), 1e-8);
    CHECK(r.report.pass);
  }
  SUBCASE("differenced derivative for a kinked datum") {
    const auto r = check_compatibility(ProblemSpec::make(1, 2, 2, "0", "0", "1 + abs(x - 0.5)*0 + cos(pi*x)"));
    CHECK_FALSE(r.analytic);
    CHECK(r.report.pass);
  }
  SUBCASE("symmetric data gives equal residuals") {
    const auto r = check_compatibility(ProblemSpec::make(2, 2, 2, "0", "1 + (y - 1)^2", "2 + cos(pi*x)"), 1e-8);
    CHECK(std::abs(r.residuals[0] - r.residuals[1]) < 1e-12);
  }
  SUBCASE("negative datum is an invalid spec") {
    CHECK_THROWS_AS(check_compatibility(ProblemSpec::make(1, 2, 0.5, "0", "1", "x - 0.5")), InvalidSpec);
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_exponent_regime({0.5, 1.0}) == Regime::SublinearAllGlobal);
  CHECK(classify_exponent_regime({2, 3}) == Regime::SuperlinearBoth);
  CHECK(classify_exponent_regime({1, 2}) == Regime::P1Lg1);
  CHECK(classify_exponent_regime({2, 1}) == Regime::L1Pg1);
  CHECK(classify_exponent_regime({2, 0.5}) == Regime::Pg1Only);
  CHECK(classify_exponent_regime({0.5, 2}) == Regime::Lg1Only);
  CHECK(to_string(Regime::P1Lg1) == "P1_LG1");
}
