#include "nblab/supersolutions.hpp"

#include "nblab/auxiliary_linear.hpp"
#include "nblab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nblab {

// ---------------------------------------------------------------- eigenpair

EigenPair eigen_first_dirichlet(const Grid1D& grid) {
  const double L = grid.length;
  const double k = std::numbers::pi / L;
  EigenPair e;
  e.length = L;
  e.lambda1 = k * k;
  e.grad_sq_max = k * k;
  e.dphi_dnu_max = -k;
  e.phi.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) e.phi[i] = std::sin(k * grid.x[i]);
  e.phi.front() = 0.0;
  e.phi.back() = 0.0;

  const std::size_t m = grid.size() - 2;
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const std::vector<double> sub(m, -inv_h2), diag(m, 2.0 * inv_h2), sup(m, -inv_h2);
  std::vector<double> x(m, 1.0);
  double rq = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> y = solve_tridiagonal(sub, diag, sup, x);
    double norm = 0.0;
    for (double v : y) norm = std::max(norm, std::abs(v));
    for (double& v : y) v /= norm;
    // Rayleigh quotient y^T A y / y^T y.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double left = i > 0 ? y[i - 1] : 0.0;
      const double right = i + 1 < m ? y[i + 1] : 0.0;
      num += y[i] * (2.0 * y[i] - left - right) * inv_h2;
      den += y[i] * y[i];
    }
    const double next = num / den;
    x = std::move(y);
    if (it > 0 && std::abs(next - rq) <= 1e-15 * next) {
      rq = next;
      break;
    }
    rq = next;
  }
  e.lambda1_fd = rq;
  return e;
}

// ---------------------------------------------------------------- families

std::string to_string(Family f) {
  switch (f) {
    case Family::SMALL_EXP: return "SMALL_EXP";
    case Family::SUPERLINEAR: return "SUPERLINEAR";
    case Family::P1_EXP: return "P1_EXP";
    case Family::P1_BOUNDED: return "P1_BOUNDED";
    case Family::L1_PG1: return "L1_PG1";
    case Family::EXPRESSION: return "EXPRESSION";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::SMALL_EXP, Family::SUPERLINEAR, Family::P1_EXP, Family::P1_BOUNDED, Family::L1_PG1,
                   Family::EXPRESSION})
    if (to_string(f) == s) return f;
  throw ConfigError(fmt::format("unknown supersolution family '{}'", s));
}

SupersolutionCandidate SupersolutionCandidate::perturbed(const Perturbation& p) const {
  auto it = params.find(p.param);
  if (it == params.end()) throw ConfigError(fmt::format("candidate has no parameter '{}'", p.param));
  SupersolutionCandidate c = *this;
  c.params[p.param] = it->second * p.factor;
  return c;
}

json to_json(const SupersolutionCandidate& c) {
  json j{{"family", to_string(c.family)},
         {"params", c.params},
         {"horizon", c.horizon()},
         {"n_times", c.times.size()},
         {"grid_n", c.grid.size()},
         {"length", c.grid.length},
         {"aux", c.aux}};
  j["tight"] = json::array();
  for (const auto& p : c.tight) j["tight"].push_back({{"param", p.param}, {"factor", p.factor}, {"breaks", p.breaks}});
  return j;
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw ConfigError("need at least two verification times");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

void check_options(const ConstructOptions& opt) {
  if (!(opt.horizon > 0.0)) throw ConfigError("construction horizon must be positive");
}

/// Coefficient bounds consistent with the grid the candidate is verified on: sup over the grid
/// nodes, combined with the finer sampling of ReducedCoefficients.
struct Bounds {
  TimeFunction c1;
  TimeFunction k1;
  double sup_c = 0.0;
  double sup_k = 0.0;
};

Bounds coefficient_bounds(const ProblemSpec& spec, const Grid1D& grid, const std::vector<double>& times) {
  const ReducedCoefficients red(spec);
  const TimeFunction c1r = red.c1_fn();
  const TimeFunction k1r = red.k1_fn();
  const expr::Expr c = spec.c;
  const expr::Expr k = spec.k;
  const std::vector<double> xs = grid.x;
  const double L = grid.length;
  Bounds b;
  b.c1 = TimeFunction([c, xs, c1r](double t) {
    double m = c1r(t);
    for (double x : xs) m = std::max(m, c.eval({x, 0.0, t}));
    return m;
  });
  b.k1 = TimeFunction([k, xs, L, k1r](double t) {
    double m = k1r(t);
    for (double xb : {0.0, L})
      for (double y : xs) m = std::max(m, k.eval({xb, y, t}));
    return m;
  });
  // Sup over [0, T] on a time grid five times finer than the verification grid.
  const std::vector<double> fine = linspace(0.0, times.back(), 5 * (static_cast<int>(times.size()) - 1) + 1);
  for (double t : fine) {
    b.sup_c = std::max(b.sup_c, b.c1(t));
    b.sup_k = std::max(b.sup_k, b.k1(t));
  }
  return b;
}

std::size_t time_index(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) throw ConfigError(fmt::format("t = {} is not a verification time", t));
  return static_cast<std::size_t>(it - times.begin());
}

double sup_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

/// Neumann heat flow sampled at the verification times, with v_t from the semi-discrete operator.
struct HeatAux {
  std::vector<double> times;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> vt;
  TimeFunction g;
  double V = 0.0;
};

std::shared_ptr<const HeatAux> solve_heat_aux(const TimeFunction& g, const Grid1D& grid,
                                              const std::vector<double>& times, const SolverConfig& base) {
  NeumannHeatProblem prob{grid.length, g, {}};
  SolverConfig cfg = base;
  cfg.t_end = times.back();
  cfg.output_times = times;
  const Trajectory tr = solve_neumann_heat(prob, grid, cfg);
  if (tr.verdict.kind != Termination::ReachedTEnd || tr.snapshots.size() != times.size())
    throw ConvergenceError(fmt::format("auxiliary heat flow stopped at t = {} ({})", tr.verdict.t_stop, tr.verdict.reason));
  auto aux = std::make_shared<HeatAux>();
  aux->times = times;
  aux->g = g;
  PrescribedFluxModel model(g, g);
  for (const State& s : tr.snapshots) {
    std::vector<double> vt(grid.size());
    semidiscrete_rhs(model, grid, s.t, s.u, vt);
    aux->V = std::max(aux->V, sup_of(s.u));
    aux->v.push_back(s.u);
    aux->vt.push_back(std::move(vt));
  }
  for (const auto& r : tr.diagnostics) aux->V = std::max(aux->V, r.sup);
  return aux;
}

/// Largest a = 2^-j >= 1e-8 with a^{l-1} V^l |Omega| <= 1 whose candidate verifies against its own cap.
void choose_dyadic_amplitude(SupersolutionCandidate& c, const ProblemSpec& spec, double V) {
  const double l = spec.l();
  const double omega = spec.length();
  for (double a = 1.0; a >= 1e-8; a *= 0.5) {
    if (std::pow(a, l - 1.0) * std::pow(V, l) * omega > 1.0) continue;
    c.params["a"] = a;
    // A = 1 + (p-1) a^{p-1} A_coef depends on a.
    if (c.params.contains("A_coef")) {
      const double p = spec.p();
      c.params["A"] = 1.0 + (p - 1.0) * std::pow(a, p - 1.0) * c.params["A_coef"];
    }
    const std::vector<double> cap = c.sample(0.0).u;
    if (verify_supersolution(c, spec, cap).pass) {
      c.initial_cap = cap;
      return;
    }
  }
  throw HypothesisError("no admissible amplitude a found down to 1e-8");
}

bool x_independent(const expr::Expr& e) { return !e.depends_on(expr::Var::X); }

}  // namespace

// ---------------------------------------------------------------- SMALL_EXP

SupersolutionCandidate construct_small_exponent(const ProblemSpec& spec, const Grid1D& grid,
                                                const ConstructOptions& opt) {
  check_options(opt);
  const double p = spec.p(), l = spec.l();
  if (!(std::max(p, l) <= 1.0)) throw HypothesisError(fmt::format("SMALL_EXP needs max(p, l) <= 1, got p={}, l={}", p, l));
  SupersolutionCandidate c;
  c.family = Family::SMALL_EXP;
  c.grid = grid;
  c.times = linspace(0.0, opt.horizon, opt.n_times);
  const Bounds bd = coefficient_bounds(spec, grid, c.times);
  const EigenPair eig = eigen_first_dirichlet(grid);
  const std::vector<double> u0 = sample_initial(spec, grid);
  const double u0max = sup_of(u0);
  if (!(u0max > 0.0)) throw HypothesisError("SMALL_EXP needs sup u0 > 0");

  const double omega = spec.length();
  const double slope = -eig.dphi_dnu_max;  // max over the boundary of -dphi/dnu
  double a = 1.0;
  bool converged = false;
  int rounds = 0;
  for (; rounds < 100; ++rounds) {
    const double d = std::exp(a) * u0max;
    const double next = bd.sup_k * omega * std::pow(d, l - 1.0) / slope;
    const bool stable = std::abs(next - a) <= 1e-14 * (1.0 + a);
    a = next;
    if (stable) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError(fmt::format("SMALL_EXP parameter iteration did not settle; last a = {}", a));
  const double d = std::exp(a) * u0max;
  const double b = a * a * eig.grad_sq_max + a * eig.lambda1 +
                   bd.sup_c * std::max(1.0, std::pow(d, p - 1.0) * std::exp(a * (1.0 - p)));
  c.params = {{"a", a}, {"b", b}, {"d", d}, {"M_c", bd.sup_c}, {"M_k", bd.sup_k}};
  c.aux = {{"lambda1", eig.lambda1}, {"lambda1_fd", eig.lambda1_fd}, {"rounds", rounds + 1}};

  const double k = std::numbers::pi / grid.length;
  const auto phi = eig.phi;
  std::vector<double> dphi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) dphi[i] = k * std::cos(k * grid.x[i]);
  const double lambda1 = eig.lambda1;
  c.evaluator = [phi, dphi, lambda1, k](const Params& P, double t) {
    const double a = P.at("a"), b = P.at("b"), d = P.at("d");
    CandidateSample s;
    const std::size_t n = phi.size();
    s.u.resize(n);
    s.u_t.resize(n);
    s.lap.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = d * std::exp(b * t - a * phi[i]);
      s.u[i] = u;
      s.u_t[i] = b * u;
      s.lap[i] = (a * a * dphi[i] * dphi[i] + a * lambda1 * phi[i]) * u;
    }
    s.dnu = {a * k * s.u.front(), a * k * s.u.back()};
    return s;
  };
  c.initial_cap = c.sample(0.0).u;

  // d meets its inequality with equality where phi peaks; b does when a = 0 and c u^{p-1} reaches M.
  const std::size_t peak = static_cast<std::size_t>(std::max_element(phi.begin(), phi.end()) - phi.begin());
  if (std::abs(u0[peak] - u0max) <= 1e-12 * u0max) c.tight.push_back({"d", 0.95, "initial"});
  if (a == 0.0 && spec.c.is_constant() && bd.sup_c > 0.0 && (p == 1.0 || d <= 1.0))
    c.tight.push_back({"b", 0.95, "interior"});
  return c;
}

// ---------------------------------------------------------------- SUPERLINEAR

SupersolutionCandidate construct_superlinear(const ProblemSpec& spec, const Grid1D& grid,
                                             const ConstructOptions& opt) {
  check_options(opt);
  const double p = spec.p(), l = spec.l();
  if (!(std::min(p, l) > 1.0)) throw HypothesisError(fmt::format("SUPERLINEAR needs min(p, l) > 1, got p={}, l={}", p, l));
  SupersolutionCandidate c;
  c.family = Family::SUPERLINEAR;
  c.grid = grid;
  c.times = linspace(0.0, opt.horizon, opt.n_times);
  const Bounds bd = coefficient_bounds(spec, grid, c.times);

  const InfiniteIntegral ic = integrate_to_infinity(bd.c1, opt.policy);
  const InfiniteIntegral ik = integrate_to_infinity(bd.k1, opt.policy);
  if (ic.divergent() || ik.divergent()) throw HypothesisError("SUPERLINEAR needs \\int (c1 + k1) < inf");
  BoundednessOptions bo;
  bo.policy = opt.policy;
  const BoundednessCriteria window = check_boundedness_criteria(bd.k1, bo);
  if (!window.window_stabilizes) throw HypothesisError("SUPERLINEAR needs the window condition on k1");

  const auto heat = solve_heat_aux(bd.k1, grid, c.times, opt.aux_solver);
  const auto C1 = std::make_shared<CumulativeIntegral>(bd.c1);
  const TimeFunction c1 = bd.c1;
  c.params = {{"a", 1.0}, {"V", heat->V}, {"I_c1", ic.value}};
  // A = 1 + (p-1) a^{p-1} V^{p-1} \int c1; the amplitude search refreshes it from A_coef.
  c.params["A_coef"] = std::pow(heat->V, p - 1.0) * ic.value;
  c.params["A"] = 1.0 + (p - 1.0) * c.params["A_coef"];
  c.aux = {{"v", {{"g", "k1"}, {"v0", "1 + g(0) (x - L/2)^2 / L"}, {"V", heat->V}}},
           {"integral_c1", ic.value},
           {"integral_k1", ik.value},
           {"window_sup", window.window_sup}};
  c.evaluator = [heat, C1, c1, p](const Params& P, double t) {
    const std::size_t it = time_index(heat->times, t);
    const double a = P.at("a"), A = P.at("A"), V = P.at("V");
    const double rate = std::pow(a, p - 1.0) * std::pow(V, p - 1.0);
    const double base = A - (p - 1.0) * rate * (*C1)(t);
    const double f = std::pow(base, -1.0 / (p - 1.0));
    const double fp = rate * c1(t) * std::pow(f, p);
    const auto& v = heat->v[it];
    const auto& vt = heat->vt[it];
    CandidateSample s;
    s.u.resize(v.size());
    s.u_t.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.u[i] = a * f * v[i];
      s.u_t[i] = a * fp * v[i] + a * f * vt[i];
    }
    const double flux = a * f * heat->g(t);
    s.dnu = {flux, flux};
    return s;
  };
  choose_dyadic_amplitude(c, spec, heat->V);
  c.tight.push_back({"A", 1.05, "initial"});
  if (x_independent(spec.c) && bd.sup_c > 0.0) c.tight.push_back({"V", 0.95, "interior"});
  return c;
}

// ---------------------------------------------------------------- P1_EXP

SupersolutionCandidate construct_p1_exp(const ProblemSpec& spec, const Grid1D& grid, const ConstructOptions& opt) {
  check_options(opt);
  const double p = spec.p(), l = spec.l();
  if (!(p == 1.0 && l > 1.0)) throw HypothesisError(fmt::format("P1_EXP needs p = 1 < l, got p={}, l={}", p, l));
  if (!(opt.eps > 0.0)) throw HypothesisError("P1_EXP needs eps > 0 (the statement fails at eps = 0)");
  SupersolutionCandidate c;
  c.family = Family::P1_EXP;
  c.grid = grid;
  c.times = linspace(0.0, opt.horizon, opt.n_times);
  const Bounds bd = coefficient_bounds(spec, grid, c.times);
  const auto C1 = std::make_shared<CumulativeIntegral>(bd.c1);
  const TimeFunction c1 = bd.c1;
  const double eps = opt.eps;
  const double L = grid.length;

  // K(t) = max_b \int k(x_b, y, t) dy * exp[(l-1)(\int c1 + eps t)] must stay bounded.
  double K = 0.0, K_first_half = 0.0;
  for (double t : linspace(0.0, opt.horizon, 5 * (opt.n_times - 1) + 1)) {
    double m = 0.0;
    for (double xb : {0.0, L}) {
      double s = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) s += grid.w[j] * spec.k.eval({xb, grid.x[j], t});
      m = std::max(m, s);
    }
    const double Kt = m * std::exp((l - 1.0) * ((*C1)(t) + eps * t));
    K = std::max(K, Kt);
    if (t <= 0.5 * opt.horizon) K_first_half = std::max(K_first_half, Kt);
  }
  if (K > K_first_half * (1.0 + 1e-6) + 1e-300)
    throw HypothesisError(fmt::format("decay hypothesis fails: \\int k dy exp[(l-1)(\\int c1 + eps t)] keeps growing "
                                      "({} on [0, T/2], {} on [0, T])",
                                      K_first_half, K));

  const double min_shift = L * L / 8.0 + 1.0 / eps;
  const double C = opt.psi_shift.value_or(min_shift + opt.psi_margin);
  if (C < min_shift) throw HypothesisError(fmt::format("psi shift {} leaves min psi below 1/eps (needs {})", C, min_shift));
  const double gamma = L / 2.0;
  const double b = K > 0.0 ? std::pow(gamma / (K * std::pow(C, l)), 1.0 / (l - 1.0)) : 1.0;
  if (!(b > 0.0) || !std::isfinite(b))
    throw HypothesisError(fmt::format("psi shift {} leaves no positive b (b = {})", C, b));
  c.params = {{"b", b}, {"eps", eps}, {"C", C}, {"K", K}};
  c.aux = {{"psi", {{"gamma", gamma}, {"C", C}, {"min", C - L * L / 8.0}}}};
  const std::vector<double> xs = grid.x;
  c.evaluator = [xs, L, C1, c1](const Params& P, double t) {
    const double b = P.at("b"), eps = P.at("eps"), C = P.at("C");
    const double amp = b * std::exp((*C1)(t) + eps * t);
    const double rate = c1(t) + eps;
    CandidateSample s;
    s.u.resize(xs.size());
    s.u_t.resize(xs.size());
    s.lap.assign(xs.size(), amp);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s.u[i] = amp * psi_closed_form(L, C, xs[i]);
      s.u_t[i] = rate * s.u[i];
    }
    s.dnu = {amp * L / 2.0, amp * L / 2.0};
    return s;
  };
  c.initial_cap = c.sample(0.0).u;
  c.tight.push_back({"b", 0.95, "initial"});
  if (!opt.psi_shift && opt.psi_margin == 0.0 && x_independent(spec.c)) c.tight.push_back({"eps", 0.95, "interior"});
  return c;
}

// ---------------------------------------------------------------- P1_BOUNDED

SupersolutionCandidate construct_p1_bounded(const ProblemSpec& spec, const Grid1D& grid,
                                            const ConstructOptions& opt) {
  check_options(opt);
  const double p = spec.p(), l = spec.l();
  if (!(p == 1.0 && l > 1.0)) throw HypothesisError(fmt::format("P1_BOUNDED needs p = 1 < l, got p={}, l={}", p, l));
  SupersolutionCandidate c;
  c.family = Family::P1_BOUNDED;
  c.grid = grid;
  c.times = linspace(0.0, opt.horizon, opt.n_times);
  const Bounds bd = coefficient_bounds(spec, grid, c.times);
  const auto C1 = std::make_shared<CumulativeIntegral>(bd.c1);
  const TimeFunction c1 = bd.c1;
  const TimeFunction k1 = bd.k1;
  const TimeFunction g([k1, C1, l](double t) { return k1(t) * std::exp((l - 1.0) * (*C1)(t)); });

  BoundednessOptions bo;
  bo.policy = opt.policy;
  const BoundednessCriteria crit = check_boundedness_criteria(g, bo);
  if (crit.integral_of_g.divergent())
    throw HypothesisError("P1_BOUNDED needs \\int k1 exp[(l-1) \\int c1] < inf");
  if (!crit.window_stabilizes) throw HypothesisError("P1_BOUNDED needs the window condition on k1 exp[(l-1) \\int c1]");

  const auto heat = solve_heat_aux(g, grid, c.times, opt.aux_solver);
  c.params = {{"a", 1.0}, {"V", heat->V}};
  c.aux = {{"v", {{"g", "k1 exp[(l-1) int c1]"}, {"v0", "1 + g(0) (x - L/2)^2 / L"}, {"V", heat->V}}},
           {"integral_g", crit.integral_of_g.value},
           {"window_sup", crit.window_sup}};
  c.evaluator = [heat, C1, c1](const Params& P, double t) {
    const std::size_t it = time_index(heat->times, t);
    const double a = P.at("a");
    const double E = std::exp((*C1)(t));
    const double ct = c1(t);
    const auto& v = heat->v[it];
    const auto& vt = heat->vt[it];
    CandidateSample s;
    s.u.resize(v.size());
    s.u_t.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.u[i] = a * E * v[i];
      s.u_t[i] = a * ct * E * v[i] + a * E * vt[i];
    }
    const double flux = a * E * heat->g(t);
    s.dnu = {flux, flux};
    return s;
  };
  choose_dyadic_amplitude(c, spec, heat->V);
  c.tight.push_back({"a", 0.95, "initial"});
  return c;
}

// ---------------------------------------------------------------- L1_PG1

SupersolutionCandidate construct_l1_pg1(const ProblemSpec& spec, const Grid1D& grid, const ConstructOptions& opt) {
  check_options(opt);
  const double p = spec.p(), l = spec.l();
  if (!(l == 1.0 && p > 1.0)) throw HypothesisError(fmt::format("L1_PG1 needs l = 1 < p, got p={}, l={}", p, l));
  SupersolutionCandidate c;
  c.family = Family::L1_PG1;
  c.grid = grid;
  c.times = linspace(0.0, opt.horizon, opt.n_times);
  const Bounds bd = coefficient_bounds(spec, grid, c.times);
  const double L = grid.length;

  std::array<double, 2> k2{0.0, 0.0};
  const std::vector<double> fine = linspace(0.0, opt.horizon, 5 * (opt.n_times - 1) + 1);
  std::array<double, 2> k_sup{0.0, 0.0};
  for (int b = 0; b < 2; ++b)
    for (double t : fine)
      for (double y : grid.x) k_sup[b] = std::max(k_sup[b], spec.k.eval({b == 0 ? 0.0 : L, y, t}));
  if (opt.k2) {
    k2 = *opt.k2;
    for (int b = 0; b < 2; ++b)
      if (k_sup[b] > k2[b] * (1.0 + 1e-12))
        throw HypothesisError(fmt::format("k exceeds k2 = {} at x = {} (sup {})", k2[b], b == 0 ? 0.0 : L, k_sup[b]));
  } else {
    k2 = k_sup;
  }
  const double a = k2[0] + k2[1];
  if (!(a > 0.0)) throw HypothesisError("L1_PG1 needs \\int k2 dS > 0");

  const TimeFunction c1 = bd.c1;
  const TimeFunction weighted([c1, p, a](double t) { return c1(t) * std::exp((p - 1.0) * a * t); });
  const InfiniteIntegral iw = integrate_to_infinity(weighted, opt.policy);
  if (iw.divergent()) throw HypothesisError("L1_PG1 needs \\int c1 exp[(p-1) a t] < inf");
  const auto Ecum = std::make_shared<CumulativeIntegral>(weighted);

  const EllipticNonlocal ell = solve_elliptic_nonlocal(k2[0], k2[1], grid, 1.0);
  const double H = sup_of(ell.h);
  const double A = 1.0 + (p - 1.0) * std::pow(H, p - 1.0) * iw.value;
  c.params = {{"A", A}, {"a", a}, {"H", H}};
  c.aux = {{"h", {{"k2", k2}, {"scale", 1.0}, {"integral", ell.integral_v}}}, {"integral_weighted_c1", iw.value}};
  const std::vector<double> h = ell.h;
  const std::array<double, 2> g = k2;
  c.evaluator = [h, g, Ecum, c1, p](const Params& P, double t) {
    const double A = P.at("A"), a = P.at("a"), H = P.at("H");
    const double Hq = std::pow(H, p - 1.0);
    const double base = A - (p - 1.0) * Hq * (*Ecum)(t);
    const double f = std::exp(a * t) * std::pow(base, -1.0 / (p - 1.0));
    const double fp = a * f + Hq * c1(t) * std::pow(f, p);
    CandidateSample s;
    s.u.resize(h.size());
    s.u_t.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      s.u[i] = f * h[i];
      s.u_t[i] = fp * h[i];
    }
    // dh/dnu = k2 \int h with \int h = 1.
    s.dnu = {f * g[0], f * g[1]};
    return s;
  };
  c.initial_cap = c.sample(0.0).u;
  c.tight.push_back({"A", 1.05, "initial"});
  c.tight.push_back({"a", 0.95, "interior"});
  if (x_independent(spec.c) && bd.sup_c > 0.0) c.tight.push_back({"H", 0.95, "interior"});
  return c;
}

SupersolutionCandidate construct(Family f, const ProblemSpec& spec, const Grid1D& grid, const ConstructOptions& opt) {
  switch (f) {
    case Family::SMALL_EXP: return construct_small_exponent(spec, grid, opt);
    case Family::SUPERLINEAR: return construct_superlinear(spec, grid, opt);
    case Family::P1_EXP: return construct_p1_exp(spec, grid, opt);
    case Family::P1_BOUNDED: return construct_p1_bounded(spec, grid, opt);
    case Family::L1_PG1: return construct_l1_pg1(spec, grid, opt);
    case Family::EXPRESSION: break;
  }
  throw ConfigError("EXPRESSION candidates are built from text, not constructed");
}

SupersolutionCandidate candidate_from_expression(const std::string& text, const Grid1D& grid, double horizon,
                                                 int n_times) {
  using expr::Var;
  if (!(horizon > 0.0)) throw ConfigError("verification horizon must be positive");
  const expr::Expr u = expr::parse(text, expr::kVarsXT);
  const expr::Expr ut = u.derivative(Var::T);
  const expr::Expr ux = u.derivative(Var::X);
  const expr::Expr uxx = ux.derivative(Var::X);
  SupersolutionCandidate c;
  c.family = Family::EXPRESSION;
  c.grid = grid;
  c.times = linspace(0.0, horizon, n_times);
  c.aux = {{"expression", text}};
  const std::vector<double> xs = grid.x;
  const double L = grid.length;
  c.evaluator = [u, ut, uxx, ux, xs, L](const Params&, double t) {
    CandidateSample s;
    for (double x : xs) {
      s.u.push_back(u.eval({x, 0.0, t}));
      s.u_t.push_back(ut.eval({x, 0.0, t}));
      s.lap.push_back(uxx.eval({x, 0.0, t}));
    }
    s.dnu = {-ux.eval({0.0, 0.0, t}), ux.eval({L, 0.0, t})};
    return s;
  };
  c.initial_cap = c.sample(0.0).u;
  return c;
}

// ---------------------------------------------------------------- verification

CriterionReport VerificationReport::report() const {
  CriterionReport r;
  r.name = "supersolution";
  r.pass = pass;
  r.verdict = pass ? "Supersolution" : "NotSupersolution";
  r.quantities = {{"r_int", r_int},          {"r_bnd", r_bnd},          {"r_init", r_init},
                  {"scaled_int", scaled_int}, {"scaled_bnd", scaled_bnd}, {"scaled_init", scaled_init},
                  {"worst_int_x", worst_int_x}, {"worst_int_t", worst_int_t}, {"worst_bnd_t", worst_bnd_t},
                  {"tol", tol}};
  if (!pass) {
    if (scaled_init < -tol) r.detail = "initial inequality fails";
    else if (scaled_int < -tol) r.detail = "interior inequality fails";
    else r.detail = "boundary inequality fails";
  }
  return r;
}

namespace {

double finite_or_neg_inf(double v) { return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity(); }

}  // namespace

VerificationReport verify_supersolution(const SupersolutionCandidate& c, const ProblemSpec& spec,
                                        const std::vector<double>& u0, double tol) {
  const Grid1D& grid = c.grid;
  const std::size_t n = grid.size();
  if (u0.size() != n) throw ConfigError("initial datum does not match the candidate grid");
  if (c.times.empty() || c.times.front() != 0.0) throw ConfigError("verification times must start at t = 0");
  NonlocalModel model(spec, grid);
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const double inf = std::numeric_limits<double>::infinity();
  VerificationReport rep;
  rep.tol = tol;
  rep.r_int = rep.r_bnd = rep.r_init = inf;
  rep.scaled_int = rep.scaled_bnd = rep.scaled_init = inf;
  std::vector<double> react(n);
  for (double t : c.times) {
    const CandidateSample s = c.sample(t);
    if (s.u.size() != n || s.u_t.size() != n) throw ConfigError("candidate sample does not match the grid");
    std::vector<double> lap = s.lap;
    if (lap.empty()) {
      lap.resize(n);
      lap[0] = (2.0 * s.u[1] - 2.0 * s.u[0] + 2.0 * grid.h * s.dnu[0]) * inv_h2;
      for (std::size_t i = 1; i + 1 < n; ++i) lap[i] = (s.u[i - 1] - 2.0 * s.u[i] + s.u[i + 1]) * inv_h2;
      lap[n - 1] = (2.0 * s.u[n - 2] - 2.0 * s.u[n - 1] + 2.0 * grid.h * s.dnu[1]) * inv_h2;
    }
    model.reaction(t, s.u, react);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = finite_or_neg_inf(s.u_t[i] - lap[i] - react[i]);
      const double scale = std::max({1.0, std::abs(s.u_t[i]) + std::abs(lap[i]) + std::abs(react[i])});
      rep.r_int = std::min(rep.r_int, r);
      if (r / scale < rep.scaled_int) {
        rep.scaled_int = r / scale;
        rep.worst_int_x = grid.x[i];
        rep.worst_int_t = t;
      }
    }
    const auto I = model.flux(t, s.u);
    for (int b = 0; b < 2; ++b) {
      const double r = finite_or_neg_inf(s.dnu[b] - I[b]);
      const double scale = std::max({1.0, std::abs(s.dnu[b]) + std::abs(I[b])});
      rep.r_bnd = std::min(rep.r_bnd, r);
      if (r / scale < rep.scaled_bnd) {
        rep.scaled_bnd = r / scale;
        rep.worst_bnd_t = t;
      }
    }
    if (t == 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = finite_or_neg_inf(s.u[i] - u0[i]);
        rep.r_init = std::min(rep.r_init, r);
        rep.scaled_init = std::min(rep.scaled_init, r / std::max({1.0, std::abs(s.u[i]) + std::abs(u0[i])}));
      }
    }
  }
  rep.pass = rep.scaled_int >= -tol && rep.scaled_bnd >= -tol && rep.scaled_init >= -tol;
  return rep;
}

VerificationReport verify_supersolution(const SupersolutionCandidate& c, const ProblemSpec& spec, double tol) {
  return verify_supersolution(c, spec, sample_initial(spec, c.grid), tol);
}

DominationReport check_domination(const SupersolutionCandidate& c, const ProblemSpec& spec,
                                  const std::vector<double>& u0, const SolverConfig& cfg, double tol) {
  SolverConfig run = cfg;
  run.t_end = c.horizon();
  run.output_times = c.times;
  NonlocalModel model(spec, c.grid);
  const Trajectory tr = integrate(model, c.grid, u0, run);
  DominationReport rep;
  rep.tol = tol;
  rep.run_verdict = tr.verdict;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (const State& s : tr.snapshots) {
    const CandidateSample cs = c.sample(s.t);
    for (std::size_t i = 0; i < s.u.size(); ++i) rep.max_excess = std::max(rep.max_excess, s.u[i] - cs.u[i]);
  }
  rep.pass = tr.verdict.kind == Termination::ReachedTEnd && rep.max_excess <= tol;
  return rep;
}

}  // namespace nblab
