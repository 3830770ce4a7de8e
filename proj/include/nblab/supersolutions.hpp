#pragma once

#include "nblab/domain.hpp"
#include "nblab/pde_solver.hpp"
#include "nblab/quadrature.hpp"
#include "nblab/report.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nblab {

/// First Dirichlet eigenpair of -u'' on (0, L): lambda1 = (pi/L)^2, phi = sin(pi x / L).
struct EigenPair {
  double length = 1.0;
  double lambda1 = 0.0;
  std::vector<double> phi;     // analytic, at the grid nodes
  double dphi_dnu_max = 0.0;   // max over the endpoints of dphi/dnu = -pi/L
  double grad_sq_max = 0.0;    // sup |phi'|^2 = (pi/L)^2
  double lambda1_fd = 0.0;     // inverse iteration on the 3-point Dirichlet Laplacian
};

EigenPair eigen_first_dirichlet(const Grid1D& grid);

enum class Family { SMALL_EXP, SUPERLINEAR, P1_EXP, P1_BOUNDED, L1_PG1, EXPRESSION };
std::string to_string(Family f);
/// Throws ConfigError on an unknown tag.
Family family_from_string(const std::string& s);

/// A candidate on the grid at one instant. `lap` is empty for candidates built from a discrete
/// auxiliary solution; the verifier then applies the ghost-node Laplacian with flux `dnu`.
struct CandidateSample {
  std::vector<double> u;
  std::vector<double> u_t;
  std::vector<double> lap;
  std::array<double, 2> dnu{};
};

/// A single parameter scaled by `factor`, expected to break the inequality named in `breaks`.
struct Perturbation {
  std::string param;
  double factor = 1.0;
  std::string breaks;  // "initial", "interior" or "boundary"
};

using Params = std::map<std::string, double>;
using CandidateEvaluator = std::function<CandidateSample(const Params&, double t)>;

/// A supersolution family instance. The evaluator reads `params` on every call, so changing a
/// parameter (an override or a perturbation) changes the function being verified.
struct SupersolutionCandidate {
  Family family = Family::EXPRESSION;
  Params params;
  Grid1D grid{1.0, 11};
  std::vector<double> times;          // verification instants on [0, T]
  std::vector<double> initial_cap;    // admissible data satisfy u0 <= cap at every node
  std::vector<Perturbation> tight;    // perturbations of active inequalities
  json aux;                           // how the auxiliary objects were built
  CandidateEvaluator evaluator;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  CandidateSample sample(double t) const { return evaluator(params, t); }
  SupersolutionCandidate perturbed(const Perturbation& p) const;
};

json to_json(const SupersolutionCandidate& c);

struct ConstructOptions {
  double horizon = 20.0;   // T: coefficient bounds and verification use [0, T]
  int n_times = 201;
  SolverConfig aux_solver;  // for the Neumann heat solves (t_end and output_times are set here)
  DoublingPolicy policy;
  // P1_EXP
  double eps = 0.5;
  std::optional<double> psi_shift;  // C; default L^2/8 + 1/eps + psi_margin
  double psi_margin = 0.0;
  // L1_PG1: k2 at x = 0 and x = L; default sup_{y, t} k(x_b, y, t)
  std::optional<std::array<double, 2>> k2;
};

/// d exp[bt - a phi(x)] for max(p, l) <= 1. a is found by fixed-point iteration of
/// a = M_k |Omega| d^{l-1} / max(-dphi/dnu) with d = e^a sup u0, then b from its inequality.
SupersolutionCandidate construct_small_exponent(const ProblemSpec& spec, const Grid1D& grid,
                                                const ConstructOptions& opt = {});

/// a f(t) v(x, t) for min(p, l) > 1 with v the Neumann heat flow driven by k1.
SupersolutionCandidate construct_superlinear(const ProblemSpec& spec, const Grid1D& grid,
                                             const ConstructOptions& opt = {});

/// b exp[\int c1 + eps t] psi(x) for p = 1 < l.
SupersolutionCandidate construct_p1_exp(const ProblemSpec& spec, const Grid1D& grid, const ConstructOptions& opt = {});

/// a exp[\int c1] v(x, t) for p = 1 < l with v driven by k1 exp[(l-1) \int c1].
SupersolutionCandidate construct_p1_bounded(const ProblemSpec& spec, const Grid1D& grid,
                                            const ConstructOptions& opt = {});

/// f(t) h(x) for l = 1 < p with h the normalized solution of h'' = a h, dh/dnu = k2 \int h.
SupersolutionCandidate construct_l1_pg1(const ProblemSpec& spec, const Grid1D& grid, const ConstructOptions& opt = {});

SupersolutionCandidate construct(Family f, const ProblemSpec& spec, const Grid1D& grid,
                                 const ConstructOptions& opt = {});

/// Closed-form candidate u(x, t) given as text; derivatives are symbolic.
SupersolutionCandidate candidate_from_expression(const std::string& text, const Grid1D& grid, double horizon,
                                                 int n_times = 201);

/// Raw residual minima plus the same minima divided by the local magnitude of the terms
/// (max(1, |u_t| + |lap u| + |c u^p|) and analogues). The verdict uses the scaled minima.
struct VerificationReport {
  double r_int = 0.0;
  double r_bnd = 0.0;
  double r_init = 0.0;
  double scaled_int = 0.0;
  double scaled_bnd = 0.0;
  double scaled_init = 0.0;
  double worst_int_x = 0.0;
  double worst_int_t = 0.0;
  double worst_bnd_t = 0.0;
  double tol = 1e-8;
  bool pass = false;
  CriterionReport report() const;
};

VerificationReport verify_supersolution(const SupersolutionCandidate& c, const ProblemSpec& spec,
                                        const std::vector<double>& u0, double tol = 1e-8);
/// Uses the spec's own initial datum.
VerificationReport verify_supersolution(const SupersolutionCandidate& c, const ProblemSpec& spec, double tol = 1e-8);

struct DominationReport {
  double max_excess = 0.0;  // max over snapshots and nodes of u - candidate
  double tol = 1e-4;
  bool pass = false;
  Verdict run_verdict;
};

/// Solves the problem from `u0` over the candidate's times and compares pointwise.
DominationReport check_domination(const SupersolutionCandidate& c, const ProblemSpec& spec,
                                  const std::vector<double>& u0, const SolverConfig& cfg, double tol = 1e-4);

}  // namespace nblab
