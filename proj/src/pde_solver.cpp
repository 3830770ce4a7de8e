#include "nblab/pde_solver.hpp"

#include "nblab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace nblab {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::BlowUpDetected: return "BlowUpDetected";
    case Termination::StepCollapse: return "StepCollapse";
  }
  return "?";
}

Grid1D::Grid1D(double length_, std::size_t n_) : n(n_), length(length_), h(0.0) {
  if (n < 11) throw ConfigError(fmt::format("grid needs at least 11 nodes, got {}", n));
  if (!(length > 0.0)) throw ConfigError("grid length must be positive");
  h = length / static_cast<double>(n - 1);
  x.resize(n);
  w.assign(n, h);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) * h;
  x[n - 1] = length;
  w[0] = w[n - 1] = 0.5 * h;
}

void SolverConfig::validate() const {
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
    throw ConfigError(fmt::format("need 0 < dt_min <= dt_init <= dt_max, got {} {} {}", dt_min, dt_init, dt_max));
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("safety must lie in (0, 1]");
  if (!(u_max > 0.0)) throw ConfigError("u_max must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("rtol and atol must be positive");
}

json to_json(const SolverConfig& c) {
  return json{{"t_end", c.t_end},     {"dt_init", c.dt_init}, {"dt_min", c.dt_min},
              {"dt_max", c.dt_max},   {"safety", c.safety},   {"u_max", c.u_max},
              {"rtol", c.rtol},       {"atol", c.atol},       {"output_times", c.output_times},
              {"interior_margin", c.interior_margin},         {"waive_compatibility", c.waive_compatibility}};
}

SolverConfig solver_config_from_json(const json& j, SolverConfig c) {
  if (!j.is_object()) throw ConfigError("solver block must be an object");
  auto num = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(fmt::format("solver.{} must be a number", key));
    dst = j[key].get<double>();
  };
  num("t_end", c.t_end);
  num("dt_init", c.dt_init);
  num("dt_min", c.dt_min);
  num("dt_max", c.dt_max);
  num("safety", c.safety);
  num("u_max", c.u_max);
  num("rtol", c.rtol);
  num("atol", c.atol);
  num("interior_margin", c.interior_margin);
  if (j.contains("output_times")) {
    try {
      c.output_times = j["output_times"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError("solver.output_times must be an array of numbers");
    }
  }
  if (j.contains("waive_compatibility")) {
    if (!j["waive_compatibility"].is_boolean()) throw ConfigError("solver.waive_compatibility must be a boolean");
    c.waive_compatibility = j["waive_compatibility"].get<bool>();
  }
  return c;
}

namespace {

inline double power(double u, double e) {
  if (e == 1.0) return u;
  if (e == 2.0) return u * u;
  if (e == 3.0) return u * u * u;
  if (e == 0.5) return std::sqrt(u);
  return std::pow(u, e);
}

}  // namespace

// ---------------------------------------------------------------- models

NonlocalModel::NonlocalModel(const ProblemSpec& spec, const Grid1D& grid)
    : spec_(spec), grid_(grid), p_(spec.p()), l_(spec.l()), ul_(grid.size()) {
  using expr::Var;
  if (std::abs(grid.length - spec.length()) > 1e-12 * spec.length())
    throw ConfigError(fmt::format("grid length {} differs from domain length {}", grid.length, spec.length()));
  c_zero_ = spec.c.is_constant() && spec.c.eval({}) == 0.0;
  c_static_ = !spec.c.depends_on(Var::T);
  if (c_static_) {
    c_nodes_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) c_nodes_[i] = spec.c.eval({grid.x[i], 0.0, 0.0});
  }
  k_zero_ = spec.k.is_constant() && spec.k.eval({}) == 0.0;
  k_static_ = !spec.k.depends_on(Var::T);
  k_uses_y_ = spec.k.depends_on(Var::Y);
  k_uses_xb_ = spec.k.depends_on(Var::X);
  if (k_static_) {
    for (int b = 0; b < 2; ++b) {
      const double xb = b == 0 ? 0.0 : grid.length;
      k_weights_[b].resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) k_weights_[b][j] = grid.w[j] * spec.k.eval({xb, grid.x[j], 0.0});
    }
  }
}

void NonlocalModel::reaction(double t, std::span<const double> u, std::span<double> out) {
  const std::size_t n = u.size();
  if (c_zero_) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (c_static_) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c_nodes_[i] * power(u[i], p_);
    return;
  }
  if (!spec_.c.depends_on(expr::Var::X)) {
    const double c = spec_.c.eval({0.0, 0.0, t});
    for (std::size_t i = 0; i < n; ++i) out[i] = c * power(u[i], p_);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = spec_.c.eval({grid_.x[i], 0.0, t}) * power(u[i], p_);
}

std::array<double, 2> NonlocalModel::flux(double t, std::span<const double> u) {
  if (k_zero_) return {0.0, 0.0};
  const std::size_t n = u.size();
  for (std::size_t j = 0; j < n; ++j) ul_[j] = power(u[j], l_);
  std::array<double, 2> out{};
  if (k_static_) {
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += k_weights_[b][j] * ul_[j];
      out[b] = s;
    }
    return out;
  }
  if (!k_uses_y_) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += grid_.w[j] * ul_[j];
    const double k_left = spec_.k.eval({0.0, 0.0, t});
    const double k_right = k_uses_xb_ ? spec_.k.eval({grid_.length, 0.0, t}) : k_left;
    return {k_left * s, k_right * s};
  }
  for (int b = 0; b < 2; ++b) {
    const double xb = b == 0 ? 0.0 : grid_.length;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += grid_.w[j] * spec_.k.eval({xb, grid_.x[j], t}) * ul_[j];
    out[b] = s;
  }
  return out;
}

void PrescribedFluxModel::reaction(double, std::span<const double>, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
}

// ---------------------------------------------------------------- discretization

bool semidiscrete_rhs(ParabolicModel& model, const Grid1D& grid, double t, std::span<const double> u,
                      std::span<double> du) {
  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  model.reaction(t, u, du);
  const auto [flux_left, flux_right] = model.flux(t, u);
  // Ghost values u_{-1} = u_1 + 2h I_0 and u_N = u_{N-2} + 2h I_L.
  du[0] += (2.0 * u[1] - 2.0 * u[0] + 2.0 * grid.h * flux_left) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i) du[i] += (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
  du[n - 1] += (2.0 * u[n - 2] - 2.0 * u[n - 1] + 2.0 * grid.h * flux_right) * inv_h2;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(du[i])) return false;
  return true;
}

std::vector<double> semidiscrete_rhs(const ProblemSpec& spec, const Grid1D& grid, const State& state) {
  if (state.u.size() != grid.size()) throw ConfigError("state size does not match grid");
  NonlocalModel model(spec, grid);
  std::vector<double> du(grid.size());
  if (!semidiscrete_rhs(model, grid, state.t, state.u, du)) throw EvalError("right-hand side overflowed");
  return du;
}

std::vector<double> sample_initial(const ProblemSpec& spec, const Grid1D& grid) {
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    u[i] = spec.u0.eval({grid.x[i], 0.0, 0.0});
    if (u[i] < 0.0) throw InvalidSpec(fmt::format("u0({}) = {} is negative", grid.x[i], u[i]));
  }
  return u;
}

double mass(const Grid1D& grid, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.w[i] * u[i];
  return s;
}

double sup_norm(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

double j_increment(const Grid1D& grid, std::span<const double> u, double dt, double l) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.w[i] * power(std::max(u[i], 0.0), l);
  return dt * s;
}

// ---------------------------------------------------------------- time stepping

Trajectory integrate(ParabolicModel& model, const Grid1D& grid, std::vector<double> u0, const SolverConfig& cfg) {
  cfg.validate();
  if (u0.size() != grid.size()) throw ConfigError("initial vector size does not match grid");

  StepperOptions opt;
  opt.t_end = cfg.t_end;
  opt.dt_max = std::min(cfg.dt_max, cfg.safety * grid.h * grid.h / 2.0);
  opt.dt_init = std::min(cfg.dt_init, opt.dt_max);
  opt.dt_min = std::min(cfg.dt_min, opt.dt_init);
  opt.rtol = cfg.rtol;
  opt.atol = cfg.atol;
  opt.u_max = cfg.u_max;
  opt.output_times = cfg.output_times;
  std::sort(opt.output_times.begin(), opt.output_times.end());
  opt.output_times.erase(std::unique(opt.output_times.begin(), opt.output_times.end()), opt.output_times.end());

  Trajectory tr;
  tr.l = model.j_exponent();
  const double margin = cfg.interior_margin < 0.0 ? grid.length / 4.0 : cfg.interior_margin;
  tr.interior_margin = margin;
  std::size_t lo = grid.size(), hi = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.x[i] >= margin - 1e-12 * grid.length && grid.x[i] <= grid.length - margin + 1e-12 * grid.length) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }

  double J = 0.0;
  double prev_rate = 0.0;  // \int u^l at the previous accepted state
  auto on_accept = [&](double t, std::span<const double> u, std::span<const double> du, double dt) {
    const double rate = j_increment(grid, u, 1.0, tr.l);
    if (dt > 0.0) J += 0.5 * dt * (prev_rate + rate);
    prev_rate = rate;
    DiagnosticRecord r;
    r.t = t;
    r.mass = mass(grid, u);
    r.sup = sup_norm(u);
    r.J = J;
    r.dt = dt;
    r.mass_rate = mass(grid, du);
    r.boundary_max = std::max(u.front(), u.back());
    for (std::size_t i = lo; i <= hi && lo < grid.size(); ++i) r.interior_max = std::max(r.interior_max, u[i]);
    tr.diagnostics.push_back(r);
  };
  auto on_output = [&](double t, std::span<const double> u) { tr.snapshots.push_back({t, {u.begin(), u.end()}}); };
  auto rhs = [&](double t, std::span<const double> u, std::span<double> du) {
    return semidiscrete_rhs(model, grid, t, u, du);
  };

  std::vector<double> u = std::move(u0);
  const StepperStats st = run_bs23(u, 0.0, opt, rhs, on_accept, on_output);
  tr.verdict = st.verdict;
  tr.accepted_steps = st.accepted;
  tr.rejected_steps = st.rejected;
  tr.clamp_events = st.clamp_events;
  tr.worst_undershoot = st.worst_undershoot;
  tr.final_state = {st.verdict.t_stop, std::move(u)};
  return tr;
}

Trajectory solve(const ProblemSpec& spec, const Grid1D& grid, const SolverConfig& cfg) {
  cfg.validate();
  validate(spec, std::max(cfg.t_end, 1.0));
  if (!cfg.waive_compatibility) {
    const CompatibilityResult compat = check_compatibility(spec);
    if (!compat.report.pass)
      throw InvalidSpec(fmt::format("initial datum violates the boundary condition (residuals {:.3g}, {:.3g}); "
                                    "waive the check to run anyway",
                                    compat.residuals[0], compat.residuals[1]));
  }
  NonlocalModel model(spec, grid);
  return integrate(model, grid, sample_initial(spec, grid), cfg);
}

}  // namespace nblab
