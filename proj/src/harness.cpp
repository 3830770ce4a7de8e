#include "nblab/harness.hpp"

#include "nblab/auxiliary_linear.hpp"
#include "nblab/blowup_analysis.hpp"
#include "nblab/error.hpp"
#include "nblab/io.hpp"
#include "nblab/ode_comparison.hpp"
#include "nblab/supersolutions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace nblab::harness {

json to_json(const RunManifest& m) {
  return json{{"config_hash", m.config_hash}, {"tool_version", m.tool_version}, {"subcommand", m.subcommand},
              {"config", m.config},           {"resolved", m.resolved},          {"outputs", m.outputs}};
}

json parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("tool_version") && j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

json load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"solve",    "criteria", "sweep",       "verify-super",
                                              "boundedness-check", "localize", "ode-compare", "counterexample"};
  return names;
}

namespace {

// ---------------------------------------------------------------- config access

const json& block(const json& config, const char* key) {
  static const json empty = json::object();
  if (!config.contains(key)) return empty;
  if (!config[key].is_object()) throw ConfigError(fmt::format("'{}' must be an object", key));
  return config[key];
}

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(fmt::format("'{}' must be a number", key));
  return j[key].get<double>();
}

bool flag(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(fmt::format("'{}' must be a boolean", key));
  return j[key].get<bool>();
}

std::string text(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(fmt::format("'{}' must be a string", key));
  return j[key].get<std::string>();
}

const json& problem_json(const json& config) { return config.contains("problem") ? block(config, "problem") : config; }

ProblemSpec problem(const json& config) { return problem_from_json(problem_json(config)); }

Grid1D grid_for(const json& config, const ProblemSpec& spec, std::size_t fallback = 101) {
  const double n = number(block(config, "grid"), "N", static_cast<double>(fallback));
  if (!(n >= 3.0) || n != std::floor(n)) throw ConfigError("grid.N must be an integer >= 3");
  return Grid1D(spec.length(), static_cast<std::size_t>(n));
}

SolverConfig solver_for(const json& config, const RunOptions& opt) {
  SolverConfig cfg = config.contains("solver") ? solver_config_from_json(config["solver"]) : SolverConfig{};
  if (opt.waive_compatibility) cfg.waive_compatibility = true;
  cfg.validate();
  return cfg;
}

TimeFunction time_expression(const std::string& src) {
  const expr::Expr e = expr::parse(src, expr::VarSet{expr::Var::T});
  return TimeFunction([e](double t) { return e.eval({0.0, 0.0, t}); });
}

// ---------------------------------------------------------------- artifacts

struct Artifacts {
  const RunOptions& opt;
  std::vector<std::string> names;

  void put(const std::string& name, const std::string& body) {
    if (opt.write_files) io::write_file(opt.out_dir / name, body);
    names.push_back(name);
  }
};

CommandResult finish(const std::string& sub, const json& config, json resolved, json report, Artifacts& art,
                     int code = kExitOk) {
  CommandResult r;
  r.exit_code = code;
  r.report = std::move(report);
  r.manifest.subcommand = sub;
  r.manifest.config = config;
  r.manifest.config_hash = io::hex64(io::fnv1a(config.dump()));
  r.manifest.resolved = std::move(resolved);
  art.names.push_back("manifest.json");
  r.manifest.outputs = art.names;
  if (art.opt.write_files) io::write_file(art.opt.out_dir / "manifest.json", io::json_text(to_json(r.manifest)));
  return r;
}

json base_resolved(const ProblemSpec& spec, const Grid1D& grid, const SolverConfig& cfg) {
  return json{{"problem", nblab::to_json(spec)}, {"grid", {{"N", grid.size()}}}, {"solver", nblab::to_json(cfg)}};
}

json verdict_json(const Trajectory& tr) {
  json j{{"verdict", to_string(tr.verdict.kind)},
         {"t_stop", tr.verdict.t_stop},
         {"reason", tr.verdict.reason},
         {"accepted_steps", tr.accepted_steps},
         {"rejected_steps", tr.rejected_steps},
         {"clamp_events", tr.clamp_events},
         {"worst_undershoot", tr.worst_undershoot}};
  if (!tr.diagnostics.empty()) {
    const auto& d = tr.diagnostics.back();
    j["final"] = {{"t", d.t}, {"w", d.mass}, {"sup_norm", d.sup}, {"J", d.J}};
  }
  return j;
}

std::vector<double> column(const Trajectory& tr, double DiagnosticRecord::*field) {
  std::vector<double> out;
  out.reserve(tr.diagnostics.size());
  for (const auto& d : tr.diagnostics) out.push_back(d.*field);
  return out;
}

// ---------------------------------------------------------------- criteria

double initial_mass(const ProblemSpec& spec, const Grid1D& grid) {
  return mass(grid, sample_initial(spec, grid));
}

std::vector<RemarkCase> remark_cases(double p, double l) {
  std::vector<RemarkCase> out;
  if (p > 1.0) out.push_back(RemarkCase::C0_P);
  if (l > 1.0) out.push_back(RemarkCase::K0_L);
  if (p == 1.0 && l > 1.0) out.push_back(RemarkCase::P1_LG1);
  if (l == 1.0 && p > 1.0) out.push_back(RemarkCase::L1_PG1);
  if (p > 1.0 && l > 1.0) out.push_back(RemarkCase::BOTH);
  return out;
}

std::vector<Family> small_data_families(Regime r) {
  switch (r) {
    case Regime::SuperlinearBoth: return {Family::SUPERLINEAR};
    case Regime::P1Lg1: return {Family::P1_BOUNDED, Family::P1_EXP};
    case Regime::L1Pg1: return {Family::L1_PG1};
    default: return {};
  }
}

}  // namespace

json criteria_report(const ProblemSpec& spec, const Grid1D& grid, const json& options) {
  const double p = spec.p(), l = spec.l();
  const Regime regime = classify_exponent_regime(spec.exponents);
  const double w0 = initial_mass(spec, grid);
  json out{{"regime", to_string(regime)}, {"w0", w0}, {"thresholds", json::array()}, {"constructions", json::array()}};

  if (regime == Regime::SublinearAllGlobal) {
    out["verdict"] = "AllGlobal";
    out["detail"] = "max(p, l) <= 1: every initial datum gives a global solution";
    out["w_star"] = "inf";
    out["w0_above_threshold"] = false;
    return out;
  }

  const ReducedCoefficients red(spec);
  const TimeFunction c0 = red.c0_fn(), k0 = red.k0_fn();
  double w_star = std::numeric_limits<double>::infinity();
  bool all_nontrivial = false;
  for (RemarkCase rc : remark_cases(p, l)) {
    const ThresholdReport t = blowup_threshold(rc, p, l, c0, k0, w0);
    out["thresholds"].push_back(to_json(t));
    w_star = std::min(w_star, t.threshold);
    if (t.threshold == 0.0) all_nontrivial = true;
  }
  const double horizon = number(options, "nontrivial_horizon", 1073741824.0);
  const CriterionReport nt = nontrivial_blowup_criterion(p, l, c0, k0, red.cbar_fn(), red.kbar_fn(), horizon);
  out["nontrivial"] = nt;
  if (nt.pass) all_nontrivial = true;

  bool small_data = false;
  if (flag(options, "constructions", true)) {
    ConstructOptions co;
    co.horizon = number(options, "horizon", 20.0);
    co.n_times = static_cast<int>(number(options, "n_times", 201));
    const std::vector<double> u0 = sample_initial(spec, grid);
    for (Family f : small_data_families(regime)) {
      json entry{{"family", to_string(f)}};
      try {
        const SupersolutionCandidate c = construct(f, spec, grid, co);
        const VerificationReport v = verify_supersolution(c, spec, u0);
        entry["applies"] = true;
        entry["params"] = c.params;
        entry["verification"] = v.report();
        entry["data_below_cap"] = v.scaled_init >= -v.tol;
        if (v.pass) small_data = true;
      } catch (const HypothesisError& e) {
        entry["applies"] = false;
        entry["reason"] = e.what();
      }
      out["constructions"].push_back(entry);
      if (small_data) break;
    }
  }

  if (w0 > 0.0 && all_nontrivial) {
    out["verdict"] = "BlowsUpForAllNontrivial";
  } else if (w0 > w_star) {
    out["verdict"] = "BlowsUpAboveThreshold";
  } else if (small_data) {
    out["verdict"] = "SmallDataGlobal";
  } else {
    out["verdict"] = "NoVerdict";
  }
  if (std::isfinite(w_star)) {
    out["w_star"] = w_star;
    out["w0_above_threshold"] = w0 > w_star;
  } else {
    out["w_star"] = "inf";
    out["w0_above_threshold"] = false;
  }
  return out;
}

namespace {

bool predicts_blowup(const std::string& v) { return v == "BlowsUpForAllNontrivial" || v == "BlowsUpAboveThreshold"; }
bool predicts_global(const std::string& v) { return v == "AllGlobal" || v == "SmallDataGlobal"; }

// ---------------------------------------------------------------- sweep

struct Axis {
  std::string name;
  std::vector<double> values;
};

Axis read_axis(const json& j, const char* which) {
  if (!j.contains(which) || !j[which].is_object()) throw ConfigError(fmt::format("sweep.{} must be an object", which));
  const json& a = j[which];
  Axis axis{text(a, "axis", ""), {}};
  static const std::vector<std::string> known{"p", "l", "u0_scale", "decay_rate"};
  if (std::find(known.begin(), known.end(), axis.name) == known.end())
    throw ConfigError(fmt::format("sweep.{}.axis must be one of p, l, u0_scale, decay_rate", which));
  if (a.contains("values")) {
    if (!a["values"].is_array()) throw ConfigError("axis values must be an array");
    for (const auto& v : a["values"]) {
      if (!v.is_number()) throw ConfigError("axis values must be numbers");
      axis.values.push_back(v.get<double>());
    }
  } else {
    const double lo = number(a, "min", 0.0), hi = number(a, "max", 0.0);
    const double n = number(a, "n", 0.0);
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("axis n must be a positive integer");
    for (int i = 0; i < static_cast<int>(n); ++i) axis.values.push_back(n == 1.0 ? lo : lo + (hi - lo) * i / (n - 1.0));
  }
  if (axis.values.empty() || axis.values.size() > 64) throw ConfigError("each sweep axis needs 1 to 64 values");
  return axis;
}

json apply_axis(json problem, const Axis& axis, double v, const std::vector<std::string>& decay_targets) {
  if (axis.name == "p" || axis.name == "l") {
    problem[axis.name] = v;
  } else if (axis.name == "u0_scale") {
    problem["u0"] = fmt::format("{}*({})", io::format_number(v), problem.value("u0", std::string("0")));
  } else {
    for (const auto& key : decay_targets)
      problem[key] = fmt::format("({})*exp(-{}*t)", problem.value(key, std::string("0")), io::format_number(v));
  }
  return problem;
}

struct CellResult {
  json problem;
  json criteria;
  Trajectory trajectory;
  std::optional<BlowupEstimate> estimate;
  std::string error;
};

}  // namespace

// ---------------------------------------------------------------- commands

CommandResult cmd_solve(const json& config, const RunOptions& opt) {
  const ProblemSpec spec = problem(config);
  const Grid1D grid = grid_for(config, spec);
  const SolverConfig cfg = solver_for(config, opt);
  const Trajectory tr = solve(spec, grid, cfg);

  json report = verdict_json(tr);
  if (tr.verdict.kind != Termination::ReachedTEnd) {
    try {
      report["estimate"] = to_json(estimate_blowup_time(tr, {spec.p(), spec.l()}));
      report["T_est"] = report["estimate"]["T_est"];
    } catch (const InsufficientData& e) {
      report["estimate"] = nullptr;
      report["estimate_note"] = e.what();
    }
  }
  Artifacts art{opt, {}};
  art.put("trajectory.csv", io::trajectory_csv(tr));
  art.put("verdict.json", io::json_text(report));
  const std::vector<double> t = column(tr, &DiagnosticRecord::t);
  io::PlotOptions po;
  po.title = fmt::format("diagnostics ({})", to_string(tr.verdict.kind));
  po.y_label = "value";
  po.log_y = true;
  po.reproducible = opt.reproducible;
  art.put("diagnostics.svg", io::svg_plot({{"sup_norm", t, column(tr, &DiagnosticRecord::sup)},
                                           {"w", t, column(tr, &DiagnosticRecord::mass)},
                                           {"J", t, column(tr, &DiagnosticRecord::J)}},
                                          po));
  return finish("solve", config, base_resolved(spec, grid, cfg), report, art);
}

CommandResult cmd_criteria(const json& config, const RunOptions& opt) {
  const ProblemSpec spec = problem(config);
  const Grid1D grid = grid_for(config, spec);
  const json options = block(config, "criteria");
  const json report = criteria_report(spec, grid, options);
  Artifacts art{opt, {}};
  art.put("criteria.json", io::json_text(report));
  json resolved{{"problem", nblab::to_json(spec)}, {"grid", {{"N", grid.size()}}}, {"criteria", options}};
  return finish("criteria", config, resolved, report, art);
}

CommandResult cmd_sweep(const json& config, const RunOptions& opt) {
  const json& sw = block(config, "sweep");
  const Axis ax = read_axis(sw, "x"), ay = read_axis(sw, "y");
  if (ax.name == ay.name) throw ConfigError("sweep axes must differ");
  std::vector<std::string> decay_targets{"c"};
  if (sw.contains("decay_targets")) {
    if (!sw["decay_targets"].is_array()) throw ConfigError("sweep.decay_targets must be an array");
    decay_targets.clear();
    for (const auto& v : sw["decay_targets"]) {
      if (!v.is_string() || (v != "c" && v != "k")) throw ConfigError("decay targets are \"c\" and \"k\"");
      decay_targets.push_back(v.get<std::string>());
    }
  }
  const json base = problem_json(config);
  const SolverConfig cfg = solver_for(config, opt);
  const json criteria_opts = block(config, "criteria");
  const double n_grid = number(block(config, "grid"), "N", 51);

  // Specs are parsed up front so that configuration errors surface before any work starts.
  const std::size_t nx = ax.values.size(), ny = ay.values.size();
  std::vector<CellResult> cells(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      json pj = apply_axis(apply_axis(base, ax, ax.values[i], decay_targets), ay, ay.values[j], decay_targets);
      problem_from_json(pj);
      cells[j * nx + i].problem = std::move(pj);
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < cells.size(); idx = next++) {
      CellResult& cell = cells[idx];
      try {
        const ProblemSpec spec = problem_from_json(cell.problem);
        const Grid1D grid(spec.length(), static_cast<std::size_t>(n_grid));
        cell.criteria = criteria_report(spec, grid, criteria_opts);
        cell.trajectory = solve(spec, grid, cfg);
        if (cell.trajectory.verdict.kind != Termination::ReachedTEnd) {
          try {
            cell.estimate = estimate_blowup_time(cell.trajectory, {spec.p(), spec.l()});
          } catch (const InsufficientData&) {
          }
        }
        cell.trajectory.snapshots.clear();
        cell.trajectory.diagnostics.clear();
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::string csv = fmt::format("i,j,{},{},w0,criteria_verdict,w_star,simulated_verdict,t_stop,T_est,agree\n",
                                ax.name, ay.name);
  std::size_t agree = 0, disagree = 0, global_runs = 0, errors = 0;
  json rows = json::array();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const CellResult& c = cells[j * nx + i];
      if (!c.error.empty()) {
        ++errors;
        csv += fmt::format("{},{},{},{},,Error,,Error,,,\n", i, j, io::format_number(ax.values[i]),
                           io::format_number(ay.values[j]));
        rows.push_back({{"i", i}, {"j", j}, {"error", c.error}});
        continue;
      }
      const std::string cv = c.criteria["verdict"].get<std::string>();
      const bool sim_blowup = c.trajectory.verdict.kind != Termination::ReachedTEnd;
      if (!sim_blowup) ++global_runs;
      // One-sided: a criterion is sufficient, so only a contradicted prediction counts against it.
      const bool ok = !(predicts_blowup(cv) && !sim_blowup) && !(predicts_global(cv) && sim_blowup);
      ok ? ++agree : ++disagree;
      const json& ws = c.criteria["w_star"];
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", i, j, io::format_number(ax.values[i]),
                         io::format_number(ay.values[j]), io::format_number(c.criteria["w0"].get<double>()), cv,
                         ws.is_number() ? io::format_number(ws.get<double>()) : ws.get<std::string>(),
                         sim_blowup ? "BlowUp" : "Global", io::format_number(c.trajectory.verdict.t_stop),
                         c.estimate ? io::format_number(c.estimate->T_est) : "", ok ? 1 : 0);
      rows.push_back({{"i", i},
                      {"j", j},
                      {ax.name, ax.values[i]},
                      {ay.name, ay.values[j]},
                      {"criteria", c.criteria},
                      {"simulated", verdict_json(c.trajectory)},
                      {"T_est", c.estimate ? json(c.estimate->T_est) : json(nullptr)},
                      {"agree", ok}});
    }
  json report{{"x_axis", ax.name},
              {"y_axis", ay.name},
              {"cells", cells.size()},
              {"agree", agree},
              {"disagree", disagree},
              {"global_runs", global_runs},
              {"errors", errors},
              {"rows", rows}};
  Artifacts art{opt, {}};
  art.put("sweep.csv", csv);
  art.put("sweep.json", io::json_text(report));
  json resolved{{"problem", base},
                {"x", {{"axis", ax.name}, {"values", ax.values}}},
                {"y", {{"axis", ay.name}, {"values", ay.values}}},
                {"decay_targets", decay_targets},
                {"grid", {{"N", n_grid}}},
                {"solver", nblab::to_json(cfg)},
                {"criteria", criteria_opts}};
  return finish("sweep", config, resolved, report, art, errors ? kExitNumeric : kExitOk);
}

CommandResult cmd_verify_super(const json& config, const RunOptions& opt) {
  const ProblemSpec spec = problem(config);
  const Grid1D grid = grid_for(config, spec);
  const json& s = block(config, "supersolution");
  const Family fam = family_from_string(text(s, "family", "SMALL_EXP"));
  ConstructOptions co;
  co.horizon = number(s, "horizon", 20.0);
  co.n_times = static_cast<int>(number(s, "n_times", 201));
  co.eps = number(s, "eps", co.eps);
  co.psi_margin = number(s, "psi_margin", 0.0);
  if (s.contains("psi_shift")) co.psi_shift = number(s, "psi_shift", 0.0);
  if (s.contains("k2")) {
    if (!s["k2"].is_array() || s["k2"].size() != 2) throw ConfigError("k2 must be [left, right]");
    co.k2 = std::array<double, 2>{s["k2"][0].get<double>(), s["k2"][1].get<double>()};
  }
  SupersolutionCandidate cand = fam == Family::EXPRESSION
                                    ? candidate_from_expression(text(s, "expression", ""), grid, co.horizon, co.n_times)
                                    : construct(fam, spec, grid, co);
  if (s.contains("params")) {
    if (!s["params"].is_object()) throw ConfigError("supersolution.params must be an object");
    for (const auto& [key, value] : s["params"].items()) {
      if (!cand.params.contains(key)) throw ConfigError(fmt::format("{} has no parameter '{}'", to_string(fam), key));
      if (!value.is_number()) throw ConfigError(fmt::format("parameter '{}' must be a number", key));
      cand.params[key] = value.get<double>();
    }
  }
  const double tol = number(s, "tol", 1e-8);
  const VerificationReport v = verify_supersolution(cand, spec, sample_initial(spec, grid), tol);
  json report{{"candidate", nblab::to_json(cand)}, {"verification", v.report()}};
  bool pass = v.pass;
  if (flag(s, "domination", false)) {
    const SolverConfig cfg = solver_for(config, opt);
    const DominationReport d = check_domination(cand, spec, sample_initial(spec, grid), cfg);
    report["domination"] = {{"max_excess", d.max_excess}, {"tol", d.tol}, {"pass", d.pass},
                            {"run_verdict", to_string(d.run_verdict.kind)}};
    pass = pass && d.pass;
  }
  report["pass"] = pass;
  Artifacts art{opt, {}};
  art.put("verify.json", io::json_text(report));
  json resolved{{"problem", nblab::to_json(spec)},
                {"grid", {{"N", grid.size()}}},
                {"family", to_string(fam)},
                {"params", cand.params},
                {"horizon", co.horizon},
                {"n_times", co.n_times},
                {"tol", tol}};
  return finish("verify-super", config, resolved, report, art, pass ? kExitOk : kExitCheckFailed);
}

CommandResult cmd_boundedness_check(const json& config, const RunOptions& opt) {
  const json& b = block(config, "boundedness");
  BoundednessOptions bo;
  bo.t0 = number(b, "t0", bo.t0);
  bo.alpha = number(b, "alpha", bo.alpha);
  bo.horizon = number(b, "horizon", bo.horizon);
  std::string g_label;
  TimeFunction g;
  if (b.contains("counterexample_alpha")) {
    const double a = number(b, "counterexample_alpha", 0.75);
    g = counterexample_g(a);
    g_label = fmt::format("counterexample(alpha={})", io::format_number(a));
  } else {
    g_label = text(b, "g", "");
    if (g_label.empty()) throw ConfigError("boundedness.g (an expression in t) or counterexample_alpha is required");
    g = time_expression(g_label);
  }
  const BoundednessCriteria crit = check_boundedness_criteria(g, bo);
  json report{{"g", g_label}, {"criteria", crit.report()}, {"verdict", crit.verdict()}};
  Artifacts art{opt, {}};
  art.put("window.csv", io::csv({"t", "window"}, {crit.sample_t, crit.sample_window}));
  if (b.contains("holder_q")) {
    const HolderCheck h = check_holder_sufficient(g, number(b, "holder_q", 3.0), bo);
    report["holder"] = h.report;
  }
  const json& sim = block(b, "simulate");
  if (!sim.empty()) {
    const double t_end = number(sim, "t_end", 50.0), t_mid = number(sim, "t_mid", 0.5 * t_end);
    const double length = number(sim, "L", 1.0);
    const Grid1D grid(length, static_cast<std::size_t>(number(sim, "N", 51)));
    SolverConfig cfg;
    cfg.t_end = t_end;
    cfg.output_times = {t_mid, t_end};
    const Trajectory tr = solve_neumann_heat(NeumannHeatProblem{length, g, {}}, grid, cfg);
    json s{{"verdict", to_string(tr.verdict.kind)}, {"t_mid", t_mid}, {"t_end", t_end}};
    if (tr.snapshots.size() >= 2) {
      const double a = sup_norm(tr.snapshots[tr.snapshots.size() - 2].u), z = sup_norm(tr.snapshots.back().u);
      s["sup_mid"] = a;
      s["sup_end"] = z;
      s["relative_growth"] = (z - a) / a;
    }
    report["simulation"] = s;
    art.put("heat.csv", io::csv({"t", "sup_norm"}, {column(tr, &DiagnosticRecord::t), column(tr, &DiagnosticRecord::sup)}));
  }
  art.put("boundedness.json", io::json_text(report));
  return finish("boundedness-check", config, json{{"g", g_label}, {"t0", bo.t0}, {"alpha", bo.alpha}, {"horizon", bo.horizon}},
                report, art);
}

CommandResult cmd_localize(const json& config, const RunOptions& opt) {
  const ProblemSpec spec = problem(config);
  const Grid1D grid = grid_for(config, spec);
  const SolverConfig cfg = solver_for(config, opt);
  const json& lj = block(config, "localize");
  LocalizationConfig lc{number(lj, "eps_dist", -1.0), spec.l()};
  const LocalizationReport r = interior_localization(spec, grid, cfg, lc);
  json report{{"localization", r.report}, {"estimate", to_json(r.estimate)},
              {"verdict", to_string(r.trajectory.verdict.kind)}};
  const Trajectory& tr = r.trajectory;
  const std::vector<double> t = column(tr, &DiagnosticRecord::t);
  Artifacts art{opt, {}};
  art.put("localization.csv", io::csv({"t", "boundary_max", "interior_max"},
                                      {t, column(tr, &DiagnosticRecord::boundary_max),
                                       column(tr, &DiagnosticRecord::interior_max)}));
  io::PlotOptions po;
  po.title = "boundary and interior maxima";
  po.y_label = "max u";
  po.log_y = true;
  po.reproducible = opt.reproducible;
  art.put("localization.svg", io::svg_plot({{"boundary max", t, column(tr, &DiagnosticRecord::boundary_max)},
                                            {"interior max", t, column(tr, &DiagnosticRecord::interior_max)}},
                                           po));
  art.put("localization.json", io::json_text(report));
  json resolved = base_resolved(spec, grid, cfg);
  resolved["eps_dist"] = r.report.quantities["interior_margin"];
  return finish("localize", config, resolved, report, art);
}

CommandResult cmd_ode_compare(const json& config, const RunOptions& opt) {
  const ProblemSpec spec = problem(config);
  const Grid1D grid = grid_for(config, spec);
  const SolverConfig cfg = solver_for(config, opt);
  const json& oj = block(config, "ode");
  const double p = spec.p(), l = spec.l();
  std::string kind = text(oj, "kind", "");
  if (kind.empty()) kind = p >= 1.0 && l >= 1.0 ? "SUM" : p > 1.0 ? "C0_P" : "K0_L";
  ComparisonODE ode;
  if (kind == "SUM") ode.kind = OdeKind::SUM;
  else if (kind == "C0_P") ode.kind = OdeKind::C0_P;
  else if (kind == "K0_L") ode.kind = OdeKind::K0_L;
  else throw ConfigError("ode.kind must be SUM, C0_P or K0_L");
  const ReducedCoefficients red(spec);
  ode.p = p;
  ode.l = l;
  ode.c0 = red.c0_fn();
  ode.k0 = red.k0_fn();
  ode.w0 = number(oj, "w0", initial_mass(spec, grid));
  const OdeSolution sol = solve_comparison_ode(ode, cfg.t_end);
  const Trajectory tr = solve(spec, grid, cfg);

  // PDE mass interpolated at the ODE times; the mass must stay above the comparison solution.
  const std::vector<double> pt = column(tr, &DiagnosticRecord::t), pw = column(tr, &DiagnosticRecord::mass);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const double t = sol.t[i];
    if (pt.empty() || t > pt.back()) break;
    const auto it = std::lower_bound(pt.begin(), pt.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - pt.begin());
    double w = pw[k];
    if (k > 0 && pt[k] != t) w = pw[k - 1] + (pw[k] - pw[k - 1]) * (t - pt[k - 1]) / (pt[k] - pt[k - 1]);
    worst = std::min(worst, (w - sol.w[i]) / std::max(1.0, sol.w[i]));
  }
  json report{{"kind", kind},
              {"w0", ode.w0},
              {"ode_verdict", to_string(sol.verdict.kind)},
              {"ode_blowup_time", sol.blowup_time ? json(*sol.blowup_time) : json(nullptr)},
              {"pde", verdict_json(tr)},
              {"min_relative_gap", std::isfinite(worst) ? json(worst) : json(nullptr)},
              {"mass_dominates", !(worst < -1e-6)}};
  if (tr.verdict.kind != Termination::ReachedTEnd) {
    try {
      report["pde_T_est"] = estimate_blowup_time(tr, {p, l}).T_est;
    } catch (const InsufficientData&) {
      report["pde_T_est"] = nullptr;
    }
  }
  Artifacts art{opt, {}};
  art.put("ode.csv", io::csv({"t", "w"}, {sol.t, sol.w}));
  art.put("ode_compare.json", io::json_text(report));
  json resolved = base_resolved(spec, grid, cfg);
  resolved["ode"] = {{"kind", kind}, {"w0", ode.w0}};
  return finish("ode-compare", config, resolved, report, art);
}

CommandResult cmd_counterexample(const json& config, const RunOptions& opt) {
  const json& cj = block(config, "counterexample");
  const double a = number(cj, "alpha", 0.75);
  std::vector<int> ns{4, 8, 16, 32};
  if (cj.contains("n")) {
    if (!cj["n"].is_array()) throw ConfigError("counterexample.n must be an array of integers");
    ns.clear();
    for (const auto& v : cj["n"]) {
      if (!v.is_number_integer() || v.get<int>() < 2) throw ConfigError("counterexample.n entries must be integers >= 2");
      ns.push_back(v.get<int>());
    }
  }
  BoundednessOptions bo;
  bo.horizon = number(cj, "horizon", bo.horizon);
  const BoundednessCriteria crit = check_boundedness_criteria(counterexample_g(a), bo);
  std::vector<double> nv, wv;
  bool increasing = true;
  for (int n : ns) {
    const double w = counterexample_window(a, n);
    if (!wv.empty() && !(w > wv.back())) increasing = false;
    nv.push_back(n);
    wv.push_back(w);
  }
  json report{{"alpha", a},
              {"criteria", crit.report()},
              {"verdict", crit.verdict()},
              {"integral_converges", !crit.integral_of_g.divergent()},
              {"n", ns},
              {"windows", wv},
              {"windows_increasing", increasing}};
  Artifacts art{opt, {}};
  art.put("counterexample.csv", io::csv({"n", "window"}, {nv, wv}));
  art.put("counterexample.json", io::json_text(report));
  return finish("counterexample", config, json{{"alpha", a}, {"n", ns}, {"horizon", bo.horizon}}, report, art);
}

CommandResult run(const std::string& sub, const json& config, const RunOptions& opt, std::ostream& err) {
  static const std::map<std::string, std::function<CommandResult(const json&, const RunOptions&)>> table{
      {"solve", cmd_solve},
      {"criteria", cmd_criteria},
      {"sweep", cmd_sweep},
      {"verify-super", cmd_verify_super},
      {"boundedness-check", cmd_boundedness_check},
      {"localize", cmd_localize},
      {"ode-compare", cmd_ode_compare},
      {"counterexample", cmd_counterexample}};
  CommandResult failed;
  failed.manifest.subcommand = sub;
  const auto it = table.find(sub);
  if (it == table.end()) {
    err << "error: unknown subcommand '" << sub << "'\n";
    failed.exit_code = kExitConfig;
    return failed;
  }
  try {
    return it->second(config, opt);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const InvalidSpec& e) {
    err << "config error: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const HypothesisError& e) {
    err << "hypothesis not met: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    failed.exit_code = kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    failed.exit_code = kExitNumeric;
  }
  return failed;
}

}  // namespace nblab::harness
