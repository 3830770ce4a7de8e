#include "nblab/ode_comparison.hpp"

#include "nblab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nblab {

std::string to_string(OdeKind k) {
  switch (k) {
    case OdeKind::C0_P: return "C0_P";
    case OdeKind::K0_L: return "K0_L";
    case OdeKind::SUM: return "SUM";
  }
  return "?";
}

std::string to_string(RemarkCase c) {
  switch (c) {
    case RemarkCase::C0_P: return "C0_P";
    case RemarkCase::K0_L: return "K0_L";
    case RemarkCase::P1_LG1: return "P1_LG1";
    case RemarkCase::L1_PG1: return "L1_PG1";
    case RemarkCase::BOTH: return "BOTH";
  }
  return "?";
}

std::string to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::Diverges: return "Diverges";
    case LimitVerdict::ConvergesOrBounded: return "ConvergesOrBounded";
    case LimitVerdict::Undetermined: return "Undetermined";
    case LimitVerdict::NotApplicable: return "NotApplicable";
  }
  return "?";
}

void ComparisonODE::validate() const {
  if (!(w0 >= 0.0)) throw ConfigError(fmt::format("w0 must be nonnegative, got {}", w0));
  switch (kind) {
    case OdeKind::C0_P:
      if (!(p > 1.0)) throw ConfigError("C0_P needs p > 1");
      if (!c0) throw ConfigError("C0_P needs c0");
      break;
    case OdeKind::K0_L:
      if (!(l > 1.0)) throw ConfigError("K0_L needs l > 1");
      if (!k0) throw ConfigError("K0_L needs k0");
      break;
    case OdeKind::SUM:
      if (!(p >= 1.0 && l >= 1.0)) throw ConfigError("SUM needs p >= 1 and l >= 1");
      if (!c0 || !k0) throw ConfigError("SUM needs c0 and k0");
      break;
  }
}

double closed_form_blowup_time(double q, double a, double w0) {
  if (!(q > 1.0) || !(a > 0.0) || !(w0 > 0.0)) return std::numeric_limits<double>::infinity();
  return std::pow(w0, 1.0 - q) / ((q - 1.0) * a);
}

OdeSolution solve_comparison_ode(const ComparisonODE& ode, double t_end, const OdeOptions& opt) {
  ode.validate();
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");

  const bool use_c = ode.kind != OdeKind::K0_L;
  const bool use_k = ode.kind != OdeKind::C0_P;
  auto rate = [&](double t, double w) {
    double r = 0.0;
    if (use_c) r += ode.c0(t) * std::pow(w, ode.p);
    if (use_k) r += ode.k0(t) * std::pow(w, ode.l);
    return r;
  };

  StepperOptions so;
  so.t_end = t_end;
  so.dt_init = std::min(1e-6, t_end);
  so.dt_min = std::min(opt.dt_min, so.dt_init);
  so.dt_max = t_end;
  so.rtol = opt.rtol;
  so.atol = opt.atol;
  so.u_max = opt.w_max;

  OdeSolution out;
  std::vector<double> y{ode.w0};
  auto rhs = [&](double t, std::span<const double> w, std::span<double> dw) {
    dw[0] = rate(t, std::max(w[0], 0.0));
    return std::isfinite(dw[0]);
  };
  auto on_accept = [&](double t, std::span<const double> w, std::span<const double>, double) {
    out.t.push_back(t);
    out.w.push_back(w[0]);
  };
  const StepperStats st = run_bs23(y, 0.0, so, rhs, on_accept, [](double, std::span<const double>) {});
  out.verdict = st.verdict;

  if (st.verdict.kind != Termination::ReachedTEnd && !out.t.empty()) {
    double q = 1.0;
    if (use_c) q = std::max(q, ode.p);
    if (use_k) q = std::max(q, ode.l);
    const double t = out.t.back();
    const double w = out.w.back();
    const double a = rate(t, w) / std::pow(w, q);
    if (q > 1.0 && a > 0.0 && std::isfinite(a)) out.blowup_time = t + std::pow(w, 1.0 - q) / ((q - 1.0) * a);
  }
  return out;
}

// ---------------------------------------------------------------- thresholds

namespace {

double threshold_from(const InfiniteIntegral& I, double q) {
  if (I.divergent()) return 0.0;
  if (!(I.value > 0.0)) return std::numeric_limits<double>::infinity();
  return std::pow((q - 1.0) * I.value, -1.0 / (q - 1.0));
}

/// f(t) * exp(s * \int_0^t g).
TimeFunction weighted(const TimeFunction& f, const TimeFunction& g, double s) {
  auto G = std::make_shared<CumulativeIntegral>(g);
  return TimeFunction([f, G, s](double t) { return f(t) * std::exp(s * (*G)(t)); },
                      [f, g](double a, double b) {
                        std::vector<double> pts = f.breakpoints(a, b);
                        for (double x : g.breakpoints(a, b)) pts.push_back(x);
                        return pts;
                      });
}

}  // namespace

ThresholdReport blowup_threshold(RemarkCase which, double p, double l, const TimeFunction& c0, const TimeFunction& k0,
                                 double w0, const DoublingPolicy& policy) {
  ThresholdReport r;
  r.which = which;
  r.w0 = w0;
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(fmt::format("case {} requires {} (p={}, l={})", to_string(which), what, p, l));
  };
  switch (which) {
    case RemarkCase::C0_P: {
      need(p > 1.0, "p > 1");
      r.integrals.push_back(integrate_to_infinity(c0, policy));
      r.threshold = threshold_from(r.integrals[0], p);
      break;
    }
    case RemarkCase::K0_L: {
      need(l > 1.0, "l > 1");
      r.integrals.push_back(integrate_to_infinity(k0, policy));
      r.threshold = threshold_from(r.integrals[0], l);
      break;
    }
    case RemarkCase::P1_LG1: {
      need(p == 1.0 && l > 1.0, "p = 1 and l > 1");
      r.integrals.push_back(integrate_to_infinity(weighted(k0, c0, l - 1.0), policy));
      r.threshold = threshold_from(r.integrals[0], l);
      break;
    }
    case RemarkCase::L1_PG1: {
      need(l == 1.0 && p > 1.0, "l = 1 and p > 1");
      r.integrals.push_back(integrate_to_infinity(weighted(c0, k0, p - 1.0), policy));
      r.threshold = threshold_from(r.integrals[0], p);
      break;
    }
    case RemarkCase::BOTH: {
      need(p > 1.0 && l > 1.0, "p > 1 and l > 1");
      r.integrals.push_back(integrate_to_infinity(c0, policy));
      r.integrals.push_back(integrate_to_infinity(k0, policy));
      r.threshold = std::min(threshold_from(r.integrals[0], p), threshold_from(r.integrals[1], l));
      break;
    }
  }
  r.blows_up = w0 > r.threshold;
  return r;
}

namespace {

json integral_json(const InfiniteIntegral& I) {
  return json{{"value", I.value},
              {"status", I.divergent() ? "Divergent" : "Converged"},
              {"horizon", I.horizon},
              {"last_increment", I.last_increment}};
}

}  // namespace

json to_json(const ThresholdReport& r) {
  json j{{"case", to_string(r.which)}, {"w0", r.w0}, {"verdict", r.verdict()}};
  j["threshold"] = std::isfinite(r.threshold) ? json(r.threshold) : json("inf");
  j["integrals"] = json::array();
  for (const auto& I : r.integrals) j["integrals"].push_back(integral_json(I));
  return j;
}

// ---------------------------------------------------------------- all-nontrivial criterion

NontrivialBranch evaluate_nontrivial_branch(double q, const TimeFunction& a, const TimeFunction& b, double horizon) {
  NontrivialBranch br;
  br.q = q;
  br.integral_a = integrate_to_infinity(a);
  if (br.integral_a.divergent()) {
    br.verdict = LimitVerdict::NotApplicable;
    br.note = "first integral diverges; the threshold case already forces blow-up of nontrivial data";
    return br;
  }
  const CumulativeIntegral B(b);
  for (double t = 1.0; t <= horizon; t *= 2.0) {
    const InfiniteIntegral tail = integrate_tail(a, t);
    br.times.push_back(t);
    br.products.push_back(B(t) * std::pow(std::max(tail.value, 0.0), 1.0 / (q - 1.0)));
  }
  const std::size_t K = br.products.size();
  if (K < 5) {
    br.verdict = LimitVerdict::Undetermined;
    br.note = "horizon too short";
    return br;
  }
  const double last = br.products[K - 1];
  const double ref = br.products[K - 5];
  bool up = true, down = true;
  for (std::size_t i = K - 4; i < K; ++i) {
    up = up && br.products[i] >= br.products[i - 1];
    down = down && br.products[i] <= br.products[i - 1];
  }
  if (last == 0.0 && ref == 0.0) {
    br.verdict = LimitVerdict::ConvergesOrBounded;
    br.note = "product vanishes";
    return br;
  }
  const double ratio = ref > 0.0 ? last / ref : std::numeric_limits<double>::infinity();
  if (ratio >= 1.5 && up) {
    br.verdict = LimitVerdict::Diverges;
  } else if (ratio <= 1.0 / 1.5 && down) {
    br.verdict = LimitVerdict::ConvergesOrBounded;
  } else {
    br.verdict = LimitVerdict::Undetermined;
    br.note = std::abs(ratio - 1.0) < 0.05 ? "product tends to a finite nonzero constant"
                                           : "product neither grows nor decays clearly at the horizon";
  }
  return br;
}

CriterionReport nontrivial_blowup_criterion(double p, double l, const TimeFunction& c0, const TimeFunction& k0,
                                            const TimeFunction& cbar, const TimeFunction& kbar, double horizon) {
  CriterionReport rep;
  rep.name = "all_nontrivial_blowup";
  rep.verdict = to_string(LimitVerdict::NotApplicable);
  auto branch_json = [](const NontrivialBranch& br) {
    json j{{"q", br.q},
           {"integral", integral_json(br.integral_a)},
           {"verdict", to_string(br.verdict)}};
    if (!br.products.empty()) {
      j["t_last"] = br.times.back();
      j["product_last"] = br.products.back();
      j["product_tail"] = std::vector<double>(br.products.end() - std::min<std::size_t>(5, br.products.size()),
                                              br.products.end());
    }
    if (!br.note.empty()) j["note"] = br.note;
    return j;
  };
  std::vector<LimitVerdict> verdicts;
  if (p > 1.0) {
    const NontrivialBranch br = evaluate_nontrivial_branch(p, c0, kbar, horizon);
    rep.quantities["reaction_branch"] = branch_json(br);
    verdicts.push_back(br.verdict);
  }
  if (l > 1.0) {
    const NontrivialBranch br = evaluate_nontrivial_branch(l, k0, cbar, horizon);
    rep.quantities["boundary_branch"] = branch_json(br);
    verdicts.push_back(br.verdict);
  }
  auto has = [&](LimitVerdict v) { return std::find(verdicts.begin(), verdicts.end(), v) != verdicts.end(); };
  if (has(LimitVerdict::Diverges)) {
    rep.pass = true;
    rep.verdict = to_string(LimitVerdict::Diverges);
  } else if (has(LimitVerdict::Undetermined)) {
    rep.verdict = to_string(LimitVerdict::Undetermined);
  } else if (has(LimitVerdict::ConvergesOrBounded)) {
    rep.verdict = to_string(LimitVerdict::ConvergesOrBounded);
  }
  if (verdicts.empty()) rep.detail = "needs p > 1 or l > 1";
  return rep;
}

}  // namespace nblab
