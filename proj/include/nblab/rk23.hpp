#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace nblab {

enum class Termination { ReachedTEnd, BlowUpDetected, StepCollapse };

std::string to_string(Termination t);

struct Verdict {
  Termination kind = Termination::ReachedTEnd;
  double t_stop = 0.0;
  std::string reason;
};

struct StepperOptions {
  double t_end = 1.0;
  double dt_init = 1e-6;
  double dt_min = 1e-13;
  double dt_max = 0.1;       // already includes any stability cap
  double rtol = 1e-6;
  double atol = 1e-9;
  double u_max = 1e8;
  bool enforce_nonnegative = true;   // reject below -10 atol, clamp smaller undershoots
  std::vector<double> output_times;  // sorted; steps are clipped to land on them
};

struct StepperStats {
  Verdict verdict;
  long accepted = 0;
  long rejected = 0;
  long clamp_events = 0;
  double worst_undershoot = 0.0;  // most negative accepted value before clamping
};

/// Bogacki-Shampine 3(2) with FSAL, max-norm error control and the blow-up policy shared by
/// the PDE and the comparison ODEs. `rhs(t, y, dy)` returns false when dy is not finite.
/// `on_accept(t, y, dy, dt)` sees every accepted state (dy = rhs at that state);
/// `on_output(t, y)` fires when t hits a requested output time.
template <class Rhs, class OnAccept, class OnOutput>
StepperStats run_bs23(std::vector<double>& y, double t, const StepperOptions& o, Rhs&& rhs, OnAccept&& on_accept,
                      OnOutput&& on_output) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), ynew(n);
  StepperStats st;
  auto stop = [&](Termination kind, const char* reason) {
    st.verdict = {kind, t, reason};
    return st;
  };

  auto out = std::lower_bound(o.output_times.begin(), o.output_times.end(), t);
  if (out != o.output_times.end() && *out == t) {
    on_output(t, std::span<const double>(y));
    ++out;
  }
  if (!rhs(t, std::span<const double>(y), std::span<double>(k1))) return stop(Termination::BlowUpDetected, "overflow");
  on_accept(t, std::span<const double>(y), std::span<const double>(k1), 0.0);

  const double floor = -10.0 * o.atol;
  double dt = std::min(o.dt_init, o.dt_max);
  while (t < o.t_end) {
    const double target = out != o.output_times.end() ? std::min(*out, o.t_end) : o.t_end;
    const double proposed = std::min(dt, o.dt_max);
    if (proposed < o.dt_min) return stop(Termination::StepCollapse, "step size below dt_min");
    double h = proposed;
    bool hits = false;
    if (t + 1.01 * h >= target) {
      h = target - t;
      hits = true;
    }

    auto reject = [&](double next) {
      dt = next;
      ++st.rejected;
    };
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    if (!rhs(t + 0.5 * h, std::span<const double>(tmp), std::span<double>(k2))) {
      reject(0.5 * h);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.75 * h * k2[i];
    if (!rhs(t + 0.75 * h, std::span<const double>(tmp), std::span<double>(k3))) {
      reject(0.5 * h);
      continue;
    }
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
      finite = finite && std::isfinite(ynew[i]);
    }
    if (!finite || !rhs(t + h, std::span<const double>(ynew), std::span<double>(k4))) {
      reject(0.5 * h);
      continue;
    }
    double err = 0.0;
    double lowest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i] - 1.0 / 8.0 * k4[i]);
      const double scale = o.atol + o.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
      lowest = std::min(lowest, ynew[i]);
    }
    if (!(err <= 1.0)) {
      reject(h * std::max(0.2, 0.9 * std::cbrt(1.0 / err)));
      continue;
    }
    bool clamped = false;
    if (o.enforce_nonnegative && lowest < 0.0) {
      if (lowest < floor) {
        reject(0.5 * h);
        continue;
      }
      st.worst_undershoot = std::min(st.worst_undershoot, lowest);
      for (double& v : ynew) {
        if (v < 0.0) {
          v = 0.0;
          ++st.clamp_events;
        }
      }
      clamped = true;
    }

    t = hits ? target : t + h;
    y.swap(ynew);
    if (clamped) {
      if (!rhs(t, std::span<const double>(y), std::span<double>(k1))) return stop(Termination::BlowUpDetected, "overflow");
    } else {
      k1.swap(k4);
    }
    ++st.accepted;
    const double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::cbrt(1.0 / err)));
    dt = hits ? std::max(proposed, h * grow) : h * grow;

    on_accept(t, std::span<const double>(y), std::span<const double>(k1), h);
    if (hits && out != o.output_times.end() && t == *out) {
      on_output(t, std::span<const double>(y));
      ++out;
    }
    double sup = 0.0;
    for (double v : y) sup = std::max(sup, std::abs(v));
    if (sup > o.u_max) return stop(Termination::BlowUpDetected, "sup-norm exceeded cap");
  }
  st.verdict = {Termination::ReachedTEnd, t, ""};
  return st;
}

}  // namespace nblab
