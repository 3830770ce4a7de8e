#include "nblab/quadrature.hpp"

#include "nblab/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nblab {

std::vector<double> TimeFunction::breakpoints(double a, double b) const {
  if (!breaks_) return {};
  std::vector<double> pts = breaks_(a, b);
  std::erase_if(pts, [&](double p) { return !(p > a && p < b); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

namespace {

constexpr unsigned kMaxDepth = 12;

double gk(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  // Boost compares the unscaled local error against a scaled tolerance, so short intervals never
  // converge; integrate over [-1, 1] instead.
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto unit = [&](double u) { return half * f(mid + half * u); };
  try {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, -1.0, 1.0, kMaxDepth, rel_tol, &err);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    // Boost raises on non-finite integrands; callers treat +inf as divergence.
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double integrate(const TimeFunction& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> edges{a};
  for (double p : f.breakpoints(a, b)) edges.push_back(p);
  edges.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double right = edges[i + 1];
    total += gk([&f, right](double d) { return f.before(right, d); }, 0.0, right - edges[i], rel_tol);
  }
  return total;
}

InfiniteIntegral integrate_to_infinity(const TimeFunction& f, const DoublingPolicy& policy) {
  InfiniteIntegral out;
  double horizon = policy.start;
  double total = integrate(f, 0.0, horizon);
  double prev_increment = -1.0;
  double prev_ratio = -1.0;
  int decaying = 0;
  if (!std::isfinite(total)) {
    out.status = Convergence::Divergent;
    out.value = std::numeric_limits<double>::infinity();
    out.horizon = horizon;
    return out;
  }
  for (;;) {
    const double increment = integrate(f, horizon, 2.0 * horizon);
    const double next = total + increment;
    ++out.doublings;
    out.last_increment = increment;
    out.horizon = 2.0 * horizon;
    if (!std::isfinite(next)) {
      out.status = Convergence::Divergent;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    const double ratio = prev_increment > 0.0 && increment > 0.0 ? increment / prev_increment : -1.0;
    decaying = ratio >= 0.0 && ratio <= policy.ratio_max ? decaying + 1 : 0;
    const bool geometric = decaying >= policy.ratio_run && 2.0 * horizon >= policy.ratio_test_from &&
                           std::abs(ratio - prev_ratio) <= policy.ratio_stability;
    prev_ratio = ratio;
    if (std::abs(increment) < policy.increment_tol || geometric) {
      // Geometric tail extrapolation when the increments decay.
      const double tail = ratio > 0.0 && ratio < 1.0 ? increment * ratio / (1.0 - ratio) : 0.0;
      out.value = next + tail;
      return out;
    }
    if (2.0 * horizon >= policy.divergence_horizon) {
      const bool grows = total > 0.0 && next >= policy.divergence_factor * total;
      const bool stalls = prev_increment > 0.0 && increment >= 0.999 * prev_increment;
      if (grows || stalls || 2.0 * horizon >= policy.max_horizon) {
        out.status = Convergence::Divergent;
        out.value = next;
        return out;
      }
    }
    prev_increment = increment;
    total = next;
    horizon *= 2.0;
  }
}

InfiniteIntegral integrate_tail(const TimeFunction& f, double t, double rel_tol) {
  InfiniteIntegral out;
  const double width = std::max(t, 1.0);
  double lo = t;
  double span = width;
  double total = 0.0;
  double prev_increment = -1.0;
  for (int k = 0; k < 80; ++k) {
    const double hi = lo + span;
    const double increment = integrate(f, lo, hi);
    ++out.doublings;
    out.horizon = hi;
    out.last_increment = increment;
    if (!std::isfinite(increment)) {
      out.status = Convergence::Divergent;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    total += increment;
    if (std::abs(increment) <= rel_tol * std::abs(total)) {
      out.value = total;
      return out;
    }
    if (k >= 20 && prev_increment > 0.0 && increment >= 0.999 * prev_increment) {
      out.status = Convergence::Divergent;
      out.value = total;
      return out;
    }
    prev_increment = increment;
    lo = hi;
    span *= 2.0;
  }
  out.status = Convergence::Divergent;
  out.value = total;
  return out;
}

CumulativeIntegral::CumulativeIntegral(TimeFunction f, int panels_per_octave)
    : f_(std::move(f)), panels_per_octave_(panels_per_octave), nodes_{0.0}, values_{0.0} {}

void CumulativeIntegral::extend_to(double t) const {
  while (nodes_.back() < t) {
    const double a = nodes_.back();
    // Octave [2^k, 2^{k+1}] (or [0, 1]) split into equal panels.
    const double octave_lo = a < 1.0 ? 0.0 : std::exp2(std::floor(std::log2(a) + 1e-12));
    const double octave_hi = a < 1.0 ? 1.0 : 2.0 * octave_lo;
    const double b = std::min(octave_hi, a + (octave_hi - octave_lo) / panels_per_octave_);
    values_.push_back(values_.back() + integrate(f_, a, b));
    nodes_.push_back(b);
  }
}

double CumulativeIntegral::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  extend_to(t);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const std::size_t j = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
  if (nodes_[j] == t) return values_[j];
  // Fixed rule inside a panel keeps F a smooth function of t (adaptive refinement would add
  // tolerance-level jitter that defeats outer adaptive integrations of F).
  auto fn = [this](double s) { return f_(s); };
  double a = nodes_[j];
  double total = values_[j];
  for (double p : f_.breakpoints(a, t)) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(fn, a, p);
    a = p;
  }
  return total + boost::math::quadrature::gauss<double, 20>::integrate(fn, a, t);
}

double singular_window_integral(const TimeFunction& g, double t, double t0) {
  const double lower = std::max(t - t0, 0.0);
  const double s_max = std::sqrt(t - lower);
  std::vector<double> edges{0.0};
  std::vector<double> mapped;
  for (double tau : g.breakpoints(lower, t)) mapped.push_back(std::sqrt(t - tau));
  std::sort(mapped.begin(), mapped.end());
  for (double s : mapped) edges.push_back(s);
  edges.push_back(s_max);
  auto integrand = [&g, t](double s) { return 2.0 * g.before(t, s * s); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) total += gk(integrand, edges[i], edges[i + 1], 1e-11);
  return total;
}

double power_window_integral(const TimeFunction& g, double t, double t0, double q) {
  const TimeFunction gq([&g, q](double tau) { return std::pow(g(tau), q); },
                        [&g](double a, double b) { return g.breakpoints(a, b); },
                        [&g, q](double anchor, double d) { return std::pow(g.before(anchor, d), q); });
  return integrate(gq, std::max(t - t0, 0.0), t);
}

}  // namespace nblab
