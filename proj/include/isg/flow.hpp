#pragma once

// Continuous-time side: Euler curves of x' in -df(x) + B(0, eps), affine
// interpolants of discrete runs, and the descent/defect diagnostics on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isg/catalog.hpp"
#include "isg/errors.hpp"
#include "isg/polytope.hpp"
#include "isg/solver.hpp"
#include "isg/vec.hpp"

namespace isg {

/// Sampled curve on a uniform mesh. For Euler curves
/// states[j+1] = states[j] + h * (-selections[j] + bias_vectors[j]).
/// For interpolants the relation holds inside each affine piece only.
struct Curve {
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> selections;    // element of df(states[j])
  std::vector<Vec> bias_vectors;  // ||b|| <= eps
  bool interpolated = false;

  std::size_t size() const { return states.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }

  /// Longest mesh displacement ||x_{j+1} - x_j||.
  double max_increment() const {
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < states.size(); ++j) m = std::max(m, dist(states[j + 1], states[j]));
    return m;
  }
};

/// Explicit Euler with the min-norm selection and the bias evaluated pathwise.
inline Curve integrate(const CatalogFunction& fn, std::span<const double> x0, const BiasModel& bias,
                       double T, double h, std::uint64_t seed = 0) {
  if (!(h > 0.0) || !(T >= h)) throw InvalidInputError("integrate: need h > 0 and T >= h");
  require_dim(x0, fn.dim, "integrate x0");
  bias.validate(fn.dim);
  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  Rng rng(seed);
  Curve c;
  c.h = h;
  c.times.reserve(steps + 1);
  c.states.reserve(steps + 1);
  c.selections.reserve(steps + 1);
  c.bias_vectors.reserve(steps + 1);
  Vec x(x0.begin(), x0.end());
  for (std::size_t j = 0; j <= steps; ++j) {
    Vec s = select_subgradient(fn, x);
    // The oracle returns s + beta; the curve moves along -(s + beta), so b = -beta.
    Vec b = scaled(bias_vector(bias, s, rng), -1.0);
    c.times.push_back(static_cast<double>(j) * h);
    c.states.push_back(x);
    if (j < steps) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * (-s[i] + b[i]);
      if (!all_finite(x) || norm(x) > kDivergenceRadius) {
        c.selections.push_back(std::move(s));
        c.bias_vectors.push_back(std::move(b));
        throw DivergedError(fn.name + ": curve diverged at t = " + std::to_string((j + 1) * h),
                            Trajectory{c.states, {}, {}, {}, seed});
      }
    }
    c.selections.push_back(std::move(s));
    c.bias_vectors.push_back(std::move(b));
  }
  return c;
}

namespace detail {

// Selection from the hull of pieces active within one mesh displacement.
// On a mesh the curve chatters across kinks at amplitude O(h); the enlarged
// hull is what the Euler velocity actually tracks there.
inline double mesh_radius(const Curve& c) { return std::max(c.max_increment(), kActivityTol); }

inline Vec mesh_selection(const CatalogFunction& fn, std::span<const double> x, double radius) {
  return min_norm_element(clarke(fn, x, radius));
}

// max_{i<j} (D_j - D_i), O(n) via a running minimum.
inline double max_forward_increase(const std::vector<double>& d) {
  double best = -std::numeric_limits<double>::infinity();
  double running_min = std::numeric_limits<double>::infinity();
  for (double v : d) {
    if (running_min != std::numeric_limits<double>::infinity()) best = std::max(best, v - running_min);
    running_min = std::min(running_min, v);
  }
  return best == -std::numeric_limits<double>::infinity() ? 0.0 : best;
}

}  // namespace detail

/// Discretization slack rate 10 (L + eps)^2: allowed violation per unit time per unit h.
inline double slack_rate(const CatalogFunction& fn, double eps) {
  const double l = fn.lipschitz_on_box + eps;
  return 10.0 * l * l;
}

struct LyapunovReport {
  double raw_violation = 0.0;       // curve's own selections, no slack
  double mesh_violation = 0.0;      // mesh-enlarged selections, no slack
  double adjusted_violation = 0.0;  // mesh selections minus slack
  double slack_rate = 0.0;
  double jitter = 0.0;              // additive per-pair allowance 2 L_loc * max increment
  std::size_t pairs_checked = 0;    // n(n-1)/2, all checked via prefix sums
  bool pass = false;
};

/// f(x(t2)) - f(x(t1)) <= -int_{t1}^{t2} ||v|| (||v|| - eps) dt over all mesh
/// pairs, trapezoid quadrature, up to slack_rate * h * (t2 - t1) + jitter.
inline LyapunovReport weak_lyapunov_check(const Curve& curve, const CatalogFunction& fn, double eps) {
  const std::size_t n = curve.size();
  LyapunovReport r;
  r.slack_rate = slack_rate(fn, eps);
  if (n < 2) {
    r.pass = true;
    return r;
  }
  const double radius = detail::mesh_radius(curve);
  std::vector<double> phi_raw(n), phi_mesh(n), f(n);
  double local_lip = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = fn.value(curve.states[j]);
    const double s = norm(curve.selections[j]);
    phi_raw[j] = s * (s - eps);
    const Polytope hull = clarke(fn, curve.states[j], radius);
    const double m = norm(min_norm_element(hull));
    phi_mesh[j] = m * (m - eps);
    local_lip = std::max(local_lip, hull.max_norm());
  }
  r.jitter = 2.0 * local_lip * curve.max_increment();
  std::vector<double> d_raw(n), d_mesh(n), d_adj(n);
  double s_raw = 0.0, s_mesh = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double dt = curve.times[j] - curve.times[j - 1];
      s_raw += 0.5 * dt * (phi_raw[j - 1] + phi_raw[j]);
      s_mesh += 0.5 * dt * (phi_mesh[j - 1] + phi_mesh[j]);
    }
    d_raw[j] = f[j] + s_raw;
    d_mesh[j] = f[j] + s_mesh;
    d_adj[j] = d_mesh[j] - r.slack_rate * curve.h * curve.times[j];
  }
  r.raw_violation = detail::max_forward_increase(d_raw);
  r.mesh_violation = detail::max_forward_increase(d_mesh);
  r.adjusted_violation = detail::max_forward_increase(d_adj) - r.jitter;
  r.pairs_checked = n * (n - 1) / 2;
  r.pass = r.adjusted_violation <= 1e-12;
  return r;
}

struct QuantitativeResult {
  double time_bound = 0.0;             // T = (b - a) / (delta (delta - eps))
  std::optional<double> hit_time;      // first mesh time with dist(0, df) <= delta
  bool violation = false;              // no hit on [0, T]: would falsify the estimate
  double min_stationarity = 0.0;       // over the scanned window
};

/// First mesh time t <= T = (b - a)/(delta (delta - eps)) with
/// dist(0, df(x(t))) <= delta. Throws InapplicableError if f leaves [a, b]
/// before T or the curve is too short to decide.
inline QuantitativeResult quantitative_estimate_check(const Curve& curve, const CatalogFunction& fn,
                                                      double eps, double a, double b, double delta) {
  if (!(delta > eps)) throw InvalidInputError("quantitative_estimate_check: need delta > eps");
  if (!(a >= 0.0 && a < b)) throw InvalidInputError("quantitative_estimate_check: need 0 <= a < b");
  QuantitativeResult r;
  r.time_bound = (b - a) / (delta * (delta - eps));
  r.min_stationarity = std::numeric_limits<double>::infinity();
  const double radius = detail::mesh_radius(curve);
  constexpr double band_tol = 1e-12;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const double t = curve.times[j];
    if (t > r.time_bound) break;
    const double fv = fn.value(curve.states[j]);
    if (fv < a - band_tol || fv > b + band_tol)
      throw InapplicableError("quantitative_estimate_check: f leaves [a, b] at t = " + std::to_string(t));
    const double s = norm(detail::mesh_selection(fn, curve.states[j], radius));
    r.min_stationarity = std::min(r.min_stationarity, s);
    if (s <= delta) {
      r.hit_time = t;
      return r;
    }
  }
  if (curve.horizon() < r.time_bound)
    throw InapplicableError("quantitative_estimate_check: curve shorter than T without a hit");
  r.violation = true;
  return r;
}

/// Piecewise-affine curve through the iterates at cumulative-step times,
/// resampled on a uniform mesh of width h (default: a quarter of the smallest step).
inline Curve interpolate(const Trajectory& traj, double h = 0.0) {
  if (traj.points.empty()) throw InvalidInputError("interpolate: empty trajectory");
  Curve c;
  c.interpolated = true;
  const std::size_t K = traj.steps.size();
  std::vector<double> knots(K + 1, 0.0);
  for (std::size_t k = 0; k < K; ++k) knots[k + 1] = knots[k] + traj.steps[k];
  const double T = knots.back();
  if (h <= 0.0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (double a : traj.steps) smallest = std::min(smallest, a);
    h = K == 0 ? 1.0 : smallest / 4.0;
  }
  c.h = h;
  const std::size_t p = traj.points.front().size();
  const auto m = K == 0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(T / h + 1e-9));
  std::size_t seg = 0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = std::min(static_cast<double>(j) * h, T);
    while (seg + 1 < K && knots[seg + 1] <= t) ++seg;
    c.times.push_back(t);
    if (K == 0) {
      c.states.push_back(traj.points.front());
      c.selections.push_back(Vec(p, 0.0));
      c.bias_vectors.push_back(Vec(p, 0.0));
      break;
    }
    const Vec& v = traj.oracle_vectors[seg];
    Vec x = traj.points[seg];
    axpy(-(t - knots[seg]), v, x);
    c.states.push_back(std::move(x));
    // Velocity on the piece is -v with v = s + beta; v is stored whole and b = 0.
    c.selections.push_back(v);
    c.bias_vectors.push_back(Vec(p, 0.0));
  }
  return c;
}

struct DefectReport {
  double defect = 0.0;        // Riemann sum of dist((gamma, gamma'), graph Z) on the mesh
  double horizon = 0.0;       // T = sum alpha_k
  double max_step = 0.0;      // alpha = max alpha_k
  double bound = 0.0;         // alpha * T * (L + eps)
  double sup_bound = 0.0;     // alpha * T * sup_k ||v_k||
  double mesh_h = 0.0;
  bool pass = false;          // defect <= bound + 10 h T
};

/// Integrated distance of the affine interpolant's (position, velocity) to
/// the graph of Z(x) = -df(x) + B(0, eps).
inline DefectReport interpolation_defect(const Trajectory& traj, const CatalogFunction& fn, double eps,
                                         double h = 0.0) {
  if (traj.points.empty()) throw InvalidInputError("interpolation_defect: empty trajectory");
  DefectReport r;
  const std::size_t K = traj.steps.size();
  std::vector<double> knots(K + 1, 0.0);
  double sup_v = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    knots[k + 1] = knots[k] + traj.steps[k];
    r.max_step = std::max(r.max_step, traj.steps[k]);
    sup_v = std::max(sup_v, norm(traj.oracle_vectors[k]));
  }
  r.horizon = knots.back();
  if (h <= 0.0) h = K == 0 ? 1.0 : r.max_step / 16.0;
  r.mesh_h = h;
  r.bound = r.max_step * r.horizon * (fn.lipschitz_on_box + eps);
  r.sup_bound = r.max_step * r.horizon * sup_v;
  if (K == 0) {
    r.pass = true;
    return r;
  }
  // Velocity excess dist(v_k, df(x)) - eps at both end points of each segment.
  const auto excess = [&](std::size_t point, std::size_t k) {
    const Polytope hull = clarke(fn, traj.points[point]);
    const Vec& v = traj.oracle_vectors[k];
    return std::max(0.0, dist(v, project_point(hull, v)) - eps);
  };
  std::vector<double> start_excess(K), end_excess(K);
  for (std::size_t k = 0; k < K; ++k) {
    start_excess[k] = excess(k, k);
    end_excess[k] = excess(k + 1, k);
  }
  const auto m = static_cast<std::size_t>(std::ceil(r.horizon / h));
  std::size_t seg = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) * h;
    const double width = std::min(h, r.horizon - t);
    while (seg + 1 < K && knots[seg + 1] <= t) ++seg;
    const double vnorm = norm(traj.oracle_vectors[seg]);
    const double left = std::hypot((t - knots[seg]) * vnorm, start_excess[seg]);
    const double dx_right = (knots[seg + 1] - t) * vnorm;
    const double right = std::hypot(dx_right, end_excess[seg]);
    total += width * std::min(left, right);
  }
  r.defect = total;
  r.pass = r.defect <= r.bound + 10.0 * h * r.horizon;
  return r;
}

}  // namespace isg
