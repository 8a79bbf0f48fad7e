#pragma once

// Semialgebraic nonsmooth test objectives with exact Clarke subdifferentials
// and analytic critical sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isg/errors.hpp"
#include "isg/polytope.hpp"
#include "isg/vec.hpp"

namespace isg {

/// Default activity radius: pieces whose switching surface lies within this
/// distance of x contribute their gradient to the hull.
inline constexpr double kActivityTol = 1e-12;

struct KLParams {
  double theta = 0.0;      // in [0, 1)
  double c = 1.0;          // > 0
  double valid_band = 0.5; // inequality certified on f^-1(vcrit_band f)
};

struct MRParams {
  double beta = 1.0;
  double c = 1.0;
  double valid_band = 0.5;
};

struct ErrorBoundParams {
  double a = 1.0;  // in (0, 1]
  double c = 1.0;
};

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  Vec lo;
  Vec hi;

  static Box cube(std::size_t dim, double lo, double hi) {
    return Box{Vec(dim, lo), Vec(dim, hi)};
  }
  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }
};

/// A catalog entry. Immutable after construction; all members are pure.
struct CatalogFunction {
  using ValueFn = std::function<double(std::span<const double>)>;
  // Gradients of every piece active within `radius` of x.
  using GradientsFn = std::function<std::vector<Vec>(std::span<const double>, double)>;

  std::string name;
  std::string description;
  std::size_t dim = 1;
  ValueFn value;
  GradientsFn active_gradients;

  std::vector<Vec> crit_points;
  std::vector<double> crit_values;  // f(crit_points), sorted, unique
  double lipschitz_on_box = 0.0;
  Box lipschitz_box;
  std::optional<KLParams> kl;
  std::optional<MRParams> mr;
  std::optional<ErrorBoundParams> error_bound;
  double min_value = 0.0;
  std::vector<Vec> argmin_points;  // convex entries only

  bool convex = false;
  bool coercive = true;
  bool diagnostic = false;           // excluded from the theorem batteries
  bool certified_numerically = false;  // exponents from grid certification, not closed form
};

inline double eval(const CatalogFunction& fn, std::span<const double> x) {
  require_dim(x, fn.dim, fn.name.c_str());
  return fn.value(x);
}

/// Clarke subdifferential as the hull of active-piece gradients.
inline Polytope clarke(const CatalogFunction& fn, std::span<const double> x,
                       double activity_radius = kActivityTol) {
  require_dim(x, fn.dim, fn.name.c_str());
  return Polytope(fn.active_gradients(x, activity_radius));
}

inline double dist_to_crit(const CatalogFunction& fn, std::span<const double> x) {
  require_dim(x, fn.dim, fn.name.c_str());
  if (fn.crit_points.empty()) throw InvalidInputError(fn.name + ": no analytic critical set");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& c : fn.crit_points) best = std::min(best, dist(x, c));
  return best;
}

inline double dist_to_argmin(const CatalogFunction& fn, std::span<const double> x) {
  require_dim(x, fn.dim, fn.name.c_str());
  if (fn.argmin_points.empty()) throw InvalidInputError(fn.name + ": no analytic argmin set");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& c : fn.argmin_points) best = std::min(best, dist(x, c));
  return best;
}

/// dist(f(x), vcrit f) against the analytic critical values.
inline double dist_value_to_vcrit(const CatalogFunction& fn, double v) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : fn.crit_values) best = std::min(best, std::abs(v - c));
  return best;
}

namespace detail {

// Sign choices of a scalar switching quantity: {+1}, {-1} or both.
inline std::vector<double> active_signs(double s, double radius) {
  if (s > radius) return {1.0};
  if (s < -radius) return {-1.0};
  return {-1.0, 1.0};
}

inline CatalogFunction finish(CatalogFunction fn) {
  for (const Vec& c : fn.crit_points) fn.crit_values.push_back(fn.value(c));
  std::sort(fn.crit_values.begin(), fn.crit_values.end());
  fn.crit_values.erase(std::unique(fn.crit_values.begin(), fn.crit_values.end()),
                       fn.crit_values.end());
  return fn;
}

inline CatalogFunction make_abs() {
  CatalogFunction fn;
  fn.name = "abs";
  fn.description = "f(x) = |x|";
  fn.dim = 1;
  fn.value = [](std::span<const double> x) { return std::abs(x[0]); };
  fn.active_gradients = [](std::span<const double> x, double r) {
    std::vector<Vec> g;
    for (double s : active_signs(x[0], r)) g.push_back({s});
    return g;
  };
  fn.crit_points = {{0.0}};
  fn.lipschitz_on_box = 1.0;
  fn.lipschitz_box = Box::cube(1, -10.0, 10.0);
  // |x|^0 = 1 <= 1 * dist(0, df) = 1 off the origin; |x| <= 1 * 1^beta on the band.
  fn.kl = KLParams{0.0, 1.0, 0.5};
  fn.mr = MRParams{1.0, 1.0, 0.5};
  fn.error_bound = ErrorBoundParams{1.0, 1.0};
  fn.min_value = 0.0;
  fn.argmin_points = {{0.0}};
  fn.convex = true;
  return finish(std::move(fn));
}

// |x|^a, a > 1: theta = 1 - 1/a, beta = 1/(a - 1), with the sharp constants
// c_KL = 1/a and c_MR = a^(-1/(a-1)).
inline CatalogFunction make_power(int a) {
  CatalogFunction fn;
  fn.name = "power_" + std::to_string(a);
  fn.description = "f(x) = |x|^" + std::to_string(a);
  fn.dim = 1;
  const double ad = a;
  fn.value = [ad](std::span<const double> x) { return std::pow(std::abs(x[0]), ad); };
  fn.active_gradients = [ad](std::span<const double> x, double) {
    const double t = x[0];
    const double g = t == 0.0 ? 0.0 : ad * std::pow(std::abs(t), ad - 1.0) * (t > 0 ? 1.0 : -1.0);
    return std::vector<Vec>{{g}};
  };
  fn.crit_points = {{0.0}};
  fn.lipschitz_on_box = ad * std::pow(10.0, ad - 1.0);
  fn.lipschitz_box = Box::cube(1, -10.0, 10.0);
  fn.kl = KLParams{1.0 - 1.0 / ad, 1.0 / ad, 1.0};
  fn.mr = MRParams{1.0 / (ad - 1.0), std::pow(ad, -1.0 / (ad - 1.0)), 1.0};
  // (2/2)(|x|^(a * 1/a) + |x|^a) >= |x|.
  fn.error_bound = ErrorBoundParams{1.0 / ad, 2.0};
  fn.min_value = 0.0;
  fn.argmin_points = {{0.0}};
  fn.convex = true;
  return finish(std::move(fn));
}

inline CatalogFunction make_double_well() {
  CatalogFunction fn;
  fn.name = "double_well";
  fn.description = "f(x) = (|x| - 1)^2";
  fn.dim = 1;
  fn.value = [](std::span<const double> x) {
    const double d = std::abs(x[0]) - 1.0;
    return d * d;
  };
  fn.active_gradients = [](std::span<const double> x, double r) {
    std::vector<Vec> g;
    const double d = std::abs(x[0]) - 1.0;
    for (double s : active_signs(x[0], r)) g.push_back({2.0 * d * s});
    return g;
  };
  fn.crit_points = {{-1.0}, {0.0}, {1.0}};
  fn.lipschitz_on_box = 18.0;
  fn.lipschitz_box = Box::cube(1, -10.0, 10.0);
  // Near +-1: sqrt(f) = ||x| - 1| = |f'| / 2 and dist(x, crit) = |f'| / 2.
  fn.kl = KLParams{0.5, 0.5, 0.5};
  fn.mr = MRParams{1.0, 0.5, 0.5};
  fn.min_value = 0.0;
  return finish(std::move(fn));
}

inline CatalogFunction make_l1_2d() {
  CatalogFunction fn;
  fn.name = "l1_2d";
  fn.description = "f(x, y) = |x| + |y|";
  fn.dim = 2;
  fn.value = [](std::span<const double> x) { return std::abs(x[0]) + std::abs(x[1]); };
  fn.active_gradients = [](std::span<const double> x, double r) {
    std::vector<Vec> g;
    for (double sx : active_signs(x[0], r))
      for (double sy : active_signs(x[1], r)) g.push_back({sx, sy});
    return g;
  };
  fn.crit_points = {{0.0, 0.0}};
  fn.lipschitz_on_box = std::sqrt(2.0);
  fn.lipschitz_box = Box::cube(2, -10.0, 10.0);
  fn.kl = KLParams{0.0, 1.0, 0.5};
  fn.mr = MRParams{1.0, 1.0, 0.5};
  // |x| + |y| >= ||(x, y)||.
  fn.error_bound = ErrorBoundParams{1.0, 1.0};
  fn.min_value = 0.0;
  fn.argmin_points = {{0.0, 0.0}};
  fn.convex = true;
  return finish(std::move(fn));
}

// max(x^2 + (y-1)^2, x^2 + (y+1)^2) = x^2 + y^2 + 2|y| + 1.
inline CatalogFunction make_max_quad() {
  CatalogFunction fn;
  fn.name = "max_quad";
  fn.description = "f(x, y) = max(x^2 + (y-1)^2, x^2 + (y+1)^2)";
  fn.dim = 2;
  fn.value = [](std::span<const double> x) {
    const double a = x[0] * x[0] + (x[1] - 1.0) * (x[1] - 1.0);
    const double b = x[0] * x[0] + (x[1] + 1.0) * (x[1] + 1.0);
    return std::max(a, b);
  };
  fn.active_gradients = [](std::span<const double> x, double r) {
    std::vector<Vec> g;
    // The pieces switch on y = 0: y < 0 selects (y-1)^2, y > 0 selects (y+1)^2.
    for (double s : active_signs(x[1], r)) g.push_back({2.0 * x[0], 2.0 * (x[1] + s)});
    return g;
  };
  fn.crit_points = {{0.0, 0.0}};
  fn.lipschitz_on_box = std::sqrt(20.0 * 20.0 + 22.0 * 22.0);
  fn.lipschitz_box = Box::cube(2, -10.0, 10.0);
  fn.kl = KLParams{0.5, 0.5, 0.5};
  fn.mr = MRParams{1.0, 0.5, 0.5};
  fn.error_bound = ErrorBoundParams{0.5, 2.0};
  fn.min_value = 1.0;
  fn.argmin_points = {{0.0, 0.0}};
  fn.convex = true;
  fn.certified_numerically = true;
  return finish(std::move(fn));
}

// Constants below come from tools/certify_exponents (grid regression on
// [-10, 10]^2, 801 nodes per axis, safety factor 1.25).
inline constexpr double kRidgeKlC = 0.45;
inline constexpr double kRidgeMrC = 1.25;

inline CatalogFunction make_ridge_nc() {
  CatalogFunction fn;
  fn.name = "ridge_nc";
  fn.description = "f(x, y) = |x| + (y^2 - 1)^2";
  fn.dim = 2;
  fn.value = [](std::span<const double> x) {
    const double q = x[1] * x[1] - 1.0;
    return std::abs(x[0]) + q * q;
  };
  fn.active_gradients = [](std::span<const double> x, double r) {
    std::vector<Vec> g;
    const double gy = 4.0 * x[1] * (x[1] * x[1] - 1.0);
    for (double s : active_signs(x[0], r)) g.push_back({s, gy});
    return g;
  };
  fn.crit_points = {{0.0, -1.0}, {0.0, 0.0}, {0.0, 1.0}};
  fn.lipschitz_on_box = std::sqrt(1.0 + 3960.0 * 3960.0);
  fn.lipschitz_box = Box::cube(2, -10.0, 10.0);
  fn.kl = KLParams{0.5, kRidgeKlC, 0.5};
  fn.mr = MRParams{1.0, kRidgeMrC, 0.5};
  fn.min_value = 0.0;
  fn.certified_numerically = true;
  return finish(std::move(fn));
}

// sqrt(|x|): coercive but its epsilon-critical sets are unbounded. Not
// Lipschitz at the origin; there the hull is capped at +-1/(2 sqrt(r)).
inline CatalogFunction make_sqrt_abs() {
  CatalogFunction fn;
  fn.name = "sqrt_abs";
  fn.description = "f(x) = sqrt(|x|) (diagnostic: unbounded epsilon-critical set)";
  fn.dim = 1;
  fn.value = [](std::span<const double> x) { return std::sqrt(std::abs(x[0])); };
  fn.active_gradients = [](std::span<const double> x, double r) {
    const double t = x[0];
    const double mag = 0.5 / std::sqrt(std::max(std::abs(t), std::max(r, 1e-300)));
    std::vector<Vec> g;
    for (double s : active_signs(t, r)) g.push_back({s * mag});
    return g;
  };
  fn.crit_points = {{0.0}};
  fn.lipschitz_on_box = std::numeric_limits<double>::infinity();
  fn.lipschitz_box = Box::cube(1, -10.0, 10.0);
  fn.min_value = 0.0;
  fn.diagnostic = true;
  return finish(std::move(fn));
}

}  // namespace detail

inline const std::vector<CatalogFunction>& catalog() {
  static const std::vector<CatalogFunction> entries = [] {
    std::vector<CatalogFunction> v;
    v.push_back(detail::make_abs());
    v.push_back(detail::make_power(2));
    v.push_back(detail::make_power(3));
    v.push_back(detail::make_power(4));
    v.push_back(detail::make_double_well());
    v.push_back(detail::make_l1_2d());
    v.push_back(detail::make_max_quad());
    v.push_back(detail::make_ridge_nc());
    v.push_back(detail::make_sqrt_abs());
    return v;
  }();
  return entries;
}

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& fn : catalog()) names.push_back(fn.name);
  return names;
}

inline const CatalogFunction& find_function(const std::string& name) {
  for (const auto& fn : catalog())
    if (fn.name == name) return fn;
  std::string valid;
  for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownNameError("unknown catalog function '" + name + "'; valid names: " + valid);
}

}  // namespace isg
