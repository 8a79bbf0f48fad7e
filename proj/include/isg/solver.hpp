#pragma once

// The biased subgradient recursion x_{k+1} = x_k - alpha_k v_eps(x_k).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isg/catalog.hpp"
#include "isg/errors.hpp"
#include "isg/polytope.hpp"
#include "isg/vec.hpp"

namespace isg {

enum class BiasKind { none, fixed, adversarial, random_bounded };

inline const char* to_string(BiasKind k) {
  switch (k) {
    case BiasKind::none: return "none";
    case BiasKind::fixed: return "fixed";
    case BiasKind::adversarial: return "adversarial";
    case BiasKind::random_bounded: return "random_bounded";
  }
  return "?";
}

inline BiasKind parse_bias_kind(const std::string& s) {
  if (s == "none") return BiasKind::none;
  if (s == "fixed") return BiasKind::fixed;
  if (s == "adversarial") return BiasKind::adversarial;
  if (s == "random_bounded") return BiasKind::random_bounded;
  throw ConfigError("unknown bias kind '" + s + "' (none, fixed, adversarial, random_bounded)");
}

/// Rule for the perturbation b added to the selected subgradient; ||b|| <= epsilon.
struct BiasModel {
  BiasKind kind = BiasKind::none;
  double epsilon = 0.0;
  Vec direction;  // unit vector, fixed kind only

  static BiasModel none() { return {}; }
  static BiasModel fixed(double eps, Vec dir) { return {BiasKind::fixed, eps, std::move(dir)}; }
  static BiasModel adversarial(double eps) { return {BiasKind::adversarial, eps, {}}; }
  static BiasModel random_bounded(double eps) { return {BiasKind::random_bounded, eps, {}}; }

  void validate(std::size_t dim) const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
      throw InvalidInputError("BiasModel: epsilon must be finite and >= 0");
    if (kind == BiasKind::fixed) {
      require_dim(direction, dim, "BiasModel direction");
      if (std::abs(norm(direction) - 1.0) > 1e-12)
        throw InvalidInputError("BiasModel: fixed direction must be a unit vector");
    }
  }

  bool operator==(const BiasModel&) const = default;
};

enum class ScheduleKind { constant, sqrt_horizon, one_over_k, polynomial, explicit_list };

/// Step sizes alpha_k > 0.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  double alpha = 0.1;      // constant step or alpha_0
  std::size_t horizon = 0; // sqrt_horizon: alpha_i = 1/sqrt(horizon + 1)
  double exponent = 1.0;   // polynomial: alpha_0 / (k + 1)^exponent
  std::vector<double> steps;

  static StepSchedule constant(double a) { return {ScheduleKind::constant, a, 0, 1.0, {}}; }
  static StepSchedule sqrt_horizon(std::size_t k) { return {ScheduleKind::sqrt_horizon, 0.0, k, 0.5, {}}; }
  static StepSchedule one_over_k(double a0) { return {ScheduleKind::one_over_k, a0, 0, 1.0, {}}; }
  static StepSchedule polynomial(double a0, double p) { return {ScheduleKind::polynomial, a0, 0, p, {}}; }
  static StepSchedule explicit_steps(std::vector<double> s) {
    return {ScheduleKind::explicit_list, 0.0, 0, 1.0, std::move(s)};
  }

  double step(std::size_t k) const {
    switch (kind) {
      case ScheduleKind::constant: return alpha;
      case ScheduleKind::sqrt_horizon: return 1.0 / std::sqrt(static_cast<double>(horizon) + 1.0);
      case ScheduleKind::one_over_k: return alpha / (static_cast<double>(k) + 1.0);
      case ScheduleKind::polynomial: return alpha / std::pow(static_cast<double>(k) + 1.0, exponent);
      case ScheduleKind::explicit_list:
        if (k >= steps.size()) throw InvalidInputError("StepSchedule: explicit list exhausted");
        return steps[k];
    }
    return alpha;
  }

  /// Largest step used over k = 0..K-1.
  double max_step(std::size_t K) const {
    double m = 0.0;
    for (std::size_t k = 0; k < K; ++k) m = std::max(m, step(k));
    return m;
  }

  void validate(std::size_t K) const {
    switch (kind) {
      case ScheduleKind::constant:
      case ScheduleKind::one_over_k:
      case ScheduleKind::polynomial:
        if (!(alpha > 0.0) || !std::isfinite(alpha))
          throw InvalidInputError("StepSchedule: step must be positive");
        if (kind == ScheduleKind::polynomial && !(exponent > 0.0))
          throw InvalidInputError("StepSchedule: polynomial exponent must be positive");
        break;
      case ScheduleKind::sqrt_horizon:
        if (K > horizon + 1) throw InvalidInputError("StepSchedule: sqrt_horizon shorter than run");
        break;
      case ScheduleKind::explicit_list:
        if (steps.size() < K) throw InvalidInputError("StepSchedule: explicit list shorter than run");
        for (double s : steps)
          if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInputError("StepSchedule: steps must be positive");
        break;
    }
  }

  std::string id() const {
    switch (kind) {
      case ScheduleKind::constant: return "constant";
      case ScheduleKind::sqrt_horizon: return "sqrt_horizon";
      case ScheduleKind::one_over_k: return "one_over_k";
      case ScheduleKind::polynomial: return "polynomial";
      case ScheduleKind::explicit_list: return "explicit";
    }
    return "?";
  }

  bool operator==(const StepSchedule&) const = default;
};

/// One run of the recursion. points/values have K+1 entries, oracle_vectors
/// and steps have K; points[k+1] = points[k] - steps[k] * oracle_vectors[k].
struct Trajectory {
  std::vector<Vec> points;
  std::vector<double> values;
  std::vector<Vec> oracle_vectors;
  std::vector<double> steps;
  std::uint64_t seed = 0;

  std::size_t iterations() const { return steps.size(); }
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

inline constexpr double kDivergenceRadius = 1e8;
inline constexpr double kZeroSubgradientTol = 1e-12;

/// Deterministic selection: the min-norm element of the Clarke hull.
inline Vec select_subgradient(const CatalogFunction& fn, std::span<const double> x) {
  return min_norm_element(clarke(fn, x));
}

using Rng = std::mt19937_64;

/// Uniform sample from the closed ball of radius r in R^p.
inline Vec sample_ball(Rng& rng, std::size_t p, double r) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec d(p);
  double n = 0.0;
  while (n == 0.0) {
    for (double& v : d) v = gauss(rng);
    n = norm(d);
  }
  const double radius = r * std::pow(unif(rng), 1.0 / static_cast<double>(p));
  for (double& v : d) v *= radius / n;
  return d;
}

/// Perturbation b for the selected subgradient s; ||b|| <= eps.
inline Vec bias_vector(const BiasModel& bias, std::span<const double> s, Rng& rng) {
  const std::size_t p = s.size();
  switch (bias.kind) {
    case BiasKind::none: return Vec(p, 0.0);
    case BiasKind::fixed: return scaled(bias.direction, bias.epsilon);
    case BiasKind::adversarial: {
      // Min-norm roundoff leaves |s| ~ 1e-16 at kinks whose hull holds 0.
      const double ns = norm(s);
      if (ns <= kZeroSubgradientTol) {
        Vec e(p, 0.0);
        e[0] = bias.epsilon;
        return e;
      }
      return scaled(s, -bias.epsilon / ns);
    }
    case BiasKind::random_bounded: return sample_ball(rng, p, bias.epsilon);
  }
  return Vec(p, 0.0);
}

inline Vec biased_oracle(const CatalogFunction& fn, std::span<const double> x, const BiasModel& bias,
                         Rng& rng) {
  const Vec s = select_subgradient(fn, x);
  return add(s, bias_vector(bias, s, rng));
}

/// K steps of the recursion from x0. Throws DivergedError (with the partial
/// trajectory) on a non-finite iterate or once ||x_k|| exceeds 1e8.
inline Trajectory run(const CatalogFunction& fn, std::span<const double> x0,
                      const StepSchedule& schedule, const BiasModel& bias, std::size_t K,
                      std::uint64_t seed = 0) {
  if (K < 1) throw InvalidInputError("run: K must be >= 1");
  require_dim(x0, fn.dim, "run x0");
  if (!all_finite(x0)) throw InvalidInputError("run: x0 must be finite");
  schedule.validate(K);
  bias.validate(fn.dim);

  Rng rng(seed);
  Trajectory t;
  t.seed = seed;
  t.points.reserve(K + 1);
  t.values.reserve(K + 1);
  t.oracle_vectors.reserve(K);
  t.steps.reserve(K);
  Vec x(x0.begin(), x0.end());
  t.points.push_back(x);
  t.values.push_back(fn.value(x));
  for (std::size_t k = 0; k < K; ++k) {
    const double a = schedule.step(k);
    Vec v = biased_oracle(fn, x, bias, rng);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= a * v[i];
    t.steps.push_back(a);
    t.oracle_vectors.push_back(std::move(v));
    const double fx = fn.value(x);
    t.points.push_back(x);
    t.values.push_back(fx);
    if (!all_finite(x) || !std::isfinite(fx) || norm(x) > kDivergenceRadius) {
      throw DivergedError(fn.name + ": iterate diverged at k = " + std::to_string(k + 1),
                          std::move(t));
    }
  }
  return t;
}

}  // namespace isg
