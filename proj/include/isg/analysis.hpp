#pragma once

// Experiment-level measurements: tail fluctuation radii, epsilon sweeps with
// log-log fits, the convex averaged-iterate bound, the error bound, the
// Ekeland-type witness search and level repulsion.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "isg/catalog.hpp"
#include "isg/errors.hpp"
#include "isg/grid.hpp"
#include "isg/polytope.hpp"
#include "isg/solver.hpp"
#include "isg/vec.hpp"

namespace isg {

struct RhoResult {
  double rho = 0.0;
  double theta_beta_plus_2 = 0.0;  // theta * (beta + 2)
  bool unit_branch = false;        // max{theta (beta + 2), 1} attained by 1
};

/// rho = beta / max{theta (beta + 2), 1}.
inline RhoResult rho_exponent(double theta, double beta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw InvalidInputError("rho_exponent: theta must lie in [0, 1)");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInputError("rho_exponent: beta must be positive");
  RhoResult r;
  r.theta_beta_plus_2 = theta * (beta + 2.0);
  r.unit_branch = r.theta_beta_plus_2 <= 1.0;
  r.rho = beta / std::max(r.theta_beta_plus_2, 1.0);
  return r;
}

inline std::optional<RhoResult> rho_for(const CatalogFunction& fn) {
  if (!fn.kl || !fn.mr) return std::nullopt;
  return rho_exponent(fn.kl->theta, fn.mr->beta);
}

// ---------------------------------------------------------------------------

struct FluctuationReport {
  std::size_t burn_in = 0;
  double radius = 0.0;      // sup_{k >= burn_in} dist(x_k, crit f)
  double value_dist = 0.0;  // sup_{k >= burn_in} dist(f(x_k), vcrit_eps f)
  double epsilon = 0.0;
  std::string alpha;        // schedule id or step value
};

/// Value-set used for dist(f(x_k), vcrit_eps f): exact critical values at
/// eps = 0, the grid approximation otherwise.
inline VCritEps vcrit_for_fluctuation(const CatalogFunction& fn, double eps) {
  if (eps == 0.0) {
    VCritEps v;
    for (double c : fn.crit_values) v.intervals.push_back({c, c});
    return v;
  }
  return vcrit_eps(fn, eps, default_grid(fn));
}

inline FluctuationReport fluctuation(const Trajectory& traj, const CatalogFunction& fn, double eps,
                                     double burn_in_fraction, const VCritEps& vcrit) {
  if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0))
    throw InvalidInputError("fluctuation: burn_in_fraction must lie in (0, 1)");
  const std::size_t len = traj.points.size();
  if (static_cast<double>(len) < 10.0 / burn_in_fraction)
    throw InvalidInputError("fluctuation: trajectory shorter than 10 / burn_in_fraction");
  FluctuationReport r;
  r.epsilon = eps;
  r.burn_in = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(len)));
  if (r.burn_in >= len) r.burn_in = len - 1;
  for (std::size_t k = r.burn_in; k < len; ++k) {
    r.radius = std::max(r.radius, dist_to_crit(fn, traj.points[k]));
    r.value_dist = std::max(r.value_dist, vcrit.distance(traj.values[k]));
  }
  return r;
}

inline FluctuationReport fluctuation(const Trajectory& traj, const CatalogFunction& fn, double eps,
                                     double burn_in_fraction = 0.5) {
  return fluctuation(traj, fn, eps, burn_in_fraction, vcrit_for_fluctuation(fn, eps));
}

// ---------------------------------------------------------------------------

/// Constant step per cell: either an explicit alpha grid crossed with the
/// epsilon grid, or alpha = scale * eps^power.
struct AlphaSpec {
  std::vector<double> grid;
  std::optional<double> rule_scale;
  double rule_power = 2.0;

  static AlphaSpec list(std::vector<double> g) { return {std::move(g), std::nullopt, 2.0}; }
  static AlphaSpec rule(double scale, double power) { return {{}, scale, power}; }

  std::vector<double> alphas_for(double eps) const {
    if (rule_scale) return {*rule_scale * std::pow(eps, rule_power)};
    return grid;
  }
  bool operator==(const AlphaSpec&) const = default;
};

struct SweepRow {
  double epsilon = 0.0;
  double alpha = 0.0;
  double radius = 0.0;
  double value_dist = 0.0;
  bool diverged = false;
};

struct SweepFit {
  double slope = 0.0;
  double fitted_c = 0.0;       // exp(intercept)
  std::size_t points = 0;
  bool spans_decade = false;   // max eps / min eps >= 10
};

struct SweepTable {
  std::string function;
  std::string bias;
  std::vector<SweepRow> rows;  // epsilon decreasing, then alpha decreasing
  std::optional<SweepFit> fit;
  std::string fit_note;        // reason a fit was refused, or warnings
  std::optional<RhoResult> rho;
  std::optional<bool> slope_ok;  // slope >= rho - 0.1
  std::optional<bool> bound_ok;  // radius <= fitted_c * eps^rho on every fitted row
  std::optional<bool> consistent;
};

struct SweepSpec {
  std::vector<double> epsilons;
  AlphaSpec alpha;
  Vec x0;
  BiasKind bias = BiasKind::adversarial;
  std::size_t iterations = 1000;
  double burn_in_fraction = 0.5;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

namespace detail {

inline std::optional<SweepFit> fit_loglog(const std::vector<SweepRow>& rows, std::string& note) {
  // One point per epsilon: the smallest-alpha non-diverged cell.
  std::map<double, const SweepRow*> best;
  for (const auto& r : rows) {
    if (r.diverged || !(r.radius > 0.0)) continue;
    auto it = best.find(r.epsilon);
    if (it == best.end() || r.alpha < it->second->alpha) best[r.epsilon] = &r;
  }
  if (best.size() < 3) {
    note = "fit refused: fewer than 3 usable epsilon values";
    return std::nullopt;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [eps, row] : best) {
    const double lx = std::log(eps), ly = std::log(row->radius);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(best.size());
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) {
    note = "fit refused: degenerate epsilon grid";
    return std::nullopt;
  }
  SweepFit f;
  f.points = best.size();
  f.slope = (n * sxy - sx * sy) / den;
  f.fitted_c = std::exp((sy - f.slope * sx) / n);
  f.spans_decade = best.rbegin()->first / best.begin()->first >= 10.0;
  if (!f.spans_decade) note = "warning: epsilon grid spans less than one decade";
  return f;
}

}  // namespace detail

/// Runs every (eps, alpha) cell, distributing cells over `jobs` workers.
/// Rows come back in a fixed order independent of scheduling.
inline SweepTable sweep(const CatalogFunction& fn, const SweepSpec& spec) {
  if (spec.epsilons.empty()) throw InvalidInputError("sweep: empty epsilon grid");
  for (double e : spec.epsilons)
    if (!(e >= 0.0)) throw InvalidInputError("sweep: epsilons must be >= 0");
  if (!spec.alpha.rule_scale && spec.alpha.grid.empty()) throw InvalidInputError("sweep: empty alpha grid");
  require_dim(spec.x0, fn.dim, "sweep x0");

  std::vector<double> eps_sorted = spec.epsilons;
  std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());
  eps_sorted.erase(std::unique(eps_sorted.begin(), eps_sorted.end()), eps_sorted.end());

  SweepTable table;
  table.function = fn.name;
  table.bias = to_string(spec.bias);
  std::map<double, VCritEps> vcrits;
  for (double e : eps_sorted) {
    vcrits.emplace(e, vcrit_for_fluctuation(fn, e));
    std::vector<double> alphas = spec.alpha.alphas_for(e);
    std::sort(alphas.begin(), alphas.end(), std::greater<>());
    for (double a : alphas) table.rows.push_back(SweepRow{e, a, 0.0, 0.0, false});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < table.rows.size(); i = next++) {
      SweepRow& row = table.rows[i];
      BiasModel bias{spec.bias, row.epsilon, {}};
      if (spec.bias == BiasKind::fixed) {
        bias.direction.assign(fn.dim, 0.0);
        bias.direction[0] = 1.0;
      }
      try {
        const Trajectory t =
            run(fn, spec.x0, StepSchedule::constant(row.alpha), bias, spec.iterations, spec.seed);
        const FluctuationReport fr =
            fluctuation(t, fn, row.epsilon, spec.burn_in_fraction, vcrits.at(row.epsilon));
        row.radius = fr.radius;
        row.value_dist = fr.value_dist;
      } catch (const DivergedError&) {
        row.diverged = true;
        row.radius = std::numeric_limits<double>::infinity();
        row.value_dist = std::numeric_limits<double>::infinity();
      }
    }
  };
  const unsigned jobs = std::max(1u, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  table.rho = rho_for(fn);
  table.fit = detail::fit_loglog(table.rows, table.fit_note);
  if (table.fit && table.rho) {
    const double rho = table.rho->rho;
    table.slope_ok = table.fit->slope >= rho - 0.1;
    bool ok = true;
    for (const auto& r : table.rows) {
      if (r.diverged) continue;
      if (r.radius > table.fit->fitted_c * std::pow(r.epsilon, rho) * (1.0 + 1e-12)) ok = false;
    }
    table.bound_ok = ok;
    table.consistent = *table.slope_ok && *table.bound_ok;
  }
  return table;
}

// ---------------------------------------------------------------------------

struct ConvexBoundResult {
  double lhs = 0.0;            // (2 - a - eps c) * weighted mean gap
  double rhs = 0.0;
  double margin = 0.0;         // rhs - lhs
  double weighted_gap = 0.0;   // sum alpha_i gap_i / sum alpha_i
  double min_gap = 0.0;
  double min_gap_bound = 0.0;  // rhs / (2 - a - eps c), +inf when that factor is <= 0
  bool verdict = false;        // lhs <= rhs + 1e-9
};

/// Averaged-iterate bound for convex f with error bound (a, c):
/// (2 - a - eps c) sum alpha_i (f_i - f*) / sum alpha_i
///   <= (1 - a)(eps c)^(1/(1-a)) + (||x0 - x*||^2 + (L + eps)^2 sum alpha_i^2) / sum alpha_i.
inline ConvexBoundResult convex_bound(double L, double eps, const ErrorBoundParams& eb, double x0_dist,
                                      std::span<const double> steps, std::span<const double> values,
                                      double f_star) {
  if (steps.size() != values.size() || steps.empty())
    throw InvalidInputError("convex_bound: steps and values must be nonempty and of equal length");
  if (!(eb.a > 0.0 && eb.a <= 1.0) || !(eb.c > 0.0)) throw InvalidInputError("convex_bound: bad error-bound parameters");
  const double ec = eps * eb.c;
  if (eb.a == 1.0 && ec >= 1.0)
    throw BoundUndefinedError("convex_bound: a = 1 requires eps * c < 1 (got " + std::to_string(ec) + ")");
  double sum_a = 0.0, sum_a2 = 0.0, sum_ag = 0.0;
  ConvexBoundResult r;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double gap = values[i] - f_star;
    sum_a += steps[i];
    sum_a2 += steps[i] * steps[i];
    sum_ag += steps[i] * gap;
    r.min_gap = std::min(r.min_gap, gap);
  }
  const double factor = 2.0 - eb.a - ec;
  const double floor_term = eb.a == 1.0 ? 0.0 : (1.0 - eb.a) * std::pow(ec, 1.0 / (1.0 - eb.a));
  r.weighted_gap = sum_ag / sum_a;
  r.lhs = factor * r.weighted_gap;
  r.rhs = floor_term + (x0_dist * x0_dist + (L + eps) * (L + eps) * sum_a2) / sum_a;
  r.margin = r.rhs - r.lhs;
  r.min_gap_bound = factor > 0.0 ? r.rhs / factor : std::numeric_limits<double>::infinity();
  r.verdict = r.lhs <= r.rhs + 1e-9;
  return r;
}

/// The bound over i = 0..K of a finished run; the step at index K comes from the schedule.
inline ConvexBoundResult convex_bound_for_run(const CatalogFunction& fn, const Trajectory& traj,
                                              const StepSchedule& schedule, double eps) {
  if (!fn.convex || !fn.error_bound) throw InvalidInputError(fn.name + ": not a convex entry with an error bound");
  std::vector<double> steps = traj.steps;
  steps.push_back(schedule.step(traj.steps.size()));
  return convex_bound(fn.lipschitz_on_box, eps, *fn.error_bound, dist_to_argmin(fn, traj.points.front()),
                      steps, traj.values, fn.min_value);
}

// ---------------------------------------------------------------------------

struct NumericLemmaResult {
  double g = 0.0;    // s delta^t - delta
  double rhs = 0.0;  // -(1 - t)(delta - s^(1/(1-t)))
  double violation = 0.0;
  bool holds = false;
};

/// s delta^t - delta <= -(1 - t)(delta - s^(1/(1-t))) for s > 0, t in (0,1), delta >= 0.
inline NumericLemmaResult numeric_lemma_check(double s, double t, double delta) {
  if (!(s > 0.0) || !(t > 0.0 && t < 1.0) || !(delta >= 0.0))
    throw InvalidInputError("numeric_lemma_check: need s > 0, t in (0, 1), delta >= 0");
  NumericLemmaResult r;
  r.g = s * std::pow(delta, t) - delta;
  r.rhs = -(1.0 - t) * (delta - std::pow(s, 1.0 / (1.0 - t)));
  r.violation = r.g - r.rhs;
  r.holds = r.violation <= 1e-12;
  return r;
}

struct ErrorBoundResult {
  double max_violation = -std::numeric_limits<double>::infinity();
  Vec worst_point;
  std::size_t points = 0;
  bool pass = false;  // max_violation <= 1e-9
};

/// max over grid of dist(x, argmin f) - c/2 ((f - min f)^a + (f - min f)).
inline ErrorBoundResult error_bound_check(const CatalogFunction& fn, const Grid& grid,
                                          const ErrorBoundParams& eb) {
  if (fn.argmin_points.empty()) throw InvalidInputError(fn.name + ": no analytic argmin set");
  grid.validate();
  ErrorBoundResult r;
  const std::size_t n = grid.node_count();
  Vec x;
  for (std::size_t k = 0; k < n; ++k) {
    grid.node(k, x);
    const double gap = std::max(0.0, fn.value(x) - fn.min_value);
    const double v = dist_to_argmin(fn, x) - 0.5 * eb.c * (std::pow(gap, eb.a) + gap);
    if (v > r.max_violation) {
      r.max_violation = v;
      r.worst_point = x;
    }
  }
  r.points = n;
  r.pass = r.max_violation <= 1e-9;
  return r;
}

// ---------------------------------------------------------------------------

struct EkelandResult {
  bool found = false;
  Vec y;               // witness, or best candidate when not found
  double norm_margin = 0.0;        // ||y|| - (||x|| - ||x||^a) + cell
  double stationarity_margin = 0.0;  // (f(x) - inf f) - dist(0, df(y)) ||x||^a
};

/// Exhaustive grid search for y with ||y|| >= ||x|| - ||x||^a (one cell of
/// tolerance) and dist(0, df(y)) ||x||^a <= f(x) - inf f.
inline EkelandResult ekeland_witness(const CatalogFunction& fn, std::span<const double> x, double a,
                                     const Grid& grid) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidInputError("ekeland_witness: a must lie in (0, 1)");
  require_dim(x, fn.dim, "ekeland_witness x");
  grid.validate();
  const double nx = norm(x);
  const double lam = std::pow(nx, a);
  for (std::size_t i = 0; i < fn.dim; ++i)
    if (x[i] - lam < grid.box.lo[i] || x[i] + lam > grid.box.hi[i])
      throw InvalidInputError("ekeland_witness: grid does not cover the ball B(x, ||x||^a)");
  double cell = 0.0;
  for (std::size_t i = 0; i < fn.dim; ++i) cell = std::max(cell, grid.spacing(i));
  const double budget = fn.value(x) - fn.min_value;
  const double norm_floor = nx - lam;

  EkelandResult best;
  double best_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& y) {
    const double m1 = norm(y) - norm_floor + cell;
    const double m2 = budget - dist_origin(clarke(fn, y)) * lam;
    const bool ok = m1 >= 0.0 && m2 >= 0.0;
    const double score = std::min(m1, m2);
    if ((ok && !best.found) || (ok == best.found && score > best_score)) {
      best.found = ok;
      best.y = y;
      best.norm_margin = m1;
      best.stationarity_margin = m2;
      best_score = score;
    }
  };
  consider(Vec(x.begin(), x.end()));
  const std::size_t n = grid.node_count();
  Vec y;
  for (std::size_t k = 0; k < n; ++k) {
    grid.node(k, y);
    consider(y);
  }
  return best;
}

// ---------------------------------------------------------------------------

struct RepulsionRun {
  double tail_min = 0.0;
  double tail_max = 0.0;
  bool above = false;  // liminf f > l + 2 eta
  bool below = false;  // limsup f < l - 2 eta
  bool pass = false;
};

struct RepulsionReport {
  double level = 0.0;
  double dist_to_vcrit = 0.0;  // grid distance from l to vcrit_eps f
  double eta = 0.0;            // dist / 16
  double eta_hi = 0.0;         // (dist + cell uncertainty) / 16, used in the verdict
  double eta_lo = 0.0;
  std::vector<RepulsionRun> runs;
  bool pass = false;
};

/// Checks liminf f(x_k) > l + 2 eta or limsup f(x_k) < l - 2 eta on each run's
/// tail, eta = dist(l, vcrit_eps f) / 16.
inline RepulsionReport level_repulsion_check(const CatalogFunction& fn, double l, double eps,
                                             std::span<const Trajectory> runs, const Grid& grid,
                                             double burn_in_fraction = 0.5) {
  const VCritEps vc = vcrit_eps(fn, eps, grid);
  if (vc.empty()) throw EmptySetError(fn.name + ": crit_eps grid approximation is empty");
  RepulsionReport r;
  r.level = l;
  r.dist_to_vcrit = vc.distance(l);
  if (r.dist_to_vcrit <= vc.cell_uncertainty)
    throw InapplicableError("level_repulsion_check: level lies in (or within grid resolution of) vcrit_eps f");
  r.eta = r.dist_to_vcrit / 16.0;
  r.eta_hi = (r.dist_to_vcrit + vc.cell_uncertainty) / 16.0;
  r.eta_lo = (r.dist_to_vcrit - vc.cell_uncertainty) / 16.0;
  r.pass = true;
  for (const Trajectory& t : runs) {
    const std::size_t len = t.values.size();
    const auto start = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(len)));
    RepulsionRun rr;
    rr.tail_min = std::numeric_limits<double>::infinity();
    rr.tail_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = std::min(start, len - 1); k < len; ++k) {
      rr.tail_min = std::min(rr.tail_min, t.values[k]);
      rr.tail_max = std::max(rr.tail_max, t.values[k]);
    }
    rr.above = rr.tail_min > l + 2.0 * r.eta_hi;
    rr.below = rr.tail_max < l - 2.0 * r.eta_hi;
    rr.pass = rr.above || rr.below;
    r.pass = r.pass && rr.pass;
    r.runs.push_back(rr);
  }
  return r;
}

}  // namespace isg
