#pragma once

// Verification batteries behind `isg verify <suite>`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "isg/analysis.hpp"
#include "isg/catalog.hpp"
#include "isg/flow.hpp"
#include "isg/grid.hpp"
#include "isg/report.hpp"
#include "isg/solver.hpp"

namespace isg {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_violation = 0.0;
  json details = json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }

  json to_json() const {
    json j{{"suite", suite}, {"pass", pass()}};
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"max_violation", num_json(c.max_violation)},
                             {"details", c.details}});
    return j;
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"lyapunov", "repulsion",     "convex",    "error-bound",
                                              "ekeland",  "numeric-lemma", "exponents", "all"};
  return names;
}

// ---------------------------------------------------------------------------

inline SuiteReport verify_exponents() {
  SuiteReport s{"exponents", {}};
  double worst_identity = 0.0;
  json rows = json::array();
  for (int a : {2, 3, 4}) {
    const CatalogFunction& fn = find_function("power_" + std::to_string(a));
    const double ad = a;
    const double theta = 1.0 - 1.0 / ad, beta = 1.0 / (ad - 1.0);
    const RhoResult r = rho_exponent(theta, beta);
    const double identity_err = std::abs(r.theta_beta_plus_2 - (2.0 - 1.0 / ad));
    const double rho_err = std::abs(r.rho - beta / (2.0 - 1.0 / ad));
    const double catalog_err = std::abs(fn.kl->theta - theta) + std::abs(fn.mr->beta - beta);
    worst_identity = std::max({worst_identity, identity_err, rho_err, catalog_err});
    rows.push_back({{"a", a}, {"theta", theta}, {"beta", beta}, {"rho", r.rho}, {"identity_error", identity_err}});
  }
  s.checks.push_back({"power_identities", worst_identity <= 1e-15, worst_identity, {{"rows", rows}}});

  const double r2 = rho_exponent(0.5, 1.0).rho;
  const double r4 = rho_exponent(0.75, 1.0 / 3.0).rho;
  const RhoResult r0 = rho_exponent(0.0, 0.7);
  const double err = std::max({std::abs(r2 - 2.0 / 3.0), std::abs(r4 - 4.0 / 21.0), std::abs(r0.rho - 0.7)});
  s.checks.push_back({"rho_values", err <= 1e-15 && r0.unit_branch, err,
                      {{"rho_a2", r2}, {"rho_a4", r4}, {"rho_theta0", r0.rho}}});
  return s;
}

inline SuiteReport verify_numeric_lemma(std::uint64_t seed = 2024, std::size_t samples = 10000) {
  SuiteReport s{"numeric-lemma", {}};
  Rng rng(seed);
  std::uniform_real_distribution<double> us(0.0, 10.0), ut(0.0, 1.0), ud(0.0, 100.0);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    double sv = us(rng), tv = ut(rng);
    if (sv == 0.0) sv = 10.0;  // (0, 10]
    if (tv == 0.0) tv = 0.5;
    const NumericLemmaResult r = numeric_lemma_check(sv, tv, ud(rng));
    worst = std::max(worst, r.violation);
    if (!r.holds) ++violations;
  }
  s.checks.push_back({"random_triples", violations == 0, worst, {{"samples", samples}, {"violations", violations}}});
  return s;
}

inline SuiteReport verify_error_bound() {
  SuiteReport s{"error-bound", {}};
  for (const auto& fn : catalog()) {
    if (!fn.convex || !fn.error_bound) continue;
    const ErrorBoundResult r = error_bound_check(fn, default_grid(fn), *fn.error_bound);
    s.checks.push_back({fn.name, r.pass, r.max_violation,
                        {{"a", fn.error_bound->a}, {"c", fn.error_bound->c}, {"points", r.points}}});
  }
  return s;
}

inline SuiteReport verify_ekeland(std::uint64_t seed = 7, std::size_t triples = 100) {
  SuiteReport s{"ekeland", {}};
  std::vector<const CatalogFunction*> one_d;
  for (const auto& fn : catalog())
    if (fn.dim == 1 && !fn.diagnostic) one_d.push_back(&fn);
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), ua(0.1, 0.9);
  std::size_t found = 0;
  double worst = 0.0;
  json misses = json::array();
  for (std::size_t i = 0; i < triples; ++i) {
    const CatalogFunction& fn = *one_d[i % one_d.size()];
    const Vec x{ux(rng)};
    const double a = ua(rng);
    const EkelandResult r = ekeland_witness(fn, x, a, default_grid(fn));
    if (r.found) {
      ++found;
    } else {
      worst = std::max(worst, -std::min(r.norm_margin, r.stationarity_margin));
      misses.push_back({{"function", fn.name}, {"x", x[0]}, {"a", a}});
    }
  }
  s.checks.push_back({"witness_search", found == triples, worst,
                      {{"triples", triples}, {"found", found}, {"misses", misses}}});
  return s;
}

inline SuiteReport verify_convex(unsigned seeds = 5) {
  SuiteReport s{"convex", {}};
  {
    const CatalogFunction& fn = find_function("abs");
    const std::size_t K = 10000;
    const StepSchedule sched = StepSchedule::sqrt_horizon(K);
    const Trajectory t = run(fn, Vec{1.0}, sched, BiasModel::adversarial(0.5), K);
    const ConvexBoundResult r = convex_bound_for_run(fn, t, sched, 0.5);
    const double closed_form = 3.25 / (0.5 * std::sqrt(static_cast<double>(K + 1)));
    const bool ok = r.verdict && r.margin >= 0.0 && r.min_gap <= closed_form;
    s.checks.push_back({"abs_eps0.5_K1e4", ok, -r.margin,
                        {{"lhs", r.lhs}, {"rhs", r.rhs}, {"min_gap", r.min_gap}, {"closed_form", closed_form}}});
  }
  for (const auto& fn : catalog()) {
    if (!fn.convex || !fn.error_bound) continue;
    const double c = fn.error_bound->c;
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double eps : {0.0, 0.1, 0.5 / c}) {
      for (unsigned seed = 0; seed < seeds; ++seed) {
        Rng rng(seed);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        Vec x0(fn.dim);
        for (double& v : x0) v = u(rng);
        const std::size_t K = 2000;
        const StepSchedule sched = StepSchedule::sqrt_horizon(K);
        const BiasModel bias = seed % 2 == 0 ? BiasModel::adversarial(eps) : BiasModel::random_bounded(eps);
        const Trajectory t = run(fn, x0, sched, bias, K, seed);
        const ConvexBoundResult r = convex_bound_for_run(fn, t, sched, eps);
        worst = std::max(worst, -r.margin);
        ok = ok && r.verdict;
      }
    }
    s.checks.push_back({fn.name + "_eps_seed_grid", ok, worst, {{"seeds", seeds}}});
  }
  return s;
}

struct LyapunovCase {
  std::string function;
  double x0;
  double eps;
  BiasKind bias;
  double band_lo, band_hi, delta;
};

inline std::vector<LyapunovCase> lyapunov_cases() {
  std::vector<LyapunovCase> cases;
  for (double eps : {0.0, 0.1}) {
    const std::vector<BiasKind> kinds =
        eps == 0.0 ? std::vector<BiasKind>{BiasKind::none}
                   : std::vector<BiasKind>{BiasKind::adversarial, BiasKind::random_bounded};
    for (BiasKind k : kinds) {
      cases.push_back({"power_2", 1.0, eps, k, 0.0, 1.0, 0.5});
      cases.push_back({"abs", 1.0, eps, k, 0.0, 1.0, 1.5});
      cases.push_back({"abs", 1.0, eps, k, 0.0, 1.0, 0.5});
      cases.push_back({"double_well", 2.0, eps, k, 0.0, 1.0, 0.6});
    }
  }
  return cases;
}

inline SuiteReport verify_lyapunov(double h = 1e-4, double T = 6.0) {
  SuiteReport s{"lyapunov", {}};
  for (const LyapunovCase& c : lyapunov_cases()) {
    const CatalogFunction& fn = find_function(c.function);
    const Curve curve = integrate(fn, Vec{c.x0}, BiasModel{c.bias, c.eps, {}}, T, h, 11);
    const LyapunovReport ly = weak_lyapunov_check(curve, fn, c.eps);
    const QuantitativeResult q = quantitative_estimate_check(curve, fn, c.eps, c.band_lo, c.band_hi, c.delta);
    const bool ok = ly.pass && q.hit_time && *q.hit_time <= q.time_bound;
    s.checks.push_back({c.function + "_eps" + format_double(c.eps) + "_" + to_string(c.bias) + "_delta" +
                            format_double(c.delta),
                        ok, ly.adjusted_violation,
                        {{"raw_violation", ly.raw_violation},
                         {"mesh_violation", ly.mesh_violation},
                         {"jitter", ly.jitter},
                         {"hit_time", q.hit_time ? json(*q.hit_time) : json(nullptr)},
                         {"time_bound", q.time_bound}}});
  }
  return s;
}

/// Tails of 20 double-well runs from seeded initial points in [-3, 3].
inline std::vector<Trajectory> double_well_battery(std::size_t runs = 20, double alpha = 1e-3,
                                                   std::size_t K = 100000, double eps = 0.05) {
  const CatalogFunction& fn = find_function("double_well");
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng rng(1000 + i);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Vec x0{u(rng)};
    const BiasModel bias = i % 2 == 0 ? BiasModel::random_bounded(eps) : BiasModel::adversarial(eps);
    out.push_back(run(fn, x0, StepSchedule::constant(alpha), bias, K, 1000 + i));
  }
  return out;
}

inline CheckResult repulsion_check_result(const std::string& name, const RepulsionReport& r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& run : r.runs) {
    const double over = (r.level + 2.0 * r.eta_hi) - run.tail_min;   // <= 0 needed for "above"
    const double under = run.tail_max - (r.level - 2.0 * r.eta_hi);  // <= 0 needed for "below"
    worst = std::max(worst, std::min(over, under));
  }
  return {name, r.pass, worst,
          {{"level", r.level}, {"eta", r.eta}, {"eta_hi", r.eta_hi}, {"runs", r.runs.size()}}};
}

inline SuiteReport verify_repulsion() {
  SuiteReport s{"repulsion", {}};
  {
    const CatalogFunction& fn = find_function("double_well");
    const auto runs = double_well_battery();
    s.checks.push_back(
        repulsion_check_result("double_well_l0.5", level_repulsion_check(fn, 0.5, 0.05, runs, default_grid(fn))));
  }
  {
    const CatalogFunction& fn = find_function("abs");
    std::vector<Trajectory> runs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const double x0 = seed % 2 == 0 ? 1.0 + 0.5 * static_cast<double>(seed) : -2.0;
      runs.push_back(run(fn, Vec{x0}, StepSchedule::constant(1e-3), BiasModel::random_bounded(0.1), 20000, seed));
    }
    s.checks.push_back(
        repulsion_check_result("abs_l0.3", level_repulsion_check(fn, 0.3, 0.1, runs, default_grid(fn))));
  }
  {
    // Level below every critical value: the liminf branch.
    const CatalogFunction& fn = find_function("ridge_nc");
    std::vector<Trajectory> runs;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
      runs.push_back(run(fn, Vec{0.2, 1.4 + 0.1 * static_cast<double>(seed)}, StepSchedule::constant(1e-3),
                         BiasModel::random_bounded(0.1), 20000, seed));
    s.checks.push_back(
        repulsion_check_result("ridge_nc_l-0.5", level_repulsion_check(fn, -0.5, 0.1, runs, default_grid(fn))));
  }
  return s;
}

inline SuiteReport run_suite(const std::string& name) {
  if (name == "exponents") return verify_exponents();
  if (name == "numeric-lemma") return verify_numeric_lemma();
  if (name == "error-bound") return verify_error_bound();
  if (name == "ekeland") return verify_ekeland();
  if (name == "convex") return verify_convex();
  if (name == "lyapunov") return verify_lyapunov();
  if (name == "repulsion") return verify_repulsion();
  if (name == "all") {
    SuiteReport all{"all", {}};
    for (const auto& n : suite_names()) {
      if (n == "all") continue;
      SuiteReport part = run_suite(n);
      for (auto& c : part.checks) {
        c.name = n + "/" + c.name;
        all.checks.push_back(std::move(c));
      }
    }
    return all;
  }
  std::string valid;
  for (const auto& n : suite_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownNameError("unknown verification suite '" + name + "'; valid suites: " + valid);
}

}  // namespace isg
