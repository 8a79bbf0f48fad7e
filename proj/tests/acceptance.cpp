// Acceptance battery: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isg/analysis.hpp"
#include "isg/flow.hpp"
#include "isg/polytope.hpp"
#include "isg/verify.hpp"
#include "oracles.hpp"

using namespace isg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string first_failures(const SuiteReport& r) {
  std::string out;
  for (const auto& c : r.checks)
    if (!c.pass) out += " " + c.name + "(" + fmt(c.max_violation) + ")";
  return out;
}

Outcome exponents() {
  const SuiteReport r = verify_exponents();
  double worst = 0.0;
  for (const auto& c : r.checks) worst = std::max(worst, c.max_violation);
  return {r.pass(), "max identity error " + fmt(worst) + first_failures(r)};
}

Outcome convex() {
  const CatalogFunction& fn = find_function("abs");
  const std::size_t K = 10000;
  const StepSchedule sched = StepSchedule::sqrt_horizon(K);
  const Trajectory t = run(fn, Vec{1.0}, sched, BiasModel::adversarial(0.5), K);
  const ConvexBoundResult r = convex_bound_for_run(fn, t, sched, 0.5);
  const double closed_form = 3.25 / (0.5 * std::sqrt(10001.0));
  const bool ok = r.lhs <= r.rhs + 1e-9 && r.margin >= -1e-9 && r.min_gap <= closed_form;
  return {ok, "lhs " + fmt(r.lhs) + " rhs " + fmt(r.rhs) + " min_gap " + fmt(r.min_gap) + " <= " + fmt(closed_form)};
}

Outcome fluctuation_law() {
  SweepSpec spec;
  spec.epsilons = {0.2, 0.1, 0.05, 0.025};
  spec.alpha = AlphaSpec::rule(0.1, 2.0);
  spec.x0 = {1.0};
  spec.bias = BiasKind::adversarial;
  spec.iterations = 100000;
  const SweepTable t = sweep(find_function("power_2"), spec);
  bool ok = t.fit.has_value();
  std::string d;
  for (const auto& row : t.rows) {
    ok = ok && !row.diverged && row.radius <= 0.6 * row.epsilon;
    d += "r(" + fmt(row.epsilon) + ")=" + fmt(row.radius) + " ";
  }
  const double need = 2.0 / 3.0 - 0.1;
  if (t.fit) {
    ok = ok && t.fit->slope >= need;
    d += "slope " + fmt(t.fit->slope) + " >= " + fmt(need);
  } else {
    d += "no fit: " + t.fit_note;
  }
  return {ok, d};
}

Outcome constant_step_band() {
  SweepSpec spec;
  spec.epsilons = {0.0};
  spec.alpha = AlphaSpec::list({0.4, 0.04, 0.004});
  // x0 = 1 is a multiple of 0.04 and 0.004: those runs land on the kink and stop.
  spec.x0 = {std::sqrt(0.5)};
  spec.bias = BiasKind::none;
  spec.iterations = 100000;
  const SweepTable t = sweep(find_function("abs"), spec);
  bool ok = t.rows.size() == 3;
  std::string d;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : t.rows) {
    ok = ok && !row.diverged && row.radius <= row.alpha && row.radius < prev;
    prev = row.radius;
    d += "r(" + fmt(row.alpha) + ")=" + fmt(row.radius) + " ";
  }
  return {ok, d};
}

Outcome lyapunov() {
  const SuiteReport r = verify_lyapunov(1e-4, 6.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : r.checks) worst = std::max(worst, c.max_violation);
  return {r.pass(), std::to_string(r.checks.size()) + " curves, worst adjusted violation " + fmt(worst) +
                        first_failures(r)};
}

Outcome interpolation() {
  std::vector<const CatalogFunction*> fns;
  for (const auto& fn : catalog())
    if (!fn.diagnostic) fns.push_back(&fn);
  Rng rng(31337);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), ulog(std::log(1e-3), std::log(3e-2)), ueps(0.0, 0.2);
  std::uniform_int_distribution<std::size_t> ufn(0, fns.size() - 1), uK(200, 2000);
  std::uniform_int_distribution<int> ubias(0, 2);
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  std::string fails;
  for (int i = 0; i < 20; ++i) {
    const CatalogFunction& fn = *fns[ufn(rng)];
    const double alpha = std::exp(ulog(rng)), eps = ueps(rng);
    const std::size_t K = uK(rng);
    Vec x0(fn.dim);
    for (double& v : x0) v = ux(rng);
    const int b = ubias(rng);
    const BiasModel bias = b == 0 ? BiasModel::none() : b == 1 ? BiasModel::adversarial(eps) : BiasModel::random_bounded(eps);
    const double e = b == 0 ? 0.0 : eps;
    try {
      const Trajectory t = run(fn, x0, StepSchedule::constant(alpha), bias, K, 500 + static_cast<std::uint64_t>(i));
      const DefectReport r = interpolation_defect(t, fn, e);
      const double slack = r.defect - (r.bound + 10.0 * r.mesh_h * r.horizon);
      worst = std::max(worst, slack);
      if (!r.pass) {
        ok = false;
        fails += " " + fn.name + "#" + std::to_string(i);
      }
    } catch (const DivergedError&) {
      ok = false;
      fails += " " + fn.name + "#" + std::to_string(i) + "(diverged)";
    }
  }
  return {ok, "20 configs, worst defect - bound " + fmt(worst) + fails};
}

Outcome repulsion() {
  const CatalogFunction& fn = find_function("double_well");
  const auto runs = double_well_battery(20, 1e-3, 100000, 0.05);
  const RepulsionReport r = level_repulsion_check(fn, 0.5, 0.05, runs, default_grid(fn));
  std::size_t above = 0, below = 0;
  for (const auto& run : r.runs) {
    above += run.above;
    below += run.below;
  }
  return {r.pass, "eta " + fmt(r.eta) + " eta_hi " + fmt(r.eta_hi) + ", " + std::to_string(above) + " above, " +
                      std::to_string(below) + " below of " + std::to_string(r.runs.size())};
}

Outcome error_bound_ekeland() {
  const SuiteReport eb = verify_error_bound();
  double worst = 0.0;
  for (const auto& c : eb.checks) worst = std::max(worst, c.max_violation);
  const SuiteReport ek = verify_ekeland(7, 100);
  const std::size_t found = ek.checks.at(0).details["found"].get<std::size_t>();
  const bool ok = eb.pass() && worst <= 1e-9 && ek.pass();
  return {ok, std::to_string(eb.checks.size()) + " convex entries, max violation " + fmt(worst) + "; ekeland " +
                  std::to_string(found) + "/100" + first_failures(eb) + first_failures(ek)};
}

Outcome numeric_lemma() {
  const SuiteReport r = verify_numeric_lemma(2024, 10000);
  const auto& c = r.checks.at(0);
  return {r.pass(), std::to_string(c.details["violations"].get<std::size_t>()) + " violations in 10000, max " +
                        fmt(c.max_violation)};
}

Outcome polytope_oracle() {
  Rng rng(99);
  std::uniform_int_distribution<int> udim(2, 3), un(1, 8);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ushift(-1.5, 1.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int p = udim(rng), n = un(rng);
    Vec shift(p);
    for (double& s : shift) s = i % 2 == 0 ? 0.0 : ushift(rng);
    std::vector<Vec> pts(n, Vec(p));
    for (auto& v : pts)
      for (int k = 0; k < p; ++k) v[k] = u(rng) + shift[k];
    const Vec got = min_norm_element(Polytope(pts));
    const Vec want = oracle::exact_min_norm(pts);
    double d = 0.0;
    for (int k = 0; k < p; ++k) d = std::max(d, std::abs(got[k] - want[k]));
    worst = std::max(worst, d);
  }
  return {worst <= 1e-6, "1000 sets, max coordinate error " + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exponent identities", 1.0, exponents},
      {2, "convex averaged bound", 1.0, convex},
      {3, "fluctuation law on power_2", 30.0, fluctuation_law},
      {4, "constant-step band on abs", 10.0, constant_step_band},
      {5, "weak Lyapunov and quantitative estimate", 60.0, lyapunov},
      {6, "interpolation defect", 30.0, interpolation},
      {7, "level repulsion", 60.0, repulsion},
      {8, "error bound and Ekeland", 30.0, error_bound_ekeland},
      {9, "numeric lemma", 30.0, numeric_lemma},
      {10, "polytope oracle", 30.0, polytope_oracle},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] criterion %d: %s: %s (%.2fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
