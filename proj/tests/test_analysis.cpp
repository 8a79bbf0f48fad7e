#include <gtest/gtest.h>

#include <cmath>

#include <random>

#include "isg/analysis.hpp"

using namespace isg;

TEST(Rho, Examples) {
  const RhoResult a2 = rho_exponent(0.5, 1.0);
  EXPECT_DOUBLE_EQ(a2.theta_beta_plus_2, 1.5);
  EXPECT_NEAR(a2.rho, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(a2.unit_branch);
  const RhoResult t0 = rho_exponent(0.0, 0.37);
  EXPECT_EQ(t0.rho, 0.37);
  EXPECT_TRUE(t0.unit_branch);
  const RhoResult a4 = rho_exponent(0.75, 1.0 / 3.0);
  EXPECT_NEAR(a4.theta_beta_plus_2, 1.75, 1e-15);
  EXPECT_NEAR(a4.rho, 4.0 / 21.0, 1e-15);
}

TEST(Rho, PowerIdentity) {
  for (int a : {2, 3, 4}) {
    const auto r = rho_for(find_function("power_" + std::to_string(a)));
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(r->theta_beta_plus_2, 2.0 - 1.0 / a, 1e-15);
  }
  EXPECT_FALSE(rho_for(find_function("sqrt_abs")).has_value());
}

TEST(Rho, DomainErrors) {
  EXPECT_THROW(rho_exponent(1.0, 1.0), InvalidInputError);
  EXPECT_THROW(rho_exponent(-0.1, 1.0), InvalidInputError);
  EXPECT_THROW(rho_exponent(0.5, 0.0), InvalidInputError);
  EXPECT_THROW(rho_exponent(0.5, std::nan("")), InvalidInputError);
}

TEST(Fluctuation, AbsPeriodTwo) {
  const auto& fn = find_function("abs");
  const Trajectory t = run(fn, Vec{1.0}, StepSchedule::constant(0.4), BiasModel::none(), 100);
  const FluctuationReport r = fluctuation(t, fn, 0.0, 0.5);
  EXPECT_EQ(r.burn_in, 50u);
  EXPECT_NEAR(r.radius, 0.2, 1e-12);
  EXPECT_NEAR(r.value_dist, 0.2, 1e-12);
}

TEST(Fluctuation, FixedPointHasZeroRadius) {
  const auto& fn = find_function("abs");
  for (auto sched : {StepSchedule::constant(0.3), StepSchedule::one_over_k(1.0)}) {
    const Trajectory t = run(fn, Vec{0.0}, sched, BiasModel::none(), 40);
    EXPECT_EQ(fluctuation(t, fn, 0.0).radius, 0.0);
  }
}

TEST(Fluctuation, Power2BiasedFixedPoint) {
  const auto& fn = find_function("power_2");
  const double eps = 0.1, alpha = 0.01;
  const Trajectory t = run(fn, Vec{1.0}, StepSchedule::constant(alpha), BiasModel::adversarial(eps), 10000);
  const FluctuationReport r = fluctuation(t, fn, eps);
  // Fixed point of x -> x - alpha (2x - eps).
  EXPECT_NEAR(r.radius, eps / 2.0, alpha);
  EXPECT_LE(r.value_dist, 1e-12);
}

TEST(Fluctuation, Errors) {
  const auto& fn = find_function("abs");
  const Trajectory t = run(fn, Vec{1.0}, StepSchedule::constant(0.1), BiasModel::none(), 10);
  EXPECT_THROW(fluctuation(t, fn, 0.0, 0.5), InvalidInputError);
  const Trajectory u = run(fn, Vec{1.0}, StepSchedule::constant(0.1), BiasModel::none(), 100);
  EXPECT_THROW(fluctuation(u, fn, 0.0, 0.0), InvalidInputError);
  EXPECT_THROW(fluctuation(u, fn, 0.0, 1.0), InvalidInputError);
}

TEST(Sweep, Power2Adversarial) {
  const auto& fn = find_function("power_2");
  SweepSpec spec;
  spec.epsilons = {0.025, 0.2, 0.05, 0.1};
  spec.alpha = AlphaSpec::rule(0.1, 2.0);
  spec.x0 = {1.0};
  spec.bias = BiasKind::adversarial;
  spec.iterations = 100000;
  const SweepTable t = sweep(fn, spec);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(t.rows[0].epsilon, 0.2);
  EXPECT_DOUBLE_EQ(t.rows[3].epsilon, 0.025);
  // While x > 0 the recursion is x - eps/2 -> (1 - 2 alpha)(x - eps/2), so the
  // tail supremum sits at the burn-in index 50000.
  std::vector<double> lx, ly;
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r.alpha, r.epsilon * r.epsilon / 10.0, 1e-18);
    const double predicted = r.epsilon / 2.0 + (1.0 - r.epsilon / 2.0) * std::pow(1.0 - 2.0 * r.alpha, 50000.0);
    EXPECT_NEAR(r.radius, predicted, 1e-9);
    EXPECT_GE(r.radius, r.epsilon / 2.0);
    lx.push_back(std::log(r.epsilon));
    ly.push_back(std::log(predicted));
  }
  const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4.0, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  ASSERT_TRUE(t.fit.has_value());
  EXPECT_NEAR(t.fit->slope, sxy / sxx, 1e-6);
  EXPECT_GT(t.fit->slope, 0.9);
  EXPECT_FALSE(t.fit->spans_decade);
  EXPECT_NE(t.fit_note.find("decade"), std::string::npos);
  EXPECT_TRUE(*t.slope_ok);
  EXPECT_TRUE(*t.bound_ok);
  EXPECT_TRUE(*t.consistent);
}

TEST(Sweep, AbsRadiusScalesWithAlpha) {
  const auto& fn = find_function("abs");
  SweepSpec spec;
  spec.epsilons = {0.5, 0.3, 0.1};
  spec.alpha = AlphaSpec::list({0.1, 0.01});
  spec.x0 = {1.0};
  spec.iterations = 20000;
  const SweepTable t = sweep(fn, spec);
  ASSERT_EQ(t.rows.size(), 6u);
  for (std::size_t i = 0; i < t.rows.size(); i += 2) {
    EXPECT_EQ(t.rows[i].alpha, 0.1);
    EXPECT_LE(t.rows[i].radius, 0.1);
    EXPECT_LE(t.rows[i + 1].radius, 0.01);
    EXPECT_LT(t.rows[i + 1].radius, t.rows[i].radius);
  }
}

TEST(Sweep, SingleEpsilonRefusesFit) {
  SweepSpec spec;
  spec.epsilons = {0.1};
  spec.alpha = AlphaSpec::list({0.01});
  spec.x0 = {1.0};
  const SweepTable t = sweep(find_function("power_2"), spec);
  EXPECT_EQ(t.rows.size(), 1u);
  EXPECT_FALSE(t.fit.has_value());
  EXPECT_FALSE(t.consistent.has_value());
  EXPECT_NE(t.fit_note.find("refused"), std::string::npos);
}

TEST(Sweep, DivergedCellFlaggedAndExcluded) {
  SweepSpec spec;
  spec.epsilons = {0.2, 0.1, 0.05};
  spec.alpha = AlphaSpec::list({5.0, 0.001});
  spec.x0 = {1.0};
  spec.iterations = 20000;
  const SweepTable t = sweep(find_function("power_2"), spec);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.diverged, r.alpha == 5.0);
    if (r.diverged) {
      EXPECT_TRUE(std::isinf(r.radius));
    }
  }
  ASSERT_TRUE(t.fit.has_value());
  EXPECT_EQ(t.fit->points, 3u);
  EXPECT_TRUE(std::isfinite(t.fit->slope));
}

TEST(Sweep, ParallelMatchesSerial) {
  SweepSpec spec;
  spec.epsilons = {0.3, 0.2, 0.1, 0.05};
  spec.alpha = AlphaSpec::list({0.01, 0.003});
  spec.x0 = {0.7, -1.2};
  spec.bias = BiasKind::random_bounded;
  spec.iterations = 4000;
  spec.seed = 77;
  const auto& fn = find_function("ridge_nc");
  const SweepTable a = sweep(fn, spec);
  spec.jobs = 4;
  const SweepTable b = sweep(fn, spec);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].epsilon, b.rows[i].epsilon);
    EXPECT_EQ(a.rows[i].alpha, b.rows[i].alpha);
    EXPECT_EQ(a.rows[i].radius, b.rows[i].radius);
    EXPECT_EQ(a.rows[i].value_dist, b.rows[i].value_dist);
  }
}

TEST(Sweep, Errors) {
  SweepSpec spec;
  spec.alpha = AlphaSpec::list({0.1});
  spec.x0 = {1.0};
  EXPECT_THROW(sweep(find_function("abs"), spec), InvalidInputError);
  spec.epsilons = {0.1};
  spec.alpha = AlphaSpec::list({});
  EXPECT_THROW(sweep(find_function("abs"), spec), InvalidInputError);
}

TEST(Sweep, RadiusMonotoneInEpsilonOnMedians) {
  const auto& fn = find_function("double_well");
  const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  std::vector<std::vector<double>> radii(eps.size());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SweepSpec spec;
    spec.epsilons = eps;
    spec.alpha = AlphaSpec::list({1e-3});
    spec.x0 = {2.0};
    spec.bias = BiasKind::random_bounded;
    spec.iterations = 20000;
    spec.seed = seed;
    const SweepTable t = sweep(fn, spec);
    for (std::size_t i = 0; i < eps.size(); ++i) radii[i].push_back(t.rows[i].radius);
  }
  std::vector<double> med;
  for (auto& r : radii) {
    std::sort(r.begin(), r.end());
    med.push_back(r[2]);
  }
  // Rows run from large to small eps, so medians must not increase down the list.
  for (std::size_t i = 0; i + 1 < med.size(); ++i) EXPECT_LE(med[i + 1], med[i] * 1.05) << i;
}

TEST(Fluctuation, VanishingStepsImproveWithHorizon) {
  for (const auto& fn : catalog()) {
    if (fn.diagnostic) continue;
    for (double eps : {0.0, 0.1}) {
      const BiasModel bias = eps == 0.0 ? BiasModel::none() : BiasModel::adversarial(eps);
      const VCritEps vc = vcrit_for_fluctuation(fn, eps);
      const Vec x0(fn.dim, 0.8);
      const auto sched = StepSchedule::polynomial(0.05, 0.6);
      const double v1 = fluctuation(run(fn, x0, sched, bias, 20000), fn, eps, 0.5, vc).value_dist;
      const double v2 = fluctuation(run(fn, x0, sched, bias, 40000), fn, eps, 0.5, vc).value_dist;
      EXPECT_LE(v2, v1 * (1 + 1e-3) + 1e-15) << fn.name << " eps=" << eps;
    }
  }
}

TEST(ConvexBound, AbsClosedForm) {
  const auto& fn = find_function("abs");
  const std::size_t K = 10000;
  const auto sched = StepSchedule::sqrt_horizon(K);
  const Trajectory t = run(fn, Vec{1.0}, sched, BiasModel::adversarial(0.5), K);
  const ConvexBoundResult r = convex_bound_for_run(fn, t, sched, 0.5);
  const double sq = std::sqrt(static_cast<double>(K + 1));
  EXPECT_NEAR(r.rhs, 3.25 / sq, 1e-12);
  EXPECT_NEAR(r.min_gap_bound, 3.25 / (0.5 * sq), 1e-12);
  EXPECT_NEAR(r.lhs, 0.5 * r.weighted_gap, 1e-15);
  EXPECT_TRUE(r.verdict);
  EXPECT_GE(r.margin, 0.0);
  EXPECT_LE(r.min_gap, r.min_gap_bound);
}

TEST(ConvexBound, ClassicalCaseAndErrors) {
  const std::vector<double> steps{0.5, 0.5}, values{1.0, 0.5};
  const ConvexBoundResult r = convex_bound(1.0, 0.0, {1.0, 1.0}, 1.0, steps, values, 0.0);
  EXPECT_DOUBLE_EQ(r.lhs, r.weighted_gap);  // factor 2 - 1 - 0 = 1
  EXPECT_DOUBLE_EQ(r.rhs, (1.0 + 0.5) / 1.0);
  EXPECT_THROW(convex_bound(1.0, 1.5, {1.0, 1.0}, 1.0, steps, values, 0.0), BoundUndefinedError);
  EXPECT_THROW(convex_bound(1.0, 1.0, {1.0, 1.0}, 1.0, steps, values, 0.0), BoundUndefinedError);
  EXPECT_NO_THROW(convex_bound(1.0, 1.5, {0.5, 1.0}, 1.0, steps, values, 0.0));
  EXPECT_THROW(convex_bound(1.0, 0.1, {1.0, 1.0}, 1.0, steps, std::vector<double>{1.0}, 0.0), InvalidInputError);
  EXPECT_THROW(convex_bound_for_run(find_function("double_well"),
                                    run(find_function("double_well"), Vec{1.0}, StepSchedule::constant(0.1),
                                        BiasModel::none(), 2),
                                    StepSchedule::constant(0.1), 0.0),
               InvalidInputError);
}

TEST(ConvexBound, HoldsAcrossEntriesEpsilonsSeeds) {
  for (const auto& fn : catalog()) {
    if (!fn.convex || !fn.error_bound) continue;
    for (double eps : {0.0, 0.1, 0.5 / fn.error_bound->c}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        Vec x0(fn.dim);
        for (double& v : x0) v = u(rng);
        const std::size_t K = 3000;
        const auto sched = StepSchedule::sqrt_horizon(K);
        const BiasModel bias = seed % 2 ? BiasModel::random_bounded(eps) : BiasModel::adversarial(eps);
        const ConvexBoundResult r = convex_bound_for_run(fn, run(fn, x0, sched, bias, K, seed), sched, eps);
        EXPECT_TRUE(r.verdict) << fn.name << " eps=" << eps << " seed=" << seed;
      }
    }
  }
}

TEST(NumericLemma, Examples) {
  const auto a = numeric_lemma_check(1.0, 0.5, 1.0);
  EXPECT_EQ(a.g, 0.0);
  EXPECT_EQ(a.rhs, 0.0);
  EXPECT_TRUE(a.holds);
  const auto b = numeric_lemma_check(2.0, 0.5, 4.0);
  EXPECT_EQ(b.g, 0.0);
  EXPECT_EQ(b.rhs, 0.0);
  EXPECT_TRUE(b.holds);
  const auto c = numeric_lemma_check(2.0, 0.5, 9.0);
  EXPECT_DOUBLE_EQ(c.g, -3.0);
  EXPECT_DOUBLE_EQ(c.rhs, -2.5);
  EXPECT_TRUE(c.holds);
  EXPECT_THROW(numeric_lemma_check(0.0, 0.5, 1.0), InvalidInputError);
  EXPECT_THROW(numeric_lemma_check(1.0, 1.0, 1.0), InvalidInputError);
  EXPECT_THROW(numeric_lemma_check(1.0, 0.5, -1.0), InvalidInputError);
}

TEST(NumericLemma, RandomTriples) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> us(1e-9, 10.0), ut(1e-9, 1.0 - 1e-9), ud(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) ASSERT_TRUE(numeric_lemma_check(us(rng), ut(rng), ud(rng)).holds);
}

TEST(ErrorBound, Examples) {
  const auto& abs = find_function("abs");
  const ErrorBoundResult ra = error_bound_check(abs, default_grid(abs), *abs.error_bound);
  EXPECT_EQ(ra.max_violation, 0.0);
  EXPECT_TRUE(ra.pass);
  const auto& p2 = find_function("power_2");
  EXPECT_TRUE(error_bound_check(p2, default_grid(p2), *p2.error_bound).pass);
  const auto& mq = find_function("max_quad");
  const ErrorBoundResult rm = error_bound_check(mq, default_grid(mq), *mq.error_bound);
  EXPECT_EQ(rm.points, 801u * 801u);
  EXPECT_TRUE(rm.pass);
  EXPECT_FALSE(error_bound_check(abs, default_grid(abs), {1.0, 0.5}).pass);
  EXPECT_THROW(error_bound_check(find_function("double_well"), default_grid(abs), {1.0, 1.0}), InvalidInputError);
}

TEST(Ekeland, Examples) {
  const auto& p2 = find_function("power_2");
  const Grid g = default_grid(p2);
  const EkelandResult r = ekeland_witness(p2, Vec{2.0}, 0.5, g);
  ASSERT_TRUE(r.found);
  EXPECT_GE(std::abs(r.y[0]), 2.0 - std::sqrt(2.0) - g.spacing(0));
  EXPECT_LE(std::abs(r.y[0]), std::sqrt(2.0) + 1e-12);

  const EkelandResult at_min = ekeland_witness(p2, Vec{0.0}, 0.5, g);
  ASSERT_TRUE(at_min.found);
  EXPECT_EQ(at_min.y[0], 0.0);

  const auto& abs = find_function("abs");
  const EkelandResult ra = ekeland_witness(abs, Vec{4.0}, 0.5, default_grid(abs));
  ASSERT_TRUE(ra.found);
  EXPECT_GE(std::abs(ra.y[0]), 2.0 - default_grid(abs).spacing(0));
}

TEST(Ekeland, Errors) {
  const auto& p2 = find_function("power_2");
  EXPECT_THROW(ekeland_witness(p2, Vec{2.0}, 1.0, default_grid(p2)), InvalidInputError);
  EXPECT_THROW(ekeland_witness(p2, Vec{9.5}, 0.5, default_grid(p2)), InvalidInputError);
}

TEST(Ekeland, RandomOneDimensionalTriples) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), ua(0.1, 0.9);
  for (const char* name : {"abs", "power_2", "power_3", "power_4", "double_well"}) {
    const auto& fn = find_function(name);
    for (int i = 0; i < 10; ++i) EXPECT_TRUE(ekeland_witness(fn, Vec{ux(rng)}, ua(rng), default_grid(fn)).found) << name;
  }
}

TEST(Repulsion, AbsBelowBranch) {
  const auto& fn = find_function("abs");
  std::vector<Trajectory> runs;
  for (std::uint64_t s = 0; s < 4; ++s)
    runs.push_back(run(fn, Vec{s % 2 ? -2.0 : 1.5}, StepSchedule::constant(1e-3), BiasModel::random_bounded(0.1), 10000, s));
  const RepulsionReport r = level_repulsion_check(fn, 0.3, 0.1, runs, default_grid(fn));
  EXPECT_NEAR(r.dist_to_vcrit, 0.3, 1e-3);
  EXPECT_NEAR(r.eta, r.dist_to_vcrit / 16.0, 1e-15);
  EXPECT_TRUE(r.pass);
  for (const auto& rr : r.runs) EXPECT_TRUE(rr.below);
}

TEST(Repulsion, RidgeAboveBranch) {
  const auto& fn = find_function("ridge_nc");
  std::vector<Trajectory> runs{
      run(fn, Vec{0.3, 1.5}, StepSchedule::constant(1e-3), BiasModel::random_bounded(0.1), 10000, 1)};
  const RepulsionReport r = level_repulsion_check(fn, -0.5, 0.1, runs, default_grid(fn));
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.runs[0].above);
}

TEST(Repulsion, DetectsTailStraddlingLevel) {
  // A long run that is cut while still descending through l fails the dichotomy.
  const auto& fn = find_function("double_well");
  std::vector<Trajectory> runs{
      run(fn, Vec{3.0}, StepSchedule::constant(1e-4), BiasModel::none(), 3000)};
  const RepulsionReport r = level_repulsion_check(fn, 2.0, 0.05, runs, default_grid(fn));
  ASSERT_LT(runs[0].values.back(), 2.0);
  ASSERT_GT(runs[0].values[1500], 2.0);
  EXPECT_FALSE(r.pass);
}

TEST(Repulsion, LevelInsideVCritIsInapplicable) {
  const auto& fn = find_function("double_well");
  std::vector<Trajectory> none;
  EXPECT_THROW(level_repulsion_check(fn, 0.001, 0.1, none, default_grid(fn)), InapplicableError);
  EXPECT_THROW(level_repulsion_check(fn, 1.0, 0.1, none, default_grid(fn)), InapplicableError);
}
