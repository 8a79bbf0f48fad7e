#include <gtest/gtest.h>

#include <random>

#include "isg/catalog.hpp"
#include "oracles.hpp"

using namespace isg;

namespace {

// Smallest distance from x to a switching surface of the entry, so the FD
// stencil never straddles a kink.
double kink_distance(const CatalogFunction& fn, const Vec& x) {
  if (fn.name == "abs" || fn.name == "double_well" || fn.name == "sqrt_abs") return std::abs(x[0]);
  if (fn.name == "l1_2d") return std::min(std::abs(x[0]), std::abs(x[1]));
  if (fn.name == "max_quad") return std::abs(x[1]);
  if (fn.name == "ridge_nc") return std::abs(x[0]);
  return std::numeric_limits<double>::infinity();
}

// Both quadratic pieces of max_quad, for FD checks of each active gradient.
double piece_minus(const Vec& x) { return x[0] * x[0] + (x[1] - 1.0) * (x[1] - 1.0); }
double piece_plus(const Vec& x) { return x[0] * x[0] + (x[1] + 1.0) * (x[1] + 1.0); }

}  // namespace

TEST(Catalog, HasRequiredEntries) {
  const auto names = catalog_names();
  for (const char* n : {"abs", "power_2", "power_3", "power_4", "double_well", "l1_2d", "max_quad", "ridge_nc"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST(Catalog, EvalExamples) {
  EXPECT_EQ(eval(find_function("abs"), Vec{0.0}), 0.0);
  EXPECT_EQ(eval(find_function("double_well"), Vec{1.0}), 0.0);
  EXPECT_DOUBLE_EQ(eval(find_function("power_2"), Vec{0.5}), 0.25);
  EXPECT_DOUBLE_EQ(eval(find_function("max_quad"), Vec{0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(eval(find_function("ridge_nc"), Vec{-2.0, 0.0}), 3.0);
  EXPECT_THROW(eval(find_function("abs"), Vec{1.0, 2.0}), InvalidInputError);
}

TEST(Catalog, ClarkeExamples) {
  const auto& abs = find_function("abs");
  const Polytope at0 = clarke(abs, Vec{0.0});
  ASSERT_EQ(at0.size(), 2u);
  EXPECT_EQ(at0.vertex(0), Vec{-1.0});
  EXPECT_EQ(at0.vertex(1), Vec{1.0});
  const Polytope at_half = clarke(abs, Vec{0.5});
  ASSERT_EQ(at_half.size(), 1u);
  EXPECT_EQ(at_half.vertex(0), Vec{1.0});
  EXPECT_THROW(clarke(abs, Vec{}), InvalidInputError);
}

TEST(Catalog, MaxQuadOriginHullMatchesPieceGradients) {
  const auto& fn = find_function("max_quad");
  const Polytope P = clarke(fn, Vec{0.0, 0.0});
  ASSERT_EQ(P.size(), 2u);
  const Vec gm = oracle::central_difference(piece_minus, {0.0, 0.0});
  const Vec gp = oracle::central_difference(piece_plus, {0.0, 0.0});
  std::vector<Vec> expected{gm, gp};
  std::sort(expected.begin(), expected.end());
  std::vector<Vec> got = P.vertices();
  std::sort(got.begin(), got.end());
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(got[i][k], expected[i][k], 1e-8);
  EXPECT_NEAR(got[0][1], -2.0, 1e-12);
  EXPECT_NEAR(got[1][1], 2.0, 1e-12);
}

TEST(Catalog, DistToCritExamples) {
  EXPECT_DOUBLE_EQ(dist_to_crit(find_function("double_well"), Vec{0.5}), 0.5);
  EXPECT_DOUBLE_EQ(dist_to_crit(find_function("abs"), Vec{-0.2}), 0.2);
  // Enumerate the three critical points of ridge_nc by hand.
  const double ref = std::min({std::hypot(0.3, 0.9 + 1.0), std::hypot(0.3, 0.9), std::hypot(0.3, 0.9 - 1.0)});
  EXPECT_NEAR(dist_to_crit(find_function("ridge_nc"), Vec{0.3, 0.9}), ref, 1e-15);
  EXPECT_NEAR(ref, std::sqrt(0.1), 1e-15);
}

TEST(Catalog, SmoothPointGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (const auto& fn : catalog()) {
    std::uniform_real_distribution<double> u(-9.0, 9.0);
    int checked = 0;
    while (checked < 200) {
      Vec x(fn.dim);
      for (double& c : x) c = u(rng);
      if (kink_distance(fn, x) < 1e-3) continue;
      const Polytope P = clarke(fn, x);
      ASSERT_EQ(P.size(), 1u) << fn.name;
      const Vec fd = oracle::central_difference([&](const Vec& y) { return fn.value(y); }, x, 1e-6);
      const Vec& g = P.vertex(0);
      const double scale = std::max(1.0, oracle::norm(fd));
      for (std::size_t i = 0; i < fn.dim; ++i) EXPECT_NEAR(g[i], fd[i], 1e-6 * scale) << fn.name;
      ++checked;
    }
  }
}

TEST(Catalog, CriticalPointsAreStationary) {
  for (const auto& fn : catalog())
    for (const auto& c : fn.crit_points) EXPECT_LE(dist_origin(clarke(fn, c)), 1e-10) << fn.name;
}

TEST(Catalog, CriticalValuesAreImagesOfCriticalPoints) {
  for (const auto& fn : catalog()) {
    std::vector<double> v;
    for (const auto& c : fn.crit_points) v.push_back(fn.value(c));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    EXPECT_EQ(v, fn.crit_values) << fn.name;
  }
  EXPECT_EQ(find_function("double_well").crit_values, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(find_function("ridge_nc").crit_values, (std::vector<double>{0.0, 1.0}));
}

TEST(Catalog, LipschitzConstantOnRandomPairs) {
  std::mt19937_64 rng(2);
  for (const auto& fn : catalog()) {
    if (!std::isfinite(fn.lipschitz_on_box)) continue;
    for (int i = 0; i < 5000; ++i) {
      Vec x(fn.dim), y(fn.dim);
      for (std::size_t k = 0; k < fn.dim; ++k) {
        std::uniform_real_distribution<double> u(fn.lipschitz_box.lo[k], fn.lipschitz_box.hi[k]);
        x[k] = u(rng);
        // Nearby pairs too, where the local slope is realised.
        y[k] = i % 2 == 0 ? u(rng) : std::clamp(x[k] + 1e-3 * (u(rng) / 10.0), fn.lipschitz_box.lo[k],
                                               fn.lipschitz_box.hi[k]);
      }
      EXPECT_LE(std::abs(fn.value(x) - fn.value(y)), fn.lipschitz_on_box * dist(x, y) * (1 + 1e-12) + 1e-15)
          << fn.name;
    }
  }
}

TEST(Catalog, LipschitzConstantIsNearlySharp) {
  // The bound is attained at a box corner on each entry (up to the kink term).
  for (const auto& fn : catalog()) {
    if (!std::isfinite(fn.lipschitz_on_box)) continue;
    const Vec corner = fn.lipschitz_box.hi;
    EXPECT_GE(clarke(fn, corner).max_norm(), 0.9 * fn.lipschitz_on_box) << fn.name;
  }
}

TEST(Catalog, ExponentMetadata) {
  for (int a : {2, 3, 4}) {
    const auto& fn = find_function("power_" + std::to_string(a));
    EXPECT_DOUBLE_EQ(fn.kl->theta, 1.0 - 1.0 / a);
    EXPECT_DOUBLE_EQ(fn.mr->beta, 1.0 / (a - 1.0));
    EXPECT_FALSE(fn.certified_numerically);
  }
  EXPECT_EQ(find_function("abs").kl->theta, 0.0);
  EXPECT_TRUE(find_function("max_quad").certified_numerically);
  EXPECT_TRUE(find_function("ridge_nc").certified_numerically);
  for (const auto& fn : catalog()) {
    if (fn.kl) {
      EXPECT_GE(fn.kl->theta, 0.0);
      EXPECT_LT(fn.kl->theta, 1.0);
      EXPECT_GT(fn.kl->c, 0.0);
    }
    if (fn.mr) {
      EXPECT_GT(fn.mr->beta, 0.0);
      EXPECT_GT(fn.mr->c, 0.0);
    }
    if (fn.error_bound) {
      EXPECT_TRUE(fn.convex);
      EXPECT_GT(fn.error_bound->a, 0.0);
      EXPECT_LE(fn.error_bound->a, 1.0);
    }
  }
}

TEST(Catalog, ErrorBoundAlgebraOnPower2) {
  // (c/2)((x^2)^(1/2) + x^2) = |x| + x^2 >= |x|.
  const auto& eb = *find_function("power_2").error_bound;
  EXPECT_DOUBLE_EQ(eb.a, 0.5);
  EXPECT_DOUBLE_EQ(eb.c, 2.0);
}

TEST(Catalog, UnknownNameListsValidNames) {
  try {
    find_function("foo");
    FAIL() << "expected UnknownNameError";
  } catch (const UnknownNameError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("foo"), std::string::npos);
    for (const auto& n : catalog_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
}

TEST(Catalog, DiagnosticEntry) {
  const auto& fn = find_function("sqrt_abs");
  EXPECT_TRUE(fn.diagnostic);
  EXPECT_FALSE(fn.kl.has_value());
  EXPECT_NEAR(clarke(fn, Vec{25.0}).vertex(0)[0], 0.1, 1e-15);
  EXPECT_LE(dist_origin(clarke(fn, Vec{0.0})), 0.0);
}

TEST(Catalog, ActivityToleranceIsTight) {
  const auto& fn = find_function("l1_2d");
  EXPECT_EQ(clarke(fn, Vec{0.0, 0.0}).size(), 4u);
  EXPECT_EQ(clarke(fn, Vec{1e-13, 1.0}).size(), 2u);
  EXPECT_EQ(clarke(fn, Vec{1e-11, 1.0}).size(), 1u);
  EXPECT_EQ(clarke(fn, Vec{1e-3, 1.0}, 1e-2).size(), 2u);
}
