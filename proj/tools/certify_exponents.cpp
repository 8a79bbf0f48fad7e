// Grid certificate of the KL and metric-regularity constants of every catalog
// entry. Prints the smallest constant each grid check needs and the value
// after a 1.25 safety factor.

#include <cstdio>

#include "isg/catalog.hpp"
#include "isg/grid.hpp"

int main() {
  constexpr double kSafety = 1.25;
  std::printf("%-12s %-3s %10s %8s %14s %14s %14s\n", "function", "", "exponent", "points", "catalog_c",
              "required_c", "suggested_c");
  int failures = 0;
  for (const auto& fn : isg::catalog()) {
    const isg::Grid grid = isg::default_grid(fn);
    if (fn.kl) {
      const auto r = isg::kl_certificate(fn, *fn.kl, grid);
      std::printf("%-12s %-3s %10.4g %8zu %14.6g %14.6g %14.6g\n", fn.name.c_str(), "KL", fn.kl->theta, r.points,
                  fn.kl->c, r.required_c, kSafety * r.required_c);
      if (r.required_c > fn.kl->c * (1.0 + 1e-12)) ++failures;
    }
    if (fn.mr) {
      const auto r = isg::mr_certificate(fn, *fn.mr, grid);
      std::printf("%-12s %-3s %10.4g %8zu %14.6g %14.6g %14.6g\n", fn.name.c_str(), "MR", fn.mr->beta, r.points,
                  fn.mr->c, r.required_c, kSafety * r.required_c);
      if (r.required_c > fn.mr->c * (1.0 + 1e-12)) ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
