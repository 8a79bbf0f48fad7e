#pragma once

// Convex hulls of small vertex sets (the Clarke subdifferentials of the
// catalog) and their minimum-norm points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "isg/errors.hpp"
#include "isg/vec.hpp"

namespace isg {

/// Convex hull of a nonempty list of vertices in R^p.
///
/// Duplicate vertices (max-abs difference <= 1e-14) are dropped on
/// construction, keeping the lowest-index copy.
class Polytope {
 public:
  static constexpr double kDedupTol = 1e-14;

  explicit Polytope(std::vector<Vec> vertices) {
    if (vertices.empty()) throw InvalidInputError("Polytope: vertex list is empty");
    const std::size_t p = vertices.front().size();
    if (p == 0) throw InvalidInputError("Polytope: zero-dimensional vertices");
    for (const Vec& v : vertices) {
      if (v.size() != p) throw InvalidInputError("Polytope: vertices differ in dimension");
      if (!all_finite(v)) throw InvalidInputError("Polytope: non-finite vertex");
    }
    vertices_.reserve(vertices.size());
    for (Vec& v : vertices) {
      const bool dup = std::any_of(vertices_.begin(), vertices_.end(), [&](const Vec& kept) {
        for (std::size_t i = 0; i < p; ++i)
          if (std::abs(kept[i] - v[i]) > kDedupTol) return false;
        return true;
      });
      if (!dup) vertices_.push_back(std::move(v));
    }
  }

  static Polytope singleton(Vec v) { return Polytope(std::vector<Vec>{std::move(v)}); }

  std::size_t dim() const { return vertices_.front().size(); }
  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const Vec& vertex(std::size_t i) const { return vertices_[i]; }

  /// Largest vertex norm; an upper bound on the norm of every element.
  double max_norm() const {
    double m = 0.0;
    for (const Vec& v : vertices_) m = std::max(m, norm(v));
    return m;
  }

  /// The hull translated by -w.
  Polytope shifted(std::span<const double> w) const {
    require_dim(w, dim(), "Polytope::shifted");
    std::vector<Vec> out;
    out.reserve(vertices_.size());
    for (const Vec& v : vertices_) out.push_back(sub(v, w));
    return Polytope(std::move(out));
  }

 private:
  std::vector<Vec> vertices_;
};

struct MinNormResult {
  Vec point;
  std::vector<double> weights;  // convex weights over P.vertices()
  int iterations = 0;
  bool used_fallback = false;
};

namespace detail {

constexpr double kWolfeTol = 1e-12;     // squared-norm decrease, relative to max ||p_i||^2
constexpr double kWeightFloor = 1e-15;

inline Vec combine(const std::vector<Vec>& pts, const std::vector<std::size_t>& idx,
                   const std::vector<double>& lam) {
  Vec x(pts.front().size(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) axpy(lam[k], pts[idx[k]], x);
  return x;
}

// Minimizes ||sum mu_k p_k|| over the affine hull of the selected points.
// Returns false when the points are (numerically) affinely dependent.
inline bool affine_minimizer(const std::vector<Vec>& pts, const std::vector<std::size_t>& idx,
                             double scale, std::vector<double>& mu) {
  const std::size_t m = idx.size();
  mu.assign(m, 0.0);
  if (m == 1) {
    mu[0] = 1.0;
    return true;
  }
  const std::size_t q = m - 1;
  const Vec& p0 = pts[idx[0]];
  std::vector<Vec> d(q);
  for (std::size_t i = 0; i < q; ++i) d[i] = sub(pts[idx[i + 1]], p0);
  // Normal equations (D^T D) c = -D^T p0, solved by Cholesky.
  std::vector<double> a(q * q), rhs(q);
  for (std::size_t i = 0; i < q; ++i) {
    rhs[i] = -dot(d[i], p0);
    for (std::size_t j = 0; j <= i; ++j) a[i * q + j] = a[j * q + i] = dot(d[i], d[j]);
  }
  const double pivot_floor = 1e-13 * std::max(scale, std::numeric_limits<double>::min());
  std::vector<double> l(q * q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * q + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * q + k] * l[j * q + k];
      if (i == j) {
        if (s <= pivot_floor) return false;
        l[i * q + i] = std::sqrt(s);
      } else {
        l[i * q + j] = s / l[j * q + j];
      }
    }
  }
  std::vector<double> y(q), c(q);
  for (std::size_t i = 0; i < q; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * q + k] * y[k];
    y[i] = s / l[i * q + i];
  }
  for (std::size_t ii = q; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < q; ++k) s -= l[k * q + ii] * c[k];
    c[ii] = s / l[ii * q + ii];
  }
  double sum_c = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    mu[i + 1] = c[i];
    sum_c += c[i];
  }
  mu[0] = 1.0 - sum_c;
  return true;
}

// Euclidean projection onto the probability simplex.
inline void project_simplex(std::vector<double>& w) {
  std::vector<double> u(w);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  for (double& v : w) v = std::max(v - tau, 0.0);
}

// Accelerated projected gradient on the convex weights; used when the
// active-set iteration degenerates.
inline MinNormResult projected_gradient_min_norm(const std::vector<Vec>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> gram(n * n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) gram[i * n + j] = gram[j * n + i] = dot(pts[i], pts[j]);
    trace += gram[i * n + i];
  }
  const double step = trace > 0.0 ? 1.0 / trace : 1.0;
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), z(w), prev(w), grad(n);
  double t = 1.0;
  int it = 0;
  for (; it < 200000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < n; ++j) g += gram[i * n + j] * z[j];
      grad[i] = g;
    }
    prev = w;
    for (std::size_t i = 0; i < n; ++i) w[i] = z[i] - step * grad[i];
    project_simplex(w);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = w[i] + ((t - 1.0) / t_next) * (w[i] - prev[i]);
      change = std::max(change, std::abs(w[i] - prev[i]));
    }
    t = t_next;
    if (change < 1e-16) break;
  }
  MinNormResult r;
  r.point.assign(pts.front().size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) axpy(w[i], pts[i], r.point);
  r.weights = std::move(w);
  r.iterations = it;
  r.used_fallback = true;
  return r;
}

inline MinNormResult wolfe_min_norm(const std::vector<Vec>& pts, bool& degenerate) {
  const std::size_t n = pts.size();
  const std::size_t p = pts.front().size();
  degenerate = false;
  double scale = 0.0;
  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double nn = dot(pts[i], pts[i]);
    scale = std::max(scale, nn);
    if (nn < best) {
      best = nn;
      start = i;
    }
  }
  std::vector<std::size_t> corral{start};
  std::vector<double> lam{1.0}, mu;
  Vec x = pts[start];
  int iterations = 0;
  const int max_iter = 100 * static_cast<int>(n + p + 1);

  while (iterations++ < max_iter) {
    const double xx = dot(x, x);
    if (xx <= kWolfeTol * scale) break;  // origin reached
    std::size_t j = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = dot(x, pts[i]);
      if (v < lowest) {
        lowest = v;
        j = i;
      }
    }
    if (xx - lowest <= kWolfeTol * scale) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end() || corral.size() > p) {
      degenerate = true;
      break;
    }
    corral.push_back(j);
    lam.push_back(0.0);

    for (;;) {
      if (!affine_minimizer(pts, corral, scale, mu)) {
        degenerate = true;
        break;
      }
      if (std::all_of(mu.begin(), mu.end(), [](double m) { return m > kWeightFloor; })) {
        lam = mu;
        x = combine(pts, corral, lam);
        break;
      }
      double theta = 1.0;
      std::size_t drop = 0;
      for (std::size_t k = 0; k < corral.size(); ++k) {
        if (mu[k] <= kWeightFloor) {
          const double th = lam[k] / (lam[k] - mu[k]);
          if (th < theta) {
            theta = th;
            drop = k;
          }
        }
      }
      for (std::size_t k = 0; k < corral.size(); ++k) lam[k] = (1.0 - theta) * lam[k] + theta * mu[k];
      lam[drop] = 0.0;
      std::vector<std::size_t> keep_idx;
      std::vector<double> keep_lam;
      for (std::size_t k = 0; k < corral.size(); ++k) {
        if (lam[k] > kWeightFloor) {
          keep_idx.push_back(corral[k]);
          keep_lam.push_back(lam[k]);
        }
      }
      const double total = std::accumulate(keep_lam.begin(), keep_lam.end(), 0.0);
      for (double& v : keep_lam) v /= total;
      corral = std::move(keep_idx);
      lam = std::move(keep_lam);
      x = combine(pts, corral, lam);
      if (corral.size() == 1) break;
    }
    if (degenerate) break;
  }
  if (iterations >= max_iter) degenerate = true;

  MinNormResult r;
  r.point = std::move(x);
  r.weights.assign(n, 0.0);
  for (std::size_t k = 0; k < corral.size(); ++k) r.weights[corral[k]] = lam[k];
  r.iterations = iterations;
  return r;
}

// Frank-Wolfe duality gap ||x||^2 - min_i <x, p_i>; zero exactly at the optimum.
inline double optimality_gap(const std::vector<Vec>& pts, std::span<const double> x) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const Vec& v : pts) lowest = std::min(lowest, dot(x, v));
  return dot(x, x) - lowest;
}

}  // namespace detail

/// Minimum-norm point of the hull by Wolfe's active-set method, with a
/// projected-gradient fallback if the corral degenerates.
inline MinNormResult min_norm_solve(const Polytope& poly) {
  const auto& pts = poly.vertices();
  if (pts.size() == 1) return MinNormResult{pts.front(), {1.0}, 0, false};
  bool degenerate = false;
  MinNormResult r = detail::wolfe_min_norm(pts, degenerate);
  if (degenerate) {
    double scale = 0.0;
    for (const Vec& v : pts) scale = std::max(scale, dot(v, v));
    if (detail::optimality_gap(pts, r.point) > 1e-10 * scale) {
      MinNormResult fb = detail::projected_gradient_min_norm(pts);
      if (dot(fb.point, fb.point) < dot(r.point, r.point)) return fb;
    }
  }
  return r;
}

inline Vec min_norm_element(const Polytope& poly) { return min_norm_solve(poly).point; }

/// argmin_{v in P} ||w - v||.
inline Vec project_point(const Polytope& poly, std::span<const double> w) {
  require_dim(w, poly.dim(), "project_point");
  return add(w, min_norm_element(poly.shifted(w)));
}

inline double dist_origin(const Polytope& poly) { return norm(min_norm_element(poly)); }

/// Distance from w to the hull.
inline double dist_to(const Polytope& poly, std::span<const double> w) {
  require_dim(w, poly.dim(), "dist_to");
  return norm(min_norm_element(poly.shifted(w)));
}

}  // namespace isg
