#pragma once

// Grid approximations of crit_eps f = {x : dist(0, df(x)) <= eps} and of its
// image vcrit_eps f, plus the numeric exponent certificates built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "isg/catalog.hpp"
#include "isg/errors.hpp"
#include "isg/polytope.hpp"
#include "isg/vec.hpp"

namespace isg {

/// Uniform tensor grid over a box with `resolution` nodes per axis.
struct Grid {
  Box box;
  std::size_t resolution = 2;

  std::size_t dim() const { return box.dim(); }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < dim(); ++i) n *= resolution;
    return n;
  }

  double spacing(std::size_t axis) const {
    return (box.hi[axis] - box.lo[axis]) / static_cast<double>(resolution - 1);
  }

  /// Half-diagonal of one cell: every box point lies this close to a node.
  double half_cell_diagonal() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) s += spacing(i) * spacing(i);
    return 0.5 * std::sqrt(s);
  }

  // Node coordinates are lo + (hi - lo) * i / (n - 1) so symmetric boxes hit 0 exactly.
  double coord(std::size_t axis, std::size_t i) const {
    const double t = static_cast<double>(i) / static_cast<double>(resolution - 1);
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * t;
  }

  void node(std::size_t flat, Vec& out) const {
    out.resize(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      out[a] = coord(a, flat % resolution);
      flat /= resolution;
    }
  }

  Vec node(std::size_t flat) const {
    Vec v;
    node(flat, v);
    return v;
  }

  bool on_boundary(std::size_t flat) const {
    for (std::size_t a = 0; a < dim(); ++a) {
      const std::size_t i = flat % resolution;
      if (i == 0 || i + 1 == resolution) return true;
      flat /= resolution;
    }
    return false;
  }

  void validate() const {
    if (resolution < 2) throw InvalidInputError("Grid: resolution must be >= 2 per axis");
    if (box.lo.size() != box.hi.size() || box.lo.empty())
      throw InvalidInputError("Grid: malformed box");
    for (std::size_t a = 0; a < dim(); ++a)
      if (!(box.lo[a] < box.hi[a]) || !std::isfinite(box.lo[a]) || !std::isfinite(box.hi[a]))
        throw InvalidInputError("Grid: box must be bounded and nondegenerate");
  }
};

/// [-10, 10]^p with 4001 nodes per axis for p = 1 and 801 for p = 2.
inline Grid default_grid(const CatalogFunction& fn) {
  const std::size_t res = fn.dim == 1 ? 4001 : (fn.dim == 2 ? 801 : 61);
  return Grid{Box::cube(fn.dim, -10.0, 10.0), res};
}

inline Grid make_grid(const CatalogFunction& fn, double lo, double hi, std::size_t resolution) {
  return Grid{Box::cube(fn.dim, lo, hi), resolution};
}

struct ValueInterval {
  double lo = 0.0;
  double hi = 0.0;

  double distance(double v) const {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  }
};

/// Full scan of dist(0, df) over a grid.
struct CritEpsScan {
  Grid grid;
  double epsilon = 0.0;
  std::vector<double> stationarity;  // dist(0, df(node)) for every node
  std::vector<double> values;        // f(node)
  std::vector<std::uint8_t> member;  // node in crit_eps f

  std::size_t member_count() const {
    return static_cast<std::size_t>(std::count(member.begin(), member.end(), std::uint8_t{1}));
  }
};

// Min-norm roundoff (about 1e-16 at kinks) must not drop exact critical points.
inline constexpr double kMembershipTol = 1e-12;

inline CritEpsScan scan_crit_eps(const CatalogFunction& fn, double eps, const Grid& grid) {
  if (!(eps >= 0.0)) throw InvalidInputError("scan_crit_eps: eps must be >= 0");
  grid.validate();
  require_dim(grid.box.lo, fn.dim, "scan_crit_eps box");
  CritEpsScan scan;
  scan.grid = grid;
  scan.epsilon = eps;
  const std::size_t n = grid.node_count();
  scan.stationarity.resize(n);
  scan.values.resize(n);
  scan.member.resize(n);
  Vec x;
  for (std::size_t k = 0; k < n; ++k) {
    grid.node(k, x);
    scan.values[k] = fn.value(x);
    scan.stationarity[k] = dist_origin(clarke(fn, x));
    scan.member[k] = scan.stationarity[k] <= eps + kMembershipTol ? 1 : 0;
  }
  return scan;
}

inline std::vector<Vec> crit_eps_grid(const CatalogFunction& fn, double eps, const Grid& grid) {
  const CritEpsScan scan = scan_crit_eps(fn, eps, grid);
  std::vector<Vec> out;
  for (std::size_t k = 0; k < scan.member.size(); ++k)
    if (scan.member[k]) out.push_back(grid.node(k));
  return out;
}

namespace detail {

// Connected components of the member mask (full 3^p - 1 neighborhood), each
// mapped to [min f, max f] over the component.
inline std::vector<ValueInterval> component_intervals(const CritEpsScan& scan) {
  const Grid& g = scan.grid;
  const std::size_t n = scan.member.size();
  const std::size_t p = g.dim();
  const std::size_t res = g.resolution;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<ValueInterval> out;
  std::vector<std::size_t> stack;
  std::vector<std::size_t> idx(p), nb(p);
  for (std::size_t start = 0; start < n; ++start) {
    if (!scan.member[start] || seen[start]) continue;
    ValueInterval iv{scan.values[start], scan.values[start]};
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      iv.lo = std::min(iv.lo, scan.values[cur]);
      iv.hi = std::max(iv.hi, scan.values[cur]);
      std::size_t r = cur;
      for (std::size_t a = 0; a < p; ++a) {
        idx[a] = r % res;
        r /= res;
      }
      std::size_t combos = 1;
      for (std::size_t a = 0; a < p; ++a) combos *= 3;
      for (std::size_t c = 0; c < combos; ++c) {
        std::size_t cc = c;
        bool ok = true;
        bool self = true;
        for (std::size_t a = 0; a < p; ++a) {
          const int off = static_cast<int>(cc % 3) - 1;
          cc /= 3;
          if (off != 0) self = false;
          const long v = static_cast<long>(idx[a]) + off;
          if (v < 0 || v >= static_cast<long>(res)) {
            ok = false;
            break;
          }
          nb[a] = static_cast<std::size_t>(v);
        }
        if (!ok || self) continue;
        std::size_t flat = 0;
        for (std::size_t a = p; a-- > 0;) flat = flat * res + nb[a];
        if (scan.member[flat] && !seen[flat]) {
          seen[flat] = 1;
          stack.push_back(flat);
        }
      }
    }
    out.push_back(iv);
  }
  std::sort(out.begin(), out.end(), [](const ValueInterval& a, const ValueInterval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<ValueInterval> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  return merged;
}

}  // namespace detail

/// vcrit_eps f approximated as a finite union of value intervals.
struct VCritEps {
  std::vector<ValueInterval> intervals;
  double epsilon = 0.0;
  // Upper bound on how far a true epsilon-critical value can sit outside the
  // grid intervals: local gradient bound times the half cell diagonal.
  double cell_uncertainty = 0.0;

  bool empty() const { return intervals.empty(); }

  double distance(double v) const {
    if (intervals.empty()) throw EmptySetError("vcrit_eps: grid approximation is empty");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& iv : intervals) best = std::min(best, iv.distance(v));
    return best;
  }

  bool contains(double v) const { return !intervals.empty() && distance(v) == 0.0; }
};

inline VCritEps vcrit_eps_from_scan(const CatalogFunction& fn, const CritEpsScan& scan) {
  VCritEps out;
  out.epsilon = scan.epsilon;
  out.intervals = detail::component_intervals(scan);
  // Gradient bound over member nodes and their axis neighbours.
  const Grid& g = scan.grid;
  double local_lip = 0.0;
  Vec x;
  for (std::size_t k = 0; k < scan.member.size(); ++k) {
    if (!scan.member[k]) continue;
    g.node(k, x);
    for (std::size_t a = 0; a < g.dim(); ++a) {
      for (double off : {-1.0, 0.0, 1.0}) {
        Vec y = x;
        y[a] += off * g.spacing(a);
        local_lip = std::max(local_lip, clarke(fn, y).max_norm());
      }
    }
  }
  out.cell_uncertainty = local_lip * g.half_cell_diagonal();
  return out;
}

inline VCritEps vcrit_eps(const CatalogFunction& fn, double eps, const Grid& grid) {
  return vcrit_eps_from_scan(fn, scan_crit_eps(fn, eps, grid));
}

/// Distance from v to the grid approximation of f(crit_eps f).
inline double dist_value_to_vcrit_eps(const CatalogFunction& fn, double v, double eps,
                                      const Grid& grid) {
  const VCritEps vc = vcrit_eps(fn, eps, grid);
  if (vc.empty())
    throw EmptySetError(fn.name + ": crit_eps grid approximation is empty at eps = " +
                        std::to_string(eps));
  return vc.distance(v);
}

struct BoundednessVerdict {
  bool bounded = true;
  std::vector<Vec> witnesses;  // crit_eps nodes on the outer shell of the box
  std::size_t member_count = 0;
};

/// Bounded unless some node of the outermost grid layer lies in crit_eps f.
inline BoundednessVerdict check_crit_eps_bounded(const CatalogFunction& fn, double eps,
                                                 const Grid& grid) {
  const CritEpsScan scan = scan_crit_eps(fn, eps, grid);
  BoundednessVerdict v;
  v.member_count = scan.member_count();
  for (std::size_t k = 0; k < scan.member.size(); ++k) {
    if (scan.member[k] && grid.on_boundary(k)) {
      v.bounded = false;
      if (v.witnesses.size() < 16) v.witnesses.push_back(grid.node(k));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Exponent certificates on the band f^-1(vcrit_band f).

struct BandSample {
  std::vector<std::size_t> nodes;  // flat node indices in the band
  CritEpsScan scan;
};

/// Nodes whose value falls inside the grid approximation of vcrit_band f,
/// subsampled deterministically to at most `max_points`.
inline BandSample band_nodes(const CatalogFunction& fn, double band, const Grid& grid,
                             std::size_t max_points = 10000) {
  BandSample out;
  out.scan = scan_crit_eps(fn, band, grid);
  const VCritEps vc = vcrit_eps_from_scan(fn, out.scan);
  std::vector<std::size_t> all;
  for (std::size_t k = 0; k < out.scan.values.size(); ++k)
    if (!vc.empty() && vc.contains(out.scan.values[k])) all.push_back(k);
  if (all.size() <= max_points) {
    out.nodes = std::move(all);
  } else {
    const double stride = static_cast<double>(all.size()) / static_cast<double>(max_points);
    for (std::size_t i = 0; i < max_points; ++i)
      out.nodes.push_back(all[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
  }
  return out;
}

struct CertificateResult {
  std::size_t points = 0;
  double max_violation = 0.0;  // max over band of lhs - rhs
  double required_c = 0.0;     // smallest constant making every checked point pass
};

inline CertificateResult kl_certificate(const CatalogFunction& fn, const KLParams& kl,
                                        const Grid& grid, std::size_t max_points = 10000) {
  const BandSample band = band_nodes(fn, kl.valid_band, grid, max_points);
  CertificateResult r;
  r.points = band.nodes.size();
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k : band.nodes) {
    const double gap = dist_value_to_vcrit(fn, band.scan.values[k]);
    const double s = band.scan.stationarity[k];
    // The inequality is vacuous on f^-1(vcrit f), where 0^0 would appear at theta = 0.
    const double lhs = gap == 0.0 ? 0.0 : std::pow(gap, kl.theta);
    r.max_violation = std::max(r.max_violation, lhs - kl.c * s);
    if (s > 0.0) r.required_c = std::max(r.required_c, lhs / s);
  }
  if (band.nodes.empty()) r.max_violation = 0.0;
  return r;
}

inline CertificateResult mr_certificate(const CatalogFunction& fn, const MRParams& mr,
                                        const Grid& grid, std::size_t max_points = 10000) {
  const BandSample band = band_nodes(fn, mr.valid_band, grid, max_points);
  CertificateResult r;
  r.points = band.nodes.size();
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k : band.nodes) {
    const Vec x = grid.node(k);
    const double d = dist_to_crit(fn, x);
    const double s = band.scan.stationarity[k];
    const double rhs = mr.c * std::pow(s, mr.beta);
    r.max_violation = std::max(r.max_violation, d - rhs);
    if (s > 0.0) r.required_c = std::max(r.required_c, d / std::pow(s, mr.beta));
  }
  if (band.nodes.empty()) r.max_violation = 0.0;
  return r;
}

}  // namespace isg
