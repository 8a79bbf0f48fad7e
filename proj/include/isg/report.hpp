#pragma once

// CSV and JSON serialization of trajectories, sweeps and catalog metadata.

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "isg/analysis.hpp"
#include "isg/catalog.hpp"
#include "isg/config.hpp"
#include "isg/solver.hpp"

namespace isg {

using json = nlohmann::ordered_json;

/// JSON has no infinities; non-finite numbers become null.
inline json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (double d : v) a.push_back(num_json(d));
  return a;
}

inline std::string trajectory_csv(const Trajectory& t, const std::string& hash) {
  std::ostringstream out;
  const std::size_t p = t.points.empty() ? 0 : t.points.front().size();
  out << "# config_hash=" << hash << " seed=" << t.seed << "\n";
  out << "k,alpha_k";
  for (std::size_t i = 0; i < p; ++i) out << ",x" << i;
  out << ",f";
  for (std::size_t i = 0; i < p; ++i) out << ",v" << i;
  out << "\n";
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    out << k << ',';
    if (k < t.steps.size()) out << format_double(t.steps[k]);
    for (double x : t.points[k]) out << ',' << format_double(x);
    out << ',' << format_double(t.values[k]);
    for (std::size_t i = 0; i < p; ++i) {
      out << ',';
      if (k < t.oracle_vectors.size()) out << format_double(t.oracle_vectors[k][i]);
    }
    out << "\n";
  }
  return out.str();
}

inline json fluctuation_json(const FluctuationReport& r) {
  return json{{"burn_in", r.burn_in},
              {"radius", num_json(r.radius)},
              {"value_dist", num_json(r.value_dist)},
              {"epsilon", r.epsilon},
              {"alpha", r.alpha}};
}

inline std::string sweep_csv(const SweepTable& t, const std::string& hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash << " seed=" << seed << "\n";
  out << "epsilon,alpha,radius,value_dist,status\n";
  for (const auto& r : t.rows) {
    out << format_double(r.epsilon) << ',' << format_double(r.alpha) << ',';
    if (r.diverged) {
      out << ",,diverged\n";
    } else {
      out << format_double(r.radius) << ',' << format_double(r.value_dist) << ",ok\n";
    }
  }
  return out.str();
}

inline json sweep_json(const SweepTable& t, const std::string& hash, std::uint64_t seed) {
  json j{{"config_hash", hash}, {"seed", seed}, {"function", t.function}, {"bias", t.bias}};
  j["rows"] = json::array();
  for (const auto& r : t.rows)
    j["rows"].push_back({{"epsilon", r.epsilon},
                         {"alpha", r.alpha},
                         {"radius", num_json(r.radius)},
                         {"value_dist", num_json(r.value_dist)},
                         {"diverged", r.diverged}});
  if (t.fit) {
    j["fit"] = {{"slope", t.fit->slope},
                {"fitted_c", t.fit->fitted_c},
                {"points", t.fit->points},
                {"spans_decade", t.fit->spans_decade}};
  } else {
    j["fit"] = nullptr;
  }
  j["fit_note"] = t.fit_note;
  if (t.rho) j["rho"] = {{"rho", t.rho->rho}, {"unit_branch", t.rho->unit_branch}};
  else j["rho"] = nullptr;
  auto opt = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
  j["slope_ok"] = opt(t.slope_ok);
  j["bound_ok"] = opt(t.bound_ok);
  j["consistent"] = opt(t.consistent);
  j["note"] = "alpha -> 0 limit approximated by the smallest-alpha cell per epsilon";
  return j;
}

inline json function_json(const CatalogFunction& fn) {
  json j{{"name", fn.name}, {"description", fn.description}, {"dim", fn.dim}};
  j["crit_points"] = json::array();
  for (const auto& c : fn.crit_points) j["crit_points"].push_back(vec_json(c));
  j["crit_values"] = json::array();
  for (double v : fn.crit_values) j["crit_values"].push_back(v);
  j["lipschitz_on_box"] = num_json(fn.lipschitz_on_box);
  j["lipschitz_box"] = {{"lo", vec_json(fn.lipschitz_box.lo)}, {"hi", vec_json(fn.lipschitz_box.hi)}};
  j["kl"] = fn.kl ? json{{"theta", fn.kl->theta}, {"c", fn.kl->c}, {"valid_band", fn.kl->valid_band}} : json(nullptr);
  j["mr"] = fn.mr ? json{{"beta", fn.mr->beta}, {"c", fn.mr->c}, {"valid_band", fn.mr->valid_band}} : json(nullptr);
  j["error_bound"] = fn.error_bound ? json{{"a", fn.error_bound->a}, {"c", fn.error_bound->c}} : json(nullptr);
  if (auto rho = rho_for(fn)) j["rho"] = rho->rho;
  else j["rho"] = nullptr;
  j["min_value"] = fn.min_value;
  j["convex"] = fn.convex;
  j["coercive"] = fn.coercive;
  j["diagnostic"] = fn.diagnostic;
  j["exponents_certified_numerically"] = fn.certified_numerically;
  return j;
}

inline json catalog_json() {
  json j = json::array();
  for (const auto& fn : catalog()) j.push_back(function_json(fn));
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace isg
