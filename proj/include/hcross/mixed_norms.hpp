#pragma once
/**
 * @file mixed_norms.hpp
 * @brief L^{p,2}_k and L^{p,2}_{i,j} norms, their time integrals and the X(T) norm.
 *
 *   ||u||_{L^{p,2}_k}^p     = int ( int |u|^2 dx_1 .. ^dx_k .. dx_N )^{p/2} dx_k
 *   ||u||_{L^{p,2}_{i,j}}   = ||R_{ij} u||_{L^{p,2}} with outer variable r = x_i - x_j
 *
 * Pair convention: each (r, D) checkerboard sample carries the Jacobian 2^{-d}
 * times the D spacing (2 hx)^d, i.e. hx^d, so the pair norm at p = 2 equals
 * the plain L2 norm. For u = f(x_i - x_j) g(x_i + x_j) the pair norm is
 * ||f||_{L^p(0,2L)} ||g||_{L^2(0,2L)} (times the L2 norm of any remaining factor).
 */

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcross/exponents.hpp"
#include "hcross/lattice.hpp"
#include "hcross/pair_coordinates.hpp"

namespace hcross {

/// Per-dimension factor in the pair convention, recorded in reports.
inline constexpr double pair_jacobian_per_dim = PairField::jacobian_per_dim;

namespace detail {

/// (sum_outer F(o)^p w_out)^{1/p} with F(o)^2 = sum_{inner} sum_c |v_c|^2 w_in.
/// `outer_of(flat)` maps a flat index to its outer slot in [0, n_outer).
template <class OuterOf>
double mixed_norm(const std::vector<const std::vector<cplx>*>& comps, OuterOf&& outer_of, std::size_t n_outer,
                  double w_in, double w_out, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  std::vector<double> prof(n_outer, 0.0);
  for (const auto* v : comps)
    for (std::size_t f = 0; f < v->size(); ++f) prof[outer_of(f)] += std::norm((*v)[f]);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double s : prof) m = std::max(m, s);
    return std::sqrt(m * w_in);
  }
  double acc = 0.0;
  for (double s : prof) acc += std::pow(s * w_in, p / 2.0);
  return std::pow(acc * w_out, 1.0 / p);
}

inline std::size_t one_particle_modes(const GridSpec& g) { return static_cast<std::size_t>(std::pow(g.n, g.d)); }

}  // namespace detail

/// ||(u_1, ..., u_m)||_{L^{p,2}_k} for a vector-valued field (sum of |u_c|^2 inside); p may be infinite.
inline double norm_single(const std::vector<WaveState>& comps, int k, double p) {
  if (comps.empty()) throw std::invalid_argument("no components");
  const GridSpec& g = *comps[0].grid;
  if (k < 0 || k >= g.N) throw std::invalid_argument("particle index out of range");
  std::vector<WaveState> sp;
  std::vector<const std::vector<cplx>*> ptr;
  sp.reserve(comps.size());
  for (const auto& c : comps) {
    if (!c.grid->same_as(g)) throw std::invalid_argument("grid mismatch");
    sp.push_back(transform(c, Rep::space));
  }
  for (const auto& c : sp) ptr.push_back(&c.coeffs);
  const std::size_t one = detail::one_particle_modes(g);
  const std::size_t stride = g.stride[g.axis(k, g.d - 1)];
  const double w_out = std::pow(g.hx, g.d);
  const double w_in = std::pow(g.hx, g.d * (g.N - 1));
  return detail::mixed_norm(ptr, [&](std::size_t f) { return (f / stride) % one; }, one, w_in, w_out, p);
}

inline double norm_single(const WaveState& u, int k, double p) { return norm_single(std::vector<WaveState>{u}, k, p); }

/// Pair norm of already resampled components.
inline double norm_pair(const std::vector<PairField>& comps, double p) {
  if (comps.empty()) throw std::invalid_argument("no components");
  const GridSpec& g = *comps[0].grid;
  std::vector<const std::vector<cplx>*> ptr;
  for (const auto& c : comps) ptr.push_back(&c.values);
  const std::size_t one = detail::one_particle_modes(g);
  const std::size_t inner = g.modes / one;  // r axes lead the storage order
  const double w_out = std::pow(g.hx, g.d);
  const double w_in = std::pow(g.hx, g.d * (g.N - 1));
  return detail::mixed_norm(ptr, [&](std::size_t f) { return f / inner; }, one, w_in, w_out, p);
}

/// ||(u_1, ..., u_m)||_{L^{p,2}_{i,j}}.
inline double norm_pair(const std::vector<WaveState>& comps, int i, int j, double p) {
  std::vector<PairField> r;
  for (const auto& c : comps) r.push_back(pair_resample(transform(c, Rep::space), i, j));
  return norm_pair(r, p);
}

inline double norm_pair(const WaveState& u, int i, int j, double p) {
  return norm_pair(std::vector<WaveState>{u}, i, j, p);
}

/// Time-ordered snapshots on a common grid.
struct Trajectory {
  std::vector<WaveState> snapshots;
  std::vector<double> times;

  double T() const { return times.empty() ? 0.0 : times.back(); }
  std::size_t size() const { return snapshots.size(); }
  void push(WaveState u) {
    if (!times.empty() && !(u.t > times.back())) throw std::invalid_argument("times must be strictly increasing");
    if (!snapshots.empty() && !u.grid->same_as(*snapshots.front().grid))
      throw std::invalid_argument("snapshots must share a grid");
    times.push_back(u.t);
    snapshots.push_back(std::move(u));
  }
};

enum class NormFamily { l2, single, pair };

inline std::string to_string(NormFamily f) {
  switch (f) {
    case NormFamily::l2: return "L2";
    case NormFamily::single: return "single";
    case NormFamily::pair: return "pair";
  }
  return "?";
}

struct NormSelector {
  NormFamily family = NormFamily::l2;
  int i = 0, j = 1;
  double p = 2.0;

  double operator()(const WaveState& u) const {
    switch (family) {
      case NormFamily::l2: return l2_norm(u);
      case NormFamily::single: return norm_single(u, i, p);
      case NormFamily::pair: return norm_pair(u, i, j, p);
    }
    return 0.0;
  }
  std::string indices() const {
    if (family == NormFamily::l2) return "";
    if (family == NormFamily::single) return std::to_string(i + 1);
    return std::to_string(i + 1) + "," + std::to_string(j + 1);
  }
};

/// L^theta_t over the snapshot times of a precomputed norm trace (trapezoid; theta = inf gives the max).
inline double spacetime_norm(const std::vector<double>& times, const std::vector<double>& values, double theta) {
  if (times.size() != values.size() || values.empty()) throw std::invalid_argument("empty or mismatched trace");
  if (std::isinf(theta)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }
  if (!(theta >= 1.0)) throw std::invalid_argument("theta must be at least 1");
  if (values.size() < 2) throw std::invalid_argument("finite theta needs at least two snapshots");
  double acc = 0.0;
  for (std::size_t m = 1; m < values.size(); ++m)
    acc += 0.5 * (times[m] - times[m - 1]) * (std::pow(values[m - 1], theta) + std::pow(values[m], theta));
  return std::pow(acc, 1.0 / theta);
}

inline double spacetime_norm(const Trajectory& traj, double theta, const NormSelector& sel) {
  std::vector<double> v;
  v.reserve(traj.size());
  for (const auto& s : traj.snapshots) v.push_back(sel(s));
  return spacetime_norm(traj.times, v, theta);
}

struct NormEntry {
  NormFamily family;
  std::string indices;
  double p;
  double theta;
  double value;
  std::vector<double> trace;  ///< spatial norm per snapshot
};

struct NormReport {
  std::vector<NormEntry> entries;
  double x_value = 0.0;
  double p = 2.0, q = 2.0, theta_p = infinity, theta_q = infinity;
  double T = 0.0;
  int d = 0, N = 0, n = 0;
  double L = 0.0;
  std::vector<double> times;

  nlohmann::json to_json() const {
    auto num = [](double v) -> nlohmann::json {
      if (std::isinf(v)) return "inf";
      return v;
    };
    nlohmann::json j;
    j["x_norm"] = x_value;
    j["metadata"] = {{"p", p},
                     {"q", q},
                     {"theta_p", num(theta_p)},
                     {"theta_q", num(theta_q)},
                     {"T", T},
                     {"grid", {{"d", d}, {"N", N}, {"n", n}, {"L", L}}},
                     {"pair_jacobian", std::pow(pair_jacobian_per_dim, d)},
                     {"pair_outer_variable", "r"},
                     {"extension_p_infinity", std::isinf(p) || std::isinf(q)}};
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
      j["entries"].push_back({{"family", to_string(e.family)},
                              {"indices", e.indices},
                              {"p", num(e.p)},
                              {"theta", num(e.theta)},
                              {"value", e.value}});
    return j;
  }

  /// Columns: t, family, indices, value.
  void write_trace_csv(std::ostream& os) const {
    os << "t,family,indices,value\n";
    os.precision(17);
    for (const auto& e : entries)
      for (std::size_t m = 0; m < e.trace.size(); ++m)
        os << times[m] << ',' << to_string(e.family) << ",\"" << e.indices << "\"," << e.trace[m] << '\n';
  }
};

/// max{ L^inf_t L2, L^{theta_p}_t L^{p,2}_{i,j} (i<j), L^{theta_q}_t L^{q,2}_k } with the table of constituents.
inline NormReport x_norm(const Trajectory& traj, double p, double q) {
  if (traj.size() == 0) throw std::invalid_argument("empty trajectory");
  const GridSpec& g = *traj.snapshots.front().grid;
  NormReport rep;
  rep.p = p;
  rep.q = q;
  rep.theta_p = theta_p(p);
  rep.theta_q = theta_p(q);
  rep.T = traj.T();
  rep.d = g.d;
  rep.N = g.N;
  rep.n = g.n;
  rep.L = g.L;
  rep.times = traj.times;

  auto add = [&](NormSelector sel, double theta) {
    NormEntry e{sel.family, sel.indices(), sel.p, theta, 0.0, {}};
    for (const auto& s : traj.snapshots) e.trace.push_back(sel(s));
    e.value = spacetime_norm(traj.times, e.trace, theta);
    rep.x_value = std::max(rep.x_value, e.value);
    rep.entries.push_back(std::move(e));
  };
  add({NormFamily::l2, 0, 0, 2.0}, infinity);
  for (int i = 0; i < g.N; ++i)
    for (int j = i + 1; j < g.N; ++j) add({NormFamily::pair, i, j, p}, rep.theta_p);
  for (int k = 0; k < g.N; ++k) add({NormFamily::single, k, 0, q}, rep.theta_q);
  return rep;
}

}  // namespace hcross
