#pragma once
// Regularized Coulomb fields: nuclear attraction V and pair repulsion W.
//
//   V(t, x) = sum_j sum_mu Z_mu / (|x_j - a_mu(t)| + eps)
//   W(x)    = sum_{j<k} 1 / (|x_k - x_j| + eps)
//
// Distances use the minimum image on the periodic box.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hcross/lattice.hpp"

namespace hcross {

/// a(t) = sum_k coeffs[c][k] t^k per coordinate c.
struct NucleusPath {
  std::vector<std::vector<double>> coeffs;
  double t_begin = 0.0;
  double t_end = INFINITY;

  std::vector<double> at(double t) const {
    if (t < t_begin || t > t_end) throw std::out_of_range("time outside trajectory domain");
    std::vector<double> a(coeffs.size(), 0.0);
    for (std::size_t c = 0; c < coeffs.size(); ++c)
      for (std::size_t k = coeffs[c].size(); k-- > 0;) a[c] = a[c] * t + coeffs[c][k];
    return a;
  }
  bool is_static() const {
    for (const auto& c : coeffs)
      for (std::size_t k = 1; k < c.size(); ++k)
        if (c[k] != 0.0) return false;
    return true;
  }
  static NucleusPath fixed(std::vector<double> position) {
    NucleusPath tr;
    for (double v : position) tr.coeffs.push_back({v});
    return tr;
  }
};

struct Nucleus {
  double Z = 1.0;
  NucleusPath path;
};

struct PotentialSpec {
  std::vector<Nucleus> nuclei;
  double epsilon = 0.1;
  bool pair_interaction = true;

  int M() const { return static_cast<int>(nuclei.size()); }
  double charge_sum() const {
    double s = 0.0;
    for (const auto& nu : nuclei) s += nu.Z;
    return s;
  }
  void validate(int d) const {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
    if (pair_interaction && epsilon == 0.0)
      throw std::invalid_argument("pair interaction requires epsilon > 0");
    for (const auto& nu : nuclei) {
      if (!(nu.Z > 0.0)) throw std::invalid_argument("nuclear charge must be positive");
      if (static_cast<int>(nu.path.coeffs.size()) != d)
        throw std::invalid_argument("trajectory dimension does not match grid");
    }
  }
};

/// Minimum-image displacement on a period 2L.
inline double min_image(double dx, double L) {
  const double P = 2.0 * L;
  dx = std::remainder(dx, P);
  return dx;
}

inline double periodic_distance(std::span<const double> x, std::span<const double> y, double L) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double dx = min_image(x[c] - y[c], L);
    s += dx * dx;
  }
  return std::sqrt(s);
}

/// Z / (|x - a| + eps) for a single particle coordinate; throws on eps = 0, x = a.
inline double coulomb_term(std::span<const double> x, std::span<const double> a, double Z, double eps, double L) {
  const double r = periodic_distance(x, a, L);
  if (r + eps == 0.0) throw std::domain_error("singular Coulomb evaluation at a grid point");
  return Z / (r + eps);
}

namespace detail {

/// One-particle nuclear field on the n^d lattice.
inline std::vector<double> nuclear_one_particle(const GridSpec& g, const PotentialSpec& spec, double t) {
  const std::size_t one = static_cast<std::size_t>(std::pow(g.n, g.d));
  std::vector<double> v(one, 0.0);
  std::vector<double> x(g.d);
  for (const auto& nu : spec.nuclei) {
    const std::vector<double> a = nu.path.at(t);
    for (std::size_t m = 0; m < one; ++m) {
      std::size_t rem = m;
      for (int c = g.d - 1; c >= 0; --c) {
        x[c] = g.x[rem % g.n];
        rem /= g.n;
      }
      v[m] += coulomb_term(x, a, nu.Z, spec.epsilon, g.L);
    }
  }
  return v;
}

/// Flat one-particle index of particle j at a flat N-particle index.
inline std::size_t particle_index(const GridSpec& g, std::size_t flat, int j) {
  const std::size_t one = static_cast<std::size_t>(std::pow(g.n, g.d));
  return (flat / g.stride[g.axis(j, g.d - 1)]) % one;
}

}  // namespace detail

/// sum_j sum_mu Z_mu / (|x_j - a_mu(t)| + eps) at every lattice point.
inline std::vector<double> eval_nuclear(const GridPtr& g, const PotentialSpec& spec, double t = 0.0) {
  spec.validate(g->d);
  const auto one = detail::nuclear_one_particle(*g, spec, t);
  std::vector<double> v(g->modes, 0.0);
  for (std::size_t f = 0; f < g->modes; ++f)
    for (int j = 0; j < g->N; ++j) v[f] += one[detail::particle_index(*g, f, j)];
  return v;
}

/// sum_{j<k} 1 / (|x_k - x_j| + eps); requires eps > 0.
inline std::vector<double> eval_pair(const GridPtr& g, const PotentialSpec& spec) {
  if (!(spec.epsilon > 0.0)) throw std::invalid_argument("pair potential requires epsilon > 0");
  const GridSpec& G = *g;
  const std::size_t one = static_cast<std::size_t>(std::pow(G.n, G.d));
  // Pair kernel depends only on the index difference per component.
  std::vector<double> kernel(one);
  for (std::size_t m = 0; m < one; ++m) {
    std::size_t rem = m;
    double s = 0.0;
    for (int c = 0; c < G.d; ++c) {
      const double dx = min_image(static_cast<double>(rem % G.n) * G.hx, G.L);
      s += dx * dx;
      rem /= G.n;
    }
    kernel[m] = 1.0 / (std::sqrt(s) + spec.epsilon);
  }
  std::vector<double> w(G.modes, 0.0);
  std::vector<std::size_t> idx(G.N);
  for (std::size_t f = 0; f < G.modes; ++f) {
    for (int j = 0; j < G.N; ++j) idx[j] = detail::particle_index(G, f, j);
    double s = 0.0;
    for (int j = 0; j < G.N; ++j)
      for (int k = j + 1; k < G.N; ++k) {
        std::size_t a = idx[j], b = idx[k], diff = 0, mul = 1;
        for (int c = 0; c < G.d; ++c) {
          const std::size_t da = a % G.n, db = b % G.n;
          diff += ((da + G.n - db) % G.n) * mul;
          mul *= G.n;
          a /= G.n;
          b /= G.n;
        }
        s += kernel[diff];
      }
    w[f] = s;
  }
  return w;
}

/// V - W at time t, the combination entering the potential phase.
inline std::vector<double> eval_interaction(const GridPtr& g, const PotentialSpec& spec, double t) {
  std::vector<double> v = eval_nuclear(g, spec, t);
  if (spec.pair_interaction && g->N > 1) {
    const auto w = eval_pair(g, spec);
    for (std::size_t f = 0; f < v.size(); ++f) v[f] -= w[f];
  }
  return v;
}

inline bool is_static(const PotentialSpec& spec) {
  for (const auto& nu : spec.nuclei)
    if (!nu.path.is_static()) return false;
  return true;
}

}  // namespace hcross
