#pragma once
/**
 * @file multipliers.hpp
 * @brief Frequency-diagonal operators on lattice states.
 *
 * Symbols, per mode omega = (omega_1, ..., omega_N):
 *
 *   free propagator U0(t)      exp(-i t |omega|^2)
 *   gradient d/dx_{i,c}        i omega_{i,c}   (Nyquist component zeroed)
 *   sobolev (1 - Lap_i)^{1/2}  (1 + |omega_i|^2)^{1/2}
 *   K_I                        prod_{i in I} (1 + |omega_i|^2)^{1/2}
 *   L_I (norm only)            prod_{i in I} |omega_i|
 *
 * L_I is tensor valued; by Plancherel ||L_I u|| equals the L2 norm of the
 * scalar multiplier prod |omega_i| applied to u, which is all that is stored.
 */

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hcross/lattice.hpp"
#include "hcross/pair_coordinates.hpp"
#include "hcross/random_states.hpp"

namespace hcross {

enum class MultiplierLabel { kinetic, grad, sobolev, L_class, K_class, custom };

struct MultiplierField {
  GridPtr grid;
  std::vector<cplx> values;
  MultiplierLabel label = MultiplierLabel::custom;
};

/// Applies a multiplier; the result keeps the input representation.
inline WaveState apply_multiplier(const WaveState& u, const MultiplierField& m) {
  if (!u.grid->same_as(*m.grid)) throw std::invalid_argument("grid mismatch");
  WaveState f = transform(u, Rep::frequency);
  for (std::size_t k = 0; k < f.size(); ++k) f.coeffs[k] *= m.values[k];
  transform_inplace(f, u.rep);
  return f;
}

inline MultiplierField kinetic_field(const GridPtr& g, double t) {
  MultiplierField m{g, std::vector<cplx>(g->modes), MultiplierLabel::kinetic};
  for (std::size_t k = 0; k < g->modes; ++k) m.values[k] = std::polar(1.0, -t * g->omega_sq_total(k));
  return m;
}

inline MultiplierField K_field(const GridPtr& g, const std::vector<int>& cls) {
  MultiplierField m{g, std::vector<cplx>(g->modes), MultiplierLabel::K_class};
  for (std::size_t k = 0; k < g->modes; ++k) {
    double w = 1.0;
    for (int i : cls) w *= std::sqrt(1.0 + g->omega_sq(k, i));
    m.values[k] = w;
  }
  return m;
}

inline MultiplierField L_field(const GridPtr& g, const std::vector<int>& cls) {
  MultiplierField m{g, std::vector<cplx>(g->modes), MultiplierLabel::L_class};
  for (std::size_t k = 0; k < g->modes; ++k) {
    double w = 1.0;
    for (int i : cls) w *= std::sqrt(g->omega_sq(k, i));
    m.values[k] = w;
  }
  return m;
}

inline MultiplierField grad_field(const GridPtr& g, int particle, int component) {
  MultiplierField m{g, std::vector<cplx>(g->modes), MultiplierLabel::grad};
  const int a = g->axis(particle, component);
  for (std::size_t k = 0; k < g->modes; ++k) {
    const std::size_t j = g->digit(k, a);
    m.values[k] = g->wave_number[j] == -g->n / 2 ? cplx{0.0, 0.0} : cplx{0.0, g->omega[j]};
  }
  return m;
}

/// In-place U0(t) on a frequency-representation state.
inline void free_propagate_frequency(WaveState& u, double t) {
  if (u.rep != Rep::frequency) throw std::invalid_argument("expected frequency representation");
  const GridSpec& g = *u.grid;
  for (std::size_t k = 0; k < u.size(); ++k) u.coeffs[k] *= std::polar(1.0, -t * g.omega_sq_total(k));
}

/// U0(t) u = exp(i t sum_j Lap_j) u; advances the state time stamp by t.
inline WaveState free_propagate(const WaveState& u, double t) {
  WaveState f = transform(u, Rep::frequency);
  free_propagate_frequency(f, t);
  transform_inplace(f, u.rep);
  f.t = u.t + t;
  return f;
}

/// ||L_I u||_2 via the scalar multiplier prod_{i in I} |omega_i|. Empty class gives ||u||.
inline double apply_L(const WaveState& u, const std::vector<int>& cls) {
  const WaveState f = transform(u, Rep::frequency);
  const GridSpec& g = *u.grid;
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double w2 = 1.0;
    for (int i : cls) w2 *= g.omega_sq(k, i);
    s += w2 * std::norm(f.coeffs[k]);
  }
  return std::sqrt(s * g.cell_volume());
}

/// K_I u = prod_{i in I} (1 - Lap_i)^{1/2} u.
inline WaveState apply_K(const WaveState& u, const std::vector<int>& cls) {
  return apply_multiplier(u, K_field(u.grid, cls));
}

/// (1 - Lap_i)^{1/2} u.
inline WaveState sobolev_half(const WaveState& u, int i) { return apply_K(u, {i}); }

/// Components d/dx_{i,c}, c = 0..d-1.
inline std::vector<WaveState> gradient(const WaveState& u, int i) {
  std::vector<WaveState> out;
  for (int c = 0; c < u.grid->d; ++c) out.push_back(apply_multiplier(u, grad_field(u.grid, i, c)));
  return out;
}

/// sum_l K_{I_l} u for all classes of a partition, as one multiplier.
inline WaveState apply_K_sum(const WaveState& u, const std::vector<std::vector<int>>& classes) {
  MultiplierField m{u.grid, std::vector<cplx>(u.grid->modes, cplx{0.0, 0.0}), MultiplierLabel::K_class};
  for (const auto& cls : classes) {
    const MultiplierField k = K_field(u.grid, cls);
    for (std::size_t f = 0; f < m.values.size(); ++f) m.values[f] += k.values[f];
  }
  return apply_multiplier(u, m);
}

struct IntertwiningReport {
  double max_deviation_i = 0.0;  ///< R grad_i  vs (d_r + d_D) R
  double max_deviation_j = 0.0;  ///< R grad_j  vs (d_D - d_r) R
  bool pass = false;
  double tolerance = 1e-10;
};

/// Checks R_{ij} grad_i = (grad_r + grad_D) R_{ij} and
/// R_{ij} grad_j = (grad_D - grad_r) R_{ij} on a random band-limited state,
/// for every pair i < j and component. Deviation is max |lhs - rhs| / max |lhs|.
inline IntertwiningReport check_intertwining(const GridPtr& g, std::uint64_t seed = 7,
                                             double tolerance = 1e-10) {
  if (g->N < 2) throw std::invalid_argument("intertwining needs at least two particles");
  const WaveState u = random_state(g, seed, {std::max(1, g->n / 2 - 2), 0.0});
  IntertwiningReport rep;
  rep.tolerance = tolerance;
  for (int i = 0; i < g->N; ++i)
    for (int j = i + 1; j < g->N; ++j) {
      const PairField Ru = pair_resample(u, i, j);
      const auto gi = gradient(u, i);
      const auto gj = gradient(u, j);
      for (int c = 0; c < g->d; ++c) {
        const PairField dr = pair_derivative(Ru, c, PairAxis::relative);
        const PairField dD = pair_derivative(Ru, c, PairAxis::sum);
        const PairField li = pair_resample(gi[c], i, j);
        const PairField lj = pair_resample(gj[c], i, j);
        double scale_i = 0.0, scale_j = 0.0, dev_i = 0.0, dev_j = 0.0;
        for (std::size_t f = 0; f < Ru.values.size(); ++f) {
          scale_i = std::max(scale_i, std::abs(li.values[f]));
          scale_j = std::max(scale_j, std::abs(lj.values[f]));
          dev_i = std::max(dev_i, std::abs(li.values[f] - (dr.values[f] + dD.values[f])));
          dev_j = std::max(dev_j, std::abs(lj.values[f] - (dD.values[f] - dr.values[f])));
        }
        rep.max_deviation_i = std::max(rep.max_deviation_i, dev_i / scale_i);
        rep.max_deviation_j = std::max(rep.max_deviation_j, dev_j / scale_j);
      }
    }
  rep.pass = rep.max_deviation_i < tolerance && rep.max_deviation_j < tolerance;
  return rep;
}

}  // namespace hcross
