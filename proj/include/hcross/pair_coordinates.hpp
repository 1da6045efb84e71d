#pragma once
/**
 * @file pair_coordinates.hpp
 * @brief Exact relabeling of a lattice field into pair coordinates
 *        r = x_i - x_j, D = x_i + x_j.
 *
 * Per spatial component, lattice indices (a, b) of particles i and j map to
 *
 *     rho   = (a - b) mod n                      r = rho * hx       in [0, 2L)
 *     delta = (a + b + [a < b] n) mod 2n         D = -2L + delta*hx in [-2L, 2L)
 *
 * with rho and delta of equal parity. The D axis spans two periods of the
 * original box (two sheets, delta < n and delta >= n); together with the
 * parity constraint this gives n^2 slots for n^2 lattice pairs, so the map
 * is a bijection and needs no interpolation. The continuum Jacobian
 * |det d(x_i, x_j) / d(r, D)| = 2^{-d} multiplies the (r, D) measure; on the
 * checkerboard each sample carries 2 hx^2 of (r, D) area per component, so
 * the weighted quadrature reproduces the original one exactly.
 *
 * Storage of a PairField: axes [r_0..r_{d-1}, h_0..h_{d-1}, remaining
 * particles in ascending order], each of length n, where h = delta / 2
 * (rounded down) so that delta = 2 h + (rho mod 2).
 */

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "hcross/lattice.hpp"

namespace hcross {

/// Per-component pair index map.
struct PairIndex {
  int rho;
  int delta;
};

inline PairIndex to_pair_index(int a, int b, int n) {
  const int rho = ((a - b) % n + n) % n;
  const int delta = (a + b + (a < b ? n : 0)) % (2 * n);
  return {rho, delta};
}

/// Inverse of to_pair_index; rho and delta must have equal parity.
inline std::pair<int, int> from_pair_index(int rho, int delta, int n) {
  if (((rho + delta) & 1) != 0) throw std::invalid_argument("rho and delta must share parity");
  const int a = ((rho + delta) / 2) % n;
  const int b = (((delta - rho) / 2) % n + n) % n;
  return {a, b};
}

struct PairField {
  GridPtr grid;
  int i = 0, j = 1;
  std::vector<cplx> values;
  /// |det d(x_i,x_j)/d(r,D)| per spatial dimension, applied once per component.
  static constexpr double jacobian_per_dim = 0.5;

  /// Remaining particles in storage order.
  std::vector<int> others() const {
    std::vector<int> o;
    for (int k = 0; k < grid->N; ++k)
      if (k != i && k != j) o.push_back(k);
    return o;
  }
  int r_axis(int c) const { return c; }
  int h_axis(int c) const { return grid->d + c; }
};

namespace detail {

/// For each flat PairField index, the flat index of the original lattice point.
inline std::vector<std::size_t> pair_source_map(const GridSpec& g, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= g.N || j >= g.N)
    throw std::invalid_argument("pair indices must be distinct particles");
  std::vector<int> others;
  for (int k = 0; k < g.N; ++k)
    if (k != i && k != j) others.push_back(k);

  std::vector<std::size_t> src(g.modes);
  std::vector<int> dig(g.axes(), 0);
  for (std::size_t flat = 0; flat < g.modes; ++flat) {
    std::size_t s = 0;
    for (int c = 0; c < g.d; ++c) {
      const int rho = dig[c];
      const int delta = 2 * dig[g.d + c] + (rho & 1);
      auto [a, b] = from_pair_index(rho, delta, g.n);
      s += static_cast<std::size_t>(a) * g.stride[g.axis(i, c)];
      s += static_cast<std::size_t>(b) * g.stride[g.axis(j, c)];
    }
    int ax = 2 * g.d;
    for (int k : others)
      for (int c = 0; c < g.d; ++c, ++ax) s += static_cast<std::size_t>(dig[ax]) * g.stride[g.axis(k, c)];
    src[flat] = s;
    for (int a = g.axes() - 1; a >= 0; --a) {
      if (++dig[a] < g.n) break;
      dig[a] = 0;
    }
  }
  return src;
}

}  // namespace detail

/// R_{ij} u: exact relabeling into (r, D, others) coordinates.
inline PairField pair_resample(const WaveState& u, int i, int j) {
  if (u.rep != Rep::space) throw std::invalid_argument("pair_resample requires space representation");
  const auto src = detail::pair_source_map(*u.grid, i, j);
  PairField p{u.grid, i, j, std::vector<cplx>(u.size())};
  for (std::size_t f = 0; f < src.size(); ++f) p.values[f] = u.coeffs[src[f]];
  return p;
}

/// Inverse relabeling back to the particle lattice.
inline WaveState pair_unresample(const PairField& p) {
  const auto src = detail::pair_source_map(*p.grid, p.i, p.j);
  WaveState u(p.grid, Rep::space);
  for (std::size_t f = 0; f < src.size(); ++f) u.coeffs[src[f]] = p.values[f];
  return u;
}

/// Value of R u at signed extended indices: rho on the 4L-periodic r axis and
/// delta on the 4L-periodic D axis, using R u(r + 2L, D) = R u(r, D - 2L).
/// `rho` and `delta` have one entry per component.
inline cplx pair_value_extended(const PairField& p, std::span<const int> rho, std::span<const int> delta,
                                std::size_t other_offset) {
  const GridSpec& g = *p.grid;
  const int n = g.n;
  std::size_t flat = other_offset;
  for (int c = 0; c < g.d; ++c) {
    int r = ((rho[c] % (2 * n)) + 2 * n) % (2 * n);
    int dl = ((delta[c] % (2 * n)) + 2 * n) % (2 * n);
    if (((r + dl) & 1) != 0) throw std::invalid_argument("extended indices must share parity");
    if (r >= n) {
      r -= n;
      dl = (dl - n + 2 * n) % (2 * n);
    }
    flat += static_cast<std::size_t>(r) * g.stride[p.r_axis(c)];
    flat += static_cast<std::size_t>(dl / 2) * g.stride[p.h_axis(c)];
  }
  return p.values[flat];
}

enum class PairAxis { relative, sum };

/// Spectral derivative d/dr_c or d/dD_c of a PairField.
///
/// Each (r_c, D_c) plane is embedded on the 4L x 4L torus as a checkerboard
/// (zeros at odd parity). Its 2n x 2n DFT holds the principal spectrum inside
/// the diamond |m_r| + |m_D| < n and a copy shifted by (n, n) outside it; each
/// copy is multiplied by i * omega of its principal mode, omega = m pi / (2L).
/// Modes on the diamond boundary are ambiguous and zeroed, matching the
/// Nyquist convention of the particle-lattice gradient.
inline PairField pair_derivative(const PairField& p, int c, PairAxis axis) {
  const GridSpec& g = *p.grid;
  const int n = g.n;
  const int m2 = 2 * n;
  const std::size_t sr = g.stride[p.r_axis(c)];
  const std::size_t sh = g.stride[p.h_axis(c)];
  PairField out = p;

  std::vector<cplx> plane(static_cast<std::size_t>(m2) * m2);
  fftw_plan fwd = detail::PlanCache::instance().get(2, m2, FFTW_FORWARD);
  fftw_plan bwd = detail::PlanCache::instance().get(2, m2, FFTW_BACKWARD);
  const double unit = std::numbers::pi / (2.0 * g.L);
  std::vector<cplx> factor(plane.size());
  for (int a = 0; a < m2; ++a)
    for (int b = 0; b < m2; ++b) {
      const int mr = a < n ? a : a - m2;
      const int md = b < n ? b : b - m2;
      const int l1 = std::abs(mr) + std::abs(md);
      cplx f{0.0, 0.0};
      if (l1 != n) {
        int pr = mr, pd = md;
        if (l1 > n) {
          pr = ((mr - n) % m2 + m2) % m2;
          pd = ((md - n) % m2 + m2) % m2;
          if (pr >= n) pr -= m2;
          if (pd >= n) pd -= m2;
        }
        const double w = unit * (axis == PairAxis::relative ? pr : pd);
        f = cplx{0.0, w};
      }
      factor[static_cast<std::size_t>(a) * m2 + b] = f;
    }

  for (std::size_t base = 0; base < p.values.size(); ++base) {
    if ((base / sr) % n != 0 || (base / sh) % n != 0) continue;
    std::fill(plane.begin(), plane.end(), cplx{0.0, 0.0});
    for (int rho = 0; rho < m2; ++rho)
      for (int h = 0; h < n; ++h) {
        // Checkerboard slot delta of the extended rho.
        const int r0 = rho < n ? rho : rho - n;
        const int delta_local = 2 * h + (r0 & 1);  // stored delta for r0
        const int delta = rho < n ? delta_local : (delta_local + n) % m2;
        plane[static_cast<std::size_t>(rho) * m2 + delta] =
            p.values[base + static_cast<std::size_t>(r0) * sr + static_cast<std::size_t>(h) * sh];
      }
    auto* ptr = reinterpret_cast<fftw_complex*>(plane.data());
    fftw_execute_dft(fwd, ptr, ptr);
    for (std::size_t k = 0; k < plane.size(); ++k) plane[k] *= factor[k];
    fftw_execute_dft(bwd, ptr, ptr);
    const double scale = 1.0 / (static_cast<double>(m2) * m2);
    for (int rho = 0; rho < n; ++rho)
      for (int h = 0; h < n; ++h) {
        const int delta = 2 * h + (rho & 1);
        out.values[base + static_cast<std::size_t>(rho) * sr + static_cast<std::size_t>(h) * sh] =
            plane[static_cast<std::size_t>(rho) * m2 + delta] * scale;
      }
  }
  return out;
}

}  // namespace hcross
