#pragma once
// Reproducible random band-limited states for property tests and ensembles.

#include <cmath>
#include <cstdint>
#include <random>

#include "hcross/lattice.hpp"

namespace hcross {

/// Independent stream for (seed, stream); used for per-worker reproducibility.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

struct BandLimit {
  /// Largest |k| per axis with nonzero content; -1 means everything except Nyquist.
  int max_wave_number = -1;
  /// Amplitude envelope (1 + |omega|^2)^{-decay/2}.
  double decay = 0.0;
};

/// Random complex state in frequency space, band-limited per axis and
/// without Nyquist content, returned in space representation.
///
/// Coefficients are drawn per signed wave-number tuple in a fixed order
/// independent of n, so the same (seed, band) gives the same continuum
/// trigonometric polynomial on every lattice that resolves the band.
inline WaveState random_state(const GridPtr& g, std::uint64_t seed, BandLimit band = {}) {
  const int kmax = band.max_wave_number < 0 ? g->n / 2 - 1 : band.max_wave_number;
  if (kmax > g->n / 2 - 1) throw std::invalid_argument("band exceeds the lattice");
  auto rng = make_stream(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  WaveState u(g, Rep::frequency);
  const int axes = g->axes();
  const int side = 2 * kmax + 1;
  std::vector<int> k(axes, -kmax);
  std::size_t total = 1;
  for (int a = 0; a < axes; ++a) total *= static_cast<std::size_t>(side);
  for (std::size_t t = 0; t < total; ++t) {
    const double re = normal(rng);
    const double im = normal(rng);
    std::size_t flat = 0;
    double w2 = 0.0;
    for (int a = 0; a < axes; ++a) {
      const int j = k[a] >= 0 ? k[a] : k[a] + g->n;
      flat = flat * g->n + static_cast<std::size_t>(j);
      const double w = g->omega[j];
      w2 += w * w;
    }
    const double env = std::pow(1.0 + w2, -band.decay / 2.0);
    u.coeffs[flat] = env * cplx{re, im};
    for (int a = axes - 1; a >= 0; --a) {
      if (++k[a] <= kmax) break;
      k[a] = -kmax;
    }
  }
  // Coefficients are continuum amplitudes; rescale so the sampled field does
  // not depend on n (the unitary DFT carries a factor sqrt(n^{dN})).
  u *= cplx{std::sqrt(static_cast<double>(g->modes)), 0.0};
  transform_inplace(u, Rep::space);
  return u;
}

}  // namespace hcross
