#pragma once
// Spin classes, the fermionic antisymmetrizer and Slater-type initial data.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcross/lattice.hpp"

namespace hcross {

/// Partition of particle indices 0..N-1 by spin label.
struct SpinPartition {
  std::vector<int> sigma;                 ///< per-particle label, 1-based as in configs
  std::vector<std::vector<int>> classes;  ///< classes[l] = {i : sigma[i] == label_l}, ascending
  std::vector<int> labels;                ///< distinct labels, ascending

  int particles() const { return static_cast<int>(sigma.size()); }
  int spin_count() const { return static_cast<int>(classes.size()); }

  bool same_class(int i, int j) const { return sigma.at(i) == sigma.at(j); }

  static SpinPartition from_labels(std::vector<int> sigma) {
    if (sigma.empty()) throw std::invalid_argument("spin labels must be non-empty");
    SpinPartition p;
    p.sigma = std::move(sigma);
    std::set<int> distinct(p.sigma.begin(), p.sigma.end());
    p.labels.assign(distinct.begin(), distinct.end());
    for (int lab : p.labels) {
      std::vector<int> cls;
      for (int i = 0; i < p.particles(); ++i)
        if (p.sigma[i] == lab) cls.push_back(i);
      p.classes.push_back(std::move(cls));
    }
    return p;
  }

  /// All particles in one class (spin-polarized fermions).
  static SpinPartition single_class(int N) { return from_labels(std::vector<int>(N, 1)); }

  /// Every particle its own class; no exchange symmetry is imposed.
  static SpinPartition distinguishable(int N) {
    std::vector<int> s(N);
    std::iota(s.begin(), s.end(), 1);
    return from_labels(std::move(s));
  }
};

/// Default factorial budget: largest class the antisymmetrizer accepts.
inline constexpr int default_class_budget = 5;

/// (u o P)(x_0..x_{N-1}) = u(x_{perm[0]}, ..., x_{perm[N-1]}), an exact axis relabeling.
inline WaveState permute_particles(const WaveState& u, const std::vector<int>& perm) {
  const GridSpec& g = *u.grid;
  if (static_cast<int>(perm.size()) != g.N) throw std::invalid_argument("permutation size != N");
  if (u.rep != Rep::space) throw std::invalid_argument("permutation requires space representation");
  std::vector<int> inv(g.N);
  for (int i = 0; i < g.N; ++i) inv[perm[i]] = i;

  // Output axis (j, c) carries the digit of source axis (inv[j], c).
  std::vector<std::size_t> src_stride(g.axes());
  for (int j = 0; j < g.N; ++j)
    for (int c = 0; c < g.d; ++c) src_stride[g.axis(j, c)] = g.stride[g.axis(inv[j], c)];

  WaveState out(u.grid, Rep::space, u.t);
  std::vector<int> dig(g.axes(), 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < g.modes; ++flat) {
    out.coeffs[flat] = u.coeffs[src];
    for (int a = g.axes() - 1; a >= 0; --a) {
      if (++dig[a] < g.n) {
        src += src_stride[a];
        break;
      }
      src -= src_stride[a] * static_cast<std::size_t>(g.n - 1);
      dig[a] = 0;
    }
  }
  return out;
}

inline WaveState transpose_particles(const WaveState& u, int i, int j) {
  std::vector<int> perm(u.grid->N);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[i], perm[j]);
  return permute_particles(u, perm);
}

namespace detail {

inline int permutation_sign(const std::vector<int>& p) {
  int sign = 1;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

}  // namespace detail

/// Antisymmetrizer over every spin class, composed across classes:
/// A u = prod_l (1/|I_l|!) sum_{P in S(I_l)} sign(P) u o P.
inline WaveState antisymmetrize(const WaveState& u, const SpinPartition& part,
                                int class_budget = default_class_budget) {
  if (u.rep != Rep::space) throw std::invalid_argument("antisymmetrize requires space representation");
  if (part.particles() != u.grid->N) throw std::invalid_argument("partition size != N");
  for (const auto& cls : part.classes)
    if (static_cast<int>(cls.size()) > class_budget)
      throw std::invalid_argument("spin class of size " + std::to_string(cls.size()) +
                                  " exceeds the factorial budget " + std::to_string(class_budget));

  WaveState cur = u;
  for (const auto& cls : part.classes) {
    if (cls.size() < 2) continue;
    std::vector<int> order(cls.size());
    std::iota(order.begin(), order.end(), 0);
    WaveState acc(u.grid, Rep::space, u.t);
    double count = 0.0;
    do {
      std::vector<int> perm(u.grid->N);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t m = 0; m < cls.size(); ++m) perm[cls[m]] = cls[order[m]];
      const double sgn = detail::permutation_sign(order);
      const WaveState moved = permute_particles(cur, perm);
      for (std::size_t f = 0; f < acc.size(); ++f) acc.coeffs[f] += sgn * moved.coeffs[f];
      count += 1.0;
    } while (std::next_permutation(order.begin(), order.end()));
    acc *= cplx{1.0 / count, 0.0};
    cur = std::move(acc);
  }
  return cur;
}

/// max over intra-class transpositions of ||u o P_ij + u|| / ||u||; zero state gives 0.
inline double pauli_residual(const WaveState& u, const SpinPartition& part) {
  WaveState s = transform(u, Rep::space);
  const double nrm = l2_norm(s);
  if (nrm == 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& cls : part.classes)
    for (std::size_t a = 0; a < cls.size(); ++a)
      for (std::size_t b = a + 1; b < cls.size(); ++b) {
        WaveState sw = transpose_particles(s, cls[a], cls[b]);
        sw += s;
        worst = std::max(worst, l2_norm(sw) / nrm);
      }
  return worst;
}

/// One-particle field sampled on the n^d sub-lattice of a single particle.
struct Orbital {
  std::vector<cplx> values;
};

inline Orbital gaussian_orbital(const GridSpec& g, std::span<const double> center, double sigma,
                                std::span<const double> momentum = {}) {
  const std::size_t m = static_cast<std::size_t>(std::pow(g.n, g.d));
  Orbital o;
  o.values.resize(m);
  for (std::size_t f = 0; f < m; ++f) {
    double r2 = 0.0, phase = 0.0;
    std::size_t rem = f;
    for (int c = g.d - 1; c >= 0; --c) {
      const double xc = g.x[rem % g.n];
      rem /= g.n;
      const double dx = xc - center[c];
      r2 += dx * dx;
      if (!momentum.empty()) phase += momentum[c] * xc;
    }
    o.values[f] = std::exp(-r2 / (2.0 * sigma * sigma)) * std::polar(1.0, phase);
  }
  return o;
}

/// Lattice delta at the grid point nearest to `center` (flat spectrum seed).
inline Orbital spike_orbital(const GridSpec& g, std::span<const double> center) {
  const std::size_t m = static_cast<std::size_t>(std::pow(g.n, g.d));
  Orbital o;
  o.values.assign(m, cplx{0.0, 0.0});
  std::size_t f = 0;
  for (int c = 0; c < g.d; ++c) {
    long j = std::lround((center[c] + g.L) / g.hx);
    j = ((j % g.n) + g.n) % g.n;
    f = f * g.n + static_cast<std::size_t>(j);
  }
  o.values[f] = cplx{1.0, 0.0};
  return o;
}

struct SlaterOptions {
  /// Decay exponent s of the shaped spectrum. When set, coefficients are
  /// multiplied by prod_i (1 + |omega_i|^2)^{-(2 + s)/4}, so that
  /// ||K u0||^2 = sum prod_i (1+|omega_i|^2)^{-s/2} |seed|^2: finite as
  /// n -> infinity iff s > d, while the second-order analogue diverges for s <= d + 2.
  std::optional<double> s_decay;
  int class_budget = default_class_budget;
  double rank_tolerance = 1e-10;
};

namespace detail {

/// det of the normalized Gram matrix; 1 for orthogonal sets, 0 for dependent ones.
inline double normalized_gram_det(const std::vector<const Orbital*>& orbs) {
  const std::size_t m = orbs.size();
  std::vector<cplx> G(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      cplx s{0.0, 0.0};
      for (std::size_t f = 0; f < orbs[a]->values.size(); ++f)
        s += std::conj(orbs[a]->values[f]) * orbs[b]->values[f];
      G[a * m + b] = s;
    }
  std::vector<double> diag(m);
  for (std::size_t a = 0; a < m; ++a) {
    diag[a] = G[a * m + a].real();
    if (diag[a] <= 0.0) return 0.0;
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) G[a * m + b] /= std::sqrt(diag[a] * diag[b]);
  // Gaussian elimination with partial pivoting.
  cplx det{1.0, 0.0};
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(G[r * m + c]) > std::abs(G[piv * m + c])) piv = r;
    if (std::abs(G[piv * m + c]) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < m; ++k) std::swap(G[c * m + k], G[piv * m + k]);
      det = -det;
    }
    det *= G[c * m + c];
    for (std::size_t r = c + 1; r < m; ++r) {
      const cplx f = G[r * m + c] / G[c * m + c];
      for (std::size_t k = c; k < m; ++k) G[r * m + k] -= f * G[c * m + k];
    }
  }
  return std::abs(det);
}

}  // namespace detail

/// Normalized product over spin classes of Slater determinants.
/// orbitals[l] supplies exactly |I_l| orbitals for class l.
inline WaveState slater_init(const std::vector<std::vector<Orbital>>& orbitals,
                             const SpinPartition& part, const GridPtr& grid,
                             const SlaterOptions& opt = {}) {
  const GridSpec& g = *grid;
  if (part.particles() != g.N) throw std::invalid_argument("partition size != N");
  if (orbitals.size() != part.classes.size())
    throw std::invalid_argument("need one orbital list per spin class");
  const std::size_t one = static_cast<std::size_t>(std::pow(g.n, g.d));

  // Orbital assigned to each particle slot.
  std::vector<const Orbital*> slot(g.N, nullptr);
  for (std::size_t l = 0; l < part.classes.size(); ++l) {
    const auto& cls = part.classes[l];
    if (orbitals[l].size() != cls.size())
      throw std::invalid_argument("class " + std::to_string(l) + " needs " +
                                  std::to_string(cls.size()) + " orbitals");
    std::vector<const Orbital*> set;
    for (std::size_t b = 0; b < cls.size(); ++b) {
      if (orbitals[l][b].values.size() != one)
        throw std::invalid_argument("orbital size does not match the one-particle lattice");
      slot[cls[b]] = &orbitals[l][b];
      set.push_back(&orbitals[l][b]);
    }
    if (detail::normalized_gram_det(set) < opt.rank_tolerance)
      throw std::invalid_argument("rank-deficient orbital set: determinant vanishes identically");
  }

  WaveState prod(grid, Rep::space);
  for (std::size_t flat = 0; flat < g.modes; ++flat) {
    cplx v{1.0, 0.0};
    std::size_t rem = flat;
    for (int i = g.N - 1; i >= 0; --i) {
      v *= slot[i]->values[rem % one];
      rem /= one;
    }
    prod.coeffs[flat] = v;
  }

  WaveState u = antisymmetrize(prod, part, opt.class_budget);
  if (opt.s_decay) {
    const double expo = -(2.0 + *opt.s_decay) / 4.0;
    transform_inplace(u, Rep::frequency);
    for (std::size_t f = 0; f < g.modes; ++f) {
      double w = 1.0;
      for (int i = 0; i < g.N; ++i) w *= std::pow(1.0 + g.omega_sq(f, i), expo);
      u.coeffs[f] *= w;
    }
    transform_inplace(u, Rep::space);
    u = antisymmetrize(u, part, opt.class_budget);
  }
  if (l2_norm(u) < 1e-300) throw std::invalid_argument("rank-deficient orbital set: zero determinant");
  normalize(u);
  return u;
}

}  // namespace hcross
