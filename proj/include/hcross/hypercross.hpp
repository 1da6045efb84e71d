#pragma once
/**
 * @file hypercross.hpp
 * @brief Hyperbolic-cross frequency sets, the cutoff chi_R and the
 *        Fourier projection P_R with its residual (1 - P_R).
 *
 * A lattice mode omega = (omega_1, ..., omega_N) lies in the cross of
 * radius R when
 *
 *     sum_{l} prod_{i in I_l} (1 + |omega_i|^2)^{1/2}  <=  R,
 *
 * the sum running over spin classes I_l. Each product is at least 1, so the
 * set is empty for R < s (number of classes). Equality is inside.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hcross/lattice.hpp"
#include "hcross/spin.hpp"

namespace hcross {

enum class CutoffKind { indicator, raised_cosine };

enum class Enumeration {
  automatic,  ///< full scan up to 2^20 modes, pruned search above
  full_scan,
  pruned,
};

inline constexpr std::size_t full_scan_limit = std::size_t{1} << 20;

/// sum_l prod_{i in I_l} (1 + |omega_i|^2)^{1/2} at a flat frequency index.
inline double cross_weight(const GridSpec& g, const SpinPartition& part, std::size_t flat) {
  double sum = 0.0;
  for (const auto& cls : part.classes) {
    double prod = 1.0;
    for (int i : cls) prod *= std::sqrt(1.0 + g.omega_sq(flat, i));
    sum += prod;
  }
  return sum;
}

class CrossIndexSet {
 public:
  double R = 0.0;
  CutoffKind cutoff = CutoffKind::indicator;
  double taper_width = 0.0;
  GridPtr grid;
  SpinPartition partition;
  /// True when R < s and the cross is empty.
  bool vacuous = false;

  /// Sorted flat indices where chi_R > 0 (Omega(R) plus the taper band).
  const std::vector<std::size_t>& members() const { return members_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return members_.size(); }

  /// chi_R at a flat frequency index.
  double chi(std::size_t flat) const {
    auto it = lookup_.find(flat);
    return it == lookup_.end() ? 0.0 : weights_[it->second];
  }
  bool contains(std::size_t flat) const { return lookup_.count(flat) != 0; }
  /// Membership in Omega(R) proper (weight sum <= R).
  bool in_cross(std::size_t flat) const { return cross_weight(*grid, partition, flat) <= R; }

  void emit_csv(std::ostream& os) const {
    os << "flat_index";
    for (int i = 0; i < grid->N; ++i) os << ",omega_abs_" << (i + 1);
    os << ",cross_weight,chi\n";
    os.precision(17);
    for (std::size_t m = 0; m < members_.size(); ++m) {
      const std::size_t f = members_[m];
      os << f;
      for (int i = 0; i < grid->N; ++i) os << ',' << std::sqrt(grid->omega_sq(f, i));
      os << ',' << cross_weight(*grid, partition, f) << ',' << weights_[m] << '\n';
    }
  }

  static CrossIndexSet build(GridPtr g, SpinPartition p, double R, CutoffKind kind,
                             double taper, std::vector<std::size_t> support) {
    CrossIndexSet c;
    c.R = R;
    c.cutoff = kind;
    c.taper_width = taper;
    c.grid = std::move(g);
    c.partition = std::move(p);
    std::sort(support.begin(), support.end());
    c.members_ = std::move(support);
    c.weights_.resize(c.members_.size());
    c.lookup_.reserve(c.members_.size());
    for (std::size_t m = 0; m < c.members_.size(); ++m) {
      const double w = cross_weight(*c.grid, c.partition, c.members_[m]);
      c.weights_[m] = c.cutoff_value(w);
      c.lookup_.emplace(c.members_[m], m);
    }
    return c;
  }

  double cutoff_value(double w) const {
    if (w <= R) return 1.0;
    if (cutoff == CutoffKind::indicator) return 0.0;
    const double band = R * taper_width;
    if (band <= 0.0 || w >= R + band) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (w - R) / band));
  }

 private:
  std::vector<std::size_t> members_;
  std::vector<double> weights_;
  std::unordered_map<std::size_t, std::size_t> lookup_;
};

namespace detail {

inline std::vector<std::size_t> scan_cross(const GridSpec& g, const SpinPartition& p, double limit,
                                           bool strict) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < g.modes; ++f) {
    const double w = cross_weight(g, p, f);
    if (strict ? w < limit : w <= limit) out.push_back(f);
  }
  return out;
}

/// Depth-first search over particles grouped by class. Per-particle shells are
/// visited in ascending weight order so the first violation of the lower bound
/// S + P * a + (untouched classes) ends the loop.
inline std::vector<std::size_t> prune_cross(const GridSpec& g, const SpinPartition& p,
                                            double limit, bool strict) {
  const std::size_t one = static_cast<std::size_t>(std::pow(g.n, g.d));
  struct Shell {
    double a;
    std::size_t idx;
  };
  std::vector<Shell> shells(one);
  for (std::size_t m = 0; m < one; ++m) {
    double w2 = 0.0;
    std::size_t rem = m;
    for (int c = 0; c < g.d; ++c) {
      const double w = g.omega[rem % g.n];
      w2 += w * w;
      rem /= g.n;
    }
    shells[m] = {std::sqrt(1.0 + w2), m};
  }
  std::stable_sort(shells.begin(), shells.end(), [](const Shell& x, const Shell& y) { return x.a < y.a; });

  std::vector<int> order;        // particle visiting order
  std::vector<int> class_of;     // class index per position
  for (std::size_t l = 0; l < p.classes.size(); ++l)
    for (int i : p.classes[l]) {
      order.push_back(i);
      class_of.push_back(static_cast<int>(l));
    }
  const int N = g.N;
  const int s = p.spin_count();
  std::vector<std::size_t> pick(N, 0);
  std::vector<std::size_t> out;

  auto accept = [&](double v) { return strict ? v < limit : v <= limit; };

  // S: summed products of completed classes; P: partial product of the open class.
  auto rec = [&](auto&& self, int pos, double S, double P) -> void {
    if (pos == N) {
      if (!accept(S)) return;
      std::size_t flat = 0;
      for (int i = 0; i < N; ++i) flat = flat * one + pick[i];
      out.push_back(flat);
      return;
    }
    const int l = class_of[pos];
    const bool last_in_class = pos + 1 == N || class_of[pos + 1] != l;
    const double untouched = s - 1 - l;
    for (const Shell& sh : shells) {
      const double P1 = P * sh.a;
      if (!accept(S + P1 + untouched)) break;
      pick[order[pos]] = sh.idx;
      if (last_in_class)
        self(self, pos + 1, S + P1, 1.0);
      else
        self(self, pos + 1, S, P1);
    }
  };
  rec(rec, 0, 0.0, 1.0);
  return out;
}

}  // namespace detail

/// All lattice modes of the cross of radius R (plus the taper band when
/// `kind` is raised_cosine). R < s yields an empty set flagged `vacuous`.
inline CrossIndexSet enumerate_cross(GridPtr grid, const SpinPartition& part, double R,
                                     CutoffKind kind = CutoffKind::indicator, double taper_width = 0.25,
                                     Enumeration how = Enumeration::automatic) {
  if (part.particles() != grid->N) throw std::invalid_argument("partition size != N");
  if (kind == CutoffKind::raised_cosine && !(taper_width > 0.0))
    throw std::invalid_argument("taper width must be positive");
  if (R < part.spin_count()) {
    CrossIndexSet c = CrossIndexSet::build(grid, part, R, kind, taper_width, {});
    c.vacuous = true;
    return c;
  }
  const bool taper = kind == CutoffKind::raised_cosine;
  const double limit = taper ? R * (1.0 + taper_width) : R;
  if (how == Enumeration::automatic)
    how = grid->modes <= full_scan_limit ? Enumeration::full_scan : Enumeration::pruned;
  std::vector<std::size_t> support = how == Enumeration::full_scan
                                         ? detail::scan_cross(*grid, part, limit, taper)
                                         : detail::prune_cross(*grid, part, limit, taper);
  return CrossIndexSet::build(std::move(grid), part, R, kind, taper_width, std::move(support));
}

/// Multiplies frequency coefficients by chi_R in place; `u` must be in frequency representation.
inline void project_frequency_inplace(WaveState& u, const CrossIndexSet& cross) {
  if (u.rep != Rep::frequency) throw std::invalid_argument("projection expects frequency representation");
  std::vector<cplx> out(u.size(), cplx{0.0, 0.0});
  const auto& mem = cross.members();
  const auto& w = cross.weights();
  for (std::size_t m = 0; m < mem.size(); ++m) out[mem[m]] = w[m] * u.coeffs[mem[m]];
  u.coeffs = std::move(out);
}

/// P_R u, returned in the representation of the input.
inline WaveState project(const WaveState& u, const CrossIndexSet& cross) {
  if (!u.grid->same_as(*cross.grid)) throw std::invalid_argument("grid mismatch between state and cross");
  WaveState f = transform(u, Rep::frequency);
  project_frequency_inplace(f, cross);
  transform_inplace(f, u.rep);
  return f;
}

/// (1 - P_R) u.
inline WaveState residual(const WaveState& u, const CrossIndexSet& cross) {
  WaveState p = project(u, cross);
  WaveState r = u;
  r -= p;
  return r;
}

}  // namespace hcross
