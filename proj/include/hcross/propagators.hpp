#pragma once
/**
 * @file propagators.hpp
 * @brief Strang splitting for i d_t u = H(t) u, the projected (Galerkin)
 *        system on a hyperbolic cross, the Duhamel operator S and Picard
 *        iteration of u = U0 u0 + i Q u.
 *
 * H(t) = -sum_j Lap_j - sum_{j,mu} V_mu(x_j, t) + sum_{j<k} W(x_j, x_k).
 * One Strang step of length dt:
 *
 *   u <- U0(dt/2) u
 *   u <- exp(+i dt (V - W)(t + dt/2)) u
 *   u <- U0(dt/2) u
 *
 * Duhamel form used throughout: Q u = S(V u) - S(W u), so that
 * u = U0 u0 + i Q u is equivalent to the differential equation above.
 */

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hcross/hypercross.hpp"
#include "hcross/lattice.hpp"
#include "hcross/mixed_norms.hpp"
#include "hcross/multipliers.hpp"
#include "hcross/potentials.hpp"

namespace hcross {

/// Real field V - W on the lattice, cached when the nuclei are static.
class InteractionField {
 public:
  InteractionField(GridPtr g, PotentialSpec spec) : grid_(std::move(g)), spec_(std::move(spec)) {
    spec_.validate(grid_->d);
    static_ = is_static(spec_);
    trivial_ = spec_.nuclei.empty() && (!spec_.pair_interaction || grid_->N < 2);
    if (!trivial_ && spec_.pair_interaction && grid_->N > 1) pair_ = eval_pair(grid_, spec_);
  }

  bool trivial() const { return trivial_; }
  const PotentialSpec& spec() const { return spec_; }
  const GridPtr& grid() const { return grid_; }

  /// (V - W)(t); all zeros when trivial.
  const std::vector<double>& at(double t) {
    if (have_ && (static_ || t == cached_t_)) return cache_;
    if (trivial_) {
      cache_.assign(grid_->modes, 0.0);
    } else {
      cache_ = spec_.nuclei.empty() ? std::vector<double>(grid_->modes, 0.0) : eval_nuclear(grid_, spec_, t);
      for (std::size_t f = 0; f < pair_.size(); ++f) cache_[f] -= pair_[f];
    }
    have_ = true;
    cached_t_ = t;
    return cache_;
  }

  /// Separate V(t) and W fields, used by the Duhamel form.
  std::vector<double> nuclear(double t) const {
    return spec_.nuclei.empty() ? std::vector<double>(grid_->modes, 0.0) : eval_nuclear(grid_, spec_, t);
  }
  const std::vector<double>& pair() const { return pair_; }

 private:
  GridPtr grid_;
  PotentialSpec spec_;
  bool static_ = true, trivial_ = false, have_ = false;
  double cached_t_ = 0.0;
  std::vector<double> cache_, pair_;
};

enum class ProjectedScheme {
  galerkin,            ///< exact exp(i dt P (V - W) P) on the cross via Lanczos
  phase_then_project,  ///< P after the pointwise phase; loses the leaked part
};

struct StepStats {
  double leakage = 0.0;  ///< ||(1 - P) phase u|| before projection (phase_then_project only)
  int krylov_dim = 0;
};

namespace detail {

inline double raw_norm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

inline cplx raw_inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
  return s;
}

}  // namespace detail

/// exp(i dt P F P) u for a frequency-representation u supported on the cross,
/// with F the pointwise field. Lanczos with full reorthogonalization.
inline WaveState galerkin_phase(const WaveState& u, const std::vector<double>& field, const CrossIndexSet& cross,
                                double dt, StepStats* stats = nullptr, double tol = 1e-15, int max_dim = 60) {
  if (u.rep != Rep::frequency) throw std::invalid_argument("galerkin_phase expects frequency representation");
  const double beta0 = detail::raw_norm(u.coeffs);
  WaveState out(u.grid, Rep::frequency, u.t);
  if (beta0 == 0.0) return out;

  auto apply = [&](const std::vector<cplx>& v) {
    WaveState w(u.grid, Rep::frequency, v);
    transform_inplace(w, Rep::space);
    for (std::size_t f = 0; f < w.size(); ++f) w.coeffs[f] *= field[f];
    transform_inplace(w, Rep::frequency);
    project_frequency_inplace(w, cross);
    return std::move(w.coeffs);
  };

  std::vector<std::vector<cplx>> basis;
  std::vector<double> alpha, beta;
  basis.push_back(u.coeffs);
  for (auto& c : basis[0]) c /= beta0;
  Eigen::VectorXcd y;
  for (int j = 0;; ++j) {
    std::vector<cplx> w = apply(basis[j]);
    const double a = detail::raw_inner(basis[j], w).real();
    alpha.push_back(a);
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] -= a * basis[j][k];
      if (j > 0) w[k] -= beta[j - 1] * basis[j - 1][k];
    }
    for (const auto& b : basis) {
      const cplx h = detail::raw_inner(b, w);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= h * b[k];
    }
    const double b = detail::raw_norm(w);

    const int m = j + 1;
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int k = 0; k < m; ++k) diag[k] = alpha[k];
    for (int k = 0; k + 1 < m; ++k) sub[k] = beta[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    Eigen::VectorXcd phase(m);
    for (int k = 0; k < m; ++k) phase[k] = std::polar(1.0, dt * es.eigenvalues()[k]) * Q(0, k);
    y = Q.cast<cplx>() * phase;

    const double err = b * std::abs(y[m - 1]);
    if (err < tol || b < 1e-300 * beta0 || b == 0.0) break;
    if (m >= max_dim) throw std::runtime_error("Krylov phase did not converge; reduce dt");
    beta.push_back(b);
    for (auto& c : w) c /= b;
    basis.push_back(std::move(w));
  }
  for (int k = 0; k < y.size(); ++k)
    for (std::size_t f = 0; f < out.size(); ++f) out.coeffs[f] += beta0 * y[k] * basis[k][f];
  if (stats) stats->krylov_dim = static_cast<int>(y.size());
  return out;
}

/// Strang integrator with fixed dt; keeps the half-step kinetic factors.
class StrangStepper {
 public:
  StrangStepper(GridPtr g, PotentialSpec spec, double dt, std::shared_ptr<const CrossIndexSet> cross = nullptr,
                ProjectedScheme scheme = ProjectedScheme::galerkin)
      : field_(g, std::move(spec)), dt_(dt), cross_(std::move(cross)), scheme_(scheme) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (cross_ && !cross_->grid->same_as(*g)) throw std::invalid_argument("cross grid mismatch");
    half_.resize(g->modes);
    for (std::size_t k = 0; k < g->modes; ++k) half_[k] = std::polar(1.0, -0.5 * dt * g->omega_sq_total(k));
  }

  double dt() const { return dt_; }
  bool projected() const { return static_cast<bool>(cross_); }
  InteractionField& field() { return field_; }

  /// Advances u by dt in place; u ends in frequency representation.
  StepStats step(WaveState& u) {
    StepStats st;
    transform_inplace(u, Rep::frequency);
    kinetic_half(u);
    if (!field_.trivial()) {
      const std::vector<double>& F = field_.at(u.t + 0.5 * dt_);
      if (cross_ && scheme_ == ProjectedScheme::galerkin) {
        u = galerkin_phase(u, F, *cross_, dt_, &st);
      } else {
        transform_inplace(u, Rep::space);
        for (std::size_t f = 0; f < u.size(); ++f) u.coeffs[f] *= std::polar(1.0, dt_ * F[f]);
        transform_inplace(u, Rep::frequency);
        if (cross_) {
          const double before = l2_norm(u);
          project_frequency_inplace(u, *cross_);
          const double after = l2_norm(u);
          st.leakage = std::sqrt(std::max(0.0, before * before - after * after));
        }
      }
    }
    kinetic_half(u);
    u.t += dt_;
    return st;
  }

 private:
  void kinetic_half(WaveState& u) const {
    for (std::size_t k = 0; k < u.size(); ++k) u.coeffs[k] *= half_[k];
  }

  InteractionField field_;
  double dt_;
  std::shared_ptr<const CrossIndexSet> cross_;
  ProjectedScheme scheme_;
  std::vector<cplx> half_;
};

/// One Strang step from time u.t; result in the input representation.
inline WaveState strang_step(const WaveState& u, const PotentialSpec& spec, double dt,
                             std::shared_ptr<const CrossIndexSet> cross = nullptr) {
  StrangStepper s(u.grid, spec, dt, std::move(cross));
  WaveState v = u;
  s.step(v);
  transform_inplace(v, u.rep);
  return v;
}

struct EvolveConfig {
  double T = 1.0;
  double dt = 1e-3;
  int snapshot_stride = 1;
  std::shared_ptr<const CrossIndexSet> cross;  ///< projected system when set
  ProjectedScheme scheme = ProjectedScheme::galerkin;
  /// Resume point: the input state sits at t = start_step * dt and T is the final time.
  long start_step = 0;
};

struct EvolveResult {
  Trajectory trajectory;  ///< snapshots in space representation
  WaveState final_state;  ///< solver state at T in frequency representation; checkpoint this for bit-exact resume
  double max_leakage = 0.0;
  int max_krylov_dim = 0;
  int steps = 0;
};

inline int step_count(double T, double dt) {
  const double r = T / dt;
  const long k = std::lround(r);
  if (k < 0 || std::abs(r - static_cast<double>(k)) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("T / dt must be a nonnegative integer");
  return static_cast<int>(k);
}

/// Integrates from t = start_step * dt to T; snapshots at the start and every stride steps.
/// Times are recomputed as step * dt so a resumed run matches an uninterrupted one bit for bit.
inline EvolveResult evolve(const WaveState& u0, const PotentialSpec& spec, const EvolveConfig& cfg) {
  if (cfg.snapshot_stride < 1) throw std::invalid_argument("snapshot stride must be positive");
  EvolveResult res;
  const long total = step_count(cfg.T, cfg.dt);
  if (cfg.start_step < 0 || cfg.start_step > total) throw std::invalid_argument("start step outside [0, T/dt]");
  res.steps = static_cast<int>(total - cfg.start_step);
  StrangStepper stepper(u0.grid, spec, cfg.dt, cfg.cross, cfg.scheme);
  WaveState u = transform(u0, Rep::frequency);
  u.t = static_cast<double>(cfg.start_step) * cfg.dt;
  if (cfg.cross && cfg.start_step == 0) project_frequency_inplace(u, *cfg.cross);
  res.trajectory.push(transform(u, Rep::space));
  for (long s = cfg.start_step + 1; s <= total; ++s) {
    const StepStats st = stepper.step(u);
    u.t = static_cast<double>(s) * cfg.dt;
    res.max_leakage = std::max(res.max_leakage, st.leakage);
    res.max_krylov_dim = std::max(res.max_krylov_dim, st.krylov_dim);
    if (s % cfg.snapshot_stride == 0 || s == total) res.trajectory.push(transform(u, Rep::space));
  }
  res.final_state = std::move(u);
  return res;
}

/// <u, H(t) u> with H = -Lap - V + W.
inline double energy(const WaveState& u, InteractionField& field) {
  const WaveState f = transform(u, Rep::frequency);
  const GridSpec& g = *u.grid;
  double kin = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) kin += g.omega_sq_total(k) * std::norm(f.coeffs[k]);
  double pot = 0.0;
  if (!field.trivial()) {
    const WaveState s = transform(u, Rep::space);
    const auto& F = field.at(u.t);
    for (std::size_t k = 0; k < s.size(); ++k) pot -= F[k] * std::norm(s.coeffs[k]);
  }
  return (kin + pot) * g.cell_volume();
}

/// (S f)(t_m) = int_0^{t_m} U0(t_m - tau) f(tau) dtau at every snapshot time,
/// trapezoid in tau over uniformly spaced snapshots.
inline Trajectory duhamel_S_all(const Trajectory& forcing) {
  if (forcing.size() == 0) throw std::invalid_argument("empty forcing");
  const GridSpec& g = *forcing.snapshots.front().grid;
  const std::size_t M = forcing.size();
  if (M > 1) {
    const double h = forcing.times[1] - forcing.times[0];
    for (std::size_t m = 1; m < M; ++m)
      if (std::abs(forcing.times[m] - forcing.times[m - 1] - h) > 1e-9 * std::max(h, 1.0))
        throw std::invalid_argument("duhamel_S needs uniformly spaced snapshots");
  }
  std::vector<cplx> acc(g.modes, cplx{0.0, 0.0});
  std::vector<cplx> prev(g.modes), cur(g.modes);
  Trajectory out;
  for (std::size_t m = 0; m < M; ++m) {
    const double tm = forcing.times[m];
    const WaveState f = transform(forcing.snapshots[m], Rep::frequency);
    for (std::size_t k = 0; k < g.modes; ++k) cur[k] = std::polar(1.0, tm * g.omega_sq_total(k)) * f.coeffs[k];
    if (m > 0) {
      const double h = tm - forcing.times[m - 1];
      for (std::size_t k = 0; k < g.modes; ++k) acc[k] += 0.5 * h * (prev[k] + cur[k]);
    }
    WaveState s(forcing.snapshots[m].grid, Rep::frequency, tm);
    for (std::size_t k = 0; k < g.modes; ++k) s.coeffs[k] = std::polar(1.0, -tm * g.omega_sq_total(k)) * acc[k];
    transform_inplace(s, Rep::space);
    out.push(std::move(s));
    std::swap(prev, cur);
  }
  return out;
}

/// (S f)(t) at a snapshot time t.
inline WaveState duhamel_S(const Trajectory& forcing, double t) {
  if (forcing.size() == 0 || t > forcing.T() * (1.0 + 1e-12) + 1e-15)
    throw std::out_of_range("t beyond the forcing horizon");
  std::size_t idx = forcing.size();
  for (std::size_t m = 0; m < forcing.size(); ++m)
    if (std::abs(forcing.times[m] - t) <= 1e-12 * std::max(1.0, std::abs(t))) idx = m;
  if (idx == forcing.size()) throw std::invalid_argument("t must coincide with a snapshot time");
  Trajectory head;
  for (std::size_t m = 0; m <= idx; ++m) head.push(forcing.snapshots[m]);
  return duhamel_S_all(head).snapshots.back();
}

/// Q u = S(V u) - S(W u) on the snapshot grid of u.
inline Trajectory apply_Q(const Trajectory& u, InteractionField& field) {
  Trajectory forcing;
  for (std::size_t m = 0; m < u.size(); ++m) {
    WaveState s = transform(u.snapshots[m], Rep::space);
    if (field.trivial()) {
      for (auto& c : s.coeffs) c = 0.0;
    } else {
      const auto& F = field.at(u.times[m]);
      for (std::size_t k = 0; k < s.size(); ++k) s.coeffs[k] *= F[k];
    }
    s.t = u.times[m];
    forcing.push(std::move(s));
  }
  return duhamel_S_all(forcing);
}

struct PicardConfig {
  double T = 0.1;
  double dt = 1e-3;  ///< snapshot spacing of the Duhamel quadrature
  double tol = 1e-10;
  int max_iter = 50;
  double p = 4.0, q = 4.0;  ///< X-norm exponents
  std::shared_ptr<const CrossIndexSet> cross;
};

struct PicardResult {
  Trajectory trajectory;
  std::vector<double> differences;  ///< ||u^{(m+1)} - u^{(m)}||_X
  std::vector<double> ratios;       ///< successive difference ratios
  int iterations = 0;
  bool converged = false;
  bool contracting = true;  ///< all ratios < 1
};

inline Trajectory free_trajectory(const WaveState& u0, double T, double dt) {
  const int steps = step_count(T, dt);
  WaveState f = transform(u0, Rep::frequency);
  f.t = 0.0;
  Trajectory tr;
  for (int m = 0; m <= steps; ++m) {
    WaveState s = f;
    free_propagate_frequency(s, m * dt);
    s.t = m * dt;
    transform_inplace(s, Rep::space);
    tr.push(std::move(s));
  }
  return tr;
}

inline Trajectory trajectory_difference(const Trajectory& a, const Trajectory& b) {
  Trajectory d;
  for (std::size_t m = 0; m < a.size(); ++m) {
    WaveState s = transform(a.snapshots[m], Rep::space) - transform(b.snapshots[m], Rep::space);
    s.t = a.times[m];
    d.push(std::move(s));
  }
  return d;
}

/// u^{(0)} = U0 u0, u^{(m+1)} = U0 u0 + i Q u^{(m)}; stops when the X-norm step falls below tol.
inline PicardResult picard_solve(const WaveState& u0, const PotentialSpec& spec, const PicardConfig& cfg) {
  InteractionField field(u0.grid, spec);
  WaveState start = u0;
  if (cfg.cross) start = project(start, *cfg.cross);
  const Trajectory base = free_trajectory(start, cfg.T, cfg.dt);
  PicardResult res;
  Trajectory cur = base;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Trajectory q = apply_Q(cur, field);
    Trajectory next;
    for (std::size_t m = 0; m < base.size(); ++m) {
      WaveState s = base.snapshots[m];
      WaveState qm = q.snapshots[m];
      if (cfg.cross) qm = project(qm, *cfg.cross);
      for (std::size_t k = 0; k < s.size(); ++k) s.coeffs[k] += cplx{0.0, 1.0} * qm.coeffs[k];
      next.push(std::move(s));
    }
    const double diff = x_norm(trajectory_difference(next, cur), cfg.p, cfg.q).x_value;
    if (!res.differences.empty()) {
      const double prev = res.differences.back();
      const double r = prev > 0.0 ? diff / prev : 0.0;
      res.ratios.push_back(r);
      if (!(r < 1.0)) res.contracting = false;
    }
    res.differences.push_back(diff);
    cur = std::move(next);
    res.iterations = it;
    if (diff < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.trajectory = std::move(cur);
  return res;
}

}  // namespace hcross
