#pragma once
/**
 * @file lattice.hpp
 * @brief Periodic tensor lattice for N particles in d dimensions and the
 *        unitary DFT between space and frequency representations.
 *
 * Storage convention: a field over (R^d)^N is a flat array of n^{dN}
 * complex values, row-major over the axes
 *
 *     axis a = particle * d + component,   last axis fastest.
 *
 * Frequencies are kept in FFT order: storage index j on an axis carries the
 * signed wave number k = j for j < n/2 and k = j - n otherwise, with
 * angular frequency omega = (pi / L) k. The Nyquist row k = -n/2 is the only
 * unpaired entry.
 */

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace hcross {

using cplx = std::complex<double>;

/// Default ceiling on n^{dN}; 2^24 complex doubles is 256 MiB per field.
inline constexpr std::size_t default_mode_ceiling = std::size_t{1} << 24;

struct GridSpec {
  int d = 1;          ///< spatial dimensions per particle
  int N = 1;          ///< particle count
  double L = 1.0;     ///< half box length, box is [-L, L) per coordinate
  int n = 4;          ///< points per coordinate axis
  double hx = 0.5;    ///< 2L / n
  std::size_t modes = 0;

  std::vector<double> x;          ///< axis coordinates, -L + j hx
  std::vector<int> wave_number;   ///< signed k per storage index
  std::vector<double> omega;      ///< (pi/L) k per storage index
  std::vector<std::size_t> stride;  ///< per-axis stride in the flat array

  int axes() const { return d * N; }
  int axis(int particle, int component) const { return particle * d + component; }

  /// Quadrature weight hx^{dN}.
  double cell_volume() const { return std::pow(hx, axes()); }
  double box_volume() const { return std::pow(2.0 * L, axes()); }

  /// Per-axis storage index of a flat index.
  std::size_t digit(std::size_t flat, int a) const { return (flat / stride[a]) % n; }

  std::vector<int> digits(std::size_t flat) const {
    std::vector<int> out(axes());
    for (int a = axes() - 1; a >= 0; --a) {
      out[a] = static_cast<int>(flat % n);
      flat /= n;
    }
    return out;
  }

  std::size_t flatten(std::span<const int> dig) const {
    std::size_t f = 0;
    for (int a = 0; a < axes(); ++a) f = f * n + static_cast<std::size_t>(dig[a]);
    return f;
  }

  /// |omega_i|^2 for particle i at a flat frequency index.
  double omega_sq(std::size_t flat, int particle) const {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double w = omega[digit(flat, axis(particle, c))];
      s += w * w;
    }
    return s;
  }

  /// |omega|^2 summed over all particles.
  double omega_sq_total(std::size_t flat) const {
    double s = 0.0;
    for (int a = axes() - 1; a >= 0; --a) {
      const double w = omega[flat % n];
      s += w * w;
      flat /= n;
    }
    return s;
  }

  bool same_as(const GridSpec& o) const {
    return d == o.d && N == o.N && L == o.L && n == o.n;
  }
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// Validated lattice. Throws std::invalid_argument on odd or small n,
/// nonpositive L, d outside 1..3, N < 1, or a mode count above the ceiling.
inline GridPtr make_grid(int d, int N, double L, int n,
                         std::size_t mode_ceiling = default_mode_ceiling) {
  if (d < 1 || d > 3) throw std::invalid_argument("d must be in 1..3");
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  if (n % 2 != 0) throw std::invalid_argument("n must be even");
  if (n < 4) throw std::invalid_argument("n must be at least 4");
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");

  const int axes = d * N;
  std::size_t modes = 1;
  for (int a = 0; a < axes; ++a) {
    if (modes > mode_ceiling / static_cast<std::size_t>(n)) {
      std::ostringstream os;
      os << "resolution infeasible: n^(dN) = " << n << "^" << axes
         << " exceeds mode ceiling " << mode_ceiling;
      throw std::invalid_argument(os.str());
    }
    modes *= static_cast<std::size_t>(n);
  }

  auto g = std::make_shared<GridSpec>();
  g->d = d;
  g->N = N;
  g->L = L;
  g->n = n;
  g->hx = 2.0 * L / n;
  g->modes = modes;
  g->x.resize(n);
  g->wave_number.resize(n);
  g->omega.resize(n);
  for (int j = 0; j < n; ++j) {
    g->x[j] = -L + j * g->hx;
    g->wave_number[j] = j < n / 2 ? j : j - n;
    g->omega[j] = std::numbers::pi / L * g->wave_number[j];
  }
  g->stride.assign(axes, 1);
  for (int a = axes - 2; a >= 0; --a) g->stride[a] = g->stride[a + 1] * n;
  return g;
}

enum class Rep { space, frequency };

inline const char* to_string(Rep r) { return r == Rep::space ? "space" : "frequency"; }

/// Complex field over the lattice, tagged with its representation and time.
struct WaveState {
  GridPtr grid;
  Rep rep = Rep::space;
  std::vector<cplx> coeffs;
  double t = 0.0;

  WaveState() = default;
  WaveState(GridPtr g, Rep r, double time = 0.0)
      : grid(std::move(g)), rep(r), coeffs(grid->modes, cplx{0.0, 0.0}), t(time) {}
  WaveState(GridPtr g, Rep r, std::vector<cplx> c, double time = 0.0)
      : grid(std::move(g)), rep(r), coeffs(std::move(c)), t(time) {
    if (coeffs.size() != grid->modes)
      throw std::invalid_argument("coefficient count does not match grid");
  }

  std::size_t size() const { return coeffs.size(); }
  cplx& operator[](std::size_t i) { return coeffs[i]; }
  const cplx& operator[](std::size_t i) const { return coeffs[i]; }

  WaveState& operator+=(const WaveState& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  WaveState& operator-=(const WaveState& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
  }
  WaveState& operator*=(cplx s) {
    for (auto& c : coeffs) c *= s;
    return *this;
  }

  void check_compatible(const WaveState& o) const {
    if (!grid->same_as(*o.grid)) throw std::invalid_argument("grid mismatch");
    if (rep != o.rep) throw std::invalid_argument("representation mismatch");
  }
};

inline WaveState operator+(WaveState a, const WaveState& b) { return a += b; }
inline WaveState operator-(WaveState a, const WaveState& b) { return a -= b; }
inline WaveState operator*(cplx s, WaveState a) { return a *= s; }

/// Samples f(x) at every lattice point; x has dN entries in axis order.
template <class F>
WaveState sample(const GridPtr& g, F&& f, double t = 0.0) {
  WaveState u(g, Rep::space, t);
  std::vector<int> dig(g->axes(), 0);
  std::vector<double> x(g->axes());
  for (std::size_t flat = 0; flat < g->modes; ++flat) {
    for (int a = 0; a < g->axes(); ++a) x[a] = g->x[dig[a]];
    u.coeffs[flat] = f(std::span<const double>(x));
    for (int a = g->axes() - 1; a >= 0; --a) {
      if (++dig[a] < g->n) break;
      dig[a] = 0;
    }
  }
  return u;
}

namespace detail {

/// Process-wide cache of in-place FFTW plans keyed by (rank, n, sign).
/// Planning is serialized; execution through fftw_execute_dft is thread safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rank, int n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(rank, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> dims(rank, n);
    std::size_t total = 1;
    for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(n);
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(rank, dims.data(), buf, buf, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void unitary_dft(const GridSpec& g, std::vector<cplx>& data, int sign) {
  fftw_plan p = PlanCache::instance().get(g.axes(), g.n, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.modes));
  for (auto& c : data) c *= scale;
}

}  // namespace detail

/// In-place change of representation; no-op if already in `target`.
inline void transform_inplace(WaveState& u, Rep target) {
  if (u.rep == target) return;
  detail::unitary_dft(*u.grid, u.coeffs, target == Rep::frequency ? FFTW_FORWARD : FFTW_BACKWARD);
  u.rep = target;
}

inline WaveState transform(WaveState u, Rep target) {
  transform_inplace(u, target);
  return u;
}

/// Discrete L2 norm (sum |u|^2 hx^{dN})^{1/2}; identical in both representations.
inline double l2_norm(const WaveState& u) {
  double s = 0.0;
  for (const auto& c : u.coeffs) s += std::norm(c);
  return std::sqrt(s * u.grid->cell_volume());
}

/// <u, v> with the same quadrature weight; u and v must share a representation.
inline cplx inner(const WaveState& u, const WaveState& v) {
  u.check_compatible(v);
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u.coeffs[i]) * v.coeffs[i];
  return s * u.grid->cell_volume();
}

inline double l2_distance(const WaveState& u, const WaveState& v) {
  u.check_compatible(v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u.coeffs[i] - v.coeffs[i]);
  return std::sqrt(s * u.grid->cell_volume());
}

inline void normalize(WaveState& u) {
  const double nrm = l2_norm(u);
  if (nrm == 0.0) throw std::invalid_argument("cannot normalize the zero state");
  u *= cplx{1.0 / nrm, 0.0};
}

}  // namespace hcross
