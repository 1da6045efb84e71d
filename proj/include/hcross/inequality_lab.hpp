#pragma once
/**
 * @file inequality_lab.hpp
 * @brief Numerical checks of the Hardy, magnetic Hardy, pair Hardy, Sobolev,
 *        dispersive, Strichartz and projection inequalities.
 *
 * Radial integrals use the substitution rho = e^s. A profile is stored as
 * f(rho) = e^{a s} g(s), so for a radial u(x) = f(|x|) in three dimensions
 *
 *   int |x|^{2-k} |grad u|^2 = 4 pi int e^{(3-k+2a)s} (a g + g')^2 ds
 *   int |x|^{-k}  |u|^2      = 4 pi int e^{(3-k+2a)s} g^2 ds
 *
 * and a = (k-3)/2 makes both weights identically one.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcross/hypercross.hpp"
#include "hcross/mixed_norms.hpp"
#include "hcross/multipliers.hpp"
#include "hcross/random_states.hpp"

namespace hcross {

// ---------------------------------------------------------------- reporting

enum class CheckStatus { pass, fail, inconclusive, error };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::error: return "error";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  std::string statement;
  double constant = 0.0;
  double measured = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::fail;
  nlohmann::json details = nlohmann::json::object();

  bool pass() const { return status == CheckStatus::pass; }

  nlohmann::json to_json() const {
    auto num = [](double v) -> nlohmann::json {
      if (std::isnan(v)) return nullptr;
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      return v;
    };
    return {{"name", name},
            {"statement", statement},
            {"constant", num(constant)},
            {"measured", num(measured)},
            {"tolerance", num(tolerance)},
            {"pass", pass()},
            {"status", to_string(status)},
            {"details", details}};
  }
};

// ---------------------------------------------------------------- radial Hardy

struct RadialProfile {
  std::vector<double> s;   ///< uniform nodes in log rho
  std::vector<double> g;   ///< g(s)
  std::vector<double> gs;  ///< dg/ds
  double a = 0.0;          ///< f(rho) = rho^a g(log rho)
  double h = 0.0;

  double rho_min() const { return std::exp(s.front()); }
  double rho_max() const { return std::exp(s.back()); }
  std::size_t resolution() const { return s.size(); }
};

inline std::vector<double> log_nodes(double rho_min, double rho_max, std::size_t nodes) {
  if (!(rho_min > 0.0 && rho_max > rho_min) || nodes < 3) throw std::invalid_argument("bad radial grid");
  std::vector<double> s(nodes);
  const double s0 = std::log(rho_min), s1 = std::log(rho_max);
  for (std::size_t m = 0; m < nodes; ++m) s[m] = s0 + (s1 - s0) * static_cast<double>(m) / (nodes - 1);
  return s;
}

/// exp(-1 / (1 - y^2)) on |y| < 1 and its y-derivative.
inline std::pair<double, double> smooth_bump(double y) {
  if (std::abs(y) >= 1.0) return {0.0, 0.0};
  const double q = 1.0 - y * y;
  const double b = std::exp(-1.0 / q);
  return {b, b * (-2.0 * y / (q * q))};
}

/// Bump supported in [r_lo, r_hi], modulated by (1 + c sin(w s)) with |c| < 1.
inline RadialProfile bump_profile(double r_lo, double r_hi, double c = 0.0, double w = 0.0,
                                  double rho_min = 1e-4, double rho_max = 1e2, std::size_t nodes = 4096) {
  if (!(r_lo >= rho_min && r_hi <= rho_max && r_lo < r_hi)) throw std::invalid_argument("bump outside radial grid");
  RadialProfile P;
  P.s = log_nodes(rho_min, rho_max, nodes);
  P.h = P.s[1] - P.s[0];
  const double s0 = std::log(r_lo), s1 = std::log(r_hi);
  const double scale = 2.0 / (s1 - s0);
  P.g.resize(nodes);
  P.gs.resize(nodes);
  for (std::size_t m = 0; m < nodes; ++m) {
    const double y = (2.0 * P.s[m] - s0 - s1) / (s1 - s0);
    auto [b, by] = smooth_bump(y);
    const double mod = 1.0 + c * std::sin(w * P.s[m]);
    const double dmod = c * w * std::cos(w * P.s[m]);
    P.g[m] = b * mod;
    P.gs[m] = by * scale * mod + b * dmod;
  }
  return P;
}

/// f = rho^{(k-3)/2} (exp(-delta^2 s^2 / 2) - exp(-delta^2 A^2 / 2)) on |s| <= A = 10 / delta.
inline RadialProfile near_extremal_profile(double k, double delta, std::size_t nodes = 8192) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  RadialProfile P;
  const double A = 10.0 / delta;
  P.a = 0.5 * (k - 3.0);
  P.s.resize(nodes);
  P.g.resize(nodes);
  P.gs.resize(nodes);
  const double floor = std::exp(-0.5 * delta * delta * A * A);
  for (std::size_t m = 0; m < nodes; ++m) {
    const double s = -A + 2.0 * A * static_cast<double>(m) / (nodes - 1);
    const double e = std::exp(-0.5 * delta * delta * s * s);
    P.s[m] = s;
    P.g[m] = e - floor;
    P.gs[m] = -delta * delta * s * e;
  }
  P.h = P.s[1] - P.s[0];
  return P;
}

inline double hardy_constant(double k) { return 0.25 * (k - 3.0) * (k - 3.0); }

/// int |x|^{2-k}|grad u|^2 / int |x|^{-k}|u|^2 for the radial u(x) = f(|x|) in R^3.
inline double hardy_ratio(const RadialProfile& P, double k) {
  if (!((k >= 2.0 && k < 3.0) || (k > 3.0 && k < 5.0))) throw std::invalid_argument("k must lie in [2,3) or (3,5)");
  double lhs = 0.0, rhs = 0.0;
  const double e = 3.0 - k + 2.0 * P.a;
  for (std::size_t m = 0; m < P.s.size(); ++m) {
    const double w = (m == 0 || m + 1 == P.s.size() ? 0.5 : 1.0) * std::exp(e * P.s[m]);
    const double dg = P.a * P.g[m] + P.gs[m];
    lhs += w * dg * dg;
    rhs += w * P.g[m] * P.g[m];
  }
  if (rhs == 0.0) throw std::domain_error("zero profile");
  return lhs / rhs;
}

/// Reproducible family of bump profiles inside [1e-4, 1e2].
inline std::vector<RadialProfile> bump_family(int count, std::uint64_t seed, std::size_t nodes = 4096) {
  std::vector<RadialProfile> out;
  out.push_back(bump_profile(1.0, 2.0, 0.0, 0.0, 1e-4, 1e2, nodes));
  auto rng = make_stream(seed, 11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    const double s_lo = std::log(2e-4) + U(rng) * (std::log(50.0) - std::log(2e-4));
    const double width = 0.2 + U(rng) * 4.0;
    const double s_hi = std::min(s_lo + width, std::log(99.0));
    const double c = 0.9 * (2.0 * U(rng) - 1.0);
    const double w = 0.5 + 6.0 * U(rng);
    out.push_back(bump_profile(std::exp(s_lo), std::exp(s_hi), c, w, 1e-4, 1e2, nodes));
  }
  return out;
}

// ---------------------------------------------------------------- pair Hardy

/// u(x, y) = phi_a(x) phi_b(y) - phi_b(x) phi_a(y) in R^3 x R^3 (plus sign when symmetric),
/// phi_c(x) = exp(-|x - c|^2 / (2 sigma^2)).
struct GaussianPair {
  std::array<double, 3> a{0.5, 0.0, 0.0};
  std::array<double, 3> b{-0.5, 0.0, 0.0};
  double sigma = 0.6;
  bool symmetric = false;

  double phi(const std::array<double, 3>& x, const std::array<double, 3>& c) const {
    double r2 = 0.0;
    for (int i = 0; i < 3; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    return std::exp(-0.5 * r2 / (sigma * sigma));
  }
  double sgn() const { return symmetric ? 1.0 : -1.0; }

  double value(const std::array<double, 3>& x, const std::array<double, 3>& y) const {
    return phi(x, a) * phi(y, b) + sgn() * phi(x, b) * phi(y, a);
  }

  /// Frobenius norm squared of the mixed Hessian d^2 u / dx_alpha dy_beta.
  double mixed_hessian_sq(const std::array<double, 3>& x, const std::array<double, 3>& y) const {
    const double s2 = sigma * sigma;
    const double pa_x = phi(x, a), pb_y = phi(y, b), pb_x = phi(x, b), pa_y = phi(y, a);
    double acc = 0.0;
    for (int al = 0; al < 3; ++al)
      for (int be = 0; be < 3; ++be) {
        const double t1 = (x[al] - a[al]) * (y[be] - b[be]) * pa_x * pb_y;
        const double t2 = (x[al] - b[al]) * (y[be] - a[be]) * pb_x * pa_y;
        const double h = (t1 + sgn() * t2) / (s2 * s2);
        acc += h * h;
      }
    return acc;
  }
};

inline double pair_hardy_constant(double k) {
  return (k - 5.0) * (k - 5.0) * (k - 3.0) * (k - 3.0) / 16.0;
}

struct MonteCarloConfig {
  std::size_t samples = 1'000'000;
  int shells = 64;
  std::uint64_t seed = 2024;
  double max_rel_stderr = 0.05;
};

struct PairHardyResult {
  double ratio = 0.0;
  double stderr_ = 0.0;
  double lhs = 0.0, rhs = 0.0;
  std::size_t samples = 0;
  double antisymmetry_residual = 0.0;
  CheckStatus status = CheckStatus::fail;
};

/// max |u(x,y) + u(y,x)| / max |u| over random points.
inline double pair_antisymmetry_residual(const GaussianPair& u, std::uint64_t seed = 5) {
  auto rng = make_stream(seed, 99);
  std::normal_distribution<double> N01(0.0, 1.0);
  double dev = 0.0, scale = 0.0;
  for (int m = 0; m < 256; ++m) {
    std::array<double, 3> x{}, y{};
    for (int i = 0; i < 3; ++i) {
      x[i] = 0.5 * (u.a[i] + u.b[i]) + 2.0 * u.sigma * N01(rng);
      y[i] = 0.5 * (u.a[i] + u.b[i]) + 2.0 * u.sigma * N01(rng);
    }
    const double v = u.value(x, y);
    dev = std::max(dev, std::abs(v + u.value(y, x)));
    scale = std::max(scale, std::abs(v));
  }
  return scale > 0.0 ? dev / scale : 0.0;
}

/// LHS = int int |x-y|^{4-k} |grad_x grad_y u|^2, RHS = int int |x-y|^{-k} |u|^2,
/// estimated in (r, D) = (x - y, x + y) with dx dy = 2^{-3} dr dD. D is drawn from
/// N(a + b, sigma^2 I), which carries the full D dependence of |u|^2; |r| is
/// stratified into equal-width shells with uniform radius and direction.
inline PairHardyResult pair_hardy_ratio(const GaussianPair& u, double k, const MonteCarloConfig& mc) {
  if (!(k >= 4.0 && k < 5.0)) throw std::invalid_argument("k must lie in [4, 5)");
  PairHardyResult res;
  res.antisymmetry_residual = pair_antisymmetry_residual(u);
  if (u.symmetric || res.antisymmetry_residual > 1e-10)
    throw std::invalid_argument("pair Hardy requires an antisymmetric state");
  if (mc.shells < 1 || mc.samples < static_cast<std::size_t>(mc.shells))
    throw std::invalid_argument("too few samples for the stratification");

  double sep = 0.0;
  for (int i = 0; i < 3; ++i) sep += (u.a[i] - u.b[i]) * (u.a[i] - u.b[i]);
  const double r_max = std::sqrt(sep) + 9.0 * u.sigma;
  const double dr = r_max / mc.shells;
  const std::size_t per = mc.samples / mc.shells;
  const double s2 = u.sigma * u.sigma;
  const double norm_D = std::pow(2.0 * std::numbers::pi * s2, 1.5);

  double A = 0.0, B = 0.0, varA = 0.0, varB = 0.0, cov = 0.0;
  for (int sh = 0; sh < mc.shells; ++sh) {
    auto rng = make_stream(mc.seed, static_cast<std::uint64_t>(sh));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N01(0.0, 1.0);
    double ma = 0.0, mb = 0.0, caa = 0.0, cbb = 0.0, cab = 0.0;
    for (std::size_t m = 0; m < per; ++m) {
      const double rho = (sh + U(rng)) * dr;
      const double cz = 2.0 * U(rng) - 1.0;
      const double ph = 2.0 * std::numbers::pi * U(rng);
      const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
      const std::array<double, 3> r{rho * sz * std::cos(ph), rho * sz * std::sin(ph), rho * cz};
      std::array<double, 3> z{N01(rng), N01(rng), N01(rng)};
      std::array<double, 3> x{}, y{};
      for (int i = 0; i < 3; ++i) {
        const double D = u.a[i] + u.b[i] + u.sigma * z[i];
        x[i] = 0.5 * (D + r[i]);
        y[i] = 0.5 * (D - r[i]);
      }
      const double dens_D = std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2])) / norm_D;
      const double w = 4.0 * std::numbers::pi * rho * rho * dr / dens_D * 0.125;
      const double val = u.value(x, y);
      const double sa = w * std::pow(rho, 4.0 - k) * u.mixed_hessian_sq(x, y);
      const double sb = rho > 0.0 ? w * val * val * std::pow(rho, -k) : 0.0;
      // Welford updates for means and co-moments.
      const double n1 = static_cast<double>(m + 1);
      const double da = sa - ma, db = sb - mb;
      ma += da / n1;
      mb += db / n1;
      caa += da * (sa - ma);
      cbb += db * (sb - mb);
      cab += da * (sb - mb);
    }
    const double nn = static_cast<double>(per);
    A += ma;
    B += mb;
    varA += caa / (nn - 1.0) / nn;
    varB += cbb / (nn - 1.0) / nn;
    cov += cab / (nn - 1.0) / nn;
  }
  res.lhs = A;
  res.rhs = B;
  res.samples = per * mc.shells;
  res.ratio = A / B;
  const double R = res.ratio;
  res.stderr_ = std::sqrt(std::max(0.0, varA - 2.0 * R * cov + R * R * varB)) / B;
  if (res.stderr_ / res.ratio >= mc.max_rel_stderr)
    res.status = CheckStatus::inconclusive;
  else
    res.status = res.ratio >= pair_hardy_constant(k) - 3.0 * res.stderr_ ? CheckStatus::pass : CheckStatus::fail;
  return res;
}

// ---------------------------------------------------------------- magnetic Hardy

/// g(r, z) = B((r - r0)/wr) B((z - z0)/wz), u = g e^{i mode theta}; support kept off the axis.
struct AxialProfile {
  double r0 = 1.0, wr = 0.5;
  double z0 = 0.0, wz = 0.8;
};

/// min over integers k of (k - alpha)^2.
inline double magnetic_constant(double alpha) {
  const double f = alpha - std::floor(alpha);
  return std::min(f * f, (1.0 - f) * (1.0 - f));
}

/// int (|g_r|^2 + |g_z|^2 + (mode - alpha)^2 g^2 / r^2) / |x|  over  int g^2 / |x|^3,
/// both with measure 2 pi r dr dz (trapezoid over the support).
inline double magnetic_hardy_ratio(const AxialProfile& P, int mode, double alpha, int nodes = 801) {
  if (!(P.r0 - P.wr > 0.0)) throw std::invalid_argument("profile must avoid the axis");
  const double c = (mode - alpha) * (mode - alpha);
  double lhs = 0.0, rhs = 0.0;
  for (int i = 1; i + 1 < nodes; ++i) {
    const double yr = -1.0 + 2.0 * i / (nodes - 1.0);
    const double r = P.r0 + P.wr * yr;
    auto [br, dbr] = smooth_bump(yr);
    for (int j = 1; j + 1 < nodes; ++j) {
      const double yz = -1.0 + 2.0 * j / (nodes - 1.0);
      const double z = P.z0 + P.wz * yz;
      auto [bz, dbz] = smooth_bump(yz);
      const double g = br * bz;
      const double gr = dbr / P.wr * bz;
      const double gz = br * dbz / P.wz;
      const double X = std::sqrt(r * r + z * z);
      lhs += (gr * gr + gz * gz + c * g * g / (r * r)) * r / X;
      rhs += g * g * r / (X * X * X);
    }
  }
  if (rhs == 0.0) throw std::domain_error("zero profile");
  return lhs / rhs;
}

// ---------------------------------------------------------------- Sobolev

enum class SobolevVariant { a, b, c, d, e, f };

inline SobolevVariant sobolev_variant_from(char v) {
  if (v < 'a' || v > 'f') throw std::invalid_argument("Sobolev variant must be a..f");
  return static_cast<SobolevVariant>(v - 'a');
}

inline char to_char(SobolevVariant v) { return static_cast<char>('a' + static_cast<int>(v)); }

/// lhs / rhs for one state. Variants:
///   a  ||grad_i u||_{L^{p,2}_i}        b  ||u||_{L^{p,2}_i}        c  ||(u, -grad_i u)||_{L^{p,2}_i}
///   d..f  the same with L^{p,2}_{i,j};  rhs ||(1 - Lap_i)^{1/2} u|| in the matching norm.
inline double sobolev_single_ratio(const WaveState& u, int i, int j, double p, SobolevVariant v) {
  std::vector<WaveState> lhs;
  const int vi = static_cast<int>(v) % 3;
  if (vi == 1 || vi == 2) lhs.push_back(u);
  if (vi == 0 || vi == 2)
    for (auto& g : gradient(u, i)) lhs.push_back(std::move(g));
  const WaveState rhs = sobolev_half(u, i);
  if (static_cast<int>(v) < 3) return norm_single(lhs, i, p) / norm_single(rhs, i, p);
  return norm_pair(lhs, i, j, p) / norm_pair(std::vector<WaveState>{rhs}, i, j, p);
}

struct SobolevEnsemble {
  int d = 1, N = 2;
  double L = std::numbers::pi;
  int members = 50;
  int band = 4;          ///< max |k| per axis, n-independent
  double decay = 1.0;
  std::uint64_t seed = 17;
};

struct SobolevResult {
  SobolevVariant variant;
  double p;
  std::vector<int> n_values;
  std::vector<double> max_ratio;  ///< per n
  double drift = 0.0;             ///< max relative change between consecutive n
};

inline SobolevResult sobolev_ratio(const SobolevEnsemble& E, int i, int j, double p, SobolevVariant v,
                                   const std::vector<int>& n_values) {
  SobolevResult r{v, p, n_values, {}, 0.0};
  for (int n : n_values) {
    auto g = make_grid(E.d, E.N, E.L, n);
    double mx = 0.0;
    for (int m = 0; m < E.members; ++m) {
      const WaveState u = random_state(g, E.seed + static_cast<std::uint64_t>(m), {E.band, E.decay});
      mx = std::max(mx, sobolev_single_ratio(u, i, j, p, v));
    }
    r.max_ratio.push_back(mx);
  }
  for (std::size_t k = 1; k < r.max_ratio.size(); ++k)
    r.drift = std::max(r.drift, std::abs(r.max_ratio[k] - r.max_ratio[k - 1]) / r.max_ratio[k - 1]);
  return r;
}

// ---------------------------------------------------------------- dispersive decay

struct DispersiveConfig {
  int d = 1;
  int n = 512;
  double L = 22.0;
  double sigma = 0.3;
  double p = 4.0;
  std::vector<double> times;  ///< empty: 16 log-spaced times in [3 sigma^2, 6 sigma^2]
  NormFamily family = NormFamily::single;
};

struct DispersiveResult {
  double exponent = 0.0;
  double expected = 0.0;
  double residual = 0.0;       ///< rms residual of the log-log fit
  double boundary_mass = 0.0;  ///< max relative L2 mass in the outer 10% band
  bool contaminated = false;
  std::vector<double> times, norms;
};

/// Relative L2 mass with some coordinate in the outer 10% of the box.
inline double outer_band_fraction(const WaveState& u) {
  const WaveState s = transform(u, Rep::space);
  const GridSpec& g = *s.grid;
  double outer = 0.0, total = 0.0;
  for (std::size_t f = 0; f < s.size(); ++f) {
    const double w = std::norm(s.coeffs[f]);
    total += w;
    for (int a = 0; a < g.axes(); ++a)
      if (std::abs(g.x[g.digit(f, a)]) > 0.9 * g.L) {
        outer += w;
        break;
      }
  }
  return total > 0.0 ? std::sqrt(outer / total) : 0.0;
}

/// Least-squares slope of log y against log x, with the rms residual.
inline std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit needs two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double res = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::log(y[k]) - (icpt + slope * std::log(x[k]));
    res += e * e;
  }
  return {slope, std::sqrt(res / n)};
}

/// Fits t -> ||U0(t) u||_{L^{p,2}} for a centered Gaussian u = exp(-|x|^2 / (2 sigma^2)),
/// one particle (two for the pair family). Throws if the outer band carries more than 1e-6.
inline DispersiveResult dispersive_fit(const DispersiveConfig& c) {
  const int N = c.family == NormFamily::pair ? 2 : 1;
  auto g = make_grid(c.d, N, c.L, c.n);
  const double s2 = c.sigma * c.sigma;
  WaveState u = sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return cplx{std::exp(-0.5 * r2 / s2), 0.0};
  });
  DispersiveResult r;
  r.times = c.times;
  if (r.times.empty())
    for (int k = 0; k < 16; ++k) r.times.push_back(3.0 * s2 * std::pow(2.0, k / 15.0));
  r.expected = -c.d * (0.5 - 1.0 / c.p);
  const WaveState f = transform(u, Rep::frequency);
  for (double t : r.times) {
    WaveState v = f;
    free_propagate_frequency(v, t);
    transform_inplace(v, Rep::space);
    r.boundary_mass = std::max(r.boundary_mass, outer_band_fraction(v));
    r.norms.push_back(c.family == NormFamily::pair ? norm_pair(v, 0, 1, c.p) : norm_single(v, 0, c.p));
  }
  r.contaminated = r.boundary_mass > 1e-6;
  auto [slope, res] = loglog_fit(r.times, r.norms);
  r.exponent = slope;
  r.residual = res;
  return r;
}

// ---------------------------------------------------------------- Strichartz

struct StrichartzConfig {
  int d = 1;
  int N = 1;
  double L = 16.0;
  double T = 1.0;
  int steps = 64;
  int members = 20;
  std::uint64_t seed = 31;
};

/// Random Gaussian wave packet with center, width and momentum drawn from the stream.
inline WaveState random_packet(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int A = g->axes();
  std::vector<double> c(A), k(A);
  const double sigma = 0.6 + 0.6 * U(rng);
  for (int a = 0; a < A; ++a) {
    c[a] = (2.0 * U(rng) - 1.0) * 0.15 * g->L;
    k[a] = (2.0 * U(rng) - 1.0) * 1.0;
  }
  return sample(g, [&](std::span<const double> x) {
    double r2 = 0.0, ph = 0.0;
    for (int a = 0; a < A; ++a) {
      r2 += (x[a] - c[a]) * (x[a] - c[a]);
      ph += k[a] * x[a];
    }
    return std::polar(std::exp(-0.5 * r2 / (sigma * sigma)), ph);
  });
}

/// max over the ensemble of ||U0 f||_{L^{theta_p}_t L^{p,2}} / ||f||_2.
inline double strichartz_ratio(const StrichartzConfig& c, double p, const NormSelector& sel_template, int n) {
  auto g = make_grid(c.d, c.N, c.L, n);
  auto rng = make_stream(c.seed, 3);
  const double th = theta_p(p);
  NormSelector sel = sel_template;
  sel.p = p;
  double mx = 0.0;
  for (int m = 0; m < c.members; ++m) {
    const WaveState f = random_packet(g, rng);
    const WaveState F = transform(f, Rep::frequency);
    std::vector<double> times, vals;
    for (int s = 0; s <= c.steps; ++s) {
      const double t = c.T * s / c.steps;
      WaveState v = F;
      free_propagate_frequency(v, t);
      transform_inplace(v, Rep::space);
      times.push_back(t);
      vals.push_back(sel(v));
    }
    mx = std::max(mx, spacetime_norm(times, vals, th) / l2_norm(f));
  }
  return mx;
}

// ---------------------------------------------------------------- projection bound

struct ProjectionBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// ||(1 - P_R) u|| <= (1/R) || sum_l K_{I_l} u ||, indicator cutoff.
inline ProjectionBound projection_bound(const WaveState& u, const CrossIndexSet& cross) {
  if (cross.cutoff != CutoffKind::indicator) throw std::invalid_argument("projection bound needs the indicator cutoff");
  ProjectionBound b;
  b.lhs = l2_norm(residual(u, cross));
  b.rhs = l2_norm(apply_K_sum(u, cross.partition.classes)) / cross.R;
  b.pass = b.lhs <= b.rhs * (1.0 + 1e-12);
  return b;
}

struct ProjectionSweep {
  int states = 0;
  int violations = 0;
  double worst_ratio = 0.0;  ///< max lhs / rhs
};

/// Random states with random spectral decay, each tested against every R.
inline ProjectionSweep projection_sweep(const GridPtr& g, const SpinPartition& part, const std::vector<double>& Rs,
                                        int count, std::uint64_t seed) {
  std::vector<CrossIndexSet> crosses;
  for (double R : Rs) crosses.push_back(enumerate_cross(g, part, R));
  auto rng = make_stream(seed, 7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  ProjectionSweep s;
  for (int m = 0; m < count; ++m) {
    const WaveState u = random_state(g, seed * 1000003ULL + m, {-1, 2.0 * U(rng)});
    for (const auto& c : crosses) {
      const ProjectionBound b = projection_bound(u, c);
      ++s.states;
      if (!b.pass) ++s.violations;
      if (b.rhs > 0.0) s.worst_ratio = std::max(s.worst_ratio, b.lhs / b.rhs);
    }
  }
  return s;
}

}  // namespace hcross
