#pragma once
// Exponent arithmetic for the mixed spaces and the contraction windows.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hcross {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// 2/theta_p = 3(1/2 - 1/p); +infinity at p = 2.
inline double theta_p(double p) {
  if (!(p >= 2.0 && p <= 6.0)) throw std::invalid_argument("p must lie in [2, 6]");
  if (p == 2.0) return infinity;
  return 4.0 * p / (3.0 * (p - 2.0));
}

struct ExponentSet {
  double p = 4.0, q = 4.0;
  double p_tilde = 4.0, q_tilde = 4.0;
  double alpha = 0.4;
  double alpha_p = infinity, alpha_q = infinity;
  double beta_p = infinity, beta_q = infinity;

  /// 6/(3 - 2 alpha) < p, q <= 6 and 6/(1 + 2 alpha) < p~, q~ <= 6.
  bool in_window() const {
    if (!(alpha > 0.0 && alpha < 0.5)) return false;
    const double lo = 6.0 / (3.0 - 2.0 * alpha);
    const double lo_t = 6.0 / (1.0 + 2.0 * alpha);
    auto in = [](double x, double a) { return x > a && x <= 6.0; };
    return in(p, lo) && in(q, lo) && in(p_tilde, lo_t) && in(q_tilde, lo_t);
  }
};

/// 1/theta_{alpha,beta} = min{3/p - 1/2 - 1/alpha_p, 3/q - 1/2 - 1/alpha_q, 1 - 1/beta_p, 1 - 1/beta_q}.
inline double theta_alpha_beta(const ExponentSet& e) {
  if (!(e.p >= 2.0 && e.p < 6.0 && e.q >= 2.0 && e.q < 6.0))
    throw std::invalid_argument("p and q must lie in [2, 6)");
  for (double x : {e.alpha_p, e.alpha_q, e.beta_p, e.beta_q})
    if (!(x >= 1.0)) throw std::invalid_argument("alpha and beta exponents must lie in [1, inf]");
  const double m = std::min({3.0 / e.p - 0.5 - 1.0 / e.alpha_p, 3.0 / e.q - 0.5 - 1.0 / e.alpha_q,
                             1.0 - 1.0 / e.beta_p, 1.0 - 1.0 / e.beta_q});
  if (!(m > 0.0)) throw std::domain_error("theta_{alpha,beta} requires a positive minimum");
  return 1.0 / m;
}

/// 1/theta = min{3/(2p) + 3/(2p~) - 1/2, 3/(2q) + 3/(2q~) - 1/2}.
inline double theta_mixed(double p, double p_tilde, double q, double q_tilde) {
  for (double x : {p, p_tilde, q, q_tilde})
    if (!(x >= 2.0 && x <= 6.0)) throw std::invalid_argument("exponents must lie in [2, 6]");
  const double m = std::min(1.5 / p + 1.5 / p_tilde - 0.5, 1.5 / q + 1.5 / q_tilde - 0.5);
  if (!(m > 0.0)) throw std::domain_error("1/theta must be positive");
  return 1.0 / m;
}

enum class ContractionTag {
  pair,    ///< C T^{1/theta} N (N+1) < 1/2
  charge,  ///< C1 (sum Z + N) N T^{1/theta} < 1/2
};

inline std::string to_string(ContractionTag t) { return t == ContractionTag::pair ? "pair" : "charge"; }

inline ContractionTag contraction_tag_from(const std::string& s) {
  if (s == "pair") return ContractionTag::pair;
  if (s == "charge") return ContractionTag::charge;
  throw std::invalid_argument("unknown contraction tag: " + s);
}

struct ContractionWindow {
  double T_max = 0.0;
  /// Prefactor K in K T^{1/theta} < 1/2.
  double prefactor = 0.0;
  double theta = 0.0;
  ContractionTag tag = ContractionTag::pair;

  /// 1 - 2 K T^{1/theta}; positive inside the window.
  double margin(double T) const { return 1.0 - 2.0 * prefactor * std::pow(T, 1.0 / theta); }
};

/// Largest T with the selected inequality strict (the supremum of the open window).
inline ContractionWindow contraction_T(double C, int N, double Z_sum, double theta, ContractionTag tag) {
  if (!(C > 0.0) || N < 1 || !(theta > 0.0) || Z_sum < 0.0)
    throw std::invalid_argument("contraction inputs must be positive");
  ContractionWindow w;
  w.theta = theta;
  w.tag = tag;
  w.prefactor = tag == ContractionTag::pair ? C * N * (N + 1.0) : C * (Z_sum + N) * N;
  w.T_max = std::isinf(theta) ? infinity : std::pow(0.5 / w.prefactor, theta);
  if (std::isinf(theta) && 2.0 * w.prefactor >= 1.0) w.T_max = 0.0;
  return w;
}

}  // namespace hcross
