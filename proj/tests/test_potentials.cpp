#include <gtest/gtest.h>

#include <cmath>

#include "hcross/exponents.hpp"
#include "hcross/potentials.hpp"
#include "hcross/spin.hpp"

using namespace hcross;

namespace {

PotentialSpec one_nucleus(double Z, std::vector<double> pos, double eps, bool pair = false) {
  PotentialSpec s;
  s.nuclei.push_back({Z, NucleusPath::fixed(std::move(pos))});
  s.epsilon = eps;
  s.pair_interaction = pair;
  return s;
}

}  // namespace

TEST(Coulomb, UnitDistance) {
  const double x[] = {1.0, 0.0, 0.0}, a[] = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(coulomb_term(x, a, 1.0, 0.0, 10.0), 1.0);
}

TEST(Coulomb, RegularizedAtNucleus) {
  const double x[] = {0.5}, a[] = {0.5};
  EXPECT_DOUBLE_EQ(coulomb_term(x, a, 3.0, 0.1, 4.0), 30.0);
  EXPECT_THROW(coulomb_term(x, a, 1.0, 0.0, 4.0), std::domain_error);
}

TEST(Nuclear, FieldOnGrid) {
  auto g = make_grid(1, 2, 4.0, 16);
  auto v = eval_nuclear(g, one_nucleus(2.0, {0.0}, 0.1), 0.0);
  for (std::size_t f = 0; f < g->modes; ++f) {
    auto dig = g->digits(f);
    const double want = 2.0 / (std::abs(g->x[dig[0]]) + 0.1) + 2.0 / (std::abs(g->x[dig[1]]) + 0.1);
    EXPECT_NEAR(v[f], want, 1e-13);
  }
}

TEST(Nuclear, Superposition) {
  auto g = make_grid(1, 2, 4.0, 16);
  PotentialSpec both = one_nucleus(1.0, {0.3}, 0.1);
  both.nuclei.push_back({0.5, NucleusPath::fixed({-1.1})});
  auto a = eval_nuclear(g, one_nucleus(1.0, {0.3}, 0.1));
  auto b = eval_nuclear(g, one_nucleus(0.5, {-1.1}, 0.1));
  auto c = eval_nuclear(g, both);
  for (std::size_t f = 0; f < g->modes; ++f) EXPECT_NEAR(c[f], a[f] + b[f], 1e-13);
}

TEST(Nuclear, SingularOnGridPoint) {
  auto g = make_grid(1, 1, 4.0, 16);
  EXPECT_THROW(eval_nuclear(g, one_nucleus(1.0, {0.0}, 0.0)), std::domain_error);
}

TEST(Nuclear, StaticIsTimeIndependentMovingIsNot) {
  auto g = make_grid(1, 1, 4.0, 16);
  auto s = one_nucleus(1.0, {0.2}, 0.1);
  EXPECT_EQ(eval_nuclear(g, s, 0.0), eval_nuclear(g, s, 0.7));
  EXPECT_TRUE(is_static(s));
  PotentialSpec m = s;
  m.nuclei[0].path.coeffs = {{0.2, 1.0}};
  EXPECT_FALSE(is_static(m));
  auto v1 = eval_nuclear(g, m, 0.5);
  auto want = eval_nuclear(g, one_nucleus(1.0, {0.7}, 0.1));
  for (std::size_t f = 0; f < g->modes; ++f) EXPECT_NEAR(v1[f], want[f], 1e-13);
  m.nuclei[0].path.t_end = 1.0;
  EXPECT_THROW(eval_nuclear(g, m, 2.0), std::out_of_range);
}

TEST(Nuclear, MinimumImage) {
  EXPECT_NEAR(min_image(3.5, 2.0), -0.5, 1e-15);
  const double x[] = {1.9}, y[] = {-1.9};
  EXPECT_NEAR(periodic_distance(x, y, 2.0), 0.2, 1e-14);
}

TEST(Pair, TwoParticles) {
  auto g = make_grid(1, 2, 4.0, 16);  // hx = 0.5
  PotentialSpec s;
  s.epsilon = 0.5;
  auto w = eval_pair(g, s);
  // x1 = 0 (index 8), x2 = 2 (index 12).
  EXPECT_NEAR(w[8 * 16 + 12], 0.4, 1e-15);
}

TEST(Pair, ThreeParticlesTripleLoop) {
  auto g = make_grid(1, 3, 2.0, 8);
  PotentialSpec s;
  s.epsilon = 0.2;
  auto w = eval_pair(g, s);
  for (std::size_t f = 0; f < g->modes; ++f) {
    auto d = g->digits(f);
    double want = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        double r = std::abs(g->x[d[a]] - g->x[d[b]]);
        r = std::min(r, 2 * g->L - r);
        want += 1.0 / (r + 0.2);
      }
    EXPECT_NEAR(w[f], want, 1e-13);
  }
}

TEST(Pair, PermutationSymmetric) {
  auto g = make_grid(2, 2, 2.0, 8);
  PotentialSpec s;
  auto w = eval_pair(g, s);
  WaveState u(g, Rep::space);
  for (std::size_t f = 0; f < g->modes; ++f) u[f] = w[f];
  auto p = transpose_particles(u, 0, 1);
  for (std::size_t f = 0; f < g->modes; ++f) EXPECT_EQ(p[f].real(), w[f]);
}

TEST(Pair, RequiresEpsilon) {
  PotentialSpec s;
  s.epsilon = 0.0;
  EXPECT_THROW(s.validate(1), std::invalid_argument);
  EXPECT_THROW(eval_pair(make_grid(1, 2, 1.0, 8), s), std::invalid_argument);
}

TEST(PotentialSpec, Validation) {
  EXPECT_THROW(one_nucleus(-1.0, {0.0}, 0.1).validate(1), std::invalid_argument);
  EXPECT_THROW(one_nucleus(1.0, {0.0, 0.0}, 0.1).validate(1), std::invalid_argument);
  EXPECT_NO_THROW(one_nucleus(1.0, {0.0}, 0.1, true).validate(1));
}

TEST(Exponents, ThetaP) {
  EXPECT_EQ(theta_p(4.0), 8.0 / 3.0);
  EXPECT_TRUE(std::isinf(theta_p(2.0)));
  EXPECT_EQ(theta_p(6.0), 2.0);
  EXPECT_THROW(theta_p(7.0), std::invalid_argument);
  EXPECT_THROW(theta_p(1.5), std::invalid_argument);
  double prev = infinity;
  for (double p = 2.1; p <= 6.0; p += 0.1) {
    EXPECT_LT(theta_p(p), prev);
    prev = theta_p(p);
  }
}

TEST(Exponents, ThetaAlphaBeta) {
  ExponentSet e;
  EXPECT_EQ(theta_alpha_beta(e), 4.0);
  ExponentSet b = e;
  b.beta_p = 1.0;
  EXPECT_THROW(theta_alpha_beta(b), std::domain_error);
  ExponentSet two = e;
  two.p = two.q = 2.0;
  const double m = std::min({3.0 / 2 - 0.5, 3.0 / 2 - 0.5, 1.0, 1.0});
  EXPECT_EQ(theta_alpha_beta(two), 1.0 / m);
  ExponentSet six = e;
  six.p = 6.0;
  EXPECT_THROW(theta_alpha_beta(six), std::invalid_argument);
}

TEST(Exponents, ThetaMixed) {
  EXPECT_EQ(theta_mixed(4, 4, 4, 4), 4.0);
  EXPECT_THROW(theta_mixed(6, 6, 6, 6), std::domain_error);
  EXPECT_DOUBLE_EQ(theta_mixed(4, 6, 4, 6), 1.0 / (3.0 / 8 + 1.0 / 4 - 0.5));
}

TEST(Exponents, Window) {
  ExponentSet e;
  EXPECT_TRUE(e.in_window());
  e.p_tilde = 3.0;  // below 6/(1 + 0.8)
  EXPECT_FALSE(e.in_window());
}

TEST(Contraction, Windows) {
  auto w = contraction_T(1.0, 1, 0.0, 4.0, ContractionTag::pair);
  EXPECT_DOUBLE_EQ(w.T_max, 1.0 / 256);
  EXPECT_NEAR(w.margin(w.T_max), 0.0, 1e-14);
  EXPECT_GT(w.margin(0.5 * w.T_max), 0.0);
  auto w2 = contraction_T(2.0, 1, 0.0, 4.0, ContractionTag::pair);
  EXPECT_DOUBLE_EQ(std::pow(w2.T_max, 0.25), 0.5 * std::pow(w.T_max, 0.25));
  auto t = contraction_T(1.0, 2, 1.0, 4.0, ContractionTag::charge);
  EXPECT_DOUBLE_EQ(t.T_max, std::pow(1.0 / 12, 4));
  EXPECT_THROW(contraction_T(0.0, 1, 0.0, 4.0, ContractionTag::pair), std::invalid_argument);
  EXPECT_EQ(contraction_tag_from("pair"), ContractionTag::pair);
  EXPECT_THROW(contraction_tag_from("other"), std::invalid_argument);
  EXPECT_THROW(contraction_tag_from("nope"), std::invalid_argument);
}
