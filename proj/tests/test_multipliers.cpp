#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "hcross/multipliers.hpp"
#include "hcross/spin.hpp"
#include "hcross/random_states.hpp"

using namespace hcross;

namespace {

WaveState mode(const GridPtr& g, const std::vector<int>& k) {
  return sample(g, [&](std::span<const double> x) {
    double ph = 0.0;
    for (std::size_t a = 0; a < k.size(); ++a) ph += std::numbers::pi / g->L * k[a] * x[a];
    return std::polar(1.0, ph);
  });
}

WaveState constant(const GridPtr& g) {
  return sample(g, [](auto) { return cplx{1.0, 0.0}; });
}

}  // namespace

TEST(FreeFlow, IdentityAndPhase) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = random_state(g, 1);
  EXPECT_LT(l2_distance(transform(free_propagate(u, 0.0), Rep::space), u), 1e-13);
  auto w = mode(g, {2, -3});
  const double om2 = std::pow(std::numbers::pi / 2.0, 2) * 13;
  auto v = transform(free_propagate(w, 0.2), Rep::space);
  auto want = std::polar(1.0, -0.2 * om2) * w;
  EXPECT_LT(l2_distance(v, want), 1e-12 * l2_norm(w));
}

TEST(FreeFlow, UnitaryGroupLaw) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto u = random_state(g, 2);
  auto a = free_propagate(free_propagate(u, 0.13), 0.29);
  auto b = free_propagate(u, 0.42);
  EXPECT_LT(l2_distance(a, b), 1e-12 * l2_norm(u));
  EXPECT_NEAR(l2_norm(a), l2_norm(u), 1e-12 * l2_norm(u));
  EXPECT_DOUBLE_EQ(a.t, 0.42);
}

TEST(FreeFlow, GaussianClosedForm) {
  // u_t = i u_xx with u(0) = exp(-x^2/(2 s^2)) has u(t) = (s^2/(s^2+2it))^{1/2} exp(-x^2/(2(s^2+2it))).
  const double s = 0.5, t = 0.3;
  auto g = make_grid(1, 1, 12.0, 512);
  auto u0 = sample(g, [&](std::span<const double> x) { return cplx{std::exp(-x[0] * x[0] / (2 * s * s)), 0.0}; });
  auto ut = transform(free_propagate(u0, t), Rep::space);
  const cplx z{s * s, 2 * t};
  auto exact = sample(g, [&](std::span<const double> x) { return std::sqrt(s * s / z) * std::exp(-x[0] * x[0] / (2.0 * z)); });
  EXPECT_LT(l2_distance(ut, exact), 1e-8);
}

TEST(LOperator, Examples) {
  auto g = make_grid(1, 2, 3.0, 16);
  EXPECT_NEAR(apply_L(mode(g, {0, 3}), {0, 1}), 0.0, 1e-12);
  auto w = mode(g, {2, -3});
  const double h = std::numbers::pi / 3.0;
  EXPECT_NEAR(apply_L(w, {0, 1}), 2 * h * 3 * h * l2_norm(w), 1e-11);
  EXPECT_NEAR(apply_L(w, {}), l2_norm(w), 1e-12);
}

TEST(LOperator, FiniteDifferenceOracle) {
  // ||d1 d2 u|| by centered differences on a fine grid, for a band-limited state.
  auto g = make_grid(1, 2, std::numbers::pi, 256);
  auto u = random_state(g, 8, {3, 0.0});
  const int n = g->n;
  const double h = g->hx;
  WaveState fd(g, Rep::space);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto at = [&](int a, int b) { return u[((a + n) % n) * n + (b + n) % n]; };
      fd[i * n + j] = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * h * h);
    }
  const double spectral = apply_L(u, {0, 1});
  EXPECT_NEAR(l2_norm(fd) / spectral, 1.0, 0.02);
}

TEST(KOperator, Examples) {
  auto g = make_grid(1, 2, 3.0, 16);
  auto c = constant(g);
  EXPECT_LT(l2_distance(transform(apply_K(c, {0, 1}), Rep::space), c), 1e-12);
  auto w = mode(g, {1, 2});
  const double h = std::numbers::pi / 3.0;
  const double weight = std::sqrt(1 + h * h) * std::sqrt(1 + 4 * h * h);
  EXPECT_LT(l2_distance(transform(apply_K(w, {0, 1}), Rep::space), weight * w), 1e-11 * l2_norm(w));
  for (int s = 0; s < 10; ++s) {
    auto u = random_state(g, 30 + s);
    const double k = l2_norm(apply_K(u, {0, 1}));
    EXPECT_GE(k, apply_L(u, {0, 1}));
    EXPECT_GE(k, l2_norm(u));
  }
}

TEST(SobolevHalf, Examples) {
  auto g = make_grid(1, 2, 3.0, 16);
  auto w = mode(g, {2, 5});
  const double h = std::numbers::pi / 3.0;
  EXPECT_NEAR(l2_norm(sobolev_half(w, 1)), std::sqrt(1 + 25 * h * h) * l2_norm(w), 1e-10);
  auto c = constant(g);
  EXPECT_NEAR(l2_norm(sobolev_half(c, 0)), l2_norm(c), 1e-12);
  auto u = random_state(g, 3);
  EXPECT_GE(l2_norm(sobolev_half(u, 0)), l2_norm(gradient(u, 0)[0]));
}

TEST(Gradient, Examples) {
  auto g = make_grid(2, 1, 3.0, 16);
  for (const auto& c : gradient(constant(g), 0)) EXPECT_LT(l2_norm(c), 1e-12);
  auto w = mode(g, {1, -2});
  auto gr = gradient(w, 0);
  const double h = std::numbers::pi / 3.0;
  EXPECT_LT(l2_distance(transform(gr[0], Rep::space), cplx{0, h} * w), 1e-11 * l2_norm(w));
  EXPECT_LT(l2_distance(transform(gr[1], Rep::space), cplx{0, -2 * h} * w), 1e-11 * l2_norm(w));
}

TEST(Gradient, AntiSelfAdjoint) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto u = random_state(g, 4), v = random_state(g, 5);
  const cplx a = inner(transform(gradient(u, 1)[0], Rep::space), v);
  const cplx b = inner(u, transform(gradient(v, 1)[0], Rep::space));
  EXPECT_LT(std::abs(a + b), 1e-12 * std::max(1.0, std::abs(a)));
}

TEST(Multipliers, Commute) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = random_state(g, 6);
  auto a = apply_K(free_propagate(gradient(u, 0)[0], 0.2), {0});
  auto b = gradient(free_propagate(apply_K(u, {0}), 0.2), 0)[0];
  EXPECT_LT(l2_distance(transform(a, Rep::space), transform(b, Rep::space)), 1e-12 * l2_norm(a));
}

TEST(Multipliers, KSumMatchesCrossWeight) {
  auto g = make_grid(1, 3, 2.0, 8);
  auto p = SpinPartition::from_labels({1, 2, 1});
  auto u = transform(random_state(g, 7), Rep::frequency);
  auto k = transform(apply_K_sum(u, p.classes), Rep::frequency);
  for (std::size_t f = 0; f < g->modes; ++f) {
    const double w = std::sqrt((1 + g->omega_sq(f, 0)) * (1 + g->omega_sq(f, 2))) + std::sqrt(1 + g->omega_sq(f, 1));
    EXPECT_NEAR(std::abs(k[f] - w * u[f]), 0.0, 1e-12 * (1 + std::abs(k[f])));
  }
}

TEST(Multipliers, FieldInvariants) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto K = K_field(g, {0, 1});
  auto L = L_field(g, {0, 1});
  for (std::size_t f = 0; f < g->modes; ++f) {
    EXPECT_GE(K.values[f].real(), 1.0);
    EXPECT_GE(L.values[f].real(), 0.0);
    if (g->omega_sq(f, 0) == 0.0 || g->omega_sq(f, 1) == 0.0) {
      EXPECT_EQ(L.values[f].real(), 0.0);
    }
  }
}

TEST(Intertwining, RandomStates) {
  for (int N : {2, 3}) {
    auto r = check_intertwining(make_grid(1, N, 2.0, 16));
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.max_deviation_i, 1e-10);
    EXPECT_LT(r.max_deviation_j, 1e-10);
  }
  auto r2 = check_intertwining(make_grid(2, 2, 2.0, 8));
  EXPECT_TRUE(r2.pass);
}
