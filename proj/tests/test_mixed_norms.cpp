#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hcross/mixed_norms.hpp"
#include "hcross/multipliers.hpp"
#include "hcross/random_states.hpp"
#include "hcross/spin.hpp"

using namespace hcross;

namespace {

double lp_1d(const std::vector<double>& v, double h, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p) * h;
  return std::pow(s, 1.0 / p);
}

}  // namespace

TEST(PairResample, RelativeOnlyIsConstantInD) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = sample(g, [&](std::span<const double> x) { return cplx{std::cos(std::numbers::pi / 2.0 * (x[0] - x[1])), 0.0}; });
  auto p = pair_resample(u, 0, 1);
  for (int r = 0; r < 16; ++r)
    for (int h = 1; h < 16; ++h) EXPECT_NEAR(std::abs(p.values[r * 16 + h] - p.values[r * 16]), 0.0, 1e-14);
}

TEST(PairResample, AntisymmetricIsOddInR) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = antisymmetrize(random_state(g, 3), SpinPartition::single_class(2));
  auto p = pair_resample(u, 0, 1);
  // (a, b) -> (b, a): rho -> n - rho, delta unchanged except for the sheet flip when a != b.
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      const auto ab = to_pair_index(a, b, 16), ba = to_pair_index(b, a, 16);
      EXPECT_EQ((ab.rho + ba.rho) % 16, 0);
      EXPECT_NEAR(std::abs(p.values[ab.rho * 16 + ab.delta / 2] + p.values[ba.rho * 16 + ba.delta / 2]), 0.0, 1e-14);
    }
}

TEST(PairResample, RoundTripExact) {
  auto g = make_grid(1, 3, 2.0, 8);
  auto u = random_state(g, 4);
  for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{2, 1}}) {
    auto w = pair_unresample(pair_resample(u, i, j));
    EXPECT_EQ(w.coeffs, u.coeffs);
  }
}

TEST(NormSingle, FubiniAtTwo) {
  auto g = make_grid(1, 3, 2.0, 16);
  auto u = random_state(g, 5);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(norm_single(u, k, 2.0), l2_norm(u), 1e-12 * l2_norm(u));
  EXPECT_NEAR(norm_pair(u, 0, 2, 2.0), l2_norm(u), 1e-10 * l2_norm(u));
}

TEST(NormSingle, SeparableOracle) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto f = [](double x) { return 1.0 + 0.5 * std::sin(x) + std::exp(-x * x); };
  auto gg = [](double y) { return std::cos(0.5 * std::numbers::pi * y) + 0.2; };
  auto u = sample(g, [&](std::span<const double> x) { return cplx{f(x[1]) * gg(x[0]), 0.0}; });
  std::vector<double> fv, gv;
  for (double x : g->x) {
    fv.push_back(f(x));
    gv.push_back(gg(x));
  }
  for (double p : {2.0, 3.0, 4.0, 6.0})
    EXPECT_NEAR(norm_single(u, 1, p), lp_1d(fv, g->hx, p) * lp_1d(gv, g->hx, 2.0), 1e-12);
  double mx = 0.0;
  for (double v : fv) mx = std::max(mx, std::abs(v));
  EXPECT_NEAR(norm_single(u, 1, infinity), mx * lp_1d(gv, g->hx, 2.0), 1e-12);
}

TEST(NormPair, SeparableOracle) {
  // u = f(x1 - x2) g(x1 + x2) with 2L-periodic f, g: the pair norm is ||f||_{L^p(0,2L)} ||g||_{L^2(0,2L)}.
  const double L = 2.0;
  auto g = make_grid(1, 2, L, 32);
  const double w = std::numbers::pi / L;
  auto f = [&](double r) { return 1.2 + std::cos(w * r); };
  auto gg = [&](double D) { return 0.5 + std::sin(2 * w * D); };
  auto u = sample(g, [&](std::span<const double> x) { return cplx{f(x[0] - x[1]) * gg(x[0] + x[1]), 0.0}; });
  std::vector<double> fv, gv;
  for (int k = 0; k < g->n; ++k) {
    fv.push_back(f(k * g->hx));
    gv.push_back(gg(k * g->hx));
  }
  for (double p : {2.0, 4.0, 5.0}) {
    const double want = lp_1d(fv, g->hx, p) * lp_1d(gv, g->hx, 2.0);
    EXPECT_NEAR(norm_pair(u, 0, 1, p), want, 1e-12 * want) << "p=" << p;
  }
}

TEST(NormPair, SwapInvariant) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = random_state(g, 6);
  EXPECT_NEAR(norm_pair(u, 0, 1, 4.0), norm_pair(transpose_particles(u, 0, 1), 0, 1, 4.0), 1e-12);
}

TEST(Norms, HomogeneousTriangleHolder) {
  auto g = make_grid(1, 2, 2.0, 16);
  auto u = random_state(g, 7), v = random_state(g, 8);
  const cplx c{-2.0, 0.5};
  for (double p : {3.0, 4.0}) {
    EXPECT_NEAR(norm_single(c * u, 0, p), std::abs(c) * norm_single(u, 0, p), 1e-12);
    EXPECT_NEAR(norm_pair(c * u, 0, 1, p), std::abs(c) * norm_pair(u, 0, 1, p), 1e-12);
    EXPECT_LE(norm_single(u + v, 0, p), norm_single(u, 0, p) + norm_single(v, 0, p) + 1e-12);
    EXPECT_LE(norm_pair(u + v, 0, 1, p), norm_pair(u, 0, 1, p) + norm_pair(v, 0, 1, p) + 1e-12);
  }
  // Hoelder on the box of length 2L: ||.||_p <= (2L)^{1/p - 1/p'} ||.||_{p'}.
  const double vol = 2 * g->L;
  EXPECT_LE(norm_single(u, 0, 3.0), std::pow(vol, 1.0 / 3 - 1.0 / 5) * norm_single(u, 0, 5.0) * (1 + 1e-12));
}

TEST(Spacetime, ConstantTrace) {
  std::vector<double> t{0.0, 0.25, 0.5, 1.0}, v(4, 3.0);
  EXPECT_NEAR(spacetime_norm(t, v, 4.0), 3.0, 1e-14);
  t = {0.0, 0.5, 2.0};
  v = {2.0, 2.0, 2.0};
  EXPECT_NEAR(spacetime_norm(t, v, 2.0), 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_EQ(spacetime_norm(t, {1.0, 5.0, 2.0}, infinity), 5.0);
  EXPECT_THROW(spacetime_norm({0.0}, {1.0}, 2.0), std::invalid_argument);
}

TEST(Spacetime, Refinement) {
  auto g = make_grid(1, 2, 4.0, 32);
  const double a[] = {-1.0}, b[] = {1.0};
  auto u0 = slater_init({{gaussian_orbital(*g, a, 0.6), gaussian_orbital(*g, b, 0.6)}}, SpinPartition::single_class(2), g);
  auto run = [&](int m) {
    Trajectory tr;
    for (int k = 0; k <= m; ++k) tr.push(transform(free_propagate(u0, 0.5 * k / m), Rep::space));
    return spacetime_norm(tr, theta_p(4.0), {NormFamily::single, 0, 0, 4.0});
  };
  EXPECT_LT(std::abs(run(40) - run(20)) / run(40), 0.01);
}

TEST(Trajectory, Invariants) {
  auto g = make_grid(1, 1, 1.0, 8);
  Trajectory tr;
  tr.push(WaveState(g, Rep::space, 0.0));
  EXPECT_THROW(tr.push(WaveState(g, Rep::space, 0.0)), std::invalid_argument);
  EXPECT_THROW(tr.push(WaveState(make_grid(1, 1, 1.0, 16), Rep::space, 1.0)), std::invalid_argument);
}

TEST(XNorm, SingleParticleTable) {
  auto g = make_grid(1, 1, 4.0, 32);
  Trajectory tr;
  auto u = random_state(g, 9, {3, 0.0});
  for (int k = 0; k <= 4; ++k) tr.push(transform(free_propagate(u, 0.05 * k), Rep::space));
  auto r = x_norm(tr, 4.0, 4.0);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].family, NormFamily::l2);
  EXPECT_EQ(r.entries[1].family, NormFamily::single);
}

TEST(XNorm, MaxPropertyAndReport) {
  auto g = make_grid(1, 3, 2.0, 8);
  Trajectory tr;
  auto u = random_state(g, 10);
  for (int k = 0; k <= 3; ++k) tr.push(transform(free_propagate(u, 0.1 * k), Rep::space));
  auto r = x_norm(tr, 4.0, 3.0);
  EXPECT_EQ(r.entries.size(), 1u + 3u + 3u);
  double m = 0.0;
  for (const auto& e : r.entries) m = std::max(m, e.value);
  EXPECT_EQ(r.x_value, m);
  EXPECT_GE(r.x_value, r.entries[0].value);
  auto j = r.to_json();
  EXPECT_EQ(j["metadata"]["pair_outer_variable"], "r");
  EXPECT_DOUBLE_EQ(j["metadata"]["pair_jacobian"].get<double>(), 0.5);
  std::ostringstream os;
  r.write_trace_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,family,indices,value");
}

TEST(XNorm, FreeGaussianBounded) {
  // Free flow of a normalized Gaussian: X stays within a modest multiple of ||u0||, stable under refinement.
  auto run = [](int n) {
    auto g = make_grid(1, 2, 6.0, n);
    const double a[] = {-1.0}, b[] = {1.0};
    auto u0 = slater_init({{gaussian_orbital(*g, a, 0.5), gaussian_orbital(*g, b, 0.5)}}, SpinPartition::single_class(2), g);
    Trajectory tr;
    for (int k = 0; k <= 20; ++k) tr.push(transform(free_propagate(u0, 0.05 * k), Rep::space));
    return x_norm(tr, 4.0, 4.0).x_value;
  };
  const double x64 = run(64), x128 = run(128);
  EXPECT_LT(x64, 2.0);
  EXPECT_GE(x64, 1.0 - 1e-12);
  EXPECT_NEAR(x64, x128, 1e-6);
}
