#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "hcross/hypercross.hpp"
#include "hcross/multipliers.hpp"
#include "hcross/random_states.hpp"

using namespace hcross;

namespace {

// Straight evaluation of the cross sum, independent of cross_weight().
double brute_weight(const GridSpec& g, const SpinPartition& p, std::size_t f) {
  auto dig = g.digits(f);
  double s = 0.0;
  for (const auto& cls : p.classes) {
    double prod = 1.0;
    for (int i : cls) {
      double w2 = 0.0;
      for (int c = 0; c < g.d; ++c) w2 += std::pow(g.omega[dig[i * g.d + c]], 2);
      prod *= std::sqrt(1.0 + w2);
    }
    s += prod;
  }
  return s;
}

WaveState single_mode(const GridPtr& g, std::size_t f) {
  WaveState u(g, Rep::frequency);
  u[f] = 1.0;
  return transform(u, Rep::space);
}

}  // namespace

TEST(Cross, OnlyZeroAtUnitRadius) {
  auto g = make_grid(1, 1, 3.0, 16);
  auto c = enumerate_cross(g, SpinPartition::single_class(1), 1.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.members()[0], 0u);
}

TEST(Cross, MatchesBruteForce) {
  auto g = make_grid(1, 2, 1.0, 32);
  auto p = SpinPartition::single_class(2);
  for (double R : {2.0, 5.0, 12.0}) {
    auto c = enumerate_cross(g, p, R);
    std::set<std::size_t> want;
    for (std::size_t f = 0; f < g->modes; ++f)
      if (brute_weight(*g, p, f) <= R) want.insert(f);
    EXPECT_EQ(std::set<std::size_t>(c.members().begin(), c.members().end()), want) << "R=" << R;
  }
}

TEST(Cross, PrunedEqualsScan) {
  auto g = make_grid(1, 3, 2.0, 16);
  auto p = SpinPartition::from_labels({1, 2, 1});
  for (double R : {3.0, 6.0, 20.0}) {
    auto a = enumerate_cross(g, p, R, CutoffKind::indicator, 0.25, Enumeration::full_scan);
    auto b = enumerate_cross(g, p, R, CutoffKind::indicator, 0.25, Enumeration::pruned);
    EXPECT_EQ(a.members(), b.members());
  }
}

TEST(Cross, MonotoneInR) {
  auto g = make_grid(1, 2, std::numbers::pi, 64);
  auto p = SpinPartition::single_class(2);
  std::size_t prev = 0;
  std::vector<std::size_t> prev_members;
  for (double R : {4.0, 8.0, 16.0}) {
    auto c = enumerate_cross(g, p, R);
    EXPECT_GE(c.size(), prev);
    EXPECT_TRUE(std::includes(c.members().begin(), c.members().end(), prev_members.begin(), prev_members.end()));
    prev = c.size();
    prev_members = c.members();
  }
}

TEST(Cross, VacuousBelowClassCount) {
  auto g = make_grid(1, 2, 1.0, 16);
  auto c = enumerate_cross(g, SpinPartition::distinguishable(2), 1.5);
  EXPECT_TRUE(c.vacuous);
  EXPECT_EQ(c.size(), 0u);
}

TEST(Cross, BoundaryIncluded) {
  // L = pi gives omega = k; R is the exact weight of k = (1, 2).
  auto g = make_grid(1, 2, std::numbers::pi, 16);
  auto p = SpinPartition::single_class(2);
  const double R = std::sqrt(2.0) * std::sqrt(5.0);  // k = (1, 2)
  auto c = enumerate_cross(g, p, R);
  const int k1 = 1, k2 = 2;
  const std::size_t f = static_cast<std::size_t>(k1) * 16 + k2;
  EXPECT_TRUE(c.contains(f));
}

TEST(Cross, SymmetricWithinClass) {
  auto g = make_grid(1, 3, 1.0, 16);
  auto p = SpinPartition::from_labels({1, 1, 2});
  auto c = enumerate_cross(g, p, 10.0);
  for (std::size_t f : c.members()) {
    auto dig = g->digits(f);
    std::swap(dig[0], dig[1]);
    EXPECT_TRUE(c.contains(g->flatten(dig)));
  }
}

TEST(Project, InsideAndOutside) {
  auto g = make_grid(1, 2, 1.0, 16);
  auto c = enumerate_cross(g, SpinPartition::single_class(2), 4.0);
  const std::size_t in = c.members()[1];
  std::size_t out = 0;
  while (c.contains(out)) ++out;
  auto u = single_mode(g, in);
  EXPECT_LT(l2_distance(project(u, c), u), 1e-12);
  EXPECT_LT(l2_norm(residual(u, c)), 1e-12);
  EXPECT_LT(l2_norm(project(single_mode(g, out), c)), 1e-12);
}

TEST(Project, IdempotentOrthogonal) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto c = enumerate_cross(g, SpinPartition::single_class(2), 6.0);
  auto u = random_state(g, 3);
  auto pu = project(u, c), ru = residual(u, c);
  EXPECT_LT(l2_distance(project(pu, c), pu), 1e-12 * l2_norm(u));
  EXPECT_NEAR(std::pow(l2_norm(pu), 2) + std::pow(l2_norm(ru), 2), std::pow(l2_norm(u), 2), 1e-12 * std::pow(l2_norm(u), 2));
  EXPECT_LT(std::abs(inner(pu, ru)), 1e-12 * std::pow(l2_norm(u), 2));
  EXPECT_LE(l2_norm(pu), l2_norm(u));
}

TEST(Project, ResidualBoundPerMode) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto p = SpinPartition::single_class(2);
  for (double R : {4.0, 8.0}) {
    auto c = enumerate_cross(g, p, R);
    for (int s = 0; s < 20; ++s) {
      auto u = random_state(g, 100 + s, {-1, 0.5 * s / 10.0});
      EXPECT_LE(l2_norm(residual(u, c)), l2_norm(apply_K_sum(u, p.classes)) / R * (1 + 1e-12));
    }
  }
}

TEST(Project, CommutesWithFreeFlow) {
  auto g = make_grid(1, 2, 2.0, 32);
  auto c = enumerate_cross(g, SpinPartition::single_class(2), 6.0);
  auto u = random_state(g, 9);
  auto a = project(free_propagate(u, 0.37), c);
  auto b = free_propagate(project(u, c), 0.37);
  EXPECT_LT(l2_distance(a, b), 1e-12 * l2_norm(u));
}

TEST(Project, RaisedCosineWeights) {
  auto g = make_grid(1, 1, std::numbers::pi, 64);
  auto c = enumerate_cross(g, SpinPartition::single_class(1), 5.0, CutoffKind::raised_cosine, 0.5);
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double w = std::sqrt(1.0 + g->omega_sq(c.members()[m], 0));
    const double chi = c.weights()[m];
    if (w <= 5.0) EXPECT_EQ(chi, 1.0);
    else EXPECT_NEAR(chi, 0.5 * (1 + std::cos(std::numbers::pi * (w - 5.0) / 2.5)), 1e-14);
  }
}

TEST(Cross, CsvExport) {
  auto g = make_grid(1, 2, 1.0, 8);
  auto c = enumerate_cross(g, SpinPartition::single_class(2), 3.0);
  std::ostringstream os;
  c.emit_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "flat_index,omega_abs_1,omega_abs_2,cross_weight,chi");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, c.size());
}
