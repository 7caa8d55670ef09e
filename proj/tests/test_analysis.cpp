// Copyright 2026 The dadopt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "dadopt/analysis.hpp"
#include "oracles.hpp"

namespace dadopt {
namespace {

/// The five constants written out again term by term from the bound's statement.
struct Reference {
  double c1, c2, c3, c4, c5;
};

Reference reference_constants(double L, double G, double eps, double b1, double lam) {
  const double q = b1 / (1 - b1);
  const double gap = 1 - lam;
  Reference r{};
  r.c1 = 4 * L / eps > 4 ? 4 * L / eps : 4;
  r.c2 = 6 * (q * q + 1 / (gap * gap)) * L * G * G / (eps * std::sqrt(eps));
  r.c3 = 16 * L * L * gap * G * G / (eps * eps);
  r.c4 = 2 * (lam + q) * G * G / (eps * std::sqrt(eps) * gap);
  r.c5 = 2 * L * (lam + q) * G * G / (eps * eps * gap) + 4 * L * G * G / (eps * eps * gap);
  return r;
}

TEST(Constants, WorkedExamples) {
  EXPECT_EQ(bound_constants(4, 1, 1, 0, 0).c1, 16.0);
  const auto c = bound_constants(1, 1, 1, 0, 0);
  EXPECT_DOUBLE_EQ(c.c1, 4.0);
  EXPECT_DOUBLE_EQ(c.c2, 6.0);
  EXPECT_DOUBLE_EQ(c.c3, 16.0);
  EXPECT_DOUBLE_EQ(c.c4, 0.0);
  EXPECT_DOUBLE_EQ(c.c5, 4.0);
}

TEST(Constants, AgreeWithTermByTermReference) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int trial = 0; trial < 500; ++trial) {
    const double L = 10 * unif(gen), G = 5 * unif(gen), eps = unif(gen), b1 = unif(gen) * 0.95,
                 lam = unif(gen);
    const auto c = bound_constants(L, G, eps, b1, lam);
    const auto r = reference_constants(L, G, eps, b1, lam);
    for (auto [x, y] : {std::pair{c.c1, r.c1}, {c.c2, r.c2}, {c.c3, r.c3}, {c.c4, r.c4}, {c.c5, r.c5}})
      EXPECT_NEAR(x, y, 1e-12 * std::max(1.0, std::abs(y)));
  }
}

TEST(Constants, GapDependentTermsGrowAsLambdaApproachesOne) {
  double prev2 = 0, prev4 = 0, prev5 = 0;
  for (double lam : {0.0, 0.5, 0.9, 0.99, 0.999, 0.9999}) {
    const auto c = bound_constants(2, 1, 0.5, 0.5, lam);
    EXPECT_GT(c.c2, prev2);
    EXPECT_GT(c.c4, prev4);
    EXPECT_GT(c.c5, prev5);
    prev2 = c.c2;
    prev4 = c.c4;
    prev5 = c.c5;
  }
  EXPECT_GT(prev2, 1e8);
  EXPECT_THROW(bound_constants(1, 1, 1, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(bound_constants(1, 1, 0, 0, 0.5), std::invalid_argument);
}

TEST(Rhs, HandEvaluation) {
  const auto c = bound_constants(1, 1, 1, 0, 0);
  // 4 (1 + 1) + 6 + 16 + (0 + 4) * 1
  EXPECT_DOUBLE_EQ(theorem2_rhs(c, 1, 1, 1, 1, 1, 1, 1), 34.0);
}

TEST(Rhs, SmallStepBlowsUp) {
  const auto c = bound_constants(1, 1, 1, 0, 0.5);
  double prev = 0;
  for (double a : {1e-1, 1e-3, 1e-5, 1e-7}) {
    const double v = theorem2_rhs(c, a, 100, 4, 4, 1.0, 0.0, 0.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_GT(prev, 1e5);
}

TEST(Rhs, CorollaryStepGivesInverseRootScaling) {
  const auto c = bound_constants(1, 1, 1, 0, 0.5);
  const std::size_t n = 4, d = 8;
  auto leading = [&](std::size_t T) {
    const double a = corollary_step_size(n, T, d);
    return c.c1 * (1.0 / (double(T) * a) + a * double(d) / double(n));
  };
  for (std::size_t T : {100u, 10000u, 1000000u}) {
    EXPECT_NEAR(leading(2 * T) / leading(T), 1.0 / std::sqrt(2.0), 1e-12);
    const double full = theorem2_rhs(c, corollary_step_size(n, T, d), T, d, n, 1.0, 1.0, 0.0);
    EXPECT_GE(full, leading(T));
  }
  EXPECT_DOUBLE_EQ(corollary_step_size(4, 100, 1), 0.2);
}

TEST(Bounds, ClosedForms) {
  EXPECT_DOUBLE_EQ(consensus_error_bound(0.1, 0.5, 2, 3, 0.5), 0.01 * 4 * 2 * 9 / 0.5);
  EXPECT_DOUBLE_EQ(vt_bound_amsgrad(5, 8, 2), 160.0);
  EXPECT_DOUBLE_EQ(vt_bound_adagrad(5, 8, 2, 1), 160.0);
  EXPECT_NEAR(vt_bound_adagrad(5, 8, 2, 10000), 160.0 * (1 + std::log(1e4)), 1e-9);
  EXPECT_DOUBLE_EQ(max_covered_step_size(4.0, 0.5), 0.25);
}

NodeState node(double x, double m, double u) {
  NodeState s;
  s.x = Eigen::VectorXd::Constant(1, x);
  s.m = Eigen::VectorXd::Constant(1, m);
  s.u = Eigen::VectorXd::Constant(1, u);
  return s;
}

TEST(Lemma1, WithoutMomentumTheStepIsTheScaledGradientMean) {
  // Two nodes; the after-state is built from the identity with beta1 = 0.
  const double alpha = 0.1;
  std::vector<NodeState> before{node(1.0, 0.0, 4.0), node(3.0, 0.0, 1.0)};
  std::vector<Eigen::VectorXd> grads{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, -1.0)};
  // xbar moves by -alpha * mean(g / sqrt(u_new)) = -0.1 * (2/2 + (-1)/1) / 2 = 0.
  std::vector<NodeState> after{node(2.0, 2.0, 4.0), node(2.0, -1.0, 1.0)};
  const RoundSnapshot snap{Eigen::VectorXd::Constant(1, 2.0), before, grads, after};
  EXPECT_LE(verify_lemma1(snap, {alpha, 0.0, 0.0, 0.0, 1e-6}), 1e-15);
  after[0].x(0) = 2.5;
  EXPECT_NEAR(verify_lemma1(snap, {alpha, 0.0, 0.0, 0.0, 1e-6}), 0.25, 1e-15);
}

TEST(Lemma1, SingleNodeConstantRate) {
  const double alpha = 0.05, u = 9.0, g = 1.5;
  std::vector<NodeState> before{node(1.0, 0.0, u)};
  std::vector<NodeState> after{node(1.0 - alpha * g / 3.0, g, u)};
  std::vector<Eigen::VectorXd> grads{Eigen::VectorXd::Constant(1, g)};
  const RoundSnapshot snap{Eigen::VectorXd::Constant(1, 1.0), before, grads, after};
  EXPECT_LE(verify_lemma1(snap, {alpha, 0.0, 0.0, 0.0, 1e-6}), 1e-15);
  EXPECT_NEAR(verify_lemma1(snap, {alpha, 0.0, 0.0, 0.0, 1e-6}),
              testing::descent_identity_residual(snap.xbar_prev, before, grads, after, alpha, 0.0), 1e-15);
}

TEST(Lemma1, MissingStateIsRejected) {
  std::vector<NodeState> before{node(1, 0, 1)};
  std::vector<NodeState> after;
  std::vector<Eigen::VectorXd> grads{Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(verify_lemma1({Eigen::VectorXd::Zero(1), before, grads, after}, {}), std::invalid_argument);
  std::vector<NodeState> after1{node(1, 0, 1)};
  EXPECT_THROW(verify_lemma1({Eigen::VectorXd(), before, grads, after1}, {}), std::invalid_argument);
}

TEST(Lemma2, WorkedExample) {
  const std::vector<double> a{1, 3};
  const auto v = verify_lemma2(a, 0, 2);
  EXPECT_EQ(v.h_r, 2.0);
  EXPECT_EQ(v.h_r_prime, 1.0);
  EXPECT_THROW(verify_lemma2(a, 2, 0), std::invalid_argument);
  EXPECT_THROW(lemma2_h(std::vector<double>{}, 0), std::invalid_argument);
}

TEST(Lemma2, RandomInstances) {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> size(1, 64);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(size(gen));
    for (auto& x : a) x = normal(gen);
    double r = normal(gen), rp = normal(gen);
    if (rp < r) std::swap(r, rp);
    const auto v = verify_lemma2(a, r, rp);
    EXPECT_GE(v.h_r, v.h_r_prime - 1e-12);
    EXPECT_NEAR(v.h_r, testing::threshold_spread(a, r), 1e-12);
    const double lo = *std::min_element(a.begin(), a.end()) - 1.0;
    double mean = 0;
    for (double x : a) mean += x;
    mean /= double(a.size());
    double plain = 0;
    for (double x : a) plain += std::abs(x - mean);
    EXPECT_NEAR(lemma2_h(a, lo), plain, 1e-12);
    EXPECT_NEAR(lemma2_h(a, *std::max_element(a.begin(), a.end()) + 1.0), 0.0, 1e-12);
  }
}

TEST(RateFit, PowerLaws) {
  std::vector<std::pair<double, double>> pts;
  for (double T : {1e3, 1e4, 1e5}) pts.emplace_back(T, 7.0 / std::sqrt(T));
  EXPECT_NEAR(rate_fit(pts), -0.5, 1e-12);
  for (auto& p : pts) p.second = 3.0;
  EXPECT_NEAR(rate_fit(pts), 0.0, 1e-12);
  pts[1].second = 0.0;
  EXPECT_THROW(rate_fit(pts), std::invalid_argument);
}

TEST(ZSequence, MomentumExtrapolation) {
  ZSequence z(0.5);
  EXPECT_EQ(z.push(Eigen::VectorXd::Constant(1, 2.0))(0), 2.0);
  // 3 + 1 * (3 - 2)
  EXPECT_EQ(z.push(Eigen::VectorXd::Constant(1, 3.0))(0), 4.0);
  ZSequence plain(0.0);
  plain.push(Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_EQ(plain.push(Eigen::VectorXd::Constant(1, 5.0))(0), 5.0);
}

}  // namespace
}  // namespace dadopt
