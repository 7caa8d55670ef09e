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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dadopt/problems.hpp"
#include "dadopt/rng.hpp"
#include "oracles.hpp"

namespace dadopt {
namespace {

using testing::fd_gradient;
using testing::max_rel_error;

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

void expect_gradients_match_fd(const Problem& p, std::uint64_t seed, double box) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  for (int trial = 0; trial < 32; ++trial) {
    Eigen::VectorXd x(p.dim());
    for (auto& v : x) v = unif(gen);
    for (std::size_t i = 0; i < p.node_count(); ++i) {
      const auto fd = fd_gradient([&](const Eigen::VectorXd& y) { return p.local_loss(i, y); }, x);
      EXPECT_LE(max_rel_error(p.local_gradient(i, x), fd), 1e-5) << p.name() << " node " << i;
    }
  }
}

TEST(Counterexample, StationaryPointAndSlopes) {
  const auto p = counterexample_problem();
  EXPECT_EQ(p->node_count(), 2u);
  EXPECT_EQ(p->dim(), 1u);
  EXPECT_EQ(p->smoothness(), 4.0);
  EXPECT_EQ(p->gradient_bound(), 4.0);
  ASSERT_TRUE(p->stationary_point());
  EXPECT_DOUBLE_EQ((*p->stationary_point())(0), 1.0 / 3.0);
  EXPECT_NEAR(p->gradient(scalar(1.0 / 3.0))(0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(p->gradient(scalar(0.5))(0), 0.5);
  EXPECT_EQ(p->local_gradient(0, scalar(-1.0))(0), -4.0);
  EXPECT_EQ(p->local_gradient(1, scalar(-1.0))(0), -2.0);
}

TEST(Counterexample, NoiselessStochasticGradient) {
  const auto p = counterexample_problem();
  CounterRng rng(1);
  const NoiseModel none{};
  EXPECT_EQ(stochastic_gradient(*p, 0, scalar(0.5), none, rng)(0), 2.0);
  EXPECT_EQ(stochastic_gradient(*p, 1, scalar(0.5), none, rng)(0), -1.0);
}

TEST(Counterexample, MatchesPiecewiseDefinition) {
  const auto p = counterexample_problem();
  for (double x = -3.0; x <= 3.0; x += 0.0625) {
    EXPECT_DOUBLE_EQ(p->local_gradient(0, scalar(x))(0), testing::ce_slope1(x)) << x;
    EXPECT_DOUBLE_EQ(p->local_gradient(1, scalar(x))(0), testing::ce_slope2(x)) << x;
  }
}

TEST(Counterexample, PiecesJoinSmoothly) {
  const auto p = counterexample_problem();
  const double h = 1e-9;
  for (auto [node, kink] : {std::pair{0, -1.0}, {0, 1.0}, {1, 0.0}, {1, 2.0}}) {
    const double left = p->local_loss(node, scalar(kink - h));
    const double right = p->local_loss(node, scalar(kink + h));
    const double at = p->local_loss(node, scalar(kink));
    EXPECT_NEAR(left, at, 1e-8);
    EXPECT_NEAR(right, at, 1e-8);
    const double gl = p->local_gradient(node, scalar(kink - h))(0);
    const double gr = p->local_gradient(node, scalar(kink + h))(0);
    EXPECT_NEAR(gl, gr, 1e-8);
  }
}

TEST(Problems, GradientsMatchFiniteDifferences) {
  expect_gradients_match_fd(*counterexample_problem(), 1, 3.0);
  expect_gradients_match_fd(*quadratic_problem({5, 4, 10.0, 1.0, 9}), 2, 3.0);
  expect_gradients_match_fd(
      *softmax_problem({4, 5, 3, 20, 1.0, 3}, make_heterogeneity_plan(5, 3, 2)), 3, 1.0);
}

TEST(Problems, SmoothnessAndGradientBoundsHoldOnSamples) {
  const auto quad = quadratic_problem({6, 4, 8.0, 1.0, 4});
  const auto soft = softmax_problem({5, 4, 4, 30, 1.0, 5}, make_heterogeneity_plan(4, 4, 1));
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const Problem* p : {quad.get(), soft.get()}) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd x(p->dim()), y(p->dim());
      for (auto& v : x) v = unif(gen);
      for (auto& v : y) v = unif(gen);
      for (std::size_t i = 0; i < p->node_count(); ++i) {
        const double lhs = (p->local_gradient(i, x) - p->local_gradient(i, y)).norm();
        EXPECT_LE(lhs, p->smoothness() * (x - y).norm() * (1 + 1e-12)) << p->name();
      }
    }
  }
  // The softmax bound is exact everywhere, not only near the data.
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(soft->dim());
    for (auto& v : x) v = 20.0 * unif(gen);
    for (std::size_t i = 0; i < soft->node_count(); ++i) {
      EXPECT_LE(soft->local_gradient(i, x).lpNorm<Eigen::Infinity>(), soft->gradient_bound());
    }
  }
}

TEST(Quadratic, IdenticalCentersWhenHomogeneous) {
  const auto p = std::make_shared<QuadraticProblem>(QuadraticOptions{4, 3, 5.0, 0.0, 11});
  for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(p->center(i), p->center(0));
  EXPECT_LE(max_rel_error(*p->stationary_point(), p->center(0)), 1e-12);
}

TEST(Quadratic, SingleNodeMinimizerIsItsCenter) {
  const auto p = std::make_shared<QuadraticProblem>(QuadraticOptions{5, 1, 7.0, 2.0, 3});
  EXPECT_LE(max_rel_error(*p->stationary_point(), p->center(0)), 1e-12);
}

TEST(Quadratic, MinimizerSolvesNormalEquations) {
  const auto p = std::make_shared<QuadraticProblem>(QuadraticOptions{4, 3, 6.0, 1.5, 21});
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4);
  for (std::size_t i = 0; i < 3; ++i) {
    a += p->curvature(i);
    rhs += p->curvature(i) * p->center(i);
  }
  const Eigen::VectorXd oracle = a.fullPivLu().solve(rhs);
  EXPECT_LE(max_rel_error(*p->stationary_point(), oracle), 1e-10);
  EXPECT_NEAR(p->gradient(oracle).norm(), 0.0, 1e-10);
}

TEST(Quadratic, ConditionNumberRespected) {
  const auto p = std::make_shared<QuadraticProblem>(QuadraticOptions{6, 2, 9.0, 1.0, 5});
  for (std::size_t i = 0; i < 2; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p->curvature(i));
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_LE(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff(), 9.0 * (1 + 1e-10));
  }
  EXPECT_THROW(QuadraticProblem(QuadraticOptions{3, 2, 0.5, 1.0, 0}), std::invalid_argument);
}

TEST(Softmax, HomogeneousPlanIsUniformPerNode) {
  const auto p = std::make_shared<SoftmaxProblem>(SoftmaxOptions{3, 10, 5, 100, 1.0, 1},
                                                  make_heterogeneity_plan(10, 5, 10));
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<int> counts(10, 0);
    for (auto c : p->labels(i)) ++counts[c];
    for (int c : counts) EXPECT_EQ(c, 10);
  }
}

TEST(Softmax, DisjointPlanAssignsConsecutivePairs) {
  const HeterogeneityPlan plan = make_heterogeneity_plan(10, 5, 2);
  EXPECT_TRUE(plan.disjoint());
  const auto p = std::make_shared<SoftmaxProblem>(SoftmaxOptions{3, 10, 5, 40, 1.0, 1}, plan);
  for (std::size_t i = 0; i < 5; ++i) {
    for (auto c : p->labels(i)) EXPECT_TRUE(c == 2 * i || c == 2 * i + 1);
  }
  EXPECT_FALSE(make_heterogeneity_plan(10, 5, 3).disjoint());
}

TEST(Softmax, ResidualFormulaAtZero) {
  // One sample per class: at W = 0 every softmax output is 1/C, so the
  // gradient for class c is the mean over samples of (1/C - [y = c]) a.
  const std::size_t C = 4, p_dim = 3;
  const auto p = std::make_shared<SoftmaxProblem>(SoftmaxOptions{p_dim, C, 1, C, 1.0, 8},
                                                  make_heterogeneity_plan(C, 1, C));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(C * p_dim);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(C, p_dim);
  const auto& feats = p->features(0);
  const auto& labels = p->labels(0);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    for (std::size_t c = 0; c < C; ++c) {
      const double resid = 1.0 / double(C) - (labels[k] == c ? 1.0 : 0.0);
      expected.row(c) += resid * feats.col(k).transpose();
    }
  }
  expected /= double(labels.size());
  const Eigen::VectorXd g = p->local_gradient(0, zero);
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(expected.data(), expected.size());
  EXPECT_LE(max_rel_error(g, flat), 1e-12);
  const auto fd = fd_gradient([&](const Eigen::VectorXd& y) { return p->local_loss(0, y); }, zero);
  EXPECT_LE(max_rel_error(g, fd), 1e-5);
}

TEST(Softmax, PooledLossIsSampleWeightedMean) {
  const auto p = std::make_shared<SoftmaxProblem>(SoftmaxOptions{4, 6, 3, 30, 1.5, 2},
                                                  make_heterogeneity_plan(6, 3, 2));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(p->dim());
  for (auto& v : x) v = normal(gen);
  double weighted = 0.0, total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double n_i = double(p->labels(i).size());
    weighted += n_i * p->local_loss(i, x);
    total += n_i;
  }
  EXPECT_NEAR(p->pooled_loss(x), weighted / total, 1e-12);
}

TEST(Softmax, RejectsEmptyNodes) {
  EXPECT_THROW(SoftmaxProblem(SoftmaxOptions{3, 10, 5, 0, 1.0, 1}, make_heterogeneity_plan(10, 5, 2)),
               std::invalid_argument);
}

TEST(Noise, UniformMomentsAndSupport) {
  const auto p = counterexample_problem();
  const NoiseModel noise{NoiseKind::uniform_bounded, 0.1};
  const double exact = p->local_gradient(0, scalar(0.25))(0);
  const int n = 100000;
  double sum = 0.0, sq = 0.0, lo = 1e300, hi = -1e300;
  CounterRng rng(123);
  for (int k = 0; k < n; ++k) {
    const double xi = stochastic_gradient(*p, 0, scalar(0.25), noise, rng)(0) - exact;
    sum += xi;
    sq += xi * xi;
    lo = std::min(lo, xi);
    hi = std::max(hi, xi);
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_LE(std::abs(mean), 3.0 * 0.1 / std::sqrt(double(n)));
  EXPECT_NEAR(var, 0.01, 0.05 * 0.01);
  EXPECT_GE(lo, -0.1 * std::sqrt(3.0));
  EXPECT_LE(hi, 0.1 * std::sqrt(3.0));
  EXPECT_GT(hi - lo, 0.99 * 2.0 * 0.1 * std::sqrt(3.0));
}

TEST(Noise, DimensionMismatchAndBadNode) {
  const auto p = quadratic_problem({3, 2, 2.0, 1.0, 0});
  CounterRng rng(1);
  EXPECT_THROW(stochastic_gradient(*p, 0, Eigen::VectorXd::Zero(4), {}, rng), std::invalid_argument);
  EXPECT_THROW(stochastic_gradient(*p, 2, Eigen::VectorXd::Zero(3), {}, rng), std::out_of_range);
}

}  // namespace
}  // namespace dadopt
