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

#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "dadopt/analysis.hpp"
#include "dadopt/rng.hpp"
#include "dadopt/simulator.hpp"
#include "oracles.hpp"

namespace dadopt {
namespace {

RunConfig small_quadratic(OptimizerKind kind, std::size_t horizon) {
  RunConfig cfg;
  cfg.problem.kind = ProblemKind::quadratic;
  cfg.problem.dim = 4;
  cfg.graph = {TopologyKind::cycle, 5, MixingKind::uniform, 0.0, {}};
  cfg.optimizer.kind = kind;
  cfg.optimizer.hyper = {1e-3, 0.9, 0.99, 0.0, 1e-6};
  cfg.noise = {NoiseKind::uniform_bounded, 0.1};
  cfg.horizon = horizon;
  cfg.seed = 11;
  return cfg;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

void expect_identical(const Trace& a, const Trace& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].t, b[k].t);
    EXPECT_TRUE(same_bits(a[k].mean_loss, b[k].mean_loss));
    EXPECT_TRUE(same_bits(a[k].grad_norm_sq, b[k].grad_norm_sq));
    EXPECT_TRUE(same_bits(a[k].scaled_grad_metric, b[k].scaled_grad_metric));
    EXPECT_TRUE(same_bits(a[k].consensus_err, b[k].consensus_err));
    EXPECT_TRUE(same_bits(a[k].u_spread, b[k].u_spread));
    EXPECT_TRUE(same_bits(a[k].vt_cumulative, b[k].vt_cumulative));
  }
}

/// Scalar problem whose gradient turns NaN once any iterate passes 1.
class PoisonedProblem final : public Problem {
 public:
  PoisonedProblem() { x_star_ = Eigen::VectorXd::Zero(1); }
  std::string name() const override { return "poisoned"; }
  std::size_t dim() const override { return 1; }
  std::size_t node_count() const override { return 2; }
  double local_loss(std::size_t, const Eigen::VectorXd& x) const override { return -x(0); }
  Eigen::VectorXd local_gradient(std::size_t, const Eigen::VectorXd& x) const override {
    return Eigen::VectorXd::Constant(1, x(0) > 1.0 ? std::numeric_limits<double>::quiet_NaN() : -1.0);
  }
};

/// Every node holds node 0's objective of the wrapped problem.
class ReplicatedProblem final : public Problem {
 public:
  ReplicatedProblem(ProblemPtr base, std::size_t nodes) : base_(std::move(base)), nodes_(nodes) {
    smoothness_ = base_->smoothness();
    gradient_bound_ = base_->gradient_bound();
  }
  std::string name() const override { return "replicated"; }
  std::size_t dim() const override { return base_->dim(); }
  std::size_t node_count() const override { return nodes_; }
  double local_loss(std::size_t, const Eigen::VectorXd& x) const override { return base_->local_loss(0, x); }
  Eigen::VectorXd local_gradient(std::size_t, const Eigen::VectorXd& x) const override {
    return base_->local_gradient(0, x);
  }

 private:
  ProblemPtr base_;
  std::size_t nodes_;
};

TEST(Run, SingleRoundProducesOneRecord) {
  auto cfg = small_quadratic(OptimizerKind::damsgrad, 1);
  const auto r = run(cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].t, 1u);
  EXPECT_TRUE(std::isfinite(r.trace[0].mean_loss));
  // Identical starts give zero consensus error in the first record.
  EXPECT_EQ(r.trace[0].consensus_err, 0.0);
  EXPECT_EQ(r.final_states.front().t, 1u);
}

TEST(Run, RecordCadenceKeepsFirstAndLast) {
  auto cfg = small_quadratic(OptimizerKind::dadagrad, 10);
  cfg.record_every = 4;
  const auto r = run(cfg);
  std::vector<std::size_t> ts;
  for (const auto& rec : r.trace) ts.push_back(rec.t);
  EXPECT_EQ(ts, (std::vector<std::size_t>{1, 4, 8, 10}));
  double last = -1.0;
  for (const auto& rec : r.trace) {
    EXPECT_GE(rec.vt_cumulative, last);
    last = rec.vt_cumulative;
  }
}

TEST(Run, ValidationErrors) {
  auto cfg = small_quadratic(OptimizerKind::damsgrad, 10);
  cfg.record_every = 11;
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg = small_quadratic(OptimizerKind::damsgrad, 0);
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg = small_quadratic(OptimizerKind::damsgrad, 10);
  cfg.problem.kind = ProblemKind::counterexample;
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg = small_quadratic(OptimizerKind::damsgrad, 10);
  cfg.graph.kind = TopologyKind::custom;
  EXPECT_THROW(run(cfg), std::invalid_argument);
}

TEST(Run, ReplicatedProblemOnCompleteGraphStaysInConsensus) {
  for (auto kind : {OptimizerKind::damsgrad, OptimizerKind::dadam, OptimizerKind::dpsgd}) {
    RunConfig cfg = small_quadratic(kind, 300);
    cfg.graph = {TopologyKind::complete, 6, MixingKind::uniform, 0.0, {}};
    cfg.noise = {};
    cfg.init = {InitKind::shared_random, 0.0, 2.0};
    const auto problem =
        std::make_shared<ReplicatedProblem>(build_problem(cfg.problem, 6, cfg.seed), 6);
    const auto r = run(cfg, problem, build_mixing(cfg.graph));
    ASSERT_EQ(r.trace.size(), 300u);
    for (const auto& rec : r.trace) EXPECT_LE(rec.consensus_err, 1e-12) << rec.t;
    EXPECT_NEAR(r.summary.lambda, 0.0, 1e-12);
  }
}

TEST(Run, DeterministicAcrossRepeatsAndThreads) {
  auto cfg = small_quadratic(OptimizerKind::damsgrad, 200);
  cfg.init = {InitKind::shared_random, 0.0, 1.0};
  const auto a = run(cfg);
  const auto b = run(cfg);
  cfg.threads = 3;
  const auto c = run(cfg);
  expect_identical(a.trace, b.trace);
  expect_identical(a.trace, c.trace);
  cfg.seed = 12;
  const auto d = run(cfg);
  EXPECT_NE(a.trace.back().grad_norm_sq, d.trace.back().grad_norm_sq);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  const auto streams = derive_rng_streams(42, 4, 100);
  auto a = streams.stream(1, 7);
  auto b = streams.stream(1, 7);
  for (int k = 0; k < 16; ++k) EXPECT_EQ(a(), b());
  std::set<std::uint64_t> firsts;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t t = 1; t <= 100; ++t) firsts.insert(streams.stream(i, t)());
  EXPECT_EQ(firsts.size(), 400u);
  auto n0 = streams.stream(0, 3), n1 = streams.stream(1, 3);
  int equal = 0;
  for (int k = 0; k < 64; ++k) equal += n0() == n1();
  EXPECT_EQ(equal, 0);
  EXPECT_NE(derive_rng_streams(43, 4, 100).stream(0, 1)(), streams.stream(0, 1)());
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform01();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
}

TEST(Run, WarnsWhenStepExceedsCoveredRange) {
  auto cfg = small_quadratic(OptimizerKind::damsgrad, 5);
  cfg.optimizer.hyper.alpha = 0.5;
  EXPECT_FALSE(run(cfg).warnings.empty());
  cfg.optimizer.hyper.alpha = 1e-6;
  EXPECT_TRUE(run(cfg).warnings.empty());
  cfg.optimizer.kind = OptimizerKind::dpsgd;
  cfg.optimizer.hyper.alpha = 0.5;
  EXPECT_TRUE(run(cfg).warnings.empty());
}

TEST(Run, NonFiniteGradientAborts) {
  RunConfig cfg;
  cfg.graph = {TopologyKind::complete, 2, MixingKind::uniform, 0.0, {}};
  cfg.optimizer.kind = OptimizerKind::dpsgd;
  cfg.optimizer.hyper = {0.3, 0.0, 0.0, 0.0, 1e-6};
  cfg.horizon = 100;
  const auto problem = std::make_shared<PoisonedProblem>();
  try {
    run(cfg, problem, build_mixing(cfg.graph));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    // x climbs by 0.3 per round: 0.3, 0.6, 0.9, 1.2 -> NaN gradient in round 5.
    EXPECT_EQ(e.round(), 5u);
  }
}

TEST(Run, DadamStallsWithHalfGradient) {
  const auto r = run(counterexample_config(OptimizerKind::dadam, 0.1, 100000));
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_NEAR(r.summary.final_xbar(0), 0.5, 1e-2);
  EXPECT_NEAR(r.trace.back().grad_norm_sq, 0.25, 0.02);
}

TEST(Run, AmsgradSettlesWhereTheSharedRateBalancesTheNodes) {
  // u tracks the network mean of v_hat = (16 + 4) / 2, so each node steps with
  // alpha / sqrt(10) and the pair settles at that constant-step fixed point.
  const auto r = run(counterexample_config(OptimizerKind::damsgrad, 0.1, 100000));
  const double oracle = testing::two_node_fixed_point(0.1 / std::sqrt(10.0), 0.1 / std::sqrt(10.0));
  EXPECT_NEAR(r.summary.final_xbar(0), oracle, 1e-6);
  EXPECT_NEAR(r.final_states[0].u(0), 10.0, 1e-9);
  EXPECT_LT(std::abs(r.summary.final_xbar(0) - 1.0 / 3.0), std::abs(0.5 - 1.0 / 3.0));
}

TEST(Run, ConservationResidualIsSmall) {
  for (bool parallel : {false, true}) {
    auto cfg = small_quadratic(OptimizerKind::damsgrad, 500);
    cfg.optimizer.parallel_comm = parallel;
    const auto r = run(cfg);
    EXPECT_LE(r.summary.max_conservation_residual, 1e-10);
  }
}

TEST(Run, HookSeesEveryRoundWithLemmaIdentity) {
  auto cfg = small_quadratic(OptimizerKind::dadagrad, 50);
  cfg.graph.mixing = MixingKind::mdm;
  cfg.graph.gamma = 0.3;
  std::size_t rounds = 0;
  double worst = 0.0;
  RunHooks hooks;
  hooks.on_round = [&](const RoundView& v) {
    ++rounds;
    EXPECT_EQ(v.t, rounds);
    worst = std::max(worst, testing::descent_identity_residual(v.xbar_prev, v.before, v.grads, v.after,
                                                               cfg.optimizer.hyper.alpha,
                                                               cfg.optimizer.hyper.beta1));
  };
  run(cfg, hooks);
  EXPECT_EQ(rounds, 50u);
  EXPECT_LE(worst, 1e-10);
}

TEST(Run, ConsensusBoundHoldsInCoveredRange) {
  auto cfg = small_quadratic(OptimizerKind::damsgrad, 2000);
  cfg.problem.dim = 8;
  const auto problem = build_problem(cfg.problem, 5, cfg.seed);
  cfg.optimizer.hyper.alpha = max_covered_step_size(cfg.optimizer.hyper.epsilon, problem->smoothness());
  const auto r = run(cfg, problem, build_mixing(cfg.graph));
  EXPECT_TRUE(r.warnings.empty());
  const double g = std::max(problem->gradient_bound(), r.summary.observed_gradient_bound);
  const double bound = consensus_error_bound(cfg.optimizer.hyper.alpha, r.summary.lambda, 8, g,
                                             cfg.optimizer.hyper.epsilon);
  for (const auto& rec : r.trace) EXPECT_LE(rec.consensus_err, 1.01 * bound);
}

TEST(Sweep, AlphaCellsIsolateErrors) {
  const auto base = small_quadratic(OptimizerKind::damsgrad, 50);
  const std::vector<double> values{1e-2, -1.0, 1e-3};
  const auto cells = sweep(base, SweepAxis::alpha, values, 2);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_TRUE(cells[0].summary.has_value());
  EXPECT_FALSE(cells[1].summary.has_value());
  EXPECT_NE(cells[1].error.find("alpha"), std::string::npos);
  EXPECT_TRUE(cells[2].summary.has_value());
  EXPECT_EQ(cells[2].value, 1e-3);
}

TEST(Sweep, WorkerCountDoesNotChangeCells) {
  const auto base = small_quadratic(OptimizerKind::damsgrad, 100);
  const std::vector<double> values{1e-1, 1e-2, 1e-3, 1e-4};
  const auto a = sweep(base, SweepAxis::alpha, values, 1);
  const auto b = sweep(base, SweepAxis::alpha, values, 3);
  for (std::size_t k = 0; k < values.size(); ++k) expect_identical(a[k].trace, b[k].trace);
}

TEST(Sweep, LongerHorizonsLowerTheAverageMetric) {
  auto base = small_quadratic(OptimizerKind::damsgrad, 1);
  base.optimizer.hyper.alpha = 1e-2;
  base.noise = {};
  base.record_every = 1000;
  const std::vector<double> values{1e3, 4e3, 1.6e4};
  const auto cells = sweep(base, SweepAxis::horizon, values, 1);
  for (const auto& c : cells) ASSERT_TRUE(c.summary) << c.error;
  EXPECT_LT(cells[1].summary->avg_scaled_metric, cells[0].summary->avg_scaled_metric);
  EXPECT_LT(cells[2].summary->avg_scaled_metric, cells[1].summary->avg_scaled_metric);
  EXPECT_EQ(cells[2].trace.back().t, 16000u);
}

TEST(Sweep, LambdaAxisHitsTargets) {
  const auto base = small_quadratic(OptimizerKind::damsgrad, 20);
  const std::vector<double> values{0.6, 0.75, 0.9};
  const auto cells = sweep(base, SweepAxis::lambda, values, 1);
  for (std::size_t k = 0; k < values.size(); ++k) {
    ASSERT_TRUE(cells[k].summary) << cells[k].error;
    EXPECT_NEAR(cells[k].summary->lambda, values[k], 1e-10);
  }
  const std::vector<double> unreachable{0.1};
  EXPECT_FALSE(sweep(base, SweepAxis::lambda, unreachable, 1)[0].summary);
}

TEST(Sweep, NodeAxisRebuildsProblemAndGraph) {
  auto base = small_quadratic(OptimizerKind::damsgrad, 20);
  const std::vector<double> values{3, 5, 2.5};
  const auto cells = sweep(base, SweepAxis::nodes, values, 2);
  EXPECT_TRUE(cells[0].summary);
  EXPECT_TRUE(cells[1].summary);
  EXPECT_FALSE(cells[2].summary);
  EXPECT_NE(cells[0].summary->lambda, cells[1].summary->lambda);
}

TEST(Parsing, NamesRoundTrip) {
  for (auto k : {ProblemKind::counterexample, ProblemKind::quadratic, ProblemKind::softmax})
    EXPECT_EQ(parse_problem_kind(to_string(k)), k);
  for (auto k : {SweepAxis::alpha, SweepAxis::horizon, SweepAxis::nodes, SweepAxis::lambda})
    EXPECT_EQ(parse_sweep_axis(to_string(k)), k);
  EXPECT_EQ(parse_sweep_axis("T"), SweepAxis::horizon);
  EXPECT_EQ(parse_init_kind("shared-random"), InitKind::shared_random);
  EXPECT_THROW(parse_mixing_kind("metropolis"), std::invalid_argument);
}

}  // namespace
}  // namespace dadopt
