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

#ifndef DADOPT_SIMULATOR_HPP
#define DADOPT_SIMULATOR_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dadopt/graph.hpp"
#include "dadopt/optimizers.hpp"
#include "dadopt/problems.hpp"

namespace dadopt {

enum class ProblemKind { counterexample, quadratic, softmax };
ProblemKind parse_problem_kind(std::string_view name);
std::string_view to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::quadratic;
  // quadratic
  std::size_t dim = 8;
  double condition = 4.0;
  double hetero = 1.0;
  // softmax (dim is the feature dimension)
  std::size_t num_classes = 10;
  std::size_t classes_per_node = 10;
  std::size_t samples_per_node = 100;
  double separation = 1.0;
  /// Data seed; defaults to the run seed.
  std::optional<std::uint64_t> seed;
};

enum class MixingKind { uniform, mdm };
MixingKind parse_mixing_kind(std::string_view name);
std::string_view to_string(MixingKind kind);

struct GraphSpec {
  TopologyKind kind = TopologyKind::cycle;
  std::size_t nodes = 5;
  MixingKind mixing = MixingKind::uniform;
  /// W <- gamma I + (1 - gamma) W.
  double gamma = 0.0;
  /// Edge list for kind == custom.
  std::filesystem::path edges_file;
};

enum class InitKind { constant, shared_random };
InitKind parse_init_kind(std::string_view name);
std::string_view to_string(InitKind kind);

/// Every node starts from the same x_init: either all coordinates equal to
/// `value`, or one uniform draw on [-scale, scale]^d from the run seed.
struct InitSpec {
  InitKind kind = InitKind::constant;
  double value = 0.0;
  double scale = 1.0;
};

struct RunConfig {
  ProblemSpec problem;
  GraphSpec graph;
  OptimizerSpec optimizer;
  NoiseModel noise;
  std::size_t horizon = 1000;
  std::uint64_t seed = 0;
  std::size_t record_every = 1;
  InitSpec init;
  /// Per-node worker threads inside a round.
  unsigned threads = 1;

  /// Throws std::invalid_argument on T < 1, record_every outside [1, T] or
  /// invalid hyperparameters.
  void validate() const;
};

/// Metrics of round t. Gradients in the metrics are exact even when the
/// optimizer consumes noisy ones.
///   mean_loss          f(xbar_t)
///   grad_norm_sq       ||grad f(xbar_t)||^2
///   scaled_grad_metric ||grad f(xbar_t) / ubar_t^{1/4}||^2
///   consensus_err      (1/N) sum_i ||x_{t,i} - xbar_t||^2
///   u_spread           (1/N) sum_i ||u_{t,i} - ubar_t||_1
///   vt_cumulative      sum_{s<=t} sum_i ||v_hat_{s-1,i} - v_hat_{s-2,i}||_1
///                      (v_hat_{-1} = v_hat_0)
/// where xbar_t averages the iterates entering round t and ubar_t the rates
/// used in round t (v_hat for DADAM, 1 for D-PSGD).
struct TraceRecord {
  std::size_t t = 0;
  double mean_loss = 0.0;
  double grad_norm_sq = 0.0;
  double scaled_grad_metric = 0.0;
  double consensus_err = 0.0;
  double u_spread = 0.0;
  double vt_cumulative = 0.0;
  Eigen::VectorXd xbar;
};

using Trace = std::vector<TraceRecord>;

struct RunSummary {
  double avg_scaled_metric = 0.0;       // mean over t = 1..T
  double tail_avg_scaled_metric = 0.0;  // mean over the last half of the rounds
  double tail_avg_grad_norm_sq = 0.0;
  double final_loss = 0.0;              // f at the mean of the final iterates
  Eigen::VectorXd final_xbar;
  double vt_cumulative = 0.0;
  double max_consensus_err = 0.0;
  /// max over rounds and coordinates of |mean_i u~_{t,i} - mean_i v_hat_{t-1,i}|
  /// (v_hat_t in parallel-communication mode); zero for non-framework runs.
  double max_conservation_residual = 0.0;
  /// max over rounds and nodes of ||g_{t,i}||_inf.
  double observed_gradient_bound = 0.0;
  double lambda = 0.0;
  double f_initial = 0.0;
};

struct RunResult {
  Trace trace;
  RunSummary summary;
  NetworkState final_states;
  std::vector<std::string> warnings;
};

/// Passed to hooks after each round.
struct RoundView {
  std::size_t t;
  const Eigen::VectorXd& xbar_prev;  // xbar_{t-1}; xbar_1 at t = 1
  std::span<const NodeState> before;
  std::span<const Eigen::VectorXd> grads;
  std::span<const NodeState> after;
};

struct RunHooks {
  std::function<void(const RoundView&)> on_round;
};

ProblemPtr build_problem(const ProblemSpec& spec, std::size_t node_count, std::uint64_t run_seed);
Topology build_graph_topology(const GraphSpec& spec);
MixingMatrix build_mixing(const GraphSpec& spec);

/// Executes T synchronous rounds. Records t = 1, every record_every-th
/// round, and t = T. Throws NumericalError on NaN/Inf.
RunResult run(const RunConfig& cfg, const RunHooks& hooks = {});

/// Same, with an explicit problem and mixing matrix (the graph and problem
/// sections of cfg are ignored).
RunResult run(const RunConfig& cfg, const ProblemPtr& problem, const MixingMatrix& w,
              const RunHooks& hooks = {});

/// Two nodes on the complete graph (W = [[0.5, 0.5], [0.5, 0.5]]), both
/// starting at -1, every beta zero and exact gradients on the counterexample
/// objective.
RunConfig counterexample_config(OptimizerKind kind, double alpha, std::size_t horizon,
                                double epsilon = 1e-6);

enum class SweepAxis { alpha, horizon, nodes, lambda };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepCell {
  double value = 0.0;
  std::optional<RunSummary> summary;
  std::string error;
  /// Per-cell trace, kept so callers can write one file per cell.
  Trace trace;
};

/// Independent runs sharing the base seed. For the lambda axis, each value
/// is the target lambda reached by blending the base W with the identity.
/// Failures are reported per cell. `workers` caps concurrent cells.
std::vector<SweepCell> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                             unsigned workers = 1);

/// gamma in [0, 1) with lambda(gamma I + (1-gamma) W) == target, taken on
/// the branch where lambda grows with gamma. Throws if the target is below
/// the reachable minimum or >= 1.
double gamma_for_lambda(const MixingMatrix& w, double target);

}  // namespace dadopt

#endif  // DADOPT_SIMULATOR_HPP
