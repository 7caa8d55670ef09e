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

#ifndef DADOPT_OPTIMIZERS_HPP
#define DADOPT_OPTIMIZERS_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dadopt/graph.hpp"

namespace dadopt {

struct HyperParams {
  double alpha = 1e-3;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double epsilon = 1e-6;

  /// Throws std::invalid_argument unless alpha > 0, epsilon > 0 and every
  /// beta lies in [0, 1).
  void validate() const;
};

/// Per-node optimizer variables. Between rounds (after round t has run):
///   x          = x_{t+1}
///   m          = m_t
///   v          = v_t             (EMA of g^2; rule-dependent)
///   v_hat      = v_hat_t
///   v_hat_prev = v_hat_{t-1}
///   u_tilde    = u~_t            (mixed consensus tracker)
///   u          = u_t = max(u~_t, eps), the rate used for the last x-step
///   t          = number of completed rounds
/// The initial state encodes u~_{1/2} = v_hat_0 as u_tilde = v_hat =
/// v_hat_prev = v_hat_0, so that u~ - v_hat_prev + v_hat reproduces it.
struct NodeState {
  Eigen::VectorXd x;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  Eigen::VectorXd v_hat;
  Eigen::VectorXd v_hat_prev;
  Eigen::VectorXd u_tilde;
  Eigen::VectorXd u;
  std::size_t t = 0;
};

using NetworkState = std::vector<NodeState>;

enum class RuleKind { amsgrad, adagrad, adam_style, none };

std::string_view to_string(RuleKind kind);

/// Streaming rule r_t producing v_hat_t from the gradient history.
///   amsgrad:    v_t = b2 v_{t-1} + (1-b2) g^2, v_hat_t = max(v_hat_{t-1}, v_t)
///   adagrad:    v_hat_t = ((t-1)/t) v_hat_{t-1} + (1/t) g^2
///   adam_style: v_t as amsgrad, v_hat_t = v_t (no max; not convergent)
///   none:       v_hat_t = 1
class AdaptiveRule {
 public:
  AdaptiveRule(RuleKind kind, double beta2);

  RuleKind kind() const { return kind_; }
  double beta2() const { return beta2_; }

  /// v_hat_0: epsilon for the adaptive rules, 1 for `none`.
  double initial_value(double epsilon) const;

  /// Advances the rule at round t >= 1: reads v (= v_{t-1}) and v_hat_prev
  /// (= v_hat_{t-1}); writes v and v_hat.
  void update(const Eigen::VectorXd& g, std::size_t t, Eigen::VectorXd& v,
              const Eigen::VectorXd& v_hat_prev, Eigen::VectorXd& v_hat) const;

 private:
  RuleKind kind_;
  double beta2_;
};

AdaptiveRule make_amsgrad_rule(const HyperParams& h);
AdaptiveRule make_adagrad_rule();

/// Thrown when a gradient or updated state holds NaN/Inf.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string what, std::size_t node, std::size_t coordinate, std::size_t round);

  std::size_t node() const { return node_; }
  std::size_t coordinate() const { return coordinate_; }
  std::size_t round() const { return round_; }

 private:
  std::size_t node_, coordinate_, round_;
};

struct RoundOptions {
  /// Moves the u~ increment ahead of the mix so u_t tracks v_hat_t instead of
  /// v_hat_{t-1} (gradient and communication can no longer overlap).
  bool parallel_comm = false;
  /// Worker threads for per-node work inside one round. Results are
  /// bit-identical for every value.
  unsigned threads = 1;
};

/// Every node mixes x over its neighbours' snapshot, then steps
/// x <- mix(x) - alpha * m with m = b1 m + (1-b1) g.
NetworkState dpsgd_round(std::span<const NodeState> states, const MixingMatrix& w,
                         std::span<const Eigen::VectorXd> grads, const HyperParams& h,
                         const RoundOptions& opts = {});

/// DADAM: local v_hat = b3 v_hat_{t-1} + (1-b3) max(v_hat_{t-1}, v_t), no
/// consensus on v_hat; x <- mix(x) - alpha m / sqrt(v_hat). `u` mirrors v_hat.
NetworkState dadam_round(std::span<const NodeState> states, const MixingMatrix& w,
                         std::span<const Eigen::VectorXd> grads, const HyperParams& h,
                         const RoundOptions& opts = {});

/// Generic decentralized adaptive round with dynamic average consensus on
/// v_hat. Per node, reading the round-start snapshot of every neighbour:
///   m     = b1 m + (1-b1) g
///   v_hat = r_t(g_1..g_t)
///   x'    = sum_j W_ij x_j
///   u~    = sum_j W_ij (u~_j - v_hat_{t-2,j} + v_hat_{t-1,j})
///   u     = max(u~, eps)
///   x     = x' - alpha m / sqrt(u)
NetworkState framework_round(std::span<const NodeState> states, const MixingMatrix& w,
                             std::span<const Eigen::VectorXd> grads, const AdaptiveRule& rule,
                             const HyperParams& h, const RoundOptions& opts = {});

enum class OptimizerKind { damsgrad, dadagrad, dadam, dpsgd, framework_none, framework_adam };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);
bool is_framework(OptimizerKind kind);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::damsgrad;
  HyperParams hyper;
  bool parallel_comm = false;

  /// Rule for framework kinds; throws for dadam/dpsgd.
  AdaptiveRule rule() const;
};

/// All nodes start at x_init with m = v = 0 and v_hat_0 per the optimizer.
NetworkState init_states(const OptimizerSpec& spec, std::size_t node_count,
                         const Eigen::VectorXd& x_init);

/// Dispatches one round to the matching update rule.
NetworkState step(const OptimizerSpec& spec, std::span<const NodeState> states,
                  const MixingMatrix& w, std::span<const Eigen::VectorXd> grads,
                  unsigned threads = 1);

}  // namespace dadopt

#endif  // DADOPT_OPTIMIZERS_HPP
