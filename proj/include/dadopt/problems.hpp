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

#ifndef DADOPT_PROBLEMS_HPP
#define DADOPT_PROBLEMS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dadopt/rng.hpp"

namespace dadopt {

/// Per-node objective oracle for min_x (1/N) sum_i f_i(x).
///
/// Implementations are immutable after construction; every method is const
/// and safe to call concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t node_count() const = 0;

  virtual double local_loss(std::size_t node, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd local_gradient(std::size_t node, const Eigen::VectorXd& x) const = 0;

  /// f(x) = (1/N) sum_i f_i(x).
  double loss(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Gradient Lipschitz constant (an upper bound where noted).
  double smoothness() const { return smoothness_; }
  /// Bound on ||grad f_i||_inf (see each factory for how it is obtained).
  double gradient_bound() const { return gradient_bound_; }
  const std::optional<Eigen::VectorXd>& stationary_point() const { return x_star_; }
  /// min_x f(x) when known.
  std::optional<double> min_loss() const;

 protected:
  double smoothness_ = 1.0;
  double gradient_bound_ = 1.0;
  std::optional<Eigen::VectorXd> x_star_;

  void check_node(std::size_t node) const;
  void check_dim(const Eigen::VectorXd& x) const;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// Two-node, one-dimensional construction on which DADAM stalls at 0.5:
/// f1(x) = 2x^2 on |x| <= 1 else 4|x| - 2, f2(x) = (x-1)^2 on |x-1| <= 1 else
/// 2|x-1| - 1. L = 4, G_inf = 4, x* = 1/3. At a kink the inner-piece slope is
/// used; both pieces agree there.
ProblemPtr counterexample_problem();

/// f_i(x) = 1/2 (x - b_i)^T A_i (x - b_i) with A_i = Q_i diag(s) Q_i^T, the
/// spectrum s log-spaced on [1, condition] and Q_i a random rotation. The
/// offsets are b_i = b + hetero * z_i with b, z_i standard normal. x_star
/// solves (sum A_i) x = sum A_i b_i. L = condition. The gradient bound is the
/// largest ||A_i (x - b_i)||_inf over 256 points sampled in the box
/// ||x - x_star||_inf <= 1 + max_i ||b_i - x_star||_inf (the gradient is
/// unbounded globally, so this is a sampled estimate).
struct QuadraticOptions {
  std::size_t dim = 8;
  std::size_t node_count = 5;
  double condition = 4.0;
  double hetero = 1.0;
  std::uint64_t seed = 0;
};

class QuadraticProblem final : public Problem {
 public:
  explicit QuadraticProblem(const QuadraticOptions& opts);

  std::string name() const override { return "quadratic"; }
  std::size_t dim() const override { return opts_.dim; }
  std::size_t node_count() const override { return opts_.node_count; }
  double local_loss(std::size_t node, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd local_gradient(std::size_t node, const Eigen::VectorXd& x) const override;

  const Eigen::MatrixXd& curvature(std::size_t node) const { return a_.at(node); }
  const Eigen::VectorXd& center(std::size_t node) const { return b_.at(node); }

 private:
  QuadraticOptions opts_;
  std::vector<Eigen::MatrixXd> a_;
  std::vector<Eigen::VectorXd> b_;
};

ProblemPtr quadratic_problem(const QuadraticOptions& opts);

/// Assignment of class labels to nodes. When classes_per_node * N equals
/// num_classes the subsets are disjoint: node i holds {c*i, ..., c*i + c-1}.
/// Otherwise node i holds the c consecutive labels starting at c*i mod C.
struct HeterogeneityPlan {
  std::size_t num_classes = 10;
  std::size_t classes_per_node = 10;
  std::vector<std::vector<std::size_t>> assignment;

  bool disjoint() const;
};

HeterogeneityPlan make_heterogeneity_plan(std::size_t num_classes, std::size_t node_count,
                                          std::size_t classes_per_node);

struct SoftmaxOptions {
  std::size_t feature_dim = 10;
  std::size_t num_classes = 10;
  std::size_t node_count = 5;
  std::size_t samples_per_node = 100;
  /// Class means are drawn from N(0, separation^2 I); samples add N(0, I).
  double separation = 1.0;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression (no bias) on a synthetic Gaussian mixture,
/// one Gaussian per class. Parameters are the C x p weight matrix stored
/// column-major in a vector of length C*p. Node labels follow the plan
/// round-robin, so a node with k labels and a multiple of k samples has a
/// uniform empirical class distribution.
///
/// L is the upper bound (1/2) max_i mean_k ||a_k||^2 on node i's Hessian
/// norm; the gradient bound max_k ||a_k||_inf is exact for every x since
/// each gradient entry is an average of (p_c - y_c) a_kj with |p_c - y_c| <= 1.
class SoftmaxProblem final : public Problem {
 public:
  SoftmaxProblem(const SoftmaxOptions& opts, HeterogeneityPlan plan);

  std::string name() const override { return "softmax"; }
  std::size_t dim() const override { return opts_.feature_dim * opts_.num_classes; }
  std::size_t node_count() const override { return opts_.node_count; }
  double local_loss(std::size_t node, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd local_gradient(std::size_t node, const Eigen::VectorXd& x) const override;

  /// Mean cross-entropy over the union of all nodes' samples.
  double pooled_loss(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& features(std::size_t node) const { return features_.at(node); }
  const std::vector<std::size_t>& labels(std::size_t node) const { return labels_.at(node); }
  const HeterogeneityPlan& plan() const { return plan_; }

 private:
  SoftmaxOptions opts_;
  HeterogeneityPlan plan_;
  // Per node: p x n feature matrix (one sample per column) and n labels.
  std::vector<Eigen::MatrixXd> features_;
  std::vector<std::vector<std::size_t>> labels_;

  double cross_entropy_sum(const Eigen::MatrixXd& feats, const std::vector<std::size_t>& labels,
                           const Eigen::VectorXd& x) const;
};

ProblemPtr softmax_problem(const SoftmaxOptions& opts, HeterogeneityPlan plan);

enum class NoiseKind { none, uniform_bounded };

/// Additive gradient noise: per-coordinate i.i.d. uniform on
/// [-sigma*sqrt(3), sigma*sqrt(3)], giving mean 0 and variance sigma^2 with
/// bounded support.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;

  double half_width() const;
};

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

/// grad f_i(x) + xi with xi drawn from `rng`.
Eigen::VectorXd stochastic_gradient(const Problem& p, std::size_t node, const Eigen::VectorXd& x,
                                    const NoiseModel& noise, CounterRng& rng);

}  // namespace dadopt

#endif  // DADOPT_PROBLEMS_HPP
