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

#include "dadopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dadopt {

double Problem::loss(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < node_count(); ++i) total += local_loss(i, x);
  return total / static_cast<double>(node_count());
}

Eigen::VectorXd Problem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < node_count(); ++i) total += local_gradient(i, x);
  return total / static_cast<double>(node_count());
}

std::optional<double> Problem::min_loss() const {
  if (!x_star_) return std::nullopt;
  return loss(*x_star_);
}

void Problem::check_node(std::size_t node) const {
  if (node >= node_count()) {
    throw std::out_of_range("node " + std::to_string(node) + " out of range for " +
                            std::to_string(node_count()) + "-node problem");
  }
}

void Problem::check_dim(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw std::invalid_argument("dimension mismatch: got " + std::to_string(x.size()) +
                                ", problem dimension is " + std::to_string(dim()));
  }
}

// ---------------------------------------------------------------------------
// Counterexample

namespace {

class CounterexampleProblem final : public Problem {
 public:
  CounterexampleProblem() {
    smoothness_ = 4.0;
    gradient_bound_ = 4.0;
    x_star_ = Eigen::VectorXd::Constant(1, 1.0 / 3.0);
  }

  std::string name() const override { return "counterexample"; }
  std::size_t dim() const override { return 1; }
  std::size_t node_count() const override { return 2; }

  double local_loss(std::size_t node, const Eigen::VectorXd& x) const override {
    check_node(node);
    check_dim(x);
    const double v = x(0);
    if (node == 0) return std::abs(v) <= 1.0 ? 2.0 * v * v : 4.0 * std::abs(v) - 2.0;
    const double s = v - 1.0;
    return std::abs(s) <= 1.0 ? s * s : 2.0 * std::abs(s) - 1.0;
  }

  Eigen::VectorXd local_gradient(std::size_t node, const Eigen::VectorXd& x) const override {
    check_node(node);
    check_dim(x);
    const double v = x(0);
    double g;
    if (node == 0) {
      g = std::abs(v) <= 1.0 ? 4.0 * v : 4.0 * std::copysign(1.0, v);
    } else {
      const double s = v - 1.0;
      g = std::abs(s) <= 1.0 ? 2.0 * s : 2.0 * std::copysign(1.0, s);
    }
    return Eigen::VectorXd::Constant(1, g);
  }
};

}  // namespace

ProblemPtr counterexample_problem() { return std::make_shared<CounterexampleProblem>(); }

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(const QuadraticOptions& opts) : opts_(opts) {
  if (opts.dim == 0 || opts.node_count == 0) {
    throw std::invalid_argument("quadratic problem needs dim >= 1 and node_count >= 1");
  }
  if (!(opts.condition >= 1.0)) {
    throw std::invalid_argument("condition number must be >= 1, got " +
                                std::to_string(opts.condition));
  }
  if (!(opts.hetero >= 0.0)) throw std::invalid_argument("hetero must be non-negative");

  const auto d = static_cast<Eigen::Index>(opts.dim);
  std::mt19937_64 gen(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian_vector = [&] {
    Eigen::VectorXd v(d);
    for (Eigen::Index k = 0; k < d; ++k) v(k) = normal(gen);
    return v;
  };

  Eigen::VectorXd spectrum(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(d - 1);
    spectrum(k) = std::pow(opts.condition, frac);
  }

  const Eigen::VectorXd common = gaussian_vector();
  Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < opts.node_count; ++i) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index c = 0; c < d; ++c) g.col(c) = gaussian_vector();
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::MatrixXd a = q * spectrum.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::VectorXd b = opts.hetero == 0.0 ? common : Eigen::VectorXd(common + opts.hetero * gaussian_vector());
    a_sum += a;
    rhs += a * b;
    a_.push_back(std::move(a));
    b_.push_back(std::move(b));
  }
  x_star_ = Eigen::VectorXd(a_sum.ldlt().solve(rhs));
  smoothness_ = opts.condition;

  double radius = 1.0;
  for (const auto& b : b_) radius = std::max(radius, 1.0 + (b - *x_star_).lpNorm<Eigen::Infinity>());
  CounterRng box_rng(mix64(opts.seed ^ 0x51a7e5ULL));
  double g_max = 0.0;
  for (int s = 0; s < 256; ++s) {
    Eigen::VectorXd x(d);
    for (Eigen::Index k = 0; k < d; ++k) x(k) = (*x_star_)(k) + radius * (2.0 * box_rng.uniform01() - 1.0);
    for (std::size_t i = 0; i < opts.node_count; ++i) {
      g_max = std::max(g_max, (a_[i] * (x - b_[i])).lpNorm<Eigen::Infinity>());
    }
  }
  gradient_bound_ = g_max;
}

double QuadraticProblem::local_loss(std::size_t node, const Eigen::VectorXd& x) const {
  check_node(node);
  check_dim(x);
  const Eigen::VectorXd r = x - b_[node];
  return 0.5 * r.dot(a_[node] * r);
}

Eigen::VectorXd QuadraticProblem::local_gradient(std::size_t node, const Eigen::VectorXd& x) const {
  check_node(node);
  check_dim(x);
  return a_[node] * (x - b_[node]);
}

ProblemPtr quadratic_problem(const QuadraticOptions& opts) {
  return std::make_shared<QuadraticProblem>(opts);
}

// ---------------------------------------------------------------------------
// Softmax regression

bool HeterogeneityPlan::disjoint() const {
  std::vector<int> seen(num_classes, 0);
  for (const auto& subset : assignment)
    for (auto c : subset)
      if (seen.at(c)++) return false;
  return true;
}

HeterogeneityPlan make_heterogeneity_plan(std::size_t num_classes, std::size_t node_count,
                                          std::size_t classes_per_node) {
  if (num_classes == 0 || node_count == 0) {
    throw std::invalid_argument("heterogeneity plan needs at least one class and one node");
  }
  if (classes_per_node == 0 || classes_per_node > num_classes) {
    throw std::invalid_argument("classes_per_node must lie in [1, num_classes]");
  }
  HeterogeneityPlan plan{num_classes, classes_per_node, {}};
  plan.assignment.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    const std::size_t start = (classes_per_node * i) % num_classes;
    for (std::size_t k = 0; k < classes_per_node; ++k) {
      plan.assignment[i].push_back((start + k) % num_classes);
    }
  }
  return plan;
}

SoftmaxProblem::SoftmaxProblem(const SoftmaxOptions& opts, HeterogeneityPlan plan)
    : opts_(opts), plan_(std::move(plan)) {
  if (opts.samples_per_node == 0) throw std::invalid_argument("samples_per_node must be positive");
  if (opts.feature_dim == 0 || opts.num_classes < 2 || opts.node_count == 0) {
    throw std::invalid_argument("softmax problem needs feature_dim >= 1, >= 2 classes, >= 1 node");
  }
  if (plan_.num_classes != opts.num_classes || plan_.assignment.size() != opts.node_count) {
    throw std::invalid_argument("heterogeneity plan does not match num_classes / node_count");
  }
  for (const auto& subset : plan_.assignment) {
    if (subset.empty()) throw std::invalid_argument("every node needs at least one class");
    for (auto c : subset)
      if (c >= opts.num_classes) throw std::invalid_argument("plan references an unknown class");
  }

  const auto p = static_cast<Eigen::Index>(opts.feature_dim);
  std::mt19937_64 gen(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd means(p, static_cast<Eigen::Index>(opts.num_classes));
  for (Eigen::Index c = 0; c < means.cols(); ++c)
    for (Eigen::Index k = 0; k < p; ++k) means(k, c) = opts.separation * normal(gen);

  double l_max = 0.0, a_inf = 0.0;
  for (std::size_t i = 0; i < opts.node_count; ++i) {
    const auto& subset = plan_.assignment[i];
    Eigen::MatrixXd feats(p, static_cast<Eigen::Index>(opts.samples_per_node));
    std::vector<std::size_t> labels(opts.samples_per_node);
    double sq_norm_sum = 0.0;
    for (std::size_t s = 0; s < opts.samples_per_node; ++s) {
      const auto c = subset[s % subset.size()];
      labels[s] = c;
      for (Eigen::Index k = 0; k < p; ++k) feats(k, s) = means(k, c) + normal(gen);
      sq_norm_sum += feats.col(s).squaredNorm();
      a_inf = std::max(a_inf, feats.col(s).lpNorm<Eigen::Infinity>());
    }
    l_max = std::max(l_max, 0.5 * sq_norm_sum / static_cast<double>(opts.samples_per_node));
    features_.push_back(std::move(feats));
    labels_.push_back(std::move(labels));
  }
  smoothness_ = l_max;
  gradient_bound_ = a_inf;
}

double SoftmaxProblem::cross_entropy_sum(const Eigen::MatrixXd& feats,
                                         const std::vector<std::size_t>& labels,
                                         const Eigen::VectorXd& x) const {
  const auto c = static_cast<Eigen::Index>(opts_.num_classes);
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), c, feats.rows());
  const Eigen::MatrixXd logits = w * feats;
  double total = 0.0;
  for (Eigen::Index s = 0; s < logits.cols(); ++s) {
    const double mx = logits.col(s).maxCoeff();
    const double lse = mx + std::log((logits.col(s).array() - mx).exp().sum());
    total += lse - logits(static_cast<Eigen::Index>(labels[s]), s);
  }
  return total;
}

double SoftmaxProblem::local_loss(std::size_t node, const Eigen::VectorXd& x) const {
  check_node(node);
  check_dim(x);
  return cross_entropy_sum(features_[node], labels_[node], x) /
         static_cast<double>(labels_[node].size());
}

Eigen::VectorXd SoftmaxProblem::local_gradient(std::size_t node, const Eigen::VectorXd& x) const {
  check_node(node);
  check_dim(x);
  const auto& feats = features_[node];
  const auto& labels = labels_[node];
  const auto c = static_cast<Eigen::Index>(opts_.num_classes);
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), c, feats.rows());
  Eigen::MatrixXd residual = w * feats;  // logits, then softmax - onehot
  for (Eigen::Index s = 0; s < residual.cols(); ++s) {
    auto col = residual.col(s);
    const double mx = col.maxCoeff();
    col = (col.array() - mx).exp().matrix();
    col /= col.sum();
    col(static_cast<Eigen::Index>(labels[s])) -= 1.0;
  }
  Eigen::MatrixXd grad = residual * feats.transpose() / static_cast<double>(labels.size());
  return Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
}

double SoftmaxProblem::pooled_loss(const Eigen::VectorXd& x) const {
  check_dim(x);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    total += cross_entropy_sum(features_[i], labels_[i], x);
    count += labels_[i].size();
  }
  return total / static_cast<double>(count);
}

ProblemPtr softmax_problem(const SoftmaxOptions& opts, HeterogeneityPlan plan) {
  return std::make_shared<SoftmaxProblem>(opts, std::move(plan));
}

// ---------------------------------------------------------------------------
// Noise

double NoiseModel::half_width() const {
  return kind == NoiseKind::none ? 0.0 : sigma * std::sqrt(3.0);
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::none;
  if (name == "uniform" || name == "uniform-bounded") return NoiseKind::uniform_bounded;
  throw std::invalid_argument("unknown noise kind '" + std::string(name) +
                              "' (expected none or uniform-bounded)");
}

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::none ? "none" : "uniform-bounded";
}

Eigen::VectorXd stochastic_gradient(const Problem& p, std::size_t node, const Eigen::VectorXd& x,
                                    const NoiseModel& noise, CounterRng& rng) {
  Eigen::VectorXd g = p.local_gradient(node, x);
  if (noise.kind == NoiseKind::none || noise.sigma == 0.0) return g;
  if (noise.sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  const double a = noise.half_width();
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += a * (2.0 * rng.uniform01() - 1.0);
  return g;
}

}  // namespace dadopt
