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

#include "dadopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dadopt {

BoundConstants bound_constants(double smoothness, double gradient_bound, double epsilon,
                               double beta1, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!(smoothness > 0.0) || !(gradient_bound > 0.0)) {
    throw std::invalid_argument("smoothness and gradient bound must be positive");
  }
  const double L = smoothness;
  const double g2 = gradient_bound * gradient_bound;
  const double mom = beta1 / (1.0 - beta1);
  const double inv_gap = 1.0 / (1.0 - lambda);

  BoundConstants c{};
  c.c1 = std::max(4.0, 4.0 * L / epsilon);
  c.c2 = 6.0 * (mom * mom + inv_gap * inv_gap) * L * g2 / std::pow(epsilon, 1.5);
  c.c3 = 16.0 * L * L * (1.0 - lambda) * g2 / (epsilon * epsilon);
  c.c4 = 2.0 / (std::pow(epsilon, 1.5) * (1.0 - lambda)) * (lambda + mom) * g2;
  c.c5 = 2.0 / (epsilon * epsilon * (1.0 - lambda)) * L * (lambda + mom) * g2 +
         4.0 / (epsilon * epsilon * (1.0 - lambda)) * L * g2;
  c.lambda = lambda;
  c.smoothness = smoothness;
  c.gradient_bound = gradient_bound;
  c.epsilon = epsilon;
  c.beta1 = beta1;
  return c;
}

double theorem2_rhs(const BoundConstants& c, double alpha, std::size_t horizon, std::size_t dim,
                    std::size_t node_count, double f_gap, double sigma, double vt) {
  if (horizon == 0 || dim == 0 || node_count == 0) {
    throw std::invalid_argument("horizon, dim and node_count must be positive");
  }
  const double T = static_cast<double>(horizon);
  const double d = static_cast<double>(dim);
  const double N = static_cast<double>(node_count);
  return c.c1 * (f_gap / (T * alpha) + alpha * d * sigma * sigma / N) + c.c2 * alpha * alpha * d +
         c.c3 * alpha * alpha * alpha * d + (c.c4 + c.c5 * alpha) * vt / (T * std::sqrt(N));
}

double consensus_error_bound(double alpha, double lambda, std::size_t dim, double gradient_bound,
                             double epsilon) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
  const double inv_gap = 1.0 / (1.0 - lambda);
  return alpha * alpha * inv_gap * inv_gap * static_cast<double>(dim) * gradient_bound *
         gradient_bound / epsilon;
}

double vt_bound_amsgrad(std::size_t node_count, std::size_t dim, double gradient_bound) {
  return static_cast<double>(node_count) * static_cast<double>(dim) * gradient_bound *
         gradient_bound;
}

double vt_bound_adagrad(std::size_t node_count, std::size_t dim, double gradient_bound,
                        std::size_t horizon) {
  return vt_bound_amsgrad(node_count, dim, gradient_bound) *
         (1.0 + std::log(static_cast<double>(horizon)));
}

double corollary_step_size(std::size_t node_count, std::size_t horizon, std::size_t dim) {
  return std::sqrt(static_cast<double>(node_count)) /
         std::sqrt(static_cast<double>(horizon) * static_cast<double>(dim));
}

double max_covered_step_size(double epsilon, double smoothness) {
  return std::sqrt(epsilon) / (16.0 * smoothness);
}

Eigen::VectorXd ZSequence::push(const Eigen::VectorXd& xbar) {
  const Eigen::VectorXd& prev = xbar_prev_ ? *xbar_prev_ : xbar;
  Eigen::VectorXd z = xbar + (beta1_ / (1.0 - beta1_)) * (xbar - prev);
  xbar_prev_ = xbar;
  return z;
}

Eigen::VectorXd network_mean_x(std::span<const NodeState> states) {
  if (states.empty()) throw std::invalid_argument("no node states");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(states.front().x.size());
  for (const auto& s : states) mean += s.x;
  return mean / static_cast<double>(states.size());
}

double verify_lemma1(const RoundSnapshot& snap, const HyperParams& h) {
  const auto n = snap.before.size();
  if (n == 0 || snap.after.size() != n || snap.grads.size() != n) {
    throw std::invalid_argument("lemma check needs before/after states and gradients for every node");
  }
  const auto d = snap.before.front().x.size();
  if (snap.xbar_prev.size() != d) throw std::invalid_argument("missing xbar_{t-1}");

  const double b = h.beta1 / (1.0 - h.beta1);
  const Eigen::VectorXd xbar_t = network_mean_x(snap.before);
  const Eigen::VectorXd xbar_next = network_mean_x(snap.after);
  const Eigen::VectorXd z_t = xbar_t + b * (xbar_t - snap.xbar_prev);
  const Eigen::VectorXd z_next = xbar_next + b * (xbar_next - xbar_t);
  const Eigen::VectorXd lhs = z_next - z_t;

  Eigen::VectorXd momentum_term = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd gradient_term = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pre = snap.before[i];
    const auto& post = snap.after[i];
    const Eigen::ArrayXd inv_sqrt_prev = pre.u.array().rsqrt();
    const Eigen::ArrayXd inv_sqrt_now = post.u.array().rsqrt();
    momentum_term += (pre.m.array() * (inv_sqrt_prev - inv_sqrt_now)).matrix();
    gradient_term += (snap.grads[i].array() * inv_sqrt_now).matrix();
  }
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd rhs = h.alpha * b * momentum_term / nd - h.alpha * gradient_term / nd;
  return (lhs - rhs).norm();
}

double lemma2_h(std::span<const double> a, double r) {
  if (a.empty()) throw std::invalid_argument("lemma check needs a non-empty list");
  double mean = 0.0;
  for (double ai : a) mean += std::max(ai, r);
  mean /= static_cast<double>(a.size());
  double h = 0.0;
  for (double ai : a) h += std::abs(std::max(ai, r) - mean);
  return h;
}

Lemma2Values verify_lemma2(std::span<const double> a, double r, double r_prime) {
  if (r_prime < r) throw std::invalid_argument("lemma check needs r' >= r");
  return {lemma2_h(a, r), lemma2_h(a, r_prime)};
}

double rate_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("rate fit needs at least two horizons");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, metric] : points) {
    if (!(t > 0.0) || !(metric > 0.0)) {
      throw std::invalid_argument("rate fit needs positive horizons and metrics, got metric " +
                                  std::to_string(metric));
    }
    const double lx = std::log(t), ly = std::log(metric);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw std::invalid_argument("rate fit needs distinct horizons");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace dadopt
