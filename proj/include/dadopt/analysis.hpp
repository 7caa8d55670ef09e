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

#ifndef DADOPT_ANALYSIS_HPP
#define DADOPT_ANALYSIS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "dadopt/optimizers.hpp"

namespace dadopt {

/// Constants of the non-asymptotic bound for the decentralized adaptive
/// framework, with the inputs they were computed from.
///   C1 = max(4, 4L/eps)
///   C2 = 6 ((b1/(1-b1))^2 + 1/(1-lambda)^2) L G^2 / eps^1.5
///   C3 = 16 L^2 (1-lambda) G^2 / eps^2
///   C4 = 2 / (eps^1.5 (1-lambda)) (lambda + b1/(1-b1)) G^2
///   C5 = 2 / (eps^2 (1-lambda)) L (lambda + b1/(1-b1)) G^2
///        + 4 / (eps^2 (1-lambda)) L G^2
struct BoundConstants {
  double c1, c2, c3, c4, c5;
  double lambda, smoothness, gradient_bound, epsilon, beta1;
};

BoundConstants bound_constants(double smoothness, double gradient_bound, double epsilon,
                               double beta1, double lambda);

/// C1 (f_gap/(T alpha) + alpha d sigma^2 / N) + C2 alpha^2 d + C3 alpha^3 d
///   + (C4 + C5 alpha) vt / (T sqrt(N)).
double theorem2_rhs(const BoundConstants& c, double alpha, std::size_t horizon, std::size_t dim,
                    std::size_t node_count, double f_gap, double sigma, double vt);

/// alpha^2 (1/(1-lambda))^2 d G^2 / eps: per-round cap on
/// (1/N) sum_i ||x_{t,i} - xbar_t||^2.
double consensus_error_bound(double alpha, double lambda, std::size_t dim, double gradient_bound,
                             double epsilon);

/// Cumulative v_hat drift caps: N d G^2 for AMSGrad, N d G^2 (1 + ln T) for
/// AdaGrad.
double vt_bound_amsgrad(std::size_t node_count, std::size_t dim, double gradient_bound);
double vt_bound_adagrad(std::size_t node_count, std::size_t dim, double gradient_bound,
                        std::size_t horizon);

/// sqrt(N) / sqrt(T d).
double corollary_step_size(std::size_t node_count, std::size_t horizon, std::size_t dim);

/// sqrt(eps) / (16 L), the largest step the bound covers.
double max_covered_step_size(double epsilon, double smoothness);

/// Z_t = xbar_t + b1/(1-b1) (xbar_t - xbar_{t-1}) with xbar_0 = xbar_1.
class ZSequence {
 public:
  explicit ZSequence(double beta1) : beta1_(beta1) {}

  /// Feeds xbar_t and returns Z_t.
  Eigen::VectorXd push(const Eigen::VectorXd& xbar);
  const std::optional<Eigen::VectorXd>& xbar_prev() const { return xbar_prev_; }

 private:
  double beta1_;
  std::optional<Eigen::VectorXd> xbar_prev_;
};

/// Everything recorded around round t. `before` is the state entering the
/// round (x_t, m_{t-1}, u_{t-1}), `after` the state it produced (x_{t+1},
/// m_t, u_t). xbar_prev is xbar_{t-1}; pass xbar_t at t = 1.
struct RoundSnapshot {
  Eigen::VectorXd xbar_prev;
  std::span<const NodeState> before;
  std::span<const Eigen::VectorXd> grads;
  std::span<const NodeState> after;
};

Eigen::VectorXd network_mean_x(std::span<const NodeState> states);

/// Norm of the difference between Z_{t+1} - Z_t computed from the iterates
/// and the closed form
///   alpha b1/(1-b1) (1/N) sum_i m_{t-1,i} (1/sqrt(u_{t-1,i}) - 1/sqrt(u_{t,i}))
///   - alpha (1/N) sum_i g_{t,i} / sqrt(u_{t,i}).
double verify_lemma1(const RoundSnapshot& snap, const HyperParams& h);

/// h(r) = sum_i |max(a_i, r) - mean_j max(a_j, r)|.
double lemma2_h(std::span<const double> a, double r);

struct Lemma2Values {
  double h_r;
  double h_r_prime;
};

/// Evaluates h at both thresholds. Callers check h(r) >= h(r') for r <= r'
/// and h(r) = sum_i |a_i - mean(a)| when r <= min(a).
Lemma2Values verify_lemma2(std::span<const double> a, double r, double r_prime);

/// Least-squares slope of log(metric) against log(T) over (T, metric) pairs.
double rate_fit(std::span<const std::pair<double, double>> points);

}  // namespace dadopt

#endif  // DADOPT_ANALYSIS_HPP
