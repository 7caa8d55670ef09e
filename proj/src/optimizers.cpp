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

#include "dadopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace dadopt {

void HyperParams::validate() const {
  auto in_unit = [](double b) { return b >= 0.0 && b < 1.0; };
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!in_unit(beta1)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!in_unit(beta2)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!in_unit(beta3)) throw std::invalid_argument("beta3 must lie in [0, 1)");
}

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::amsgrad: return "amsgrad";
    case RuleKind::adagrad: return "adagrad";
    case RuleKind::adam_style: return "adam_style";
    case RuleKind::none: return "none";
  }
  return "?";
}

AdaptiveRule::AdaptiveRule(RuleKind kind, double beta2) : kind_(kind), beta2_(beta2) {
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0, 1)");
}

double AdaptiveRule::initial_value(double epsilon) const {
  return kind_ == RuleKind::none ? 1.0 : epsilon;
}

void AdaptiveRule::update(const Eigen::VectorXd& g, std::size_t t, Eigen::VectorXd& v,
                          const Eigen::VectorXd& v_hat_prev, Eigen::VectorXd& v_hat) const {
  switch (kind_) {
    case RuleKind::amsgrad:
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
      v_hat = v_hat_prev.cwiseMax(v);
      break;
    case RuleKind::adagrad: {
      const double td = static_cast<double>(t);
      v_hat = ((td - 1.0) / td) * v_hat_prev + (1.0 / td) * g.cwiseAbs2();
      break;
    }
    case RuleKind::adam_style:
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
      v_hat = v;
      break;
    case RuleKind::none:
      v_hat.setOnes(g.size());
      break;
  }
}

AdaptiveRule make_amsgrad_rule(const HyperParams& h) { return AdaptiveRule(RuleKind::amsgrad, h.beta2); }
AdaptiveRule make_adagrad_rule() { return AdaptiveRule(RuleKind::adagrad, 0.0); }

NumericalError::NumericalError(std::string what, std::size_t node, std::size_t coordinate,
                               std::size_t round)
    : std::runtime_error(what + " at node " + std::to_string(node) + ", coordinate " +
                         std::to_string(coordinate) + ", round " + std::to_string(round)),
      node_(node),
      coordinate_(coordinate),
      round_(round) {}

namespace {

/// Runs fn(i) for every node. With threads > 1 nodes are striped across
/// workers; each fn(i) writes only slot i, so ordering cannot change results.
template <class Fn>
void for_each_node(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_finite(const Eigen::VectorXd& vec, const char* what, std::size_t node, std::size_t round) {
  for (Eigen::Index k = 0; k < vec.size(); ++k) {
    if (!std::isfinite(vec(k))) {
      throw NumericalError(std::string("non-finite ") + what, node, static_cast<std::size_t>(k),
                           round);
    }
  }
}

/// Shape checks shared by every round; returns the round index t.
std::size_t validate_round(std::span<const NodeState> states, const MixingMatrix& w,
                           std::span<const Eigen::VectorXd> grads, const HyperParams& h) {
  h.validate();
  const auto n = states.size();
  if (n == 0) throw std::invalid_argument("round needs at least one node");
  if (w.size() != n) {
    throw std::invalid_argument("mixing matrix is " + std::to_string(w.size()) + "x" +
                                std::to_string(w.size()) + " but there are " + std::to_string(n) +
                                " nodes");
  }
  if (grads.size() != n) throw std::invalid_argument("expected one gradient per node");
  const auto d = states[0].x.size();
  const auto t = states[0].t + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = states[i];
    if (s.x.size() != d || s.m.size() != d || s.v.size() != d || s.v_hat.size() != d ||
        s.v_hat_prev.size() != d || s.u_tilde.size() != d || s.u.size() != d) {
      throw std::invalid_argument("dimension mismatch in state of node " + std::to_string(i));
    }
    if (grads[i].size() != d) {
      throw std::invalid_argument("dimension mismatch: gradient of node " + std::to_string(i) +
                                  " has size " + std::to_string(grads[i].size()) + ", expected " +
                                  std::to_string(d));
    }
    if (s.t + 1 != t) throw std::invalid_argument("node states are at different rounds");
    check_finite(grads[i], "gradient", i, t);
  }
  return t;
}

void check_state(const NodeState& s, std::size_t node, std::size_t round) {
  check_finite(s.x, "iterate x", node, round);
  check_finite(s.m, "momentum m", node, round);
  check_finite(s.v_hat, "v_hat", node, round);
  check_finite(s.u_tilde, "u_tilde", node, round);
  check_finite(s.u, "rate u", node, round);
}

}  // namespace

NetworkState dpsgd_round(std::span<const NodeState> states, const MixingMatrix& w,
                         std::span<const Eigen::VectorXd> grads, const HyperParams& h,
                         const RoundOptions& opts) {
  const auto t = validate_round(states, w, grads, h);
  NetworkState out(states.begin(), states.end());
  for_each_node(states.size(), opts.threads, [&](std::size_t i) {
    auto& s = out[i];
    s.m = h.beta1 * states[i].m + (1.0 - h.beta1) * grads[i];
    Eigen::VectorXd x_half;
    mix_row(w, i, [&](std::size_t j) -> const Eigen::VectorXd& { return states[j].x; }, x_half);
    s.x = x_half - h.alpha * s.m;
    s.t = t;
    check_state(s, i, t);
  });
  return out;
}

NetworkState dadam_round(std::span<const NodeState> states, const MixingMatrix& w,
                         std::span<const Eigen::VectorXd> grads, const HyperParams& h,
                         const RoundOptions& opts) {
  const auto t = validate_round(states, w, grads, h);
  NetworkState out(states.begin(), states.end());
  for_each_node(states.size(), opts.threads, [&](std::size_t i) {
    const auto& old = states[i];
    auto& s = out[i];
    const auto& g = grads[i];
    s.m = h.beta1 * old.m + (1.0 - h.beta1) * g;
    s.v = h.beta2 * old.v + (1.0 - h.beta2) * g.cwiseAbs2();
    s.v_hat_prev = old.v_hat;
    s.v_hat = h.beta3 * old.v_hat + (1.0 - h.beta3) * old.v_hat.cwiseMax(s.v);
    s.u = s.v_hat;
    Eigen::VectorXd x_half;
    mix_row(w, i, [&](std::size_t j) -> const Eigen::VectorXd& { return states[j].x; }, x_half);
    s.x = x_half - h.alpha * (s.m.array() / s.v_hat.array().sqrt()).matrix();
    s.t = t;
    check_state(s, i, t);
  });
  return out;
}

NetworkState framework_round(std::span<const NodeState> states, const MixingMatrix& w,
                             std::span<const Eigen::VectorXd> grads, const AdaptiveRule& rule,
                             const HyperParams& h, const RoundOptions& opts) {
  const auto t = validate_round(states, w, grads, h);
  const auto n = states.size();
  NetworkState out(states.begin(), states.end());

  // Local moments and the rule output.
  for_each_node(n, opts.threads, [&](std::size_t i) {
    const auto& old = states[i];
    auto& s = out[i];
    s.m = h.beta1 * old.m + (1.0 - h.beta1) * grads[i];
    rule.update(grads[i], t, s.v, old.v_hat, s.v_hat);
    s.v_hat_prev = old.v_hat;
  });

  // u~_{t-1/2} per node, which neighbours then mix.
  std::vector<Eigen::VectorXd> half(n);
  for_each_node(n, opts.threads, [&](std::size_t j) {
    if (opts.parallel_comm) {
      half[j] = (states[j].u_tilde - states[j].v_hat) + out[j].v_hat;
    } else {
      half[j] = (states[j].u_tilde - states[j].v_hat_prev) + states[j].v_hat;
    }
  });

  for_each_node(n, opts.threads, [&](std::size_t i) {
    auto& s = out[i];
    Eigen::VectorXd x_half;
    mix_row(w, i, [&](std::size_t j) -> const Eigen::VectorXd& { return states[j].x; }, x_half);
    mix_row(w, i, [&](std::size_t j) -> const Eigen::VectorXd& { return half[j]; }, s.u_tilde);
    s.u = s.u_tilde.cwiseMax(h.epsilon);
    s.x = x_half - h.alpha * (s.m.array() / s.u.array().sqrt()).matrix();
    s.t = t;
    check_state(s, i, t);
  });
  return out;
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "damsgrad") return OptimizerKind::damsgrad;
  if (name == "dadagrad") return OptimizerKind::dadagrad;
  if (name == "dadam") return OptimizerKind::dadam;
  if (name == "dpsgd") return OptimizerKind::dpsgd;
  if (name == "framework-none") return OptimizerKind::framework_none;
  if (name == "framework-adam") return OptimizerKind::framework_adam;
  throw std::invalid_argument(
      "unknown optimizer '" + std::string(name) +
      "' (expected damsgrad, dadagrad, dadam, dpsgd, framework-none or framework-adam)");
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::damsgrad: return "damsgrad";
    case OptimizerKind::dadagrad: return "dadagrad";
    case OptimizerKind::dadam: return "dadam";
    case OptimizerKind::dpsgd: return "dpsgd";
    case OptimizerKind::framework_none: return "framework-none";
    case OptimizerKind::framework_adam: return "framework-adam";
  }
  return "?";
}

bool is_framework(OptimizerKind kind) {
  return kind == OptimizerKind::damsgrad || kind == OptimizerKind::dadagrad ||
         kind == OptimizerKind::framework_none || kind == OptimizerKind::framework_adam;
}

AdaptiveRule OptimizerSpec::rule() const {
  switch (kind) {
    case OptimizerKind::damsgrad: return make_amsgrad_rule(hyper);
    case OptimizerKind::dadagrad: return make_adagrad_rule();
    case OptimizerKind::framework_none: return AdaptiveRule(RuleKind::none, 0.0);
    case OptimizerKind::framework_adam: return AdaptiveRule(RuleKind::adam_style, hyper.beta2);
    default: break;
  }
  throw std::logic_error(std::string(to_string(kind)) + " has no adaptive rule");
}

NetworkState init_states(const OptimizerSpec& spec, std::size_t node_count,
                         const Eigen::VectorXd& x_init) {
  spec.hyper.validate();
  if (node_count == 0) throw std::invalid_argument("need at least one node");
  const auto d = x_init.size();
  double v_hat0 = 1.0;
  double u0 = 1.0;
  switch (spec.kind) {
    case OptimizerKind::dpsgd: break;
    case OptimizerKind::dadam:
      v_hat0 = u0 = spec.hyper.epsilon;
      break;
    default:
      v_hat0 = spec.rule().initial_value(spec.hyper.epsilon);
      u0 = std::max(v_hat0, spec.hyper.epsilon);
      break;
  }
  NodeState s;
  s.x = x_init;
  s.m = Eigen::VectorXd::Zero(d);
  s.v = Eigen::VectorXd::Zero(d);
  s.v_hat = Eigen::VectorXd::Constant(d, v_hat0);
  s.v_hat_prev = s.v_hat;
  s.u_tilde = s.v_hat;
  s.u = Eigen::VectorXd::Constant(d, u0);
  return NetworkState(node_count, s);
}

NetworkState step(const OptimizerSpec& spec, std::span<const NodeState> states,
                  const MixingMatrix& w, std::span<const Eigen::VectorXd> grads, unsigned threads) {
  RoundOptions opts{spec.parallel_comm, threads};
  switch (spec.kind) {
    case OptimizerKind::dpsgd: return dpsgd_round(states, w, grads, spec.hyper, opts);
    case OptimizerKind::dadam: return dadam_round(states, w, grads, spec.hyper, opts);
    default: return framework_round(states, w, grads, spec.rule(), spec.hyper, opts);
  }
}

}  // namespace dadopt
