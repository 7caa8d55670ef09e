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

#include "dadopt/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dadopt/analysis.hpp"
#include "dadopt/rng.hpp"

namespace dadopt {

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "counterexample") return ProblemKind::counterexample;
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "softmax") return ProblemKind::softmax;
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected counterexample, quadratic or softmax)");
}

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::counterexample: return "counterexample";
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::softmax: return "softmax";
  }
  return "?";
}

MixingKind parse_mixing_kind(std::string_view name) {
  if (name == "uniform") return MixingKind::uniform;
  if (name == "mdm") return MixingKind::mdm;
  throw std::invalid_argument("unknown mixing '" + std::string(name) +
                              "' (expected uniform or mdm)");
}

std::string_view to_string(MixingKind kind) {
  return kind == MixingKind::uniform ? "uniform" : "mdm";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "constant") return InitKind::constant;
  if (name == "shared-random" || name == "shared_random") return InitKind::shared_random;
  throw std::invalid_argument("unknown init '" + std::string(name) +
                              "' (expected constant or shared-random)");
}

std::string_view to_string(InitKind kind) {
  return kind == InitKind::constant ? "constant" : "shared-random";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "horizon" || name == "T") return SweepAxis::horizon;
  if (name == "nodes" || name == "N") return SweepAxis::nodes;
  if (name == "lambda") return SweepAxis::lambda;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) +
                              "' (expected alpha, horizon, nodes or lambda)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::horizon: return "horizon";
    case SweepAxis::nodes: return "nodes";
    case SweepAxis::lambda: return "lambda";
  }
  return "?";
}

void RunConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("run.horizon must be at least 1");
  if (record_every < 1 || record_every > horizon) {
    throw std::invalid_argument("run.record_every must lie in [1, horizon], got " +
                                std::to_string(record_every));
  }
  if (threads < 1) throw std::invalid_argument("run.threads must be at least 1");
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw std::invalid_argument("noise.sigma must be a finite non-negative number");
  }
  if (init.kind == InitKind::shared_random && !(init.scale >= 0.0)) {
    throw std::invalid_argument("run.init_scale must be non-negative");
  }
  optimizer.hyper.validate();
}

ProblemPtr build_problem(const ProblemSpec& spec, std::size_t node_count, std::uint64_t run_seed) {
  const std::uint64_t seed = spec.seed.value_or(run_seed);
  switch (spec.kind) {
    case ProblemKind::counterexample:
      if (node_count != 2) {
        throw std::invalid_argument("the counterexample problem is defined on exactly 2 nodes, got " +
                                    std::to_string(node_count));
      }
      return counterexample_problem();
    case ProblemKind::quadratic: {
      QuadraticOptions o;
      o.dim = spec.dim;
      o.node_count = node_count;
      o.condition = spec.condition;
      o.hetero = spec.hetero;
      o.seed = seed;
      return quadratic_problem(o);
    }
    case ProblemKind::softmax: {
      SoftmaxOptions o;
      o.feature_dim = spec.dim;
      o.num_classes = spec.num_classes;
      o.node_count = node_count;
      o.samples_per_node = spec.samples_per_node;
      o.separation = spec.separation;
      o.seed = seed;
      return softmax_problem(
          o, make_heterogeneity_plan(spec.num_classes, node_count, spec.classes_per_node));
    }
  }
  throw std::logic_error("unhandled problem kind");
}

Topology build_graph_topology(const GraphSpec& spec) {
  if (spec.kind == TopologyKind::custom) {
    if (spec.edges_file.empty()) throw std::invalid_argument("graph.kind = custom needs graph.edges_file");
    return read_edge_list(spec.edges_file);
  }
  return build_topology(spec.kind, spec.nodes);
}

MixingMatrix build_mixing(const GraphSpec& spec) {
  const Topology topo = build_graph_topology(spec);
  if (spec.mixing == MixingKind::mdm) return mdm_matrix(topo, spec.gamma);
  MixingMatrix w = uniform_neighbor_matrix(topo);
  if (spec.gamma == 0.0) return w;
  return blend_with_identity(w, spec.gamma, &topo);
}

namespace {

constexpr std::uint64_t kInitPurpose = 1;

Eigen::VectorXd initial_point(const RunConfig& cfg, std::size_t dim, const RngStreams& streams) {
  if (cfg.init.kind == InitKind::constant) return Eigen::VectorXd::Constant(dim, cfg.init.value);
  CounterRng rng = streams.global_stream(kInitPurpose);
  Eigen::VectorXd x(dim);
  for (std::size_t k = 0; k < dim; ++k) x(k) = cfg.init.scale * (2.0 * rng.uniform01() - 1.0);
  return x;
}

Eigen::VectorXd mean_of(std::span<const NodeState> states, Eigen::VectorXd NodeState::*field) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(states.front().x.size());
  for (const auto& s : states) mean += s.*field;
  return mean / static_cast<double>(states.size());
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

RunResult run(const RunConfig& cfg, const RunHooks& hooks) {
  const MixingMatrix w = build_mixing(cfg.graph);
  const ProblemPtr problem = build_problem(cfg.problem, w.size(), cfg.seed);
  return run(cfg, problem, w, hooks);
}

RunResult run(const RunConfig& cfg, const ProblemPtr& problem, const MixingMatrix& w,
              const RunHooks& hooks) {
  cfg.validate();
  if (!problem) throw std::invalid_argument("no problem given");
  const std::size_t n = w.size();
  if (problem->node_count() != n) {
    throw std::invalid_argument("problem has " + std::to_string(problem->node_count()) +
                                " nodes but the mixing matrix has " + std::to_string(n));
  }
  const std::size_t d = problem->dim();
  const auto& h = cfg.optimizer.hyper;
  const bool framework = is_framework(cfg.optimizer.kind);

  RunResult result;
  if (framework) {
    const double cap = max_covered_step_size(h.epsilon, problem->smoothness());
    if (h.alpha > cap) {
      result.warnings.push_back("alpha = " + format_double(h.alpha) +
                                " exceeds sqrt(epsilon)/(16 L) = " + format_double(cap) +
                                "; the convergence bound does not cover this step size");
    }
  }

  const RngStreams streams = derive_rng_streams(cfg.seed, n, cfg.horizon);
  const Eigen::VectorXd x_init = initial_point(cfg, d, streams);
  NetworkState states = init_states(cfg.optimizer, n, x_init);

  RunSummary& sum = result.summary;
  sum.lambda = w.lambda();
  sum.f_initial = problem->loss(x_init);

  const std::size_t T = cfg.horizon;
  const std::size_t tail_start = T / 2 + 1;
  double scaled_total = 0.0, scaled_tail = 0.0, grad_tail = 0.0, vt = 0.0;
  Eigen::VectorXd xbar_prev = x_init;
  std::vector<Eigen::VectorXd> grads(n);

  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng = streams.stream(i, t);
      grads[i] = stochastic_gradient(*problem, i, states[i].x, cfg.noise, rng);
      sum.observed_gradient_bound =
          std::max(sum.observed_gradient_bound, grads[i].lpNorm<Eigen::Infinity>());
    }
    NetworkState next = step(cfg.optimizer, states, w, grads, cfg.threads);

    const Eigen::VectorXd xbar = mean_of(states, &NodeState::x);
    const Eigen::VectorXd ubar = mean_of(next, &NodeState::u);
    const Eigen::VectorXd grad = problem->gradient(xbar);

    TraceRecord rec;
    rec.t = t;
    rec.grad_norm_sq = grad.squaredNorm();
    rec.scaled_grad_metric = (grad.array() / ubar.array().sqrt().sqrt()).matrix().squaredNorm();
    double cons = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cons += (states[i].x - xbar).squaredNorm();
      spread += (next[i].u - ubar).lpNorm<1>();
      vt += (states[i].v_hat - states[i].v_hat_prev).lpNorm<1>();
    }
    rec.consensus_err = cons / static_cast<double>(n);
    rec.u_spread = spread / static_cast<double>(n);
    rec.vt_cumulative = vt;

    if (framework) {
      const Eigen::VectorXd tracked = mean_of(next, &NodeState::u_tilde);
      const Eigen::VectorXd target = cfg.optimizer.parallel_comm ? mean_of(next, &NodeState::v_hat)
                                                                 : mean_of(states, &NodeState::v_hat);
      sum.max_conservation_residual = std::max(sum.max_conservation_residual,
                                               (tracked - target).lpNorm<Eigen::Infinity>());
    }
    sum.max_consensus_err = std::max(sum.max_consensus_err, rec.consensus_err);
    scaled_total += rec.scaled_grad_metric;
    if (t >= tail_start) {
      scaled_tail += rec.scaled_grad_metric;
      grad_tail += rec.grad_norm_sq;
    }

    if (hooks.on_round) {
      hooks.on_round(RoundView{t, xbar_prev, states, grads, next});
    }
    if (t == 1 || t == T || t % cfg.record_every == 0) {
      rec.mean_loss = problem->loss(xbar);
      rec.xbar = xbar;
      result.trace.push_back(std::move(rec));
    }
    xbar_prev = xbar;
    states = std::move(next);
  }

  const double tail_count = static_cast<double>(T - tail_start + 1);
  sum.avg_scaled_metric = scaled_total / static_cast<double>(T);
  sum.tail_avg_scaled_metric = scaled_tail / tail_count;
  sum.tail_avg_grad_norm_sq = grad_tail / tail_count;
  sum.final_xbar = mean_of(states, &NodeState::x);
  sum.final_loss = problem->loss(sum.final_xbar);
  sum.vt_cumulative = vt;
  result.final_states = std::move(states);
  return result;
}

RunConfig counterexample_config(OptimizerKind kind, double alpha, std::size_t horizon,
                                double epsilon) {
  RunConfig cfg;
  cfg.problem.kind = ProblemKind::counterexample;
  cfg.graph = {TopologyKind::complete, 2, MixingKind::uniform, 0.0, {}};
  cfg.optimizer.kind = kind;
  cfg.optimizer.hyper = {alpha, 0.0, 0.0, 0.0, epsilon};
  cfg.noise = {NoiseKind::none, 0.0};
  cfg.horizon = horizon;
  cfg.record_every = horizon;
  cfg.init = {InitKind::constant, -1.0, 1.0};
  return cfg;
}

double gamma_for_lambda(const MixingMatrix& w, double target) {
  if (!(target >= 0.0 && target < 1.0)) {
    throw std::invalid_argument("target lambda must lie in [0, 1), got " + std::to_string(target));
  }
  const auto& ev = w.eigenvalues();
  if (ev.size() < 2) throw std::invalid_argument("a single node has no spectral gap to tune");
  // The blend maps each eigenvalue mu to gamma + (1 - gamma) mu, so lambda(gamma)
  // is the larger of two linear pieces in gamma.
  const double mu2 = ev(1);
  const double mun = ev(ev.size() - 1);
  auto lambda_at = [&](double g) {
    return std::max(std::abs(g + (1.0 - g) * mu2), std::abs(g + (1.0 - g) * mun));
  };
  const double tol = 1e-12;
  const double rising = (target - mu2) / (1.0 - mu2);
  if (rising >= 0.0 && rising < 1.0 && std::abs(lambda_at(rising) - target) <= tol) return rising;
  const double falling = (-target - mun) / (1.0 - mun);
  if (falling >= 0.0 && falling < 1.0 && std::abs(lambda_at(falling) - target) <= tol) return falling;
  throw std::invalid_argument("lambda = " + std::to_string(target) +
                              " is not reachable by blending this mixing matrix with the identity");
}

std::vector<SweepCell> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                             unsigned workers) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepCell> cells(values.size());

  auto run_cell = [&](std::size_t k) {
    SweepCell& cell = cells[k];
    cell.value = values[k];
    try {
      RunConfig cfg = base;
      std::optional<MixingMatrix> w;
      const double v = values[k];
      switch (axis) {
        case SweepAxis::alpha: cfg.optimizer.hyper.alpha = v; break;
        case SweepAxis::horizon:
          if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("horizon must be a positive integer");
          cfg.horizon = static_cast<std::size_t>(v);
          cfg.record_every = std::min(cfg.record_every, cfg.horizon);
          break;
        case SweepAxis::nodes:
          if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("node count must be a positive integer");
          cfg.graph.nodes = static_cast<std::size_t>(v);
          break;
        case SweepAxis::lambda: {
          const MixingMatrix base_w = build_mixing(cfg.graph);
          const Topology topo = build_graph_topology(cfg.graph);
          w = blend_with_identity(base_w, gamma_for_lambda(base_w, v), &topo);
          break;
        }
      }
      if (!w) w = build_mixing(cfg.graph);
      const ProblemPtr problem = build_problem(cfg.problem, w->size(), cfg.seed);
      RunResult r = run(cfg, problem, *w);
      cell.summary = std::move(r.summary);
      cell.trace = std::move(r.trace);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const std::size_t pool = std::clamp<std::size_t>(workers, 1, cells.size());
  if (pool == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t p = 0; p < pool; ++p) {
      threads.emplace_back([&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) run_cell(k);
      });
    }
  }
  return cells;
}

}  // namespace dadopt
