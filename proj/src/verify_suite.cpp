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

#include "dadopt/verify_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dadopt/analysis.hpp"
#include "dadopt/rng.hpp"
#include "dadopt/simulator.hpp"

namespace dadopt {

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.informative || c.passed; });
}

namespace {

// Random spanning tree plus extra edges with probability 1/3.
Topology random_connected_topology(std::size_t n, CounterRng& rng) {
  std::vector<Topology::Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.emplace_back(parent(rng), i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool present = std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
        return (e.first == i && e.second == j) || (e.first == j && e.second == i);
      });
      if (!present && rng.uniform01() < 1.0 / 3.0) edges.emplace_back(i, j);
    }
  }
  return topology_from_edges(n, std::move(edges));
}

RunConfig random_framework_config(CounterRng& rng, OptimizerKind kind, double beta1) {
  RunConfig cfg;
  cfg.optimizer.kind = kind;
  cfg.optimizer.hyper.alpha = std::pow(10.0, -2.0 + rng.uniform01());
  cfg.optimizer.hyper.beta1 = beta1;
  cfg.optimizer.hyper.beta2 = 0.9 * rng.uniform01();
  const double eps_grid[] = {1e-6, 1e-3, 1.0};
  cfg.optimizer.hyper.epsilon = eps_grid[rng() % 3];
  cfg.optimizer.parallel_comm = rng() % 4 == 0;
  cfg.noise = {NoiseKind::uniform_bounded, 0.5};
  cfg.horizon = 1 + rng() % 30;
  cfg.seed = rng();
  cfg.init = {InitKind::shared_random, 0.0, 2.0};
  return cfg;
}

CheckResult lemma1_check(std::uint64_t seed) {
  CounterRng rng(mix64(seed ^ 0x4c454d31ULL));
  const OptimizerKind kinds[] = {OptimizerKind::damsgrad, OptimizerKind::dadagrad,
                                 OptimizerKind::framework_none};
  const double betas[] = {0.0, 0.5, 0.9};
  double worst = 0.0;
  std::size_t rounds = 0;
  for (std::size_t inst = 0; inst < 100; ++inst) {
    RunConfig cfg = random_framework_config(rng, kinds[inst % 3], betas[(inst / 3) % 3]);
    const std::size_t n = 2 + rng() % 7;
    const Topology topo = random_connected_topology(n, rng);
    const MixingMatrix w = mdm_matrix(topo, 0.1 + 0.8 * rng.uniform01());
    QuadraticOptions q;
    q.dim = 1 + rng() % 6;
    q.node_count = n;
    q.condition = 1.0 + 9.0 * rng.uniform01();
    q.seed = rng();
    // Check one uniformly chosen round of each instance.
    const std::size_t target = 1 + rng() % cfg.horizon;
    RunHooks hooks;
    hooks.on_round = [&](const RoundView& rv) {
      if (rv.t != target) return;
      RoundSnapshot snap{rv.xbar_prev, rv.before, rv.grads, rv.after};
      worst = std::max(worst, verify_lemma1(snap, cfg.optimizer.hyper));
      ++rounds;
    };
    run(cfg, quadratic_problem(q), w, hooks);
  }
  CheckResult c;
  c.name = "lemma1_identity";
  c.value = worst;
  c.limit = 1e-10;
  c.passed = rounds == 100 && worst <= c.limit;
  c.detail = "max residual over " + std::to_string(rounds) +
             " random rounds (amsgrad/adagrad/none, beta1 in {0, 0.5, 0.9}, random W)";
  return c;
}

std::vector<CheckResult> lemma2_checks(std::uint64_t seed) {
  CounterRng rng(mix64(seed ^ 0x4c454d32ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_mono = 0.0, worst_eq = 0.0, worst_top = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<double> a(n);
    for (auto& x : a) x = normal(rng);
    const double lo = *std::min_element(a.begin(), a.end());
    const double hi = *std::max_element(a.begin(), a.end());
    double r = lo - 0.5 + (hi - lo + 1.0) * rng.uniform01();
    double rp = lo - 0.5 + (hi - lo + 1.0) * rng.uniform01();
    if (rp < r) std::swap(r, rp);
    const Lemma2Values vals = verify_lemma2(a, r, rp);
    worst_mono = std::max(worst_mono, vals.h_r_prime - vals.h_r);

    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(n);
    double spread = 0.0;
    for (double x : a) spread += std::abs(x - mean);
    worst_eq = std::max(worst_eq, std::abs(lemma2_h(a, lo - rng.uniform01()) - spread));
    worst_top = std::max(worst_top, std::abs(lemma2_h(a, hi + rng.uniform01())));
  }
  CheckResult mono{"lemma2_monotone", worst_mono <= 1e-12, worst_mono, 1e-12,
                   "max of h(r') - h(r) over 1000 random (a, r <= r') with n <= 64", false};
  CheckResult eq{"lemma2_equality_case", worst_eq <= 1e-12, worst_eq, 1e-12,
                 "max |h(r) - sum |a_i - mean(a)|| for r <= min(a)", false};
  CheckResult top{"lemma2_saturated", worst_top <= 1e-12, worst_top, 1e-12,
                  "max |h(r)| for r >= max(a)", false};
  return {mono, eq, top};
}

CheckResult conservation_check(std::uint64_t seed) {
  CounterRng rng(mix64(seed ^ 0x434f4e53ULL));
  const OptimizerKind kinds[] = {OptimizerKind::damsgrad, OptimizerKind::dadagrad,
                                 OptimizerKind::framework_none, OptimizerKind::framework_adam};
  // Some random configurations take a large first step (u_1 is still eps)
  // and v_hat grows by orders of magnitude, so the residual is measured
  // relative to the tracked mean.
  double worst = 0.0;
  for (std::size_t inst = 0; inst < 40; ++inst) {
    RunConfig cfg = random_framework_config(rng, kinds[inst % 4], 0.5);
    cfg.horizon = 50;
    const std::size_t n = 2 + rng() % 7;
    const MixingMatrix w = mdm_matrix(random_connected_topology(n, rng), 0.2);
    QuadraticOptions q;
    q.dim = 3;
    q.node_count = n;
    q.seed = rng();
    RunHooks hooks;
    hooks.on_round = [&](const RoundView& rv) {
      Eigen::VectorXd tracked = Eigen::VectorXd::Zero(q.dim);
      Eigen::VectorXd target = Eigen::VectorXd::Zero(q.dim);
      for (std::size_t i = 0; i < n; ++i) {
        tracked += rv.after[i].u_tilde;
        target += cfg.optimizer.parallel_comm ? rv.after[i].v_hat : rv.before[i].v_hat;
      }
      const double scale = std::max(1.0, target.lpNorm<Eigen::Infinity>() / static_cast<double>(n));
      worst = std::max(worst, (tracked - target).lpNorm<Eigen::Infinity>() /
                                  static_cast<double>(n) / scale);
    };
    run(cfg, quadratic_problem(q), w, hooks);
  }
  return {"u_tilde_mean_conservation", worst <= 1e-10, worst, 1e-10,
          "max |mean u~_t - mean v_hat_{t-1}| / max(1, |mean v_hat_{t-1}|) over 40 random "
          "framework runs",
          false};
}

RunConfig cycle_quadratic(OptimizerKind kind, std::size_t horizon, double sigma, std::uint64_t seed) {
  RunConfig cfg;
  cfg.problem.kind = ProblemKind::quadratic;
  cfg.problem.dim = 8;
  cfg.graph = {TopologyKind::cycle, 5, MixingKind::uniform, 0.0, {}};
  cfg.optimizer.kind = kind;
  cfg.optimizer.hyper.epsilon = 1e-6;
  cfg.optimizer.hyper.beta1 = 0.9;
  cfg.optimizer.hyper.beta2 = 0.99;
  cfg.noise = {sigma > 0 ? NoiseKind::uniform_bounded : NoiseKind::none, sigma};
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.init = {InitKind::shared_random, 0.0, 1.0};
  return cfg;
}

std::vector<CheckResult> bound_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;

  {
    RunConfig cfg = cycle_quadratic(OptimizerKind::damsgrad, 2000, 0.0, seed);
    const MixingMatrix w = build_mixing(cfg.graph);
    const ProblemPtr p = build_problem(cfg.problem, w.size(), cfg.seed);
    cfg.optimizer.hyper.alpha = max_covered_step_size(cfg.optimizer.hyper.epsilon, p->smoothness());
    const RunResult r = run(cfg, p, w);
    const double g = std::max(p->gradient_bound(), r.summary.observed_gradient_bound);
    const double bound = consensus_error_bound(cfg.optimizer.hyper.alpha, w.lambda(), p->dim(), g,
                                               cfg.optimizer.hyper.epsilon);
    double worst = 0.0;
    for (const auto& rec : r.trace) worst = std::max(worst, rec.consensus_err);
    out.push_back({"consensus_error_bound", worst <= 1.01 * bound, worst, 1.01 * bound,
                   "max recorded consensus error vs alpha^2 d G^2 / (eps (1-lambda)^2)", false});
  }

  for (OptimizerKind kind : {OptimizerKind::damsgrad, OptimizerKind::dadagrad}) {
    RunConfig cfg = cycle_quadratic(kind, 10000, 0.5, seed);
    cfg.record_every = cfg.horizon;
    cfg.optimizer.hyper.alpha = 1e-2;
    const MixingMatrix w = build_mixing(cfg.graph);
    const ProblemPtr p = build_problem(cfg.problem, w.size(), cfg.seed);
    const RunResult r = run(cfg, p, w);
    const double g = std::max(p->gradient_bound(), r.summary.observed_gradient_bound);
    const bool ams = kind == OptimizerKind::damsgrad;
    const double bound = ams ? vt_bound_amsgrad(w.size(), p->dim(), g)
                             : vt_bound_adagrad(w.size(), p->dim(), g, cfg.horizon);
    out.push_back({ams ? "drift_bound_amsgrad" : "drift_bound_adagrad",
                   r.summary.vt_cumulative <= bound, r.summary.vt_cumulative, bound,
                   ams ? "V_T vs N d G^2" : "V_T vs N d G^2 (1 + ln T)", false});
  }

  {
    RunConfig cfg = cycle_quadratic(OptimizerKind::damsgrad, 5000, 0.1, seed);
    cfg.record_every = cfg.horizon;
    const MixingMatrix w = build_mixing(cfg.graph);
    const ProblemPtr p = build_problem(cfg.problem, w.size(), cfg.seed);
    const auto& h = cfg.optimizer.hyper;
    cfg.optimizer.hyper.alpha = max_covered_step_size(h.epsilon, p->smoothness());
    const RunResult r = run(cfg, p, w);
    const double g = std::max(p->gradient_bound(), r.summary.observed_gradient_bound);
    const BoundConstants c = bound_constants(p->smoothness(), g, h.epsilon, h.beta1, w.lambda());
    const double f_gap = r.summary.f_initial - p->min_loss().value_or(0.0);
    const double rhs = theorem2_rhs(c, h.alpha, cfg.horizon, p->dim(), w.size(), f_gap,
                                    cfg.noise.sigma, r.summary.vt_cumulative);
    std::ostringstream detail;
    detail << "time-averaged scaled gradient vs bound right-hand side; margin "
           << rhs - r.summary.avg_scaled_metric << " (single trajectory)";
    out.push_back({"convergence_bound_margin", r.summary.avg_scaled_metric <= rhs,
                   r.summary.avg_scaled_metric, rhs, detail.str(), true});
  }
  return out;
}

}  // namespace

SuiteReport run_lemma_suite(std::uint64_t seed) {
  SuiteReport report{"lemmas", seed, {}};
  report.checks.push_back(lemma1_check(seed));
  for (auto& c : lemma2_checks(seed)) report.checks.push_back(std::move(c));
  report.checks.push_back(conservation_check(seed));
  return report;
}

SuiteReport run_bound_suite(std::uint64_t seed) {
  SuiteReport report{"bounds", seed, {}};
  report.checks = bound_checks(seed);
  return report;
}

SuiteReport run_suite(std::string_view name, std::uint64_t seed) {
  if (name == "lemmas") return run_lemma_suite(seed);
  if (name == "bounds") return run_bound_suite(seed);
  throw std::invalid_argument("unknown suite '" + std::string(name) + "' (expected lemmas or bounds)");
}

std::string to_json(const SuiteReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["seed"] = report.seed;
  j["passed"] = report.passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", c.value},
                           {"limit", c.limit},
                           {"informative", c.informative},
                           {"detail", c.detail}});
  }
  return j.dump(2);
}

}  // namespace dadopt
