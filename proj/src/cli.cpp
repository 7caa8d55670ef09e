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

#include "dadopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "dadopt/analysis.hpp"
#include "dadopt/config.hpp"
#include "dadopt/simulator.hpp"
#include "dadopt/trace_io.hpp"
#include "dadopt/verify_suite.hpp"

namespace dadopt {

unsigned worker_cap_from_env(unsigned fallback) {
  const char* raw = std::getenv("DADOPT_THREADS");
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) return fallback;
  return static_cast<unsigned>(v);
}

namespace {

namespace fs = std::filesystem;

/// Flags shared by run and sweep; config values are applied first, then
/// these, then --set overrides.
struct RunFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<double> alpha;
  std::optional<std::string> optimizer;
  std::optional<unsigned> threads;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("-c,--config", f.config, "Config file (see the key table below)");
  cmd->add_option("--set", f.sets, "Override one key, e.g. --set optimizer.beta1=0.9")
      ->type_name("SECTION.KEY=VALUE");
  cmd->add_option("--seed", f.seed, "Override run.seed");
  cmd->add_option("--horizon", f.horizon, "Override run.horizon");
  cmd->add_option("--alpha", f.alpha, "Override optimizer.alpha");
  cmd->add_option("--optimizer", f.optimizer, "Override optimizer.name");
  cmd->add_option("--threads", f.threads, "Override run.threads");
}

RunConfig resolve_config(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
  } else {
    const bool has_alpha = f.alpha || std::any_of(f.sets.begin(), f.sets.end(), [](const auto& s) {
                             return s.rfind("optimizer.alpha", 0) == 0;
                           });
    if (!has_alpha) throw ConfigError("optimizer.alpha", "required key is missing");
  }
  if (f.optimizer) apply_override(cfg, "optimizer.name=" + *f.optimizer);
  if (f.alpha) cfg.optimizer.hyper.alpha = *f.alpha;
  if (f.seed) cfg.seed = *f.seed;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.threads) cfg.threads = *f.threads;
  for (const auto& s : f.sets) apply_override(cfg, s);
  if (cfg.record_every > cfg.horizon && f.horizon) cfg.record_every = cfg.horizon;
  return cfg;
}

std::vector<double> parse_list(const std::string& raw, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw std::invalid_argument(what + " is empty");
  return out;
}

void print_summary(std::ostream& out, const RunSummary& s) {
  out << std::setprecision(10);
  out << "final_loss            " << s.final_loss << '\n'
      << "avg_scaled_metric     " << s.avg_scaled_metric << '\n'
      << "tail_avg_grad_norm_sq " << s.tail_avg_grad_norm_sq << '\n'
      << "max_consensus_err     " << s.max_consensus_err << '\n'
      << "vt_cumulative         " << s.vt_cumulative << '\n'
      << "lambda                " << s.lambda << '\n';
}

int cmd_run(const RunFlags& f, const std::string& out_path, const std::string& format,
            std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(f);
  const TraceFormat fmt = parse_trace_format(format);
  const RunResult r = run(cfg);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  write_file_atomic(out_path, [&](std::ostream& o) { write_trace(o, r.trace, fmt); });
  print_summary(out, r.summary);
  out << "trace written to " << out_path << '\n';
  return kExitOk;
}

int cmd_sweep(const RunFlags& f, const std::string& axis_name, const std::string& values_raw,
              const std::string& out_dir, unsigned workers, std::ostream& out, std::ostream& err) {
  const RunConfig base = resolve_config(f);
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const std::vector<double> values = parse_list(values_raw, "--values");
  fs::create_directories(out_dir);
  const unsigned pool = std::min(workers, worker_cap_from_env(workers));
  const auto cells = sweep(base, axis, values, pool);

  std::ostringstream table;
  table << std::setprecision(17);
  table << to_string(axis) << ",status,avg_scaled_metric,tail_avg_grad_norm_sq,final_loss\n";
  bool all_ok = true;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    table << c.value << ',';
    if (c.summary) {
      table << "ok," << c.summary->avg_scaled_metric << ',' << c.summary->tail_avg_grad_norm_sq
            << ',' << c.summary->final_loss << '\n';
      const fs::path cell_path = fs::path(out_dir) / ("cell_" + std::to_string(k) + ".csv");
      write_file_atomic(cell_path, [&](std::ostream& o) { write_trace_csv(o, c.trace); });
    } else {
      all_ok = false;
      table << "error,,,\n";
      err << "cell " << k << " (" << to_string(axis) << " = " << c.value << ") failed: " << c.error
          << '\n';
    }
  }
  const fs::path summary_path = fs::path(out_dir) / "summary.csv";
  write_file_atomic(summary_path, [&](std::ostream& o) { o << table.str(); });
  out << table.str();
  return all_ok ? kExitOk : kExitRuntime;
}

int cmd_spectral(const std::string& graph, const std::string& family, const std::string& nodes_raw,
                 const std::string& mixing, double gamma, const std::string& edges,
                 std::ostream& out) {
  GraphSpec spec;
  spec.mixing = parse_mixing_kind(mixing);
  spec.gamma = gamma;
  if (!family.empty()) {
    spec.kind = parse_topology_kind(family);
    out << "N,lambda,gap,gap_times_N2\n" << std::setprecision(12);
    for (double v : parse_list(nodes_raw, "--nodes")) {
      if (v < 2 || v != std::floor(v)) throw std::invalid_argument("--nodes needs integers >= 2");
      spec.nodes = static_cast<std::size_t>(v);
      const MixingMatrix w = build_mixing(spec);
      out << spec.nodes << ',' << w.lambda() << ',' << w.gap() << ','
          << w.gap() * static_cast<double>(spec.nodes * spec.nodes) << '\n';
    }
    return kExitOk;
  }
  spec.kind = parse_topology_kind(graph);
  spec.edges_file = edges;
  if (spec.kind != TopologyKind::custom) {
    const auto list = parse_list(nodes_raw, "--nodes");
    if (list.size() != 1) throw std::invalid_argument("--nodes takes one value without --family");
    if (list[0] < 2 || list[0] != std::floor(list[0])) {
      throw std::invalid_argument("--nodes needs an integer >= 2");
    }
    spec.nodes = static_cast<std::size_t>(list[0]);
  }
  const MixingMatrix w = build_mixing(spec);
  out << std::setprecision(12);
  out << "N        " << w.size() << '\n'
      << "lambda   " << w.lambda() << '\n'
      << "gap      " << w.gap() << '\n'
      << "spectrum";
  for (Eigen::Index k = 0; k < w.eigenvalues().size(); ++k) out << ' ' << w.eigenvalues()(k);
  out << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& json_path,
               std::ostream& out) {
  const SuiteReport report = run_suite(suite, seed);
  out << std::setprecision(6);
  for (const auto& c : report.checks) {
    const char* tag = c.informative ? (c.passed ? "INFO-PASS" : "INFO-FAIL")
                                    : (c.passed ? "PASS" : "FAIL");
    out << tag << ' ' << c.name << " value=" << c.value << " limit=" << c.limit << "  "
        << c.detail << '\n';
  }
  if (!json_path.empty()) {
    write_file_atomic(json_path, [&](std::ostream& o) { o << to_json(report) << '\n'; });
  }
  return report.passed() ? kExitOk : kExitRuntime;
}

int cmd_counterexample(double alpha, std::size_t horizon, double epsilon, std::ostream& out,
                       std::ostream& err) {
  if (alpha >= 0.25) {
    err << "warning: alpha = " << alpha
        << " >= 1/4; the DADAM non-convergence argument assumes alpha < 1/4\n";
  }
  if (epsilon > 1.0) err << "warning: epsilon = " << epsilon << " > 1; the construction assumes eps <= 1\n";
  const ProblemPtr p = counterexample_problem();
  const double x_star = 1.0 / 3.0;
  struct Arm {
    OptimizerKind kind;
    double target;
  };
  bool all = true;
  out << std::setprecision(10);
  for (const Arm arm : {Arm{OptimizerKind::dadam, 0.5}, Arm{OptimizerKind::damsgrad, x_star}}) {
    const RunResult r = run(counterexample_config(arm.kind, alpha, horizon, epsilon));
    const double xbar = r.summary.final_xbar(0);
    const double grad = std::abs(p->gradient(r.summary.final_xbar)(0));
    const bool near = std::abs(xbar - arm.target) <= 1e-2;
    all = all && near;
    out << to_string(arm.kind) << ": xbar_T = " << xbar << ", |grad f(xbar_T)| = " << grad << '\n';
    out << (near ? "PASS " : "FAIL ") << to_string(arm.kind) << " |xbar_T - " << arm.target
        << "| = " << std::abs(xbar - arm.target) << " (tolerance 1e-2)\n";
  }
  return all ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dadopt: simulate decentralized adaptive gradient methods over gossip graphs"};
  app.require_subcommand(1);
  const std::string footer = "Config keys (file sections, or --set section.key=value):\n" +
                             config_schema_help() +
                             "\nEnvironment: DADOPT_THREADS caps the sweep worker pool.\n"
                             "Exit codes: 0 success, 1 runtime failure, 2 usage or config error.";
  app.footer(footer);

  RunFlags run_flags;
  std::string run_out = "trace.csv", run_format = "csv";
  auto* run_cmd = app.add_subcommand("run", "Run one simulation and write its trace");
  add_run_flags(run_cmd, run_flags);
  run_cmd->footer(footer);
  run_cmd->add_option("-o,--out", run_out, "Trace output path")->capture_default_str();
  run_cmd->add_option("--format", run_format, "csv or jsonl (jsonl adds xbar)")->capture_default_str();

  RunFlags sweep_flags;
  std::string axis = "alpha", values, sweep_out = "sweep";
  unsigned workers = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per value along an axis");
  add_run_flags(sweep_cmd, sweep_flags);
  sweep_cmd->footer(footer);
  sweep_cmd->add_option("--axis", axis, "alpha, horizon, nodes or lambda")->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("-o,--out-dir", sweep_out, "Directory for summary.csv and cell traces")
      ->capture_default_str();
  sweep_cmd->add_option("--workers", workers, "Concurrent cells (capped by DADOPT_THREADS)")
      ->capture_default_str();

  std::string graph = "cycle", family, nodes = "5", mixing = "uniform", edges;
  double gamma = 0.0;
  auto* spectral_cmd = app.add_subcommand("spectral", "Print lambda and the spectrum of W");
  spectral_cmd->add_option("--graph", graph, "cycle, hypercube, complete, star or custom")
      ->capture_default_str();
  spectral_cmd->add_option("--family", family, "Tabulate a family across --nodes");
  spectral_cmd->add_option("--nodes", nodes, "Node count, or a comma list with --family")
      ->capture_default_str();
  spectral_cmd->add_option("--mixing", mixing, "uniform or mdm")->capture_default_str();
  spectral_cmd->add_option("--gamma", gamma, "Identity blend in [0, 1)")->capture_default_str();
  spectral_cmd->add_option("--edges", edges, "Edge list for --graph custom");

  std::string suite = "lemmas", report_path;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Run numerical checks of the analysis");
  verify_cmd->add_option("--suite", suite, "lemmas or bounds")->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "Seed for randomized checks")->capture_default_str();
  verify_cmd->add_option("--json", report_path, "Write a JSON report here");

  double ce_alpha = 0.1, ce_eps = 1e-6;
  std::size_t ce_horizon = 100000;
  auto* ce_cmd = app.add_subcommand(
      "counterexample", "DADAM and decentralized AMSGrad side by side on the two-node objective");
  ce_cmd->add_option("--alpha", ce_alpha, "Step size")->capture_default_str();
  ce_cmd->add_option("--horizon", ce_horizon, "Rounds")->capture_default_str();
  ce_cmd->add_option("--epsilon", ce_eps, "Rate floor")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, run_out, run_format, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, axis, values, sweep_out, workers, out, err);
    if (*spectral_cmd) return cmd_spectral(graph, family, nodes, mixing, gamma, edges, out);
    if (*verify_cmd) return cmd_verify(suite, verify_seed, report_path, out);
    if (*ce_cmd) return cmd_counterexample(ce_alpha, ce_horizon, ce_eps, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << " at node " << e.node() << ", coordinate " << e.coordinate()
        << ", round " << e.round() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dadopt
