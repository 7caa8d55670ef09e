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

#include "dadopt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dadopt {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

namespace {

struct Value {
  std::string text;
  bool quoted = false;
};

using Setter = std::function<void(RunConfig&, const Value&, const std::string& key)>;

struct Entry {
  ConfigKey meta;
  Setter set;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double as_double(const Value& v, const std::string& key) {
  if (v.quoted) throw ConfigError(key, "expected a number, got a string");
  double out = 0.0;
  const char* first = v.text.data();
  const char* last = first + v.text.size();
  if (!v.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + v.text + "'");
  }
  return out;
}

std::uint64_t as_uint(const Value& v, const std::string& key) {
  if (v.quoted) throw ConfigError(key, "expected an integer, got a string");
  std::uint64_t out = 0;
  const char* first = v.text.data();
  const char* last = first + v.text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc() && ptr == last) return out;
  // Accept integral scientific notation such as 1e5.
  const double d = as_double(v, key);
  if (d < 0.0 || d != std::floor(d) || d > 9.0e15) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v.text + "'");
  }
  return static_cast<std::uint64_t>(d);
}

bool as_bool(const Value& v, const std::string& key) {
  if (!v.quoted && v.text == "true") return true;
  if (!v.quoted && v.text == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v.text + "'");
}

/// Wraps parse_* helpers so their std::invalid_argument carries the key.
template <class Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"problem", "kind", "string", "quadratic", "counterexample | quadratic | softmax"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.problem.kind = keyed(k, [&] { return parse_problem_kind(v.text); });
       }},
      {{"problem", "dim", "integer", "8", "quadratic dimension or softmax feature dimension"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.dim = as_uint(v, k); }},
      {{"problem", "condition", "number", "4", "quadratic condition number (>= 1)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.condition = as_double(v, k); }},
      {{"problem", "hetero", "number", "1", "quadratic spread of node centers (>= 0)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.hetero = as_double(v, k); }},
      {{"problem", "num_classes", "integer", "10", "softmax class count"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.num_classes = as_uint(v, k); }},
      {{"problem", "classes_per_node", "integer", "10", "softmax labels held by each node"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.problem.classes_per_node = as_uint(v, k);
       }},
      {{"problem", "samples_per_node", "integer", "100", "softmax samples per node"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.problem.samples_per_node = as_uint(v, k);
       }},
      {{"problem", "separation", "number", "1", "softmax class-mean scale"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.separation = as_double(v, k); }},
      {{"problem", "seed", "integer", "run.seed", "data seed"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.problem.seed = as_uint(v, k); }},

      {{"graph", "kind", "string", "cycle", "cycle | hypercube | complete | star | custom"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.graph.kind = keyed(k, [&] { return parse_topology_kind(v.text); });
       }},
      {{"graph", "nodes", "integer", "5", "node count (ignored for custom)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.graph.nodes = as_uint(v, k); }},
      {{"graph", "mixing", "string", "uniform", "uniform | mdm"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.graph.mixing = keyed(k, [&] { return parse_mixing_kind(v.text); });
       }},
      {{"graph", "gamma", "number", "0", "identity blend gamma I + (1 - gamma) W, in [0, 1)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.graph.gamma = as_double(v, k); }},
      {{"graph", "edges_file", "string", "", "edge list for kind = custom"},
       [](RunConfig& c, const Value& v, const std::string&) { c.graph.edges_file = v.text; }},

      {{"optimizer", "name", "string", "",
        "damsgrad | dadagrad | dadam | dpsgd | framework-none | framework-adam"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.optimizer.kind = keyed(k, [&] { return parse_optimizer_kind(v.text); });
       }},
      {{"optimizer", "alpha", "number", "", "step size"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.optimizer.hyper.alpha = as_double(v, k); }},
      {{"optimizer", "beta1", "number", "0", "momentum, in [0, 1)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.optimizer.hyper.beta1 = as_double(v, k); }},
      {{"optimizer", "beta2", "number", "0", "second-moment decay, in [0, 1)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.optimizer.hyper.beta2 = as_double(v, k); }},
      {{"optimizer", "beta3", "number", "0", "dadam v_hat smoothing, in [0, 1)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.optimizer.hyper.beta3 = as_double(v, k); }},
      {{"optimizer", "epsilon", "number", "1e-6", "rate floor"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.optimizer.hyper.epsilon = as_double(v, k);
       }},
      {{"optimizer", "parallel_comm", "bool", "false", "mix u~ after the local increment"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.optimizer.parallel_comm = as_bool(v, k); }},

      {{"noise", "kind", "string", "none", "none | uniform-bounded"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.noise.kind = keyed(k, [&] { return parse_noise_kind(v.text); });
       }},
      {{"noise", "sigma", "number", "0", "per-coordinate standard deviation"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.noise.sigma = as_double(v, k); }},

      {{"run", "horizon", "integer", "1000", "rounds T"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.horizon = as_uint(v, k); }},
      {{"run", "seed", "integer", "0", "64-bit run seed"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.seed = as_uint(v, k); }},
      {{"run", "record_every", "integer", "1", "trace cadence (t = 1 and t = T always recorded)"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.record_every = as_uint(v, k); }},
      {{"run", "init", "string", "constant", "constant | shared-random"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         c.init.kind = keyed(k, [&] { return parse_init_kind(v.text); });
       }},
      {{"run", "init_value", "number", "0", "coordinate value for init = constant"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.init.value = as_double(v, k); }},
      {{"run", "init_scale", "number", "1", "box half-width for init = shared-random"},
       [](RunConfig& c, const Value& v, const std::string& k) { c.init.scale = as_double(v, k); }},
      {{"run", "threads", "integer", "1", "per-node worker threads inside a round"},
       [](RunConfig& c, const Value& v, const std::string& k) {
         const auto n = as_uint(v, k);
         if (n == 0 || n > 1024) throw ConfigError(k, "expected 1..1024 threads");
         c.threads = static_cast<unsigned>(n);
       }},
  };
  return table;
}

const Entry* find_entry(std::string_view section, std::string_view key) {
  for (const auto& e : entries())
    if (e.meta.section == section && e.meta.key == key) return &e;
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const auto& e : entries())
    if (e.meta.section == section) return true;
  return false;
}

Value parse_value(std::string_view raw, const std::string& key) {
  std::string text = trim(raw);
  if (text.empty()) throw ConfigError(key, "missing value");
  Value v;
  if (text.front() == '"' || text.front() == '\'') {
    const char q = text.front();
    const auto close = text.find(q, 1);
    if (close == std::string::npos) throw ConfigError(key, "unterminated string");
    const std::string rest = trim(std::string_view(text).substr(close + 1));
    if (!rest.empty() && rest.front() != '#') throw ConfigError(key, "trailing text after string");
    v.text = text.substr(1, close - 1);
    v.quoted = true;
    return v;
  }
  const auto hash = text.find('#');
  if (hash != std::string::npos) text = trim(std::string_view(text).substr(0, hash));
  if (text.empty()) throw ConfigError(key, "missing value");
  v.text = text;
  return v;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.meta);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      const auto close = t.find(']');
      if (close == std::string::npos) throw ConfigError("", where + ": unterminated section header");
      const std::string rest = trim(std::string_view(t).substr(close + 1));
      if (!rest.empty() && rest.front() != '#') {
        throw ConfigError("", where + ": trailing text after section header");
      }
      section = trim(std::string_view(t).substr(1, close - 1));
      if (!known_section(section)) throw ConfigError(section, where + ": unknown section");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("", where + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (section.empty()) throw ConfigError(key, where + ": key outside of any [section]");
    const std::string path = section + "." + key;
    const Entry* entry = find_entry(section, key);
    if (!entry) throw ConfigError(path, where + ": unknown key");
    if (!seen.insert(path).second) throw ConfigError(path, where + ": duplicate key");
    entry->set(cfg, parse_value(std::string_view(t).substr(eq + 1), path), path);
  }
  for (const auto& e : entries()) {
    if (!e.meta.default_value.empty()) continue;
    if (e.meta.key == "edges_file") continue;
    const std::string path = std::string(e.meta.section) + "." + std::string(e.meta.key);
    if (!seen.count(path)) throw ConfigError(path, "required key is missing");
  }
  if (cfg.graph.kind == TopologyKind::custom && !seen.count("graph.edges_file")) {
    throw ConfigError("graph.edges_file", "required when graph.kind = custom");
  }
  if (!cfg.graph.edges_file.empty() && cfg.graph.edges_file.is_relative() && !base_dir.empty()) {
    cfg.graph.edges_file = base_dir / cfg.graph.edges_file;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("", "override '" + std::string(assignment) + "' is not section.key=value");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError(path, "override key must be section.key");
  const Entry* entry = find_entry(std::string_view(path).substr(0, dot),
                                  std::string_view(path).substr(dot + 1));
  if (!entry) throw ConfigError(path, "unknown key");
  entry->set(cfg, parse_value(assignment.substr(eq + 1), path), path);
}

std::string config_schema_help() {
  std::ostringstream os;
  std::string_view current;
  for (const auto& k : config_schema()) {
    if (k.section != current) {
      os << "  [" << k.section << "]\n";
      current = k.section;
    }
    std::string name(k.key);
    name.resize(std::max<std::size_t>(name.size(), 18), ' ');
    std::string type(k.type);
    type.resize(std::max<std::size_t>(type.size(), 8), ' ');
    os << "    " << name << type << ' ' << k.help;
    if (k.default_value.empty()) {
      if (k.key != "edges_file") os << " (required)";
    } else {
      os << " (default " << k.default_value << ")";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dadopt
