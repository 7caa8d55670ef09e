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

#include "dadopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dadopt {

namespace {

std::string fmt_pair(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "cycle") return TopologyKind::cycle;
  if (name == "hypercube") return TopologyKind::hypercube;
  if (name == "complete") return TopologyKind::complete;
  if (name == "star") return TopologyKind::star;
  if (name == "custom") return TopologyKind::custom;
  throw std::invalid_argument("unknown graph kind '" + std::string(name) +
                              "' (expected cycle, hypercube, complete, star or custom)");
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::hypercube: return "hypercube";
    case TopologyKind::complete: return "complete";
    case TopologyKind::star: return "star";
    case TopologyKind::custom: return "custom";
  }
  return "?";
}

Topology::Topology(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), degrees_(node_count, 0) {
  if (node_count == 0) throw std::invalid_argument("topology needs at least one node");
  for (auto& [a, b] : edges) {
    if (a >= node_count || b >= node_count) {
      throw std::invalid_argument("edge " + fmt_pair(a, b) + " has an endpoint outside [0, " +
                                  std::to_string(node_count) + ")");
    }
    if (a == b) throw std::invalid_argument("self-loop " + fmt_pair(a, b) + " is not allowed");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw std::invalid_argument("duplicate edge " + fmt_pair(dup->first, dup->second));
  }
  for (const auto& [a, b] : edges) {
    ++degrees_[a];
    ++degrees_[b];
  }
  edges_ = std::move(edges);
}

std::size_t Topology::max_degree() const {
  return *std::max_element(degrees_.begin(), degrees_.end());
}

bool Topology::has_edge(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

bool Topology::is_connected() const {
  std::vector<std::size_t> parent(node_count_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = node_count_;
  for (const auto& [a, b] : edges_) {
    auto ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

bool Topology::is_regular() const {
  return std::all_of(degrees_.begin(), degrees_.end(),
                     [&](std::size_t d) { return d == degrees_.front(); });
}

Topology build_topology(TopologyKind kind, std::size_t n) {
  if (n < 2) throw std::invalid_argument("graph needs n >= 2 nodes, got " + std::to_string(n));
  std::vector<Topology::Edge> edges;
  switch (kind) {
    case TopologyKind::cycle:
      for (std::size_t i = 0; i < n; ++i) {
        auto j = (i + 1) % n;
        // n == 2 would list (0,1) twice.
        if (n == 2 && i == 1) break;
        edges.emplace_back(i, j);
      }
      break;
    case TopologyKind::hypercube: {
      if ((n & (n - 1)) != 0) {
        throw std::invalid_argument("hypercube needs a power-of-two node count, got " +
                                    std::to_string(n));
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t bit = 1; bit < n; bit <<= 1) {
          if ((i & bit) == 0) edges.emplace_back(i, i | bit);
        }
      }
      break;
    }
    case TopologyKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      break;
    case TopologyKind::star:
      for (std::size_t j = 1; j < n; ++j) edges.emplace_back(0, j);
      break;
    case TopologyKind::custom:
      throw std::invalid_argument("custom topologies are built from an edge list");
  }
  return Topology(n, std::move(edges));
}

Topology topology_from_edges(std::size_t n, std::vector<Topology::Edge> edges) {
  if (n < 2) throw std::invalid_argument("graph needs n >= 2 nodes, got " + std::to_string(n));
  Topology t(n, std::move(edges));
  if (!t.is_connected()) {
    throw std::invalid_argument(
        "edge list describes a disconnected graph; the mixing matrix would have lambda = 1");
  }
  return t;
}

Topology read_edge_list(std::istream& in, std::size_t n) {
  std::vector<Topology::Edge> edges;
  std::size_t max_node = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long a = -1, b = -1;
    std::string rest;
    if (!(ls >> a >> b) || a < 0 || b < 0 || (ls >> rest)) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected two non-negative node indices");
    }
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    max_node = std::max({max_node, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (edges.empty()) throw std::invalid_argument("edge list is empty");
  return topology_from_edges(n == 0 ? max_node + 1 : n, std::move(edges));
}

Topology read_edge_list(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list '" + path.string() + "'");
  return read_edge_list(in, n);
}

MixingMatrix MixingMatrix::from_dense(Eigen::MatrixXd w, const Topology* pattern) {
  const auto n = w.rows();
  if (n == 0 || w.cols() != n) throw std::invalid_argument("mixing matrix must be square and non-empty");
  if (pattern && static_cast<Eigen::Index>(pattern->node_count()) != n) {
    throw std::invalid_argument("mixing matrix size does not match the topology");
  }
  if (!w.allFinite()) throw std::invalid_argument("mixing matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w(i, j) < 0.0) {
        throw std::invalid_argument("mixing matrix entry " + fmt_pair(i, j) + " is negative");
      }
      if (std::abs(w(i, j) - w(j, i)) > kStochasticTol) {
        throw std::invalid_argument("mixing matrix is not symmetric at " + fmt_pair(i, j));
      }
      if (pattern && i != j && w(i, j) != 0.0 && !pattern->has_edge(i, j)) {
        throw std::invalid_argument("mixing matrix weight on non-edge " + fmt_pair(i, j));
      }
    }
    if (std::abs(w.row(i).sum() - 1.0) > kStochasticTol) {
      throw std::invalid_argument("mixing matrix row " + std::to_string(i) + " does not sum to 1");
    }
    if (std::abs(w.col(i).sum() - 1.0) > kStochasticTol) {
      throw std::invalid_argument("mixing matrix column " + std::to_string(i) +
                                  " does not sum to 1");
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigendecomposition of the mixing matrix failed");
  }
  Eigen::VectorXd ev = solver.eigenvalues().reverse();  // ascending -> descending
  if (std::abs(ev(0) - 1.0) > kEigenTol) {
    throw std::invalid_argument("largest eigenvalue of the mixing matrix is not 1");
  }
  double lambda = n == 1 ? 0.0 : std::max(std::abs(ev(1)), std::abs(ev(n - 1)));
  if (lambda >= 1.0 - kEigenTol) {
    throw std::invalid_argument(
        "mixing matrix has lambda = max(|lambda_2|, |lambda_N|) = 1; the graph is disconnected "
        "or bipartite-periodic (blend with gamma > 0)");
  }

  MixingMatrix m;
  m.rows_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (w(i, j) != 0.0) m.rows_[i].emplace_back(static_cast<std::size_t>(j), w(i, j));
  m.w_ = std::move(w);
  m.eigenvalues_ = std::move(ev);
  m.lambda_ = lambda;
  return m;
}

MixingMatrix mdm_matrix(const Topology& t, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1), got " + std::to_string(gamma));
  }
  if (!t.is_connected()) throw std::invalid_argument("topology is disconnected; lambda would be 1");
  const auto n = t.node_count();
  const double dmax = static_cast<double>(t.max_degree());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : t.edges()) w(a, b) = w(b, a) = 1.0 / dmax;
  for (std::size_t i = 0; i < n; ++i) w(i, i) = 1.0 - static_cast<double>(t.degree(i)) / dmax;
  if (gamma > 0.0) {
    w *= (1.0 - gamma);
    w.diagonal().array() += gamma;
  }
  return MixingMatrix::from_dense(std::move(w), &t);
}

MixingMatrix blend_with_identity(const MixingMatrix& w, double gamma, const Topology* pattern) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1), got " + std::to_string(gamma));
  }
  Eigen::MatrixXd blended = (1.0 - gamma) * w.weights();
  blended.diagonal().array() += gamma;
  return MixingMatrix::from_dense(std::move(blended), pattern);
}

MixingMatrix uniform_neighbor_matrix(const Topology& t) {
  if (!t.is_regular()) {
    throw std::invalid_argument("uniform neighbour weights need a degree-regular topology");
  }
  const auto n = t.node_count();
  const double weight = 1.0 / static_cast<double>(t.degree(0) + 1);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : t.edges()) w(a, b) = w(b, a) = weight;
  w.diagonal().setConstant(weight);
  return MixingMatrix::from_dense(std::move(w), &t);
}

SpectralGap spectral_gap(const MixingMatrix& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.weights(), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();  // ascending
  const auto n = ev.size();
  double lambda = n == 1 ? 0.0 : std::max(std::abs(ev(n - 2)), std::abs(ev(0)));
  return {lambda, 1.0 - lambda};
}

}  // namespace dadopt
