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

#ifndef DADOPT_GRAPH_HPP
#define DADOPT_GRAPH_HPP

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dadopt {

enum class TopologyKind { cycle, hypercube, complete, star, custom };

TopologyKind parse_topology_kind(std::string_view name);
std::string_view to_string(TopologyKind kind);

/// Undirected communication graph. Self-communication is implicit and never
/// stored; edges are kept as sorted (u, v) pairs with u < v.
class Topology {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Validates endpoints and rejects self-loops. Duplicate pairs (in either
  /// orientation) are an error.
  Topology(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t degree(std::size_t node) const { return degrees_.at(node); }
  std::size_t max_degree() const;
  bool has_edge(std::size_t a, std::size_t b) const;
  bool is_connected() const;
  bool is_regular() const;

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
};

/// Builds one of the standard families. `custom` is not accepted here; use
/// topology_from_edges.
Topology build_topology(TopologyKind kind, std::size_t n);

/// Custom edge list; must describe a connected graph on n >= 2 nodes.
Topology topology_from_edges(std::size_t n, std::vector<Topology::Edge> edges);

/// Reads "u v" pairs, one per line, 0-indexed. Blank lines and lines starting
/// with '#' are skipped. When `n` is zero the node count is inferred as
/// max endpoint + 1.
Topology read_edge_list(std::istream& in, std::size_t n = 0);
Topology read_edge_list(const std::filesystem::path& path, std::size_t n = 0);

/// Symmetric doubly stochastic gossip operator with lambda < 1.
///
/// Instances only exist in a validated state: every row and column sums to 1
/// within 1e-12, entries are nonnegative, the sparsity pattern follows the
/// topology (when one is given), the matrix is symmetric, the top eigenvalue
/// is 1 within 1e-10 and lambda = max(|lambda_2|, |lambda_N|) < 1.
class MixingMatrix {
 public:
  static constexpr double kStochasticTol = 1e-12;
  static constexpr double kEigenTol = 1e-10;

  /// Throws std::invalid_argument naming the violated invariant.
  static MixingMatrix from_dense(Eigen::MatrixXd w, const Topology* pattern = nullptr);

  std::size_t size() const { return static_cast<std::size_t>(w_.rows()); }
  const Eigen::MatrixXd& weights() const { return w_; }
  double operator()(std::size_t i, std::size_t j) const { return w_(i, j); }
  double lambda() const { return lambda_; }
  double gap() const { return 1.0 - lambda_; }
  /// Eigenvalues sorted descending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// Nonzero (column, weight) entries of row i, in column order.
  const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const {
    return rows_[i];
  }

 private:
  MixingMatrix() = default;

  Eigen::MatrixXd w_;
  Eigen::VectorXd eigenvalues_;
  double lambda_ = 0.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

/// Maximum-degree weights W_ii = 1 - d_i/d_max, W_ij = 1/d_max on edges,
/// blended as gamma*I + (1-gamma)*W.
MixingMatrix mdm_matrix(const Topology& t, double gamma = 0.0);

/// Each node averages itself and its d neighbours with weight 1/(d+1).
/// Requires a degree-regular topology.
MixingMatrix uniform_neighbor_matrix(const Topology& t);

/// gamma * I + (1 - gamma) * W, revalidated against `pattern` when given.
MixingMatrix blend_with_identity(const MixingMatrix& w, double gamma,
                                 const Topology* pattern = nullptr);

struct SpectralGap {
  double lambda;
  double gap;
};

/// Recomputes lambda from a symmetric eigendecomposition of W.
SpectralGap spectral_gap(const MixingMatrix& w);

/// out = sum_j W_ij * value_of(j), accumulated in column order over the
/// nonzero entries of row i.
template <class ValueOf>
void mix_row(const MixingMatrix& w, std::size_t i, ValueOf&& value_of, Eigen::VectorXd& out) {
  const auto& row = w.row(i);
  out.setZero(value_of(row.front().first).size());
  for (const auto& [j, wij] : row) out += wij * value_of(j);
}

}  // namespace dadopt

#endif  // DADOPT_GRAPH_HPP
