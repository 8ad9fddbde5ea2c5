#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace carclust {

// Undirected binary adjacency over n areal units. Immutable after
// construction, so concurrent reads are safe. Stores both neighbor lists
// (for O(deg) boundary queries) and a sorted edge set.
class AdjacencyGraph {
 public:
  // Edges may contain duplicates, reversed copies, or self loops; self loops
  // are rejected, duplicates deduplicated. Indices must lie in [0, n_units).
  AdjacencyGraph(int n_units, const std::vector<std::pair<int, int>>& edges);

  // rows x cols lattice with 4-neighbour (rook) contiguity
  static AdjacencyGraph grid(int rows, int cols);
  static AdjacencyGraph path(int n);

  int n_units() const { return n_; }
  std::size_t n_edges() const { return edges_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int unit) const;
  bool adjacent(int a, int b) const;

  // Maximal connected pieces of the subgraph induced by `subset`, ordered by
  // smallest contained index; members sorted ascending.
  std::vector<std::vector<int>> connected_components(std::span<const int> subset) const;

  // True iff the induced subgraph is connected; empty subsets are not
  // connected by convention.
  bool is_connected(std::span<const int> subset) const;

  // Unweighted Laplacian of the induced subgraph, rows/columns in `subset`
  // order. Diagonal holds within-subset degrees, off-diagonal -1 per edge.
  Eigen::MatrixXd induced_laplacian(std::span<const int> subset) const;

 private:
  int n_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::pair<int, int>> edges_;

  void check_unit(int unit) const;
  void check_subset(std::span<const int> subset) const;
};

}  // namespace carclust
