#include "carclust/graph.hpp"

#include <algorithm>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

AdjacencyGraph::AdjacencyGraph(int n_units, const std::vector<std::pair<int, int>>& edges)
    : n_(n_units), adj_(static_cast<std::size_t>(std::max(n_units, 0))) {
  if (n_units <= 0) throw InputError("graph needs at least one unit");
  std::vector<std::pair<int, int>> normalized;
  normalized.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    check_unit(a);
    check_unit(b);
    if (a == b) throw InputError("self loop on unit " + std::to_string(a));
    normalized.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(normalized.begin(), normalized.end());
  normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
  edges_ = std::move(normalized);
  for (const auto& [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

AdjacencyGraph AdjacencyGraph::grid(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw InputError("grid dimensions must be positive");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(rows) * cols * 2);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int u = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(u, u + 1);
      if (r + 1 < rows) edges.emplace_back(u, u + cols);
    }
  }
  return AdjacencyGraph(rows * cols, edges);
}

AdjacencyGraph AdjacencyGraph::path(int n) { return grid(1, n); }

const std::vector<int>& AdjacencyGraph::neighbors(int unit) const {
  check_unit(unit);
  return adj_[unit];
}

bool AdjacencyGraph::adjacent(int a, int b) const {
  check_unit(a);
  check_unit(b);
  const auto& nbrs = adj_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

void AdjacencyGraph::check_unit(int unit) const {
  if (unit < 0 || unit >= n_)
    throw InputError("unit index " + std::to_string(unit) + " out of range [0, " +
                     std::to_string(n_) + ")");
}

void AdjacencyGraph::check_subset(std::span<const int> subset) const {
  for (int u : subset) check_unit(u);
}

std::vector<std::vector<int>> AdjacencyGraph::connected_components(
    std::span<const int> subset) const {
  check_subset(subset);
  std::vector<char> in_subset(n_, 0);
  for (int u : subset) {
    if (in_subset[u]) throw InputError("duplicate unit " + std::to_string(u) + " in subset");
    in_subset[u] = 1;
  }

  std::vector<int> order(subset.begin(), subset.end());
  std::sort(order.begin(), order.end());

  std::vector<char> visited(n_, 0);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int seed : order) {
    if (visited[seed]) continue;
    std::vector<int> comp;
    stack.push_back(seed);
    visited[seed] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v : adj_[u]) {
        if (in_subset[v] && !visited[v]) {
          visited[v] = 1;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;  // seeds scanned in ascending order -> sorted by min index
}

bool AdjacencyGraph::is_connected(std::span<const int> subset) const {
  if (subset.empty()) return false;
  return connected_components(subset).size() == 1;
}

Eigen::MatrixXd AdjacencyGraph::induced_laplacian(std::span<const int> subset) const {
  check_subset(subset);
  const int m = static_cast<int>(subset.size());
  std::vector<int> pos(n_, -1);
  for (int i = 0; i < m; ++i) {
    if (pos[subset[i]] != -1)
      throw InputError("duplicate unit " + std::to_string(subset[i]) + " in subset");
    pos[subset[i]] = i;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int v : adj_[subset[i]]) {
      const int j = pos[v];
      if (j >= 0) {
        lap(i, j) = -1.0;
        lap(i, i) += 1.0;
      }
    }
  }
  return lap;
}

}  // namespace carclust
