#include "carclust/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

SpatialPartition SpatialPartition::from_clusters(const AdjacencyGraph& g,
                                                 std::vector<std::vector<int>> clusters) {
  const int n = g.n_units();
  std::vector<int> assignment(n, -1);
  for (auto& cl : clusters) {
    if (cl.empty()) throw InputError("empty cluster");
    std::sort(cl.begin(), cl.end());
    for (int u : cl) {
      if (u < 0 || u >= n) throw InputError("unit index " + std::to_string(u) + " out of range");
      if (assignment[u] != -1) throw InputError("unit " + std::to_string(u) + " in two clusters");
      assignment[u] = 0;
    }
  }
  for (int u = 0; u < n; ++u)
    if (assignment[u] == -1) throw InputError("unit " + std::to_string(u) + " unassigned");

  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& cl : clusters)
    if (!g.is_connected(cl))
      throw InputError("cluster containing unit " + std::to_string(cl.front()) +
                       " is not connected");

  SpatialPartition p;
  p.clusters_ = std::move(clusters);
  p.assignment_.assign(n, -1);
  for (int k = 0; k < static_cast<int>(p.clusters_.size()); ++k)
    for (int u : p.clusters_[k]) p.assignment_[u] = k;
  return p;
}

SpatialPartition SpatialPartition::from_assignment(const AdjacencyGraph& g,
                                                   std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != g.n_units())
    throw InputError("assignment length does not match unit count");
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw InputError("negative cluster label");
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<int>> clusters(max_label + 1);
  for (int u = 0; u < static_cast<int>(labels.size()); ++u) clusters[labels[u]].push_back(u);
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                [](const auto& c) { return c.empty(); }),
                 clusters.end());
  return from_clusters(g, std::move(clusters));
}

SpatialPartition SpatialPartition::one_cluster(const AdjacencyGraph& g) {
  std::vector<int> all(g.n_units());
  std::iota(all.begin(), all.end(), 0);
  if (!g.is_connected(all)) throw InputError("graph is disconnected; no one-cluster partition");
  return from_clusters(g, {std::move(all)});
}

SpatialPartition SpatialPartition::singletons(const AdjacencyGraph& g) {
  std::vector<std::vector<int>> clusters(g.n_units());
  for (int u = 0; u < g.n_units(); ++u) clusters[u] = {u};
  return from_clusters(g, std::move(clusters));
}

ParticleKey key_of(const Particle& p) {
  return ParticleKey{p.alpha.canonical_key(), p.beta.canonical_key()};
}

std::size_t hash_ints(std::span<const int> xs, std::size_t seed) {
  // FNV-1a over the int sequence
  std::size_t h = seed ^ 1469598103934665603ull;
  for (int x : xs) {
    h ^= static_cast<std::size_t>(static_cast<unsigned int>(x));
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace carclust
