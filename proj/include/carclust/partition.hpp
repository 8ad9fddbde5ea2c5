#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "carclust/graph.hpp"

namespace carclust {

// A partition of all units into connected clusters: the search space element.
// Immutable value type. Clusters are kept in canonical order (sorted by
// smallest member, members ascending) and labels always refer to that order,
// so the assignment vector doubles as a label-invariant identity key.
class SpatialPartition {
 public:
  SpatialPartition() = default;  // empty placeholder; build via the factories

  // Validates coverage and per-cluster connectivity; throws InputError.
  static SpatialPartition from_assignment(const AdjacencyGraph& g, std::span<const int> labels);
  static SpatialPartition from_clusters(const AdjacencyGraph& g,
                                        std::vector<std::vector<int>> clusters);
  static SpatialPartition one_cluster(const AdjacencyGraph& g);
  static SpatialPartition singletons(const AdjacencyGraph& g);

  int n_units() const { return static_cast<int>(assignment_.size()); }
  int n_clusters() const { return static_cast<int>(clusters_.size()); }
  int label_of(int unit) const { return assignment_[unit]; }
  int cluster_size(int k) const { return static_cast<int>(clusters_[k].size()); }
  const std::vector<int>& cluster(int k) const { return clusters_[k]; }
  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  const std::vector<int>& assignment() const { return assignment_; }

  // Equal keys iff equal as set-partitions, independent of label numbering.
  const std::vector<int>& canonical_key() const { return assignment_; }

  bool operator==(const SpatialPartition& other) const {
    return assignment_ == other.assignment_;
  }

 private:
  std::vector<int> assignment_;
  std::vector<std::vector<int>> clusters_;
};

// A pair of spatial partitions over the same units: one for the mean levels,
// one for the time trends.
struct Particle {
  SpatialPartition alpha;
  SpatialPartition beta;
  bool operator==(const Particle&) const = default;
};

// Hashable particle identity for duplicate detection and proposal dedup.
struct ParticleKey {
  std::vector<int> alpha, beta;
  bool operator==(const ParticleKey&) const = default;
};

ParticleKey key_of(const Particle& p);
std::size_t hash_ints(std::span<const int> xs, std::size_t seed = 0);

struct ParticleKeyHash {
  std::size_t operator()(const ParticleKey& k) const {
    return hash_ints(k.beta, hash_ints(k.alpha));
  }
};

}  // namespace carclust
