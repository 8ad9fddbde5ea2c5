#pragma once

#include <optional>
#include <span>
#include <vector>

#include "carclust/partition.hpp"

namespace carclust {

// Fine transitions move one unit (island, border); coarse transitions move
// several at once (merge, split, split_and_merge).
enum class MoveKind { island, border, merge, split, split_and_merge };
const char* to_string(MoveKind kind);

// One candidate transition of a single partition. `result` already is the
// partition after the move, so proposals can be deduplicated by identity and
// scored directly.
struct MoveProposal {
  MoveKind kind = MoveKind::island;
  std::vector<int> units;  // reallocated units
  SpatialPartition result;
};

// Unit becomes a singleton; the remainder of its old cluster is split into
// connected components, each its own cluster. nullopt when the unit already
// is a singleton.
std::optional<MoveProposal> apply_island(const AdjacencyGraph& g, const SpatialPartition& p,
                                         int unit);

// Unit crosses the boundary into dest_cluster (must be adjacent); the old
// cluster's remainder is decomposed into connected components.
MoveProposal apply_border(const AdjacencyGraph& g, const SpatialPartition& p, int unit,
                          int dest_cluster);

// Two adjacent clusters become their union.
MoveProposal apply_merge(const AdjacencyGraph& g, const SpatialPartition& p, int k1, int k2);

// Candidate splits of cluster k: 1-D k-means over `unit_values` restricted to
// the cluster for m = 2..min(max_subclusters, n_k), each value-group refined
// into spatial connected components. Deduplicated by resulting identity.
std::vector<MoveProposal> enumerate_splits(const AdjacencyGraph& g, const SpatialPartition& p,
                                           int k, std::span<const double> unit_values,
                                           int max_subclusters);

// For each split candidate, pieces adjacent to other clusters can be merged
// into the adjacent cluster whose running mean (`cluster_means`, indexed by
// label of p) is nearest to the piece's mean of `unit_values`. Emits both the
// merge-all-pieces and the merge-all-but-largest-piece variants.
std::vector<MoveProposal> enumerate_split_and_merge(const AdjacencyGraph& g,
                                                    const SpatialPartition& p, int k,
                                                    std::span<const double> unit_values,
                                                    int max_subclusters,
                                                    std::span<const double> cluster_means);

// Deterministic 1-D k-means: quantile seeding, at most 100 Lloyd iterations.
// Returns a group index in [0, m) per input point; the empty vector when the
// values have no spread. Fewer than m groups may end up populated.
std::vector<int> kmeans_1d(std::span<const double> values, int m);

}  // namespace carclust
