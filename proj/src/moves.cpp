#include "carclust/moves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::island: return "island";
    case MoveKind::border: return "border";
    case MoveKind::merge: return "merge";
    case MoveKind::split: return "split";
    case MoveKind::split_and_merge: return "split_and_merge";
  }
  return "unknown";
}

namespace {

// Rebuild the partition with cluster k replaced by `replacement` pieces
// (possibly empty) and, optionally, units appended to other clusters.
SpatialPartition rebuild(const AdjacencyGraph& g, const SpatialPartition& p, int k,
                         const std::vector<std::vector<int>>& replacement) {
  std::vector<std::vector<int>> clusters;
  clusters.reserve(p.n_clusters() + replacement.size());
  for (int j = 0; j < p.n_clusters(); ++j)
    if (j != k) clusters.push_back(p.cluster(j));
  for (const auto& piece : replacement) clusters.push_back(piece);
  return SpatialPartition::from_clusters(g, std::move(clusters));
}

}  // namespace

std::optional<MoveProposal> apply_island(const AdjacencyGraph& g, const SpatialPartition& p,
                                         int unit) {
  if (unit < 0 || unit >= p.n_units())
    throw InputError("island: unit " + std::to_string(unit) + " out of range");
  const int k = p.label_of(unit);
  if (p.cluster_size(k) < 2) return std::nullopt;

  std::vector<int> rest;
  rest.reserve(p.cluster_size(k) - 1);
  for (int u : p.cluster(k))
    if (u != unit) rest.push_back(u);

  std::vector<std::vector<int>> replacement = g.connected_components(rest);
  replacement.push_back({unit});
  return MoveProposal{MoveKind::island, {unit}, rebuild(g, p, k, replacement)};
}

MoveProposal apply_border(const AdjacencyGraph& g, const SpatialPartition& p, int unit,
                          int dest_cluster) {
  if (unit < 0 || unit >= p.n_units())
    throw InputError("border: unit " + std::to_string(unit) + " out of range");
  if (dest_cluster < 0 || dest_cluster >= p.n_clusters())
    throw InputError("border: cluster " + std::to_string(dest_cluster) + " out of range");
  const int k = p.label_of(unit);
  if (k == dest_cluster) throw InputError("border: unit already in destination cluster");
  bool touches = false;
  for (int v : g.neighbors(unit))
    if (p.label_of(v) == dest_cluster) {
      touches = true;
      break;
    }
  if (!touches)
    throw InputError("border: unit " + std::to_string(unit) + " is not adjacent to cluster " +
                     std::to_string(dest_cluster));

  std::vector<std::vector<int>> clusters;
  clusters.reserve(p.n_clusters() + 2);
  for (int j = 0; j < p.n_clusters(); ++j) {
    if (j == k) continue;
    auto cl = p.cluster(j);
    if (j == dest_cluster) cl.push_back(unit);
    clusters.push_back(std::move(cl));
  }
  std::vector<int> rest;
  for (int u : p.cluster(k))
    if (u != unit) rest.push_back(u);
  for (auto& piece : g.connected_components(rest)) clusters.push_back(std::move(piece));

  return MoveProposal{MoveKind::border, {unit}, SpatialPartition::from_clusters(g, std::move(clusters))};
}

MoveProposal apply_merge(const AdjacencyGraph& g, const SpatialPartition& p, int k1, int k2) {
  if (k1 < 0 || k1 >= p.n_clusters() || k2 < 0 || k2 >= p.n_clusters() || k1 == k2)
    throw InputError("merge: invalid cluster pair");
  bool touches = false;
  for (int u : p.cluster(k1)) {
    for (int v : g.neighbors(u))
      if (p.label_of(v) == k2) {
        touches = true;
        break;
      }
    if (touches) break;
  }
  if (!touches)
    throw InputError("merge: clusters " + std::to_string(k1) + " and " + std::to_string(k2) +
                     " are not adjacent");

  std::vector<int> merged = p.cluster(k1);
  merged.insert(merged.end(), p.cluster(k2).begin(), p.cluster(k2).end());
  std::vector<std::vector<int>> clusters;
  clusters.reserve(p.n_clusters() - 1);
  for (int j = 0; j < p.n_clusters(); ++j)
    if (j != k1 && j != k2) clusters.push_back(p.cluster(j));
  clusters.push_back(std::move(merged));

  std::vector<int> moved = p.cluster(k2);
  return MoveProposal{MoveKind::merge, std::move(moved),
                      SpatialPartition::from_clusters(g, std::move(clusters))};
}

std::vector<int> kmeans_1d(std::span<const double> values, int m) {
  const int n = static_cast<int>(values.size());
  if (m < 1 || n == 0) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*hi_it))) return {};  // no spread

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  // quantile seeding at (j + 0.5)/m with linear interpolation
  std::vector<double> centers(m);
  for (int j = 0; j < m; ++j) {
    const double q = (j + 0.5) / m * (n - 1);
    const int lo = static_cast<int>(std::floor(q));
    const int hi = std::min(lo + 1, n - 1);
    centers[j] = sorted[lo] + (q - lo) * (sorted[hi] - sorted[lo]);
  }

  std::vector<int> assign(n, 0), prev(n, -1);
  for (int iter = 0; iter < 100 && assign != prev; ++iter) {
    prev = assign;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::abs(values[i] - centers[0]);
      for (int j = 1; j < m; ++j) {
        const double d = std::abs(values[i] - centers[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assign[i] = best;
    }
    std::vector<double> sum(m, 0.0);
    std::vector<int> count(m, 0);
    for (int i = 0; i < n; ++i) {
      sum[assign[i]] += values[i];
      ++count[assign[i]];
    }
    for (int j = 0; j < m; ++j)
      if (count[j] > 0) centers[j] = sum[j] / count[j];
  }
  return assign;
}

namespace {

// k-means pieces of cluster k refined into spatial connected components
std::vector<std::vector<std::vector<int>>> split_pieces(const AdjacencyGraph& g,
                                                        const SpatialPartition& p, int k,
                                                        std::span<const double> unit_values,
                                                        int max_subclusters) {
  std::vector<std::vector<std::vector<int>>> out;
  const auto& members = p.cluster(k);
  const int nk = static_cast<int>(members.size());
  if (nk < 2 || max_subclusters < 2) return out;

  std::vector<double> vals(nk);
  for (int i = 0; i < nk; ++i) vals[i] = unit_values[members[i]];

  for (int m = 2; m <= std::min(max_subclusters, nk); ++m) {
    const std::vector<int> assign = kmeans_1d(vals, m);
    if (assign.empty()) continue;  // degenerate values, no proposal for this m
    std::vector<std::vector<int>> groups(m);
    for (int i = 0; i < nk; ++i) groups[assign[i]].push_back(members[i]);
    std::vector<std::vector<int>> pieces;
    for (const auto& grp : groups) {
      if (grp.empty()) continue;
      for (auto& comp : g.connected_components(grp)) pieces.push_back(std::move(comp));
    }
    if (pieces.size() < 2) continue;
    out.push_back(std::move(pieces));
  }
  return out;
}

}  // namespace

std::vector<MoveProposal> enumerate_splits(const AdjacencyGraph& g, const SpatialPartition& p,
                                           int k, std::span<const double> unit_values,
                                           int max_subclusters) {
  std::vector<MoveProposal> proposals;
  std::set<std::vector<int>> seen;
  for (auto& pieces : split_pieces(g, p, k, unit_values, max_subclusters)) {
    SpatialPartition result = rebuild(g, p, k, pieces);
    if (!seen.insert(result.canonical_key()).second) continue;
    proposals.push_back(MoveProposal{MoveKind::split, p.cluster(k), std::move(result)});
  }
  return proposals;
}

std::vector<MoveProposal> enumerate_split_and_merge(const AdjacencyGraph& g,
                                                    const SpatialPartition& p, int k,
                                                    std::span<const double> unit_values,
                                                    int max_subclusters,
                                                    std::span<const double> cluster_means) {
  std::vector<MoveProposal> proposals;
  std::set<std::vector<int>> seen;

  for (const auto& pieces : split_pieces(g, p, k, unit_values, max_subclusters)) {
    // largest piece; ties by lowest contained unit (pieces are sorted)
    std::size_t largest = 0;
    for (std::size_t j = 1; j < pieces.size(); ++j)
      if (pieces[j].size() > pieces[largest].size()) largest = j;

    // destination per piece: adjacent cluster (other than k) with running
    // mean nearest to the piece's mean value; -1 when landlocked
    std::vector<int> dest(pieces.size(), -1);
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      double piece_mean = 0.0;
      for (int u : pieces[j]) piece_mean += unit_values[u];
      piece_mean /= static_cast<double>(pieces[j].size());

      std::set<int> adjacent;
      for (int u : pieces[j])
        for (int v : g.neighbors(u)) {
          const int lv = p.label_of(v);
          if (lv != k) adjacent.insert(lv);
        }
      double best = std::numeric_limits<double>::infinity();
      for (int cand : adjacent) {
        const double d = std::abs(cluster_means[cand] - piece_mean);
        if (d < best) {
          best = d;
          dest[j] = cand;
        }
      }
    }

    for (const bool keep_largest : {false, true}) {
      std::vector<std::vector<int>> clusters;
      std::vector<int> moved;
      for (int j = 0; j < p.n_clusters(); ++j)
        if (j != k) clusters.push_back(p.cluster(j));
      bool any_merge = false;
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        const bool merge_it = dest[j] >= 0 && !(keep_largest && j == largest);
        if (merge_it) {
          // cluster labels above k shift down by one after removing k
          const int idx = dest[j] < k ? dest[j] : dest[j] - 1;
          clusters[idx].insert(clusters[idx].end(), pieces[j].begin(), pieces[j].end());
          moved.insert(moved.end(), pieces[j].begin(), pieces[j].end());
          any_merge = true;
        } else {
          clusters.push_back(pieces[j]);
        }
      }
      if (!any_merge) continue;
      SpatialPartition result = SpatialPartition::from_clusters(g, std::move(clusters));
      if (!seen.insert(result.canonical_key()).second) continue;
      proposals.push_back(
          MoveProposal{MoveKind::split_and_merge, std::move(moved), std::move(result)});
    }
  }
  return proposals;
}

}  // namespace carclust
