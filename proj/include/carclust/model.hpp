#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "carclust/dataset.hpp"
#include "carclust/graph.hpp"
#include "carclust/partition.hpp"

namespace carclust {

// Hyperparameters of the CAR-within-clusters model.
struct ModelConfig {
  double rho = 0.9;  // within-cluster spatial autocorrelation, in [0, 1)
  double eta = 1.0;  // partition prior concentration
  double a1 = 1.0;   // within-cluster variance scale, mean levels
  double a2 = 1.0;   // grand-mean variance scale, mean levels
  double b1 = 1.0;   // within-cluster variance scale, time trends
  double b2 = 1.0;   // grand-mean variance scale, time trends
  double nu_sigma = 3.0;
  double lambda_sigma = 1.0;

  void validate() const;  // throws InputError
};

// Marginal prior precision of one cluster's parameter block with the grand
// mean integrated out, computed by the rank-one Woodbury correction of the
// CAR precision:
//   a1^-1 (rho W* + (1-rho) I) - [a1^-2 (1-rho)^2 / (a1^-1 n (1-rho) + a2^-1)] 11'
Eigen::MatrixXd car_precision_block(const Eigen::MatrixXd& laplacian, double rho, double a1,
                                    double a2);

// Conditional posterior mean of a cluster-level grand mean given the
// cluster's parameter block:
//   a1^-1 (1-rho) 1'theta / (a2^-1 + a1^-1 n (1-rho))
double grand_mean_posterior(std::span<const double> block, double rho, double a1, double a2);
double grand_mean_posterior_from_sum(double block_sum, int n_k, double rho, double a1, double a2);

// Everything the likelihood and conditional means need from one cluster of
// one role. Cached per cluster content, so move-driven searches only pay for
// the clusters a move touches.
struct ClusterBlock {
  double quad = 0.0;            // (X'Y)_k' (P_k + c I)^-1 (X'Y)_k
  double log_det_ratio = 0.0;   // log det P_k - log det (P_k + c I)
  Eigen::VectorXd cond_mean;    // (P_k + c I)^-1 (X'Y)_k, in cluster order
  double grand_mean = 0.0;      // conditional posterior mean of the cluster mean
};

struct FitQuantities {
  double log_marginal = 0.0;
  Eigen::VectorXd post_mean_alpha, post_mean_beta;
  std::vector<double> cluster_means_alpha, cluster_means_beta;
};

// Closed-form model computations for a fixed (dataset, graph, config):
// log marginal likelihood, conditional posterior means, and grand cluster
// means, all assembled blockwise per cluster. Block results are cached by
// cluster content; the cache is an amortization detail and never changes
// values. Not safe for concurrent use; confine an engine to one worker.
class ModelEngine {
 public:
  ModelEngine(const Dataset& data, const AdjacencyGraph& graph, const ModelConfig& cfg);

  double log_marginal(const Particle& p) const;
  FitQuantities posterior_means(const Particle& p) const;

  // Per-unit conditional posterior means for one role, assembled from blocks.
  Eigen::VectorXd unit_level_means(const SpatialPartition& part) const;
  Eigen::VectorXd unit_trend_means(const SpatialPartition& part) const;
  // Per-cluster grand means, indexed by cluster label of `part`.
  std::vector<double> cluster_level_means(const SpatialPartition& part) const;
  std::vector<double> cluster_trend_means(const SpatialPartition& part) const;

  const ModelConfig& config() const { return cfg_; }
  const Dataset& data() const { return data_; }
  const AdjacencyGraph& graph() const { return graph_; }

  std::size_t cache_size() const { return cache_level_.size() + cache_trend_.size(); }
  void clear_cache() const;

 private:
  const Dataset& data_;
  const AdjacencyGraph& graph_;
  ModelConfig cfg_;
  double log_marginal_const_ = 0.0;  // partition-independent terms

  struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const { return hash_ints(v); }
  };
  using BlockCache = std::unordered_map<std::vector<int>, ClusterBlock, VecHash>;
  mutable BlockCache cache_level_, cache_trend_;

  const ClusterBlock& block(const std::vector<int>& cluster, bool level) const;
  ClusterBlock compute_block(const std::vector<int>& cluster, bool level) const;
};

}  // namespace carclust
