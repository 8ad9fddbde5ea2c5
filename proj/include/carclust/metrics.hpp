#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "carclust/dataset.hpp"
#include "carclust/model.hpp"
#include "carclust/search.hpp"

namespace carclust {

// Per-unit ordinary least squares fits of the linear trend model. With the
// centered covariate the estimates reduce to the unit mean and the scaled
// cross product; residual variances use the T-2 divisor, so T >= 3.
struct UnitMLE {
  Eigen::VectorXd alpha_hat, beta_hat, sigma2_hat;
};
UnitMLE unit_mles(const Dataset& data);

// Model-averaged estimate over the unique particles of a set, weighted by
// the truncated (untempered) posterior: w ~ p(y, gamma). The per-particle
// conditional means and weights are retained for audit.
struct BMAEstimate {
  Eigen::VectorXd alpha, beta;
  std::vector<Eigen::VectorXd> per_particle_alpha, per_particle_beta;  // unique particles
  std::vector<double> weights;                                         // aligned, sums to 1
  std::vector<std::size_t> source_index;  // first occurrence in the original set
};
BMAEstimate bma_estimate(const ParticleSet& ps, const ModelEngine& engine);

// Untempered truncation weights aligned with the set (duplicates pooled onto
// their first occurrence; later copies get zero).
std::vector<double> bma_weights(const ParticleSet& ps);

// alpha_i + beta_i * x_star per unit
Eigen::VectorXd predict(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta, double x_star);

// Root mean square error over the concatenated (alpha, beta) vector.
double rmse(std::span<const double> est_alpha, std::span<const double> est_beta,
            std::span<const double> truth_alpha, std::span<const double> truth_beta);

// Hubert-Arabie adjusted Rand index. When the chance-corrected denominator
// vanishes (both partitions trivial) this returns 1 for identical partitions
// and 0 otherwise.
double adjusted_rand(const SpatialPartition& p1, const SpatialPartition& p2);

// Posterior mean adjusted Rand indices against the two true partitions,
// approximated over the particle set with the truncation weights.
std::pair<double, double> weighted_ari(const ParticleSet& ps, const SpatialPartition& truth_alpha,
                                       const SpatialPartition& truth_beta);

}  // namespace carclust
