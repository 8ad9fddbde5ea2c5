#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "carclust/dataset.hpp"
#include "carclust/graph.hpp"
#include "carclust/partition.hpp"

namespace carclust {

// Inverse hyperbolic sine transform of a count density:
//   asinh(count / area) - log 2.
// Log-like for large densities but defined at zero.
double ihs_transform(double count, double area);

// Nearest integer to sinh(y + log 2), clamped at zero; ties round half away
// from zero. Exact inverse of ihs_transform on integers with unit area.
long long counts_from_transformed(double y);

enum class Dgp { gaussian, poisson };
const char* to_string(Dgp dgp);

// Settings for the lattice experiments. The defaults reproduce the
// high-separation configuration on a 20 x 20 grid.
struct SyntheticSpec {
  int grid_side = 20;
  double delta_alpha = 2.0;   // separation between level cluster means
  double delta_beta = 1.0;    // separation between trend cluster means
  int n_periods = 12;
  double sigma2 = 0.0625;     // residual variance (sd 0.25)
  double car_rho = 0.95;      // generator CAR autocorrelation
  double car_scale = 0.125;   // generator within-cluster scale (a1 = b1)
  double car_sd = 0.25;       // generator CAR standard deviation
  double alpha_shift = 3.5;   // common shift of the level cluster means
  Dgp dgp = Dgp::gaussian;
  std::uint64_t seed = 0;
};

// The fixed true partitions plus the per-cluster mean offsets used to build
// the cluster means (level offsets in {-1,-.5,0,.5,1} scaled by delta_alpha
// and shifted; trend offsets in {-1,0,1} scaled by delta_beta).
struct TruePartitionLayout {
  SpatialPartition alpha;
  SpatialPartition beta;
  std::vector<double> alpha_offsets;  // indexed by cluster label
  std::vector<double> beta_offsets;
};

// For side 20 the canonical layout: level clusters of sizes
// 237, 76, 39, 24, 16, 4, 1, 1, 1, 1 and trend clusters of sizes
// 188, 100, 100, 12. Other sides get proportionally scaled sizes carved
// along a boustrophedon path so every cluster stays connected.
TruePartitionLayout default_true_partitions(const AdjacencyGraph& grid_graph, int side);

struct SyntheticTruth {
  Eigen::VectorXd alpha, beta;
  TruePartitionLayout layout;
  Eigen::VectorXd y_next;   // one-step-ahead holdout outcome per unit
  double x_star = 0.0;      // covariate position of the holdout period
  Eigen::MatrixXd counts;   // Poisson mode only; empty otherwise
};

// Seeded draw of a full synthetic dataset: per-cluster CAR draws of the
// parameters around the layout's cluster means, then Gaussian outcomes or
// Poisson counts pushed through the transform.
std::pair<Dataset, SyntheticTruth> generate(const SyntheticSpec& spec,
                                            const AdjacencyGraph& graph);

}  // namespace carclust
