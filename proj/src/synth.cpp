#include "carclust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "carclust/errors.hpp"
#include "carclust/rng.hpp"

namespace carclust {

double ihs_transform(double count, double area) {
  if (!(area > 0.0)) throw InputError("area must be positive");
  if (count < 0.0) throw InputError("count must be non-negative");
  return std::asinh(count / area) - std::log(2.0);
}

long long counts_from_transformed(double y) {
  const double c = std::sinh(y + std::log(2.0));
  return std::max<long long>(0, std::llround(c));
}

const char* to_string(Dgp dgp) { return dgp == Dgp::gaussian ? "gaussian" : "poisson"; }

namespace {

// Boustrophedon enumeration of the grid; any contiguous segment of it is
// connected, which makes carving clusters with exact sizes easy.
std::vector<int> snake_order(int side) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side; ++r) {
    if (r % 2 == 0)
      for (int c = 0; c < side; ++c) order.push_back(r * side + c);
    else
      for (int c = side - 1; c >= 0; --c) order.push_back(r * side + c);
  }
  return order;
}

// Scale a size multiset to a new total, keeping every entry at least one and
// fixing rounding on the largest entry.
std::vector<int> scale_sizes(const std::vector<int>& sizes, int total) {
  const double base = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), 0));
  std::vector<int> scaled(sizes.size());
  int assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    scaled[i] = std::max(1, static_cast<int>(std::floor(sizes[i] / base * total)));
    assigned += scaled[i];
  }
  const std::size_t largest =
      std::distance(scaled.begin(), std::max_element(scaled.begin(), scaled.end()));
  scaled[largest] += total - assigned;
  if (scaled[largest] < 1) throw InputError("grid too small for the true partition layout");
  return scaled;
}

std::vector<std::vector<int>> carve_segments(const std::vector<int>& order,
                                             const std::vector<int>& sizes) {
  std::vector<std::vector<int>> clusters;
  std::size_t pos = 0;
  for (int size : sizes) {
    std::vector<int> cl(order.begin() + pos, order.begin() + pos + size);
    pos += size;
    clusters.push_back(std::move(cl));
  }
  return clusters;
}

// map per-segment offsets onto canonical cluster labels
std::vector<double> offsets_by_label(const SpatialPartition& part,
                                     const std::vector<std::vector<int>>& segments,
                                     const std::vector<double>& segment_offsets) {
  std::vector<double> out(part.n_clusters());
  for (std::size_t s = 0; s < segments.size(); ++s)
    out[part.label_of(segments[s].front())] = segment_offsets[s];
  return out;
}

}  // namespace

TruePartitionLayout default_true_partitions(const AdjacencyGraph& grid_graph, int side) {
  if (side < 4) throw InputError("true partition layout needs a grid side of at least 4");
  if (grid_graph.n_units() != side * side)
    throw InputError("graph does not match the requested grid side");
  const std::vector<int> order = snake_order(side);

  // level partition: snake segments with the canonical size multiset
  const std::vector<int> level_sizes_20 = {16, 4, 76, 1, 39, 1, 237, 1, 24, 1};
  const std::vector<double> level_offsets = {-1.0, -0.5, 0.0, 1.0, -1.0,
                                             0.5,  0.0,  -0.5, 0.5, 1.0};
  const std::vector<int> level_sizes =
      side == 20 ? level_sizes_20 : scale_sizes(level_sizes_20, side * side);
  const std::vector<std::vector<int>> level_segments = carve_segments(order, level_sizes);

  TruePartitionLayout layout;
  layout.alpha = SpatialPartition::from_clusters(grid_graph, level_segments);
  layout.alpha_offsets = offsets_by_label(layout.alpha, level_segments, level_offsets);

  // trend partition; for side 20 three horizontal bands with a rectangular
  // inclusion inside the bottom band, sizes 100, 100, 188, 12
  const std::vector<double> trend_offsets = {1.0, 0.0, -1.0, 1.0};
  std::vector<std::vector<int>> trend_segments;
  if (side == 20) {
    std::vector<int> band1, band2, band3, hole;
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) {
        const int u = r * 20 + c;
        if (r < 5) {
          band1.push_back(u);
        } else if (r < 10) {
          band2.push_back(u);
        } else if (r >= 16 && r <= 18 && c >= 8 && c <= 11) {
          hole.push_back(u);
        } else {
          band3.push_back(u);
        }
      }
    trend_segments = {band1, band2, band3, hole};
  } else {
    const std::vector<int> trend_sizes = scale_sizes({100, 100, 188, 12}, side * side);
    trend_segments = carve_segments(order, trend_sizes);
  }
  layout.beta = SpatialPartition::from_clusters(grid_graph, trend_segments);
  layout.beta_offsets = offsets_by_label(layout.beta, trend_segments, trend_offsets);
  return layout;
}

std::pair<Dataset, SyntheticTruth> generate(const SyntheticSpec& spec,
                                            const AdjacencyGraph& graph) {
  if (spec.delta_alpha < 0.0 || spec.delta_beta < 0.0)
    throw InputError("cluster separations must be non-negative");
  if (spec.n_periods < 2) throw InputError("need at least two periods");
  if (!(spec.car_rho >= 0.0 && spec.car_rho < 1.0)) throw InputError("car_rho must be in [0, 1)");
  if (spec.sigma2 < 0.0) throw InputError("sigma2 must be non-negative");

  const int n = graph.n_units();
  const int t = spec.n_periods;
  Rng rng(spec.seed);

  SyntheticTruth truth;
  truth.layout = default_true_partitions(graph, spec.grid_side);

  // cluster-wise CAR draws around the cluster means
  const double car_variance = spec.car_scale * spec.car_sd * spec.car_sd;
  auto draw_parameters = [&](const SpatialPartition& part, const std::vector<double>& offsets,
                             double shift, double delta) {
    Eigen::VectorXd values(n);
    for (int k = 0; k < part.n_clusters(); ++k) {
      const auto& cluster = part.cluster(k);
      const int nk = static_cast<int>(cluster.size());
      const double mean = shift + offsets[k] * delta;
      Eigen::VectorXd z(nk);
      for (int i = 0; i < nk; ++i) z(i) = rng.normal();
      Eigen::VectorXd draw = Eigen::VectorXd::Constant(nk, mean);
      if (car_variance > 0.0) {
        Eigen::MatrixXd prec = spec.car_rho * graph.induced_laplacian(cluster);
        prec.diagonal().array() += 1.0 - spec.car_rho;
        const Eigen::MatrixXd cov = car_variance * prec.inverse();
        const Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
          throw NumericalError("CAR covariance factorization failed in the generator");
        draw += llt.matrixL() * z;
      }
      for (int i = 0; i < nk; ++i) values(cluster[i]) = draw(i);
    }
    return values;
  };

  truth.alpha = draw_parameters(truth.layout.alpha, truth.layout.alpha_offsets, spec.alpha_shift,
                                spec.delta_alpha);
  truth.beta =
      draw_parameters(truth.layout.beta, truth.layout.beta_offsets, 0.0, spec.delta_beta);

  std::vector<double> periods(t);
  std::iota(periods.begin(), periods.end(), 0.0);
  const Eigen::VectorXd x = standardize_periods(periods);
  truth.x_star = standardized_position(periods, static_cast<double>(t));

  Eigen::MatrixXd y(n, t);
  truth.y_next.resize(n);
  const double sd = std::sqrt(spec.sigma2);

  if (spec.dgp == Dgp::gaussian) {
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < t; ++s)
        y(i, s) = truth.alpha(i) + truth.beta(i) * x(s) + sd * rng.normal();
    for (int i = 0; i < n; ++i)
      truth.y_next(i) = truth.alpha(i) + truth.beta(i) * truth.x_star + sd * rng.normal();
  } else {
    truth.counts.resize(n, t);
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < t; ++s) {
        const double mean = std::exp(truth.alpha(i) + truth.beta(i) * x(s));
        truth.counts(i, s) = static_cast<double>(rng.poisson(mean));
        y(i, s) = ihs_transform(truth.counts(i, s), 1.0);
      }
    for (int i = 0; i < n; ++i) {
      const double mean = std::exp(truth.alpha(i) + truth.beta(i) * truth.x_star);
      truth.y_next(i) = ihs_transform(static_cast<double>(rng.poisson(mean)), 1.0);
    }
  }

  return {Dataset(std::move(y), x), std::move(truth)};
}

}  // namespace carclust
