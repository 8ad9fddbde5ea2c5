#include "carclust/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

namespace {
// Cap on cached blocks across both roles; the cache is cleared wholesale when
// exceeded so long searches cannot grow without bound.
constexpr std::size_t kMaxCachedBlocks = 1u << 17;
}  // namespace

void ModelConfig::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  for (double s : {a1, a2, b1, b2})
    if (!(s > 0.0)) throw InputError("variance scales a1, a2, b1, b2 must be positive");
  if (!(nu_sigma > 0.0) || !(lambda_sigma > 0.0))
    throw InputError("nu_sigma and lambda_sigma must be positive");
}

Eigen::MatrixXd car_precision_block(const Eigen::MatrixXd& laplacian, double rho, double a1,
                                    double a2) {
  const int n = static_cast<int>(laplacian.rows());
  Eigen::MatrixXd prec = (rho / a1) * laplacian;
  prec.diagonal().array() += (1.0 - rho) / a1;
  const double shave = (1.0 - rho) * (1.0 - rho) / (a1 * a1) /
                       ((1.0 - rho) * n / a1 + 1.0 / a2);
  prec.array() -= shave;
  return prec;
}

double grand_mean_posterior_from_sum(double block_sum, int n_k, double rho, double a1,
                                     double a2) {
  return (1.0 - rho) / a1 * block_sum / (1.0 / a2 + n_k * (1.0 - rho) / a1);
}

double grand_mean_posterior(std::span<const double> block, double rho, double a1, double a2) {
  double sum = 0.0;
  for (double v : block) sum += v;
  return grand_mean_posterior_from_sum(sum, static_cast<int>(block.size()), rho, a1, a2);
}

ModelEngine::ModelEngine(const Dataset& data, const AdjacencyGraph& graph,
                         const ModelConfig& cfg)
    : data_(data), graph_(graph), cfg_(cfg) {
  cfg_.validate();
  if (graph_.n_units() != data_.n_units())
    throw InputError("graph and dataset disagree on the number of units");
  const double nt = static_cast<double>(data_.n_units()) * data_.n_periods();
  const double nu = cfg_.nu_sigma;
  log_marginal_const_ = -0.5 * nt * std::log(2.0 * std::numbers::pi) +
                        std::lgamma(0.5 * (nt + nu)) - std::lgamma(0.5 * nu) +
                        0.5 * nu * std::log(0.5 * nu * cfg_.lambda_sigma);
}

ClusterBlock ModelEngine::compute_block(const std::vector<int>& cluster, bool level) const {
  const int nk = static_cast<int>(cluster.size());
  const double s1 = level ? cfg_.a1 : cfg_.b1;
  const double s2 = level ? cfg_.a2 : cfg_.b2;
  const double xtx = level ? static_cast<double>(data_.n_periods()) : data_.sum_x2();

  const Eigen::MatrixXd lap = graph_.induced_laplacian(cluster);
  const Eigen::MatrixXd prec = car_precision_block(lap, cfg_.rho, s1, s2);

  Eigen::VectorXd xty(nk);
  for (int i = 0; i < nk; ++i)
    xty(i) = level ? data_.n_periods() * data_.unit_means()(cluster[i])
                   : data_.xty()(cluster[i]);

  Eigen::MatrixXd shifted = prec;
  shifted.diagonal().array() += xtx;

  const Eigen::LLT<Eigen::MatrixXd> llt_prec(prec);
  const Eigen::LLT<Eigen::MatrixXd> llt_shifted(shifted);
  if (llt_prec.info() != Eigen::Success || llt_shifted.info() != Eigen::Success)
    throw NumericalError("cluster block factorization failed (cluster containing unit " +
                         std::to_string(cluster.front()) + ")");

  ClusterBlock blk;
  blk.cond_mean = llt_shifted.solve(xty);
  blk.quad = xty.dot(blk.cond_mean);
  blk.log_det_ratio = 2.0 * llt_prec.matrixL().toDenseMatrix().diagonal().array().log().sum() -
                      2.0 * llt_shifted.matrixL().toDenseMatrix().diagonal().array().log().sum();
  blk.grand_mean =
      grand_mean_posterior_from_sum(blk.cond_mean.sum(), nk, cfg_.rho, s1, s2);
  return blk;
}

const ClusterBlock& ModelEngine::block(const std::vector<int>& cluster, bool level) const {
  BlockCache& cache = level ? cache_level_ : cache_trend_;
  auto it = cache.find(cluster);
  if (it != cache.end()) return it->second;
  if (cache_size() >= kMaxCachedBlocks) clear_cache();
  return cache.emplace(cluster, compute_block(cluster, level)).first->second;
}

void ModelEngine::clear_cache() const {
  cache_level_.clear();
  cache_trend_.clear();
}

double ModelEngine::log_marginal(const Particle& p) const {
  if (p.alpha.n_units() != data_.n_units() || p.beta.n_units() != data_.n_units())
    throw InputError("particle does not match dataset unit count");

  double quad = data_.sum_y2();
  double log_det = 0.0;
  for (const auto& cluster : p.alpha.clusters()) {
    const ClusterBlock& blk = block(cluster, true);
    quad -= blk.quad;
    log_det += blk.log_det_ratio;
  }
  for (const auto& cluster : p.beta.clusters()) {
    const ClusterBlock& blk = block(cluster, false);
    quad -= blk.quad;
    log_det += blk.log_det_ratio;
  }

  const double nt = static_cast<double>(data_.n_units()) * data_.n_periods();
  const double nu = cfg_.nu_sigma;
  return log_marginal_const_ + 0.5 * log_det -
         0.5 * (nt + nu) * std::log(0.5 * (nu * cfg_.lambda_sigma + quad));
}

Eigen::VectorXd ModelEngine::unit_level_means(const SpatialPartition& part) const {
  Eigen::VectorXd means(data_.n_units());
  for (const auto& cluster : part.clusters()) {
    const ClusterBlock& blk = block(cluster, true);
    for (std::size_t i = 0; i < cluster.size(); ++i) means(cluster[i]) = blk.cond_mean(i);
  }
  return means;
}

Eigen::VectorXd ModelEngine::unit_trend_means(const SpatialPartition& part) const {
  Eigen::VectorXd means(data_.n_units());
  for (const auto& cluster : part.clusters()) {
    const ClusterBlock& blk = block(cluster, false);
    for (std::size_t i = 0; i < cluster.size(); ++i) means(cluster[i]) = blk.cond_mean(i);
  }
  return means;
}

std::vector<double> ModelEngine::cluster_level_means(const SpatialPartition& part) const {
  std::vector<double> means(part.n_clusters());
  for (int k = 0; k < part.n_clusters(); ++k) means[k] = block(part.cluster(k), true).grand_mean;
  return means;
}

std::vector<double> ModelEngine::cluster_trend_means(const SpatialPartition& part) const {
  std::vector<double> means(part.n_clusters());
  for (int k = 0; k < part.n_clusters(); ++k) means[k] = block(part.cluster(k), false).grand_mean;
  return means;
}

FitQuantities ModelEngine::posterior_means(const Particle& p) const {
  FitQuantities out;
  out.log_marginal = log_marginal(p);
  out.post_mean_alpha = unit_level_means(p.alpha);
  out.post_mean_beta = unit_trend_means(p.beta);
  out.cluster_means_alpha = cluster_level_means(p.alpha);
  out.cluster_means_beta = cluster_trend_means(p.beta);
  return out;
}

}  // namespace carclust
