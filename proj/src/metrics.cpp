#include "carclust/metrics.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "carclust/errors.hpp"

namespace carclust {

UnitMLE unit_mles(const Dataset& data) {
  const int n = data.n_units();
  const int t = data.n_periods();
  if (t < 3) throw InputError("per-unit residual variances need at least three periods");

  UnitMLE out;
  out.alpha_hat = data.unit_means();
  out.beta_hat = data.xty() / data.sum_x2();
  out.sigma2_hat.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd resid = data.y().row(i).transpose() -
                                  Eigen::VectorXd::Constant(t, out.alpha_hat(i)) -
                                  out.beta_hat(i) * data.x();
    out.sigma2_hat(i) = resid.squaredNorm() / (t - 2);
  }
  return out;
}

std::vector<double> bma_weights(const ParticleSet& ps) {
  const std::size_t n = ps.particles.size();
  std::vector<double> weights(n, 0.0);
  if (n == 0) return weights;

  std::unordered_map<ParticleKey, std::size_t, ParticleKeyHash> first;
  std::vector<std::size_t> uniques;
  for (std::size_t i = 0; i < n; ++i)
    if (first.try_emplace(key_of(ps.particles[i]), i).second) uniques.push_back(i);

  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i : uniques) top = std::max(top, ps.log_post[i]);
  double total = 0.0;
  for (std::size_t i : uniques) {
    weights[i] = std::exp(ps.log_post[i] - top);
    total += weights[i];
  }
  for (std::size_t i : uniques) weights[i] /= total;
  return weights;
}

BMAEstimate bma_estimate(const ParticleSet& ps, const ModelEngine& engine) {
  if (ps.particles.empty()) throw InputError("empty particle set");
  const std::vector<double> weights = bma_weights(ps);
  const int n = engine.data().n_units();

  BMAEstimate out;
  out.alpha = Eigen::VectorXd::Zero(n);
  out.beta = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    if (weights[i] == 0.0) continue;  // duplicate copy, pooled onto the first
    const Eigen::VectorXd a = engine.unit_level_means(ps.particles[i].alpha);
    const Eigen::VectorXd b = engine.unit_trend_means(ps.particles[i].beta);
    out.alpha += weights[i] * a;
    out.beta += weights[i] * b;
    out.per_particle_alpha.push_back(a);
    out.per_particle_beta.push_back(b);
    out.weights.push_back(weights[i]);
    out.source_index.push_back(i);
  }
  return out;
}

Eigen::VectorXd predict(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                        double x_star) {
  return alpha + x_star * beta;
}

double rmse(std::span<const double> est_alpha, std::span<const double> est_beta,
            std::span<const double> truth_alpha, std::span<const double> truth_beta) {
  if (est_alpha.size() != truth_alpha.size() || est_beta.size() != truth_beta.size())
    throw InputError("rmse: estimate and truth lengths differ");
  double ss = 0.0;
  for (std::size_t i = 0; i < est_alpha.size(); ++i) {
    const double d = est_alpha[i] - truth_alpha[i];
    ss += d * d;
  }
  for (std::size_t i = 0; i < est_beta.size(); ++i) {
    const double d = est_beta[i] - truth_beta[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(est_alpha.size() + est_beta.size()));
}

double adjusted_rand(const SpatialPartition& p1, const SpatialPartition& p2) {
  if (p1.n_units() != p2.n_units()) throw InputError("adjusted Rand: unit universes differ");
  const int n = p1.n_units();
  const int k1 = p1.n_clusters();
  const int k2 = p2.n_clusters();

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(k1, k2);
  for (int u = 0; u < n; ++u) table(p1.label_of(u), p2.label_of(u)) += 1.0;

  auto comb2 = [](double m) { return 0.5 * m * (m - 1.0); };
  double sum_cells = 0.0;
  for (int i = 0; i < k1; ++i)
    for (int j = 0; j < k2; ++j) sum_cells += comb2(table(i, j));
  double sum_rows = 0.0, sum_cols = 0.0;
  for (int i = 0; i < k1; ++i) sum_rows += comb2(table.row(i).sum());
  for (int j = 0; j < k2; ++j) sum_cols += comb2(table.col(j).sum());

  const double expected = sum_rows * sum_cols / comb2(static_cast<double>(n));
  const double denom = 0.5 * (sum_rows + sum_cols) - expected;
  if (denom == 0.0) return p1.canonical_key() == p2.canonical_key() ? 1.0 : 0.0;
  return (sum_cells - expected) / denom;
}

std::pair<double, double> weighted_ari(const ParticleSet& ps,
                                       const SpatialPartition& truth_alpha,
                                       const SpatialPartition& truth_beta) {
  const std::vector<double> weights = bma_weights(ps);
  double ari_a = 0.0, ari_b = 0.0;
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    if (weights[i] == 0.0) continue;
    ari_a += weights[i] * adjusted_rand(ps.particles[i].alpha, truth_alpha);
    ari_b += weights[i] * adjusted_rand(ps.particles[i].beta, truth_beta);
  }
  return {ari_a, ari_b};
}

}  // namespace carclust
