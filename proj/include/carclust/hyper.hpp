#pragma once

#include <span>
#include <string>
#include <vector>

#include "carclust/model.hpp"

namespace carclust {

struct SigmaPrior {
  double nu_sigma = 0.0;
  double lambda_sigma = 0.0;
};

// Moment-matched inverse-gamma hyperparameters from the per-unit residual
// variances: nu = 2 m^2 / v + 4, lambda = m (1 - 2 / nu) with (m, v) the
// empirical mean and variance of the inputs. Throws on degenerate (v = 0)
// input, suggesting a manual choice instead.
SigmaPrior sigma_prior_from_unit_fits(std::span<const double> sigma2_hats);

struct VarianceScales {
  double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
  bool a2_floored = false, b2_floored = false;
};

// Data-dependent within/between-cluster variance scales from the per-unit
// least squares estimates:
//   a1 = range(mle)^2 / (4 (K+1)^2 sigma2 / (1-rho))
//   a2 = max|mle|^2 / (4 sigma2) - a1 / (1-rho)     (floored at 1e-6)
// and the analogous b's from the trend estimates.
VarianceScales variance_scales_heuristic(std::span<const double> mle_alpha,
                                         std::span<const double> mle_beta, double sigma2_hat,
                                         double rho, int K);

// floor(log N), at least 1
int default_cluster_count(int n_units);

struct EmpiricalBayesResult {
  double a1 = 0.0, b1 = 0.0;
  double objective = 0.0;        // log marginal likelihood at the optimum
  double objective_start = 0.0;  // at the starting scales
  int evaluations = 0;
};

// Maximize the log marginal likelihood over (a1, b1) at a fixed particle,
// holding everything else in `start` fixed. Derivative-free Nelder-Mead in
// log coordinates, clamped to [1e-6, 1e3]^2, at most `max_evaluations`
// likelihood evaluations. Never returns a point below the start.
EmpiricalBayesResult empirical_bayes_scales(const Dataset& data, const AdjacencyGraph& graph,
                                            const Particle& map_particle,
                                            const ModelConfig& start,
                                            int max_evaluations = 200);

// Provenance record of the hyperparameter choices for one run.
struct HyperHeuristicReport {
  std::vector<double> sigma2_hat;
  double m = 0.0, v = 0.0;
  double nu_sigma = 0.0, lambda_sigma = 0.0;
  int K = 0;
  VarianceScales heuristic;
  double a1_final = 0.0, b1_final = 0.0;  // post empirical Bayes
  bool eb_skipped = false;
  std::string to_json() const;
};

}  // namespace carclust
