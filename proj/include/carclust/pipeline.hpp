#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "carclust/hyper.hpp"
#include "carclust/metrics.hpp"
#include "carclust/model.hpp"
#include "carclust/priors.hpp"
#include "carclust/search.hpp"

namespace carclust {

// Everything a fit run needs beyond the data. Serializable, so a run can be
// reproduced exactly from its resolved configuration.
struct FitOptions {
  int n_particles = 10;
  double lambda = 100.0;
  double rho = 0.9;
  double eta = 1.0;
  PriorKind prior = PriorKind::ewens_pitman;
  bool equal_partitions = false;
  std::uint64_t seed = 0;
  bool skip_eb = false;
  int max_sweeps = 100;
  int k_heuristic = 0;  // 0 means floor(log N)
  double island_percentile = 0.05;
  int max_subclusters = 5;
  // explicit hyperparameter overrides; unset values come from the heuristics
  std::optional<double> a1, a2, b1, b2, nu_sigma, lambda_sigma;

  std::string to_json() const;
  static FitOptions from_json(const std::string& text);
};

struct FitResult {
  ModelConfig config;            // resolved hyperparameters used for the full run
  HyperHeuristicReport hyper;
  SearchResult search;
  BMAEstimate bma;
  Particle map_particle;         // optimum of the preliminary single-particle run
  double map_log_post = 0.0;
  std::unique_ptr<ModelEngine> engine;  // bound to (data, graph, config)
};

// Full fitting flow: heuristic hyperparameters from the per-unit least
// squares fits, a preliminary single-particle run to find the MAP, an
// empirical Bayes refinement of (a1, b1) at the MAP, then the full particle
// run seeded with the MAP.
FitResult fit_pipeline(const Dataset& data, const AdjacencyGraph& graph,
                       const FitOptions& options);

}  // namespace carclust
