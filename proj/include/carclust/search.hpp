#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "carclust/model.hpp"
#include "carclust/moves.hpp"
#include "carclust/priors.hpp"
#include "carclust/rng.hpp"

namespace carclust {

struct SearchConfig {
  int n_particles = 10;      // L
  double lambda = 100.0;     // inverse temperature of the entropy penalty
  int max_sweeps = 100;
  double tolerance = 1e-8;   // minimum objective gain to accept a move
  std::uint64_t seed = 0;
  bool equal_partitions = false;   // constrain the two partitions to agree
  double island_percentile = 0.05; // tail share eligible for island moves
  int max_subclusters = 5;         // cap on pieces per split
};

// L particles with simplex weights and their cached unnormalized
// log-posteriors log p(y, gamma_l).
struct ParticleSet {
  std::vector<Particle> particles;
  std::vector<double> weights;
  std::vector<double> log_post;
};

struct SweepRecord {
  int sweep = 0;
  double objective = 0.0;
  std::vector<double> log_post, weights;
  std::vector<int> k_alpha, k_beta;
};

struct SearchResult {
  ParticleSet set;
  std::vector<SweepRecord> trace;
  int accepted_moves = 0;
  bool converged = false;
};

// Entropy of the distribution the weighted set induces: weights of identical
// particles are pooled before -sum q log q, so a fully collapsed set has
// zero entropy.
double particle_entropy(std::span<const ParticleKey> keys, std::span<const double> weights);

// Optimal weights for a fixed particle set: w_l proportional to
// exp((log_post_l - max)/lambda) over distinct particles, with duplicates
// receiving equal shares of their aggregate.
std::vector<double> optimal_weights(std::span<const double> log_posts,
                                    std::span<const ParticleKey> keys, double lambda);

enum class Role { level, trend };

// Coordinate-ascent optimizer of the entropy-penalized objective
//   sum_l w_l log p(y, gamma_l) + lambda H(Gamma, w)
// over particle sets, using greedy best-move updates per partition with the
// merge/island/split candidate heuristics.
class ParticleOptimizer {
 public:
  ParticleOptimizer(const ModelEngine& engine, PartitionPrior prior, SearchConfig cfg);

  double log_joint(const Particle& p) const;  // log p(y, gamma), unnormalized
  double objective(const ParticleSet& ps) const;

  // Heuristic candidate list for one partition of a particle, deduplicated:
  // the nearest-mean merge per cluster, tail-unit islands, all border moves,
  // and the split / split-and-merge proposals.
  std::vector<MoveProposal> candidate_moves(const SpatialPartition& part,
                                            std::span<const double> running_means,
                                            std::span<const double> cluster_means) const;

  // Candidate pool from 1-D k-means over the per-unit least squares
  // estimates for each cluster count up to floor(log N), pairs drawn with
  // replacement proportionally to their posterior mass. `extra_pool` joins
  // the pool (used to seed with a previously found optimum).
  ParticleSet initialize(Rng& rng, std::span<const Particle> extra_pool = {}) const;

  // One pass over all particles; updates each particle's partitions by the
  // single best improving candidate (falling back to trying every island
  // move before giving up on a partition) and refreshes the weights after
  // each particle. Returns whether any move was accepted.
  bool sweep(ParticleSet& ps) const;

  SearchResult run(std::span<const Particle> extra_pool = {}) const;

  const SearchConfig& search_config() const { return cfg_; }
  const ModelEngine& engine() const { return engine_; }

  // Test hook, called after every accepted move with the updated particle
  // and its cached log joint.
  std::function<void(const Particle&, double)> on_accept;

 private:
  const ModelEngine& engine_;
  PartitionPrior prior_;
  SearchConfig cfg_;
  mutable int accepted_moves_ = 0;

  struct PhaseScore {
    int candidate = -1;
    double gain = 0.0;
  };
  PhaseScore best_candidate(const ParticleSet& ps, std::size_t index, Role role,
                            const std::vector<MoveProposal>& candidates) const;
  std::vector<MoveProposal> island_fallback(const SpatialPartition& part) const;
  bool update_particle(ParticleSet& ps, std::size_t index) const;
  SweepRecord record(int sweep, const ParticleSet& ps) const;
};

}  // namespace carclust
