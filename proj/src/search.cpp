#include "carclust/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "carclust/errors.hpp"
#include "carclust/hyper.hpp"

namespace carclust {

double particle_entropy(std::span<const ParticleKey> keys, std::span<const double> weights) {
  std::unordered_map<ParticleKey, double, ParticleKeyHash> pooled;
  for (std::size_t i = 0; i < keys.size(); ++i) pooled[keys[i]] += weights[i];
  double h = 0.0;
  for (const auto& [key, q] : pooled)
    if (q > 0.0) h -= q * std::log(q);
  return h;
}

std::vector<double> optimal_weights(std::span<const double> log_posts,
                                    std::span<const ParticleKey> keys, double lambda) {
  const std::size_t n = log_posts.size();
  if (n == 0) return {};
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");

  // group duplicates; first occurrence representative
  std::unordered_map<ParticleKey, std::size_t, ParticleKeyHash> group_of;
  std::vector<double> group_lp;
  std::vector<std::size_t> group_count;
  std::vector<std::size_t> member_group(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = group_of.try_emplace(keys[i], group_lp.size());
    if (fresh) {
      group_lp.push_back(log_posts[i]);
      group_count.push_back(0);
    }
    member_group[i] = it->second;
    ++group_count[it->second];
  }

  const double top = *std::max_element(group_lp.begin(), group_lp.end());
  std::vector<double> mass(group_lp.size());
  double total = 0.0;
  for (std::size_t u = 0; u < group_lp.size(); ++u) {
    mass[u] = std::exp((group_lp[u] - top) / lambda);
    total += mass[u];
  }
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t u = member_group[i];
    weights[i] = mass[u] / (total * static_cast<double>(group_count[u]));
  }
  return weights;
}

ParticleOptimizer::ParticleOptimizer(const ModelEngine& engine, PartitionPrior prior,
                                     SearchConfig cfg)
    : engine_(engine), prior_(prior), cfg_(cfg) {
  if (cfg_.n_particles < 1) throw InputError("need at least one particle");
  if (!(cfg_.lambda > 0.0)) throw InputError("lambda must be positive");
  if (!(cfg_.island_percentile > 0.0 && cfg_.island_percentile <= 0.5))
    throw InputError("island percentile must lie in (0, 0.5]");
}

double ParticleOptimizer::log_joint(const Particle& p) const {
  return engine_.log_marginal(p) + log_prior(p.alpha, prior_) + log_prior(p.beta, prior_);
}

double ParticleOptimizer::objective(const ParticleSet& ps) const {
  double weighted = 0.0;
  for (std::size_t i = 0; i < ps.particles.size(); ++i)
    if (ps.weights[i] > 0.0) weighted += ps.weights[i] * ps.log_post[i];
  std::vector<ParticleKey> keys;
  keys.reserve(ps.particles.size());
  for (const auto& p : ps.particles) keys.push_back(key_of(p));
  return weighted + cfg_.lambda * particle_entropy(keys, ps.weights);
}

std::vector<MoveProposal> ParticleOptimizer::candidate_moves(
    const SpatialPartition& part, std::span<const double> running_means,
    std::span<const double> cluster_means) const {
  const AdjacencyGraph& g = engine_.graph();
  std::vector<MoveProposal> out;
  std::unordered_set<std::size_t> seen;  // hashes of resulting assignments
  seen.insert(hash_ints(part.canonical_key()));
  auto push_unique = [&](MoveProposal&& mp) {
    if (seen.insert(hash_ints(mp.result.canonical_key())).second) out.push_back(std::move(mp));
  };

  // island moves for units in the value tails of their cluster
  std::vector<int> island_units;
  for (int k = 0; k < part.n_clusters(); ++k) {
    const auto& members = part.cluster(k);
    const int nk = static_cast<int>(members.size());
    if (nk < 2) continue;
    std::vector<int> by_value = members;
    std::sort(by_value.begin(), by_value.end(), [&](int a, int b) {
      if (running_means[a] != running_means[b]) return running_means[a] < running_means[b];
      return a < b;
    });
    const int tail = static_cast<int>(std::ceil(cfg_.island_percentile * nk));
    for (int i = 0; i < std::min(tail, nk); ++i) island_units.push_back(by_value[i]);
    for (int i = std::max(0, nk - tail); i < nk; ++i) island_units.push_back(by_value[i]);
  }
  std::sort(island_units.begin(), island_units.end());
  island_units.erase(std::unique(island_units.begin(), island_units.end()), island_units.end());
  for (int u : island_units)
    if (auto mp = apply_island(g, part, u)) push_unique(std::move(*mp));

  // all border moves
  for (int u = 0; u < part.n_units(); ++u) {
    const int own = part.label_of(u);
    std::set<int> dests;
    for (int v : g.neighbors(u)) {
      const int lv = part.label_of(v);
      if (lv != own) dests.insert(lv);
    }
    for (int dest : dests) push_unique(apply_border(g, part, u, dest));
  }

  // merge each cluster with its nearest-mean adjacent cluster only
  for (int k = 0; k < part.n_clusters(); ++k) {
    std::set<int> adjacent;
    for (int u : part.cluster(k))
      for (int v : g.neighbors(u)) {
        const int lv = part.label_of(v);
        if (lv != k) adjacent.insert(lv);
      }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int cand : adjacent) {
      const double d = std::abs(cluster_means[cand] - cluster_means[k]);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    if (best >= 0) push_unique(apply_merge(g, part, k, best));
  }

  for (int k = 0; k < part.n_clusters(); ++k)
    for (auto& mp : enumerate_splits(g, part, k, running_means, cfg_.max_subclusters))
      push_unique(std::move(mp));

  for (int k = 0; k < part.n_clusters(); ++k)
    for (auto& mp : enumerate_split_and_merge(g, part, k, running_means, cfg_.max_subclusters,
                                              cluster_means))
      push_unique(std::move(mp));

  return out;
}

std::vector<MoveProposal> ParticleOptimizer::island_fallback(const SpatialPartition& part) const {
  std::vector<MoveProposal> out;
  for (int u = 0; u < part.n_units(); ++u)
    if (auto mp = apply_island(engine_.graph(), part, u)) out.push_back(std::move(*mp));
  return out;
}

namespace {

// entropy terms split out so a candidate's effect on one particle's key can
// be rescored in O(L)
struct EntropyScratch {
  std::vector<std::pair<ParticleKey, double>> others;  // pooled keys excluding the mover
  double base_entropy = 0.0;                           // entropy including the mover
  double mover_weight = 0.0;

  double entropy_with(const ParticleKey& key) const {
    double h = 0.0;
    double pooled = mover_weight;
    for (const auto& [k, q] : others) {
      if (k == key) {
        pooled += q;
      } else if (q > 0.0) {
        h -= q * std::log(q);
      }
    }
    if (pooled > 0.0) h -= pooled * std::log(pooled);
    return h;
  }
};

EntropyScratch make_scratch(const std::vector<ParticleKey>& keys,
                            std::span<const double> weights, std::size_t mover) {
  EntropyScratch s;
  s.mover_weight = weights[mover];
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i == mover) continue;
    bool found = false;
    for (auto& [k, q] : s.others)
      if (k == keys[i]) {
        q += weights[i];
        found = true;
        break;
      }
    if (!found) s.others.emplace_back(keys[i], weights[i]);
  }
  s.base_entropy = particle_entropy(keys, weights);
  return s;
}

}  // namespace

ParticleOptimizer::PhaseScore ParticleOptimizer::best_candidate(
    const ParticleSet& ps, std::size_t index, Role role,
    const std::vector<MoveProposal>& candidates) const {
  std::vector<ParticleKey> keys;
  keys.reserve(ps.particles.size());
  for (const auto& p : ps.particles) keys.push_back(key_of(p));
  const EntropyScratch scratch = make_scratch(keys, ps.weights, index);

  const Particle& current = ps.particles[index];
  PhaseScore best;
  best.gain = cfg_.tolerance;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Particle moved =
        cfg_.equal_partitions
            ? Particle{candidates[c].result, candidates[c].result}
            : (role == Role::level ? Particle{candidates[c].result, current.beta}
                                   : Particle{current.alpha, candidates[c].result});
    const double lp = log_joint(moved);
    const double gain = ps.weights[index] * (lp - ps.log_post[index]) +
                        cfg_.lambda * (scratch.entropy_with(key_of(moved)) - scratch.base_entropy);
    if (gain > best.gain) {
      best.gain = gain;
      best.candidate = static_cast<int>(c);
    }
  }
  return best;
}

bool ParticleOptimizer::update_particle(ParticleSet& ps, std::size_t index) const {
  bool any = false;
  const std::vector<Role> phases =
      cfg_.equal_partitions ? std::vector<Role>{Role::level}
                            : std::vector<Role>{Role::level, Role::trend};

  for (Role role : phases) {
    Particle& particle = ps.particles[index];
    const SpatialPartition& part = role == Role::level ? particle.alpha : particle.beta;

    std::vector<MoveProposal> candidates;
    if (cfg_.equal_partitions) {
      // both roles' running estimates drive moves of the shared partition
      const Eigen::VectorXd level = engine_.unit_level_means(part);
      const Eigen::VectorXd trend = engine_.unit_trend_means(part);
      const std::vector<double> level_cl = engine_.cluster_level_means(part);
      const std::vector<double> trend_cl = engine_.cluster_trend_means(part);
      candidates = candidate_moves(part, {level.data(), static_cast<std::size_t>(level.size())},
                                   level_cl);
      auto more = candidate_moves(part, {trend.data(), static_cast<std::size_t>(trend.size())},
                                  trend_cl);
      std::set<std::vector<int>> seen;
      seen.insert(part.canonical_key());
      for (const auto& mp : candidates) seen.insert(mp.result.canonical_key());
      for (auto& mp : more)
        if (seen.insert(mp.result.canonical_key()).second) candidates.push_back(std::move(mp));
    } else if (role == Role::level) {
      const Eigen::VectorXd means = engine_.unit_level_means(part);
      candidates = candidate_moves(part, {means.data(), static_cast<std::size_t>(means.size())},
                                   engine_.cluster_level_means(part));
    } else {
      const Eigen::VectorXd means = engine_.unit_trend_means(part);
      candidates = candidate_moves(part, {means.data(), static_cast<std::size_t>(means.size())},
                                   engine_.cluster_trend_means(part));
    }

    PhaseScore best = best_candidate(ps, index, role, candidates);
    if (best.candidate < 0) {
      // nothing improved: try every island move before giving up
      candidates = island_fallback(part);
      best = best_candidate(ps, index, role, candidates);
    }
    if (best.candidate < 0) continue;

    const MoveProposal& chosen = candidates[best.candidate];
    if (cfg_.equal_partitions) {
      ps.particles[index] = Particle{chosen.result, chosen.result};
    } else if (role == Role::level) {
      ps.particles[index].alpha = chosen.result;
    } else {
      ps.particles[index].beta = chosen.result;
    }
    ps.log_post[index] = log_joint(ps.particles[index]);
    ++accepted_moves_;
    any = true;
    if (on_accept) on_accept(ps.particles[index], ps.log_post[index]);
  }
  return any;
}

bool ParticleOptimizer::sweep(ParticleSet& ps) const {
  bool improved = false;
  std::vector<ParticleKey> keys;
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    if (update_particle(ps, i)) improved = true;
    keys.clear();
    for (const auto& p : ps.particles) keys.push_back(key_of(p));
    ps.weights = optimal_weights(ps.log_post, keys, cfg_.lambda);
  }
  return improved;
}

ParticleSet ParticleOptimizer::initialize(Rng& rng, std::span<const Particle> extra_pool) const {
  const Dataset& data = engine_.data();
  const AdjacencyGraph& g = engine_.graph();
  const int n = data.n_units();
  if (n < 2) throw InputError("initialization needs at least two units");

  const Eigen::VectorXd mle_alpha = data.unit_means();
  const Eigen::VectorXd mle_beta = data.xty() / data.sum_x2();

  auto kmeans_partitions = [&](const Eigen::VectorXd& values) {
    std::vector<SpatialPartition> pool;
    std::set<std::vector<int>> seen;
    const int k_max = default_cluster_count(n);
    std::vector<int> all_units(n);
    std::iota(all_units.begin(), all_units.end(), 0);
    for (int k = 1; k <= k_max; ++k) {
      std::vector<double> vals(values.data(), values.data() + n);
      const std::vector<int> assign = kmeans_1d(vals, k);
      std::vector<std::vector<int>> groups(k);
      if (assign.empty()) {
        groups.assign(1, all_units);  // degenerate values: a single group
      } else {
        for (int u = 0; u < n; ++u) groups[assign[u]].push_back(u);
      }
      std::vector<std::vector<int>> clusters;
      for (const auto& grp : groups) {
        if (grp.empty()) continue;
        for (auto& comp : g.connected_components(grp)) clusters.push_back(std::move(comp));
      }
      SpatialPartition part = SpatialPartition::from_clusters(g, std::move(clusters));
      if (seen.insert(part.canonical_key()).second) pool.push_back(std::move(part));
    }
    return pool;
  };

  const std::vector<SpatialPartition> pool_alpha = kmeans_partitions(mle_alpha);
  const std::vector<SpatialPartition> pool_beta = kmeans_partitions(mle_beta);

  std::vector<Particle> pool;
  if (cfg_.equal_partitions) {
    std::set<std::vector<int>> seen;
    for (const auto* src : {&pool_alpha, &pool_beta})
      for (const auto& part : *src)
        if (seen.insert(part.canonical_key()).second) pool.push_back(Particle{part, part});
  } else {
    for (const auto& pa : pool_alpha)
      for (const auto& pb : pool_beta) pool.push_back(Particle{pa, pb});
  }
  for (const auto& extra : extra_pool) {
    if (cfg_.equal_partitions && !(extra.alpha == extra.beta))
      throw InputError("extra pool particle violates the equal-partitions constraint");
    pool.push_back(extra);
  }

  // dedup, keeping first occurrence
  {
    std::unordered_set<ParticleKey, ParticleKeyHash> seen;
    std::vector<Particle> unique;
    for (auto& p : pool)
      if (seen.insert(key_of(p)).second) unique.push_back(std::move(p));
    pool = std::move(unique);
  }

  std::vector<double> lp(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) lp[i] = log_joint(pool[i]);
  const double top = *std::max_element(lp.begin(), lp.end());
  std::vector<double> prob(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) prob[i] = std::exp(lp[i] - top);

  ParticleSet ps;
  for (int l = 0; l < cfg_.n_particles; ++l) {
    const std::size_t pick = rng.categorical(prob);
    ps.particles.push_back(pool[pick]);
    ps.log_post.push_back(lp[pick]);
  }
  std::vector<ParticleKey> keys;
  for (const auto& p : ps.particles) keys.push_back(key_of(p));
  ps.weights = optimal_weights(ps.log_post, keys, cfg_.lambda);
  return ps;
}

SweepRecord ParticleOptimizer::record(int sweep, const ParticleSet& ps) const {
  SweepRecord rec;
  rec.sweep = sweep;
  rec.objective = objective(ps);
  rec.log_post = ps.log_post;
  rec.weights = ps.weights;
  for (const auto& p : ps.particles) {
    rec.k_alpha.push_back(p.alpha.n_clusters());
    rec.k_beta.push_back(p.beta.n_clusters());
  }
  return rec;
}

SearchResult ParticleOptimizer::run(std::span<const Particle> extra_pool) const {
  Rng rng(cfg_.seed);
  accepted_moves_ = 0;

  SearchResult result;
  ParticleSet ps = initialize(rng, extra_pool);
  result.trace.push_back(record(0, ps));

  for (int s = 1; s <= cfg_.max_sweeps; ++s) {
    const bool improved = sweep(ps);
    result.trace.push_back(record(s, ps));
    if (!improved) {
      result.converged = true;
      break;
    }
  }

  // order by weight, heaviest first; stable so equal weights keep draw order
  std::vector<std::size_t> order(ps.particles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ps.weights[a] > ps.weights[b]; });
  ParticleSet sorted;
  for (std::size_t i : order) {
    sorted.particles.push_back(std::move(ps.particles[i]));
    sorted.weights.push_back(ps.weights[i]);
    sorted.log_post.push_back(ps.log_post[i]);
  }
  result.set = std::move(sorted);
  result.accepted_moves = accepted_moves_;
  return result;
}

}  // namespace carclust
