#include "carclust/priors.hpp"

#include <cmath>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

const char* to_string(PriorKind kind) {
  return kind == PriorKind::ewens_pitman ? "ep" : "uniform";
}

PriorKind prior_kind_from_string(const std::string& name) {
  if (name == "ep" || name == "ewens_pitman") return PriorKind::ewens_pitman;
  if (name == "uniform") return PriorKind::uniform;
  throw InputError("unknown prior kind: " + name);
}

double log_prior(const SpatialPartition& p, const PartitionPrior& prior) {
  if (prior.kind == PriorKind::uniform) return 0.0;
  if (!(prior.eta > 0.0)) throw InputError("eta must be positive");
  double lp = p.n_clusters() * std::log(prior.eta);
  for (const auto& cluster : p.clusters())
    lp += std::lgamma(static_cast<double>(cluster.size()));  // log((n_k - 1)!)
  return lp;
}

}  // namespace carclust
