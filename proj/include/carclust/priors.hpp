#pragma once

#include "carclust/partition.hpp"

namespace carclust {

enum class PriorKind { ewens_pitman, uniform };
const char* to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& name);

struct PartitionPrior {
  PriorKind kind = PriorKind::ewens_pitman;
  double eta = 1.0;  // Ewens-Pitman concentration; ignored for uniform
};

// Unnormalized log mass of the partition prior truncated to spatial
// partitions. Connectivity is already guaranteed by the SpatialPartition
// type, so the truncation indicator never fires here.
//   Ewens-Pitman: K log eta + sum_k log((n_k - 1)!)     uniform: 0
double log_prior(const SpatialPartition& p, const PartitionPrior& prior);

}  // namespace carclust
