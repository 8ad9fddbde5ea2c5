#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "carclust/dataset.hpp"
#include "carclust/graph.hpp"
#include "carclust/search.hpp"
#include "carclust/synth.hpp"

namespace carclust {

// A dataset read from disk together with the unit ordering used for the
// response rows (numeric ids sort numerically, otherwise lexicographically).
struct LoadedDataset {
  Dataset data;
  AdjacencyGraph graph;
  std::vector<std::string> unit_ids;
  std::vector<double> periods;          // ascending
  Eigen::MatrixXd counts;               // raw counts when present, else empty
};

// Reads a long-format table (`unit,period,y` or `unit,period,count`; counts
// require the areas table) plus an undirected edge list (`i,j` by unit id,
// duplicate and reversed rows tolerated). Every (unit, period) cell must be
// present exactly once.
LoadedDataset load_dataset(const std::filesystem::path& data_csv,
                           const std::filesystem::path& edges_csv,
                           const std::optional<std::filesystem::path>& areas_csv);

// deterministic shortest-roundtrip formatting for doubles
std::string format_double(double v);

void write_dataset_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& unit_ids,
                       const std::vector<double>& periods, const Eigen::MatrixXd& y,
                       const Eigen::MatrixXd* counts = nullptr);

void write_edges_csv(const std::filesystem::path& path, const AdjacencyGraph& graph,
                     const std::vector<std::string>& unit_ids);

// `particle,unit,alpha_cluster,beta_cluster` rows with 0-based labels in
// canonical (smallest-member-first) order.
void write_particles_csv(const std::filesystem::path& path,
                         const std::vector<Particle>& particles,
                         const std::vector<std::string>& unit_ids);
std::vector<Particle> read_particles_csv(const std::filesystem::path& path,
                                         const AdjacencyGraph& graph);

void write_weights_csv(const std::filesystem::path& path, const ParticleSet& ps,
                       const std::vector<double>& bma_w);
struct WeightsRow {
  double weight = 0.0, bma_weight = 0.0, log_post = 0.0;
  int k_alpha = 0, k_beta = 0;
};
std::vector<WeightsRow> read_weights_csv(const std::filesystem::path& path);

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& unit_ids, const Eigen::VectorXd& alpha,
                         const Eigen::VectorXd& beta);
std::pair<Eigen::VectorXd, Eigen::VectorXd> read_estimates_csv(
    const std::filesystem::path& path);

void write_trace_jsonl(const std::filesystem::path& path,
                       const std::vector<SweepRecord>& trace);

void write_truth_json(const std::filesystem::path& path, const SyntheticSpec& spec,
                      const SyntheticTruth& truth);
struct LoadedTruth {
  Eigen::VectorXd alpha, beta;
  std::vector<int> alpha_assignment, beta_assignment;
  Eigen::VectorXd y_next;
  double x_star = 0.0;
  double sigma2 = 0.0;
};
LoadedTruth read_truth_json(const std::filesystem::path& path);

}  // namespace carclust
