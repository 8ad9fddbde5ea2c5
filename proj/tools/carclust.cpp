// Command-line front end: seeded synthetic-data simulation, model fitting,
// and evaluation against either known truth or a held-out period.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carclust/errors.hpp"
#include "carclust/io.hpp"
#include "carclust/metrics.hpp"
#include "carclust/pipeline.hpp"
#include "carclust/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace carclust;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  SyntheticSpec spec;
  std::string setting = "high";
  std::string dgp = "gaussian";
  std::string out;
  int replicates = 1;
  bool delta_alpha_set = false, delta_beta_set = false;
};

void run_one_simulation(const SimulateArgs& args, const fs::path& dir) {
  fs::create_directories(dir);
  const AdjacencyGraph graph = AdjacencyGraph::grid(args.spec.grid_side, args.spec.grid_side);
  const auto [data, truth] = generate(args.spec, graph);

  std::vector<std::string> unit_ids(graph.n_units());
  for (int i = 0; i < graph.n_units(); ++i) unit_ids[i] = std::to_string(i);
  std::vector<double> periods(data.n_periods());
  for (int s = 0; s < data.n_periods(); ++s) periods[s] = s;

  write_dataset_csv(dir / "data.csv", unit_ids, periods, data.y(),
                    args.spec.dgp == Dgp::poisson ? &truth.counts : nullptr);
  write_edges_csv(dir / "edges.csv", graph, unit_ids);
  write_truth_json(dir / "truth.json", args.spec, truth);

  json cfg;
  cfg["command"] = "simulate";
  cfg["grid"] = args.spec.grid_side;
  cfg["setting"] = args.setting;
  cfg["delta_alpha"] = args.spec.delta_alpha;
  cfg["delta_beta"] = args.spec.delta_beta;
  cfg["T"] = args.spec.n_periods;
  cfg["sigma2"] = args.spec.sigma2;
  cfg["car_rho"] = args.spec.car_rho;
  cfg["car_scale"] = args.spec.car_scale;
  cfg["car_sd"] = args.spec.car_sd;
  cfg["alpha_shift"] = args.spec.alpha_shift;
  cfg["dgp"] = args.dgp;
  cfg["seed"] = args.spec.seed;
  write_text(dir / "run_config.json", cfg.dump(2));

  std::cout << "simulate: grid " << args.spec.grid_side << "x" << args.spec.grid_side
            << ", T=" << args.spec.n_periods << ", dgp=" << args.dgp << ", delta=("
            << args.spec.delta_alpha << ", " << args.spec.delta_beta << "), seed "
            << args.spec.seed << " -> " << dir.string() << std::endl;
}

int cmd_simulate(SimulateArgs args) {
  double da = 2.0, db = 1.0;
  if (args.setting == "high") {
    da = 2.0;
    db = 1.0;
  } else if (args.setting == "moderate") {
    da = 1.0;
    db = 0.5;
  } else if (args.setting == "low") {
    da = 0.0;
    db = 0.0;
  } else {
    std::cerr << "--setting must be high, moderate, or low" << std::endl;
    return kExitUsage;
  }
  if (!args.delta_alpha_set) args.spec.delta_alpha = da;
  if (!args.delta_beta_set) args.spec.delta_beta = db;
  args.spec.dgp = args.dgp == "poisson" ? Dgp::poisson : Dgp::gaussian;

  if (args.replicates <= 1) {
    run_one_simulation(args, args.out);
    return 0;
  }
  std::vector<std::future<void>> jobs;
  for (int r = 0; r < args.replicates; ++r) {
    SimulateArgs rep = args;
    rep.spec.seed = args.spec.seed + static_cast<std::uint64_t>(r);
    char name[32];
    std::snprintf(name, sizeof(name), "rep_%04d", r);
    jobs.push_back(std::async(std::launch::async, run_one_simulation, rep,
                              fs::path(args.out) / name));
  }
  for (auto& j : jobs) j.get();
  return 0;
}

// --------------------------------------------------------------------- fit

void run_one_fit(const LoadedDataset& loaded, const FitOptions& options, const fs::path& dir,
                 json resolved_config) {
  fs::create_directories(dir);
  FitResult result = fit_pipeline(loaded.data, loaded.graph, options);

  write_particles_csv(dir / "particles.csv", result.search.set.particles, loaded.unit_ids);
  write_weights_csv(dir / "weights.csv", result.search.set, bma_weights(result.search.set));
  write_estimates_csv(dir / "estimates.csv", loaded.unit_ids, result.bma.alpha, result.bma.beta);
  write_trace_jsonl(dir / "trace.jsonl", result.search.trace);
  write_text(dir / "hyper_report.json", result.hyper.to_json());

  resolved_config["options"] = json::parse(options.to_json());
  write_text(dir / "run_config.json", resolved_config.dump(2));

  const auto& trace = result.search.trace;
  std::cout << "fit: L=" << options.n_particles << ", lambda=" << options.lambda << ", seed "
            << options.seed << ", " << (trace.size() - 1) << " sweeps, "
            << result.search.accepted_moves << " accepted moves, objective "
            << format_double(trace.back().objective) << " -> " << dir.string() << std::endl;
}

struct FitArgs {
  std::string data, edges, areas, out, config;
  FitOptions options;
  int replicates = 1;
};

int cmd_fit(const FitArgs& args) {
  const LoadedDataset loaded = load_dataset(
      args.data, args.edges,
      args.areas.empty() ? std::nullopt : std::optional<fs::path>(fs::path(args.areas)));

  json cfg;
  cfg["command"] = "fit";
  cfg["data"] = args.data;
  cfg["edges"] = args.edges;
  if (!args.areas.empty()) cfg["areas"] = args.areas;

  if (args.replicates <= 1) {
    run_one_fit(loaded, args.options, args.out, cfg);
    return 0;
  }
  std::vector<std::future<void>> jobs;
  for (int r = 0; r < args.replicates; ++r) {
    FitOptions options = args.options;
    options.seed = args.options.seed + static_cast<std::uint64_t>(r);
    char name[32];
    std::snprintf(name, sizeof(name), "rep_%04d", r);
    jobs.push_back(std::async(std::launch::async,
                              [&loaded, options, cfg, dir = fs::path(args.out) / name] {
                                run_one_fit(loaded, options, dir, cfg);
                              }));
  }
  for (auto& j : jobs) j.get();
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string fit_dir, edges, truth, holdout, areas, out;
};

// unit ids in fit order, from the estimates table
std::vector<std::string> read_unit_ids(const fs::path& estimates_csv) {
  std::ifstream in(estimates_csv);
  if (!in) throw InputError("cannot open " + estimates_csv.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ids.push_back(line.substr(0, line.find(',')));
  }
  return ids;
}

AdjacencyGraph load_graph_for_units(const fs::path& edges_csv,
                                    const std::vector<std::string>& unit_ids) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) index[unit_ids[i]] = static_cast<int>(i);
  std::ifstream in(edges_csv);
  if (!in) throw InputError("cannot open " + edges_csv.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError(edges_csv.string() + ": malformed edge row '" + line + "'");
    const std::string a = line.substr(0, comma);
    const std::string b = line.substr(comma + 1);
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw InputError(edges_csv.string() + ": unknown unit in edge '" + line + "'");
    edges.emplace_back(ia->second, ib->second);
  }
  return AdjacencyGraph(static_cast<int>(unit_ids.size()), edges);
}

int cmd_evaluate(const EvaluateArgs& args) {
  if (args.truth.empty() && args.holdout.empty()) {
    std::cerr << "evaluate needs --truth or --holdout" << std::endl;
    return kExitUsage;
  }

  const fs::path fit_dir(args.fit_dir);
  const auto [alpha, beta] = read_estimates_csv(fit_dir / "estimates.csv");
  const auto weight_rows = read_weights_csv(fit_dir / "weights.csv");

  json metrics;
  metrics["k_alpha"] = weight_rows.front().k_alpha;
  metrics["k_beta"] = weight_rows.front().k_beta;
  {
    std::vector<double> lps;
    for (const auto& row : weight_rows) lps.push_back(row.log_post);
    metrics["log_post"] = lps;
  }

  if (!args.truth.empty()) {
    const LoadedTruth truth = read_truth_json(args.truth);
    if (truth.alpha.size() != alpha.size())
      throw InputError("truth and estimates disagree on the unit count");
    metrics["rmse"] = rmse({alpha.data(), static_cast<std::size_t>(alpha.size())},
                           {beta.data(), static_cast<std::size_t>(beta.size())},
                           {truth.alpha.data(), static_cast<std::size_t>(truth.alpha.size())},
                           {truth.beta.data(), static_cast<std::size_t>(truth.beta.size())});

    if (!args.edges.empty()) {
      const std::vector<std::string> unit_ids = read_unit_ids(fit_dir / "estimates.csv");
      const AdjacencyGraph graph = load_graph_for_units(args.edges, unit_ids);
      const std::vector<Particle> particles =
          read_particles_csv(fit_dir / "particles.csv", graph);
      const SpatialPartition truth_alpha =
          SpatialPartition::from_assignment(graph, truth.alpha_assignment);
      const SpatialPartition truth_beta =
          SpatialPartition::from_assignment(graph, truth.beta_assignment);

      ParticleSet ps;
      ps.particles = particles;
      for (const auto& row : weight_rows) {
        ps.weights.push_back(row.weight);
        ps.log_post.push_back(row.log_post);
      }
      const auto [wa, wb] = weighted_ari(ps, truth_alpha, truth_beta);
      metrics["ari_alpha"] = wa;
      metrics["ari_beta"] = wb;
      metrics["top_ari_alpha"] = adjusted_rand(particles.front().alpha, truth_alpha);
      metrics["top_ari_beta"] = adjusted_rand(particles.front().beta, truth_beta);
    }

    if (truth.y_next.size() == alpha.size()) {
      const Eigen::VectorXd pred = predict(alpha, beta, truth.x_star);
      metrics["pred_rmse"] =
          std::sqrt((pred - truth.y_next).squaredNorm() / static_cast<double>(alpha.size()));
      metrics["x_star"] = truth.x_star;
    }
  }

  if (!args.holdout.empty()) {
    if (args.edges.empty()) throw InputError("--holdout needs --edges");
    const LoadedDataset full = load_dataset(
        args.holdout, args.edges,
        args.areas.empty() ? std::nullopt : std::optional<fs::path>(fs::path(args.areas)));
    if (full.data.n_units() != alpha.size())
      throw InputError("holdout table and estimates disagree on the unit count");
    std::vector<double> insample(full.periods.begin(), full.periods.end() - 1);
    const double x_star = standardized_position(insample, full.periods.back());
    const Eigen::VectorXd actual = full.data.y().col(full.data.n_periods() - 1);
    const Eigen::VectorXd pred = predict(alpha, beta, x_star);
    metrics["pred_rmse"] =
        std::sqrt((pred - actual).squaredNorm() / static_cast<double>(alpha.size()));
    metrics["x_star"] = x_star;
    metrics["holdout_period"] = full.periods.back();
  }

  const fs::path out_dir = args.out.empty() ? fit_dir : fs::path(args.out);
  fs::create_directories(out_dir);
  write_text(out_dir / "metrics.json", metrics.dump(2));

  // flat one-row CSV with the scalar metrics
  {
    std::string header, row;
    for (const auto& [key, value] : metrics.items()) {
      if (!value.is_number()) continue;
      if (!header.empty()) {
        header += ',';
        row += ',';
      }
      header += key;
      row += format_double(value.get<double>());
    }
    write_text(out_dir / "metrics.csv", header + "\n" + row);
  }

  std::cout << metrics.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CAR-within-clusters fitting by entropy-penalized particle optimization"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic lattice dataset");
  simulate->add_option("--grid", sim.spec.grid_side, "grid side length");
  simulate->add_option("--setting", sim.setting, "separation setting: high|moderate|low");
  auto* sim_da = simulate->add_option("--delta-alpha", sim.spec.delta_alpha,
                                      "override level-mean separation");
  auto* sim_db = simulate->add_option("--delta-beta", sim.spec.delta_beta,
                                      "override trend-mean separation");
  simulate->add_option("--T", sim.spec.n_periods, "number of periods");
  simulate->add_option("--sigma2", sim.spec.sigma2, "residual variance");
  simulate->add_option("--car-rho", sim.spec.car_rho, "generator CAR autocorrelation");
  simulate->add_option("--car-scale", sim.spec.car_scale, "generator CAR scale");
  simulate->add_option("--car-sd", sim.spec.car_sd, "generator CAR standard deviation");
  simulate->add_option("--dgp", sim.dgp, "gaussian|poisson");
  simulate->add_option("--seed", sim.spec.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--replicates", sim.replicates, "seed-varied replicate count");

  FitArgs fit;
  struct FitFlagStage {
    int L = 0;
    double lambda = 0, rho = 0, eta = 0;
    std::string prior;
    bool equal_partitions = false, skip_eb = false;
    std::uint64_t seed = 0;
    int max_sweeps = 0, k_heuristic = 0;
    double a1 = 0, a2 = 0, b1 = 0, b2 = 0, nu_sigma = 0, lambda_sigma = 0;
  } stage;
  auto* fit_cmd = app.add_subcommand("fit", "fit the model and search for top particles");
  fit_cmd->add_option("--data", fit.data, "dataset CSV (unit,period,{y|count})");
  fit_cmd->add_option("--edges", fit.edges, "edge list CSV (i,j by unit id)");
  fit_cmd->add_option("--areas", fit.areas, "areas CSV (unit,area_sq_miles), for count data");
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  fit_cmd->add_option("--config", fit.config, "load options from a fit run_config.json");
  auto* f_L = fit_cmd->add_option("--L", stage.L, "particle count (default 10)");
  auto* f_lambda = fit_cmd->add_option("--lambda", stage.lambda, "entropy penalty (default 100)");
  auto* f_rho = fit_cmd->add_option("--rho", stage.rho, "CAR autocorrelation (default 0.9)");
  auto* f_eta = fit_cmd->add_option("--eta", stage.eta, "prior concentration (default 1)");
  auto* f_prior = fit_cmd->add_option("--prior", stage.prior, "partition prior: ep|uniform");
  auto* f_eq = fit_cmd->add_flag("--equal-partitions", stage.equal_partitions,
                                 "constrain the two partitions to agree");
  auto* f_seed = fit_cmd->add_option("--seed", stage.seed, "RNG seed");
  auto* f_skip = fit_cmd->add_flag("--skip-eb", stage.skip_eb,
                                   "skip the empirical Bayes refinement");
  auto* f_sweeps = fit_cmd->add_option("--max-sweeps", stage.max_sweeps, "sweep cap");
  auto* f_k = fit_cmd->add_option("--K", stage.k_heuristic,
                                  "cluster count for the scale heuristic (default floor(log N))");
  auto* f_a1 = fit_cmd->add_option("--a1", stage.a1, "fix the level within-cluster scale");
  auto* f_a2 = fit_cmd->add_option("--a2", stage.a2, "fix the level grand-mean scale");
  auto* f_b1 = fit_cmd->add_option("--b1", stage.b1, "fix the trend within-cluster scale");
  auto* f_b2 = fit_cmd->add_option("--b2", stage.b2, "fix the trend grand-mean scale");
  auto* f_nu = fit_cmd->add_option("--nu-sigma", stage.nu_sigma, "fix the variance prior shape");
  auto* f_ls = fit_cmd->add_option("--lambda-sigma", stage.lambda_sigma,
                                   "fix the variance prior scale");
  fit_cmd->add_option("--replicates", fit.replicates, "seed-varied replicate count");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "compute metrics for a finished fit");
  eval_cmd->add_option("--fit", eval.fit_dir, "fit output directory")->required();
  eval_cmd->add_option("--edges", eval.edges, "edge list CSV, for partition metrics");
  eval_cmd->add_option("--truth", eval.truth, "truth JSON from simulate");
  eval_cmd->add_option("--holdout", eval.holdout,
                       "full dataset CSV whose final period was withheld from the fit");
  eval_cmd->add_option("--areas", eval.areas, "areas CSV when the holdout table has counts");
  eval_cmd->add_option("--out", eval.out, "metrics output directory (default: fit dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      sim.delta_alpha_set = sim_da->count() > 0;
      sim.delta_beta_set = sim_db->count() > 0;
      return cmd_simulate(sim);
    }
    if (fit_cmd->parsed()) {
      if (!fit.config.empty()) {
        const json stored = json::parse(read_text(fit.config));
        fit.options = FitOptions::from_json(
            stored.contains("options") ? stored["options"].dump() : stored.dump());
        if (fit.data.empty() && stored.contains("data")) fit.data = stored["data"];
        if (fit.edges.empty() && stored.contains("edges")) fit.edges = stored["edges"];
        if (fit.areas.empty() && stored.contains("areas")) fit.areas = stored["areas"];
      }
      if (fit.data.empty() || fit.edges.empty()) {
        std::cerr << "fit needs --data and --edges (directly or via --config)" << std::endl;
        return kExitUsage;
      }
      if (f_L->count()) fit.options.n_particles = stage.L;
      if (f_lambda->count()) fit.options.lambda = stage.lambda;
      if (f_rho->count()) fit.options.rho = stage.rho;
      if (f_eta->count()) fit.options.eta = stage.eta;
      if (f_prior->count()) fit.options.prior = prior_kind_from_string(stage.prior);
      if (f_eq->count()) fit.options.equal_partitions = stage.equal_partitions;
      if (f_seed->count()) fit.options.seed = stage.seed;
      if (f_skip->count()) fit.options.skip_eb = stage.skip_eb;
      if (f_sweeps->count()) fit.options.max_sweeps = stage.max_sweeps;
      if (f_k->count()) fit.options.k_heuristic = stage.k_heuristic;
      if (f_a1->count()) fit.options.a1 = stage.a1;
      if (f_a2->count()) fit.options.a2 = stage.a2;
      if (f_b1->count()) fit.options.b1 = stage.b1;
      if (f_b2->count()) fit.options.b2 = stage.b2;
      if (f_nu->count()) fit.options.nu_sigma = stage.nu_sigma;
      if (f_ls->count()) fit.options.lambda_sigma = stage.lambda_sigma;
      return cmd_fit(fit);
    }
    if (eval_cmd->parsed()) return cmd_evaluate(eval);
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return kExitNumerical;
  }
  return 0;
}
