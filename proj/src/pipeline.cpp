#include "carclust/pipeline.hpp"

#include <json.hpp>

#include "carclust/errors.hpp"

namespace carclust {

namespace {
using json = nlohmann::json;

void set_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

std::optional<double> get_optional(const json& j, const char* key) {
  if (j.contains(key) && !j[key].is_null()) return j[key].get<double>();
  return std::nullopt;
}
}  // namespace

std::string FitOptions::to_json() const {
  json j;
  j["L"] = n_particles;
  j["lambda"] = lambda;
  j["rho"] = rho;
  j["eta"] = eta;
  j["prior"] = to_string(prior);
  j["equal_partitions"] = equal_partitions;
  j["seed"] = seed;
  j["skip_eb"] = skip_eb;
  j["max_sweeps"] = max_sweeps;
  j["k_heuristic"] = k_heuristic;
  j["island_percentile"] = island_percentile;
  j["max_subclusters"] = max_subclusters;
  set_optional(j, "a1", a1);
  set_optional(j, "a2", a2);
  set_optional(j, "b1", b1);
  set_optional(j, "b2", b2);
  set_optional(j, "nu_sigma", nu_sigma);
  set_optional(j, "lambda_sigma", lambda_sigma);
  return j.dump(2);
}

FitOptions FitOptions::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("cannot parse fit options: ") + e.what());
  }
  FitOptions o;
  o.n_particles = j.value("L", o.n_particles);
  o.lambda = j.value("lambda", o.lambda);
  o.rho = j.value("rho", o.rho);
  o.eta = j.value("eta", o.eta);
  if (j.contains("prior")) o.prior = prior_kind_from_string(j["prior"].get<std::string>());
  o.equal_partitions = j.value("equal_partitions", o.equal_partitions);
  o.seed = j.value("seed", o.seed);
  o.skip_eb = j.value("skip_eb", o.skip_eb);
  o.max_sweeps = j.value("max_sweeps", o.max_sweeps);
  o.k_heuristic = j.value("k_heuristic", o.k_heuristic);
  o.island_percentile = j.value("island_percentile", o.island_percentile);
  o.max_subclusters = j.value("max_subclusters", o.max_subclusters);
  o.a1 = get_optional(j, "a1");
  o.a2 = get_optional(j, "a2");
  o.b1 = get_optional(j, "b1");
  o.b2 = get_optional(j, "b2");
  o.nu_sigma = get_optional(j, "nu_sigma");
  o.lambda_sigma = get_optional(j, "lambda_sigma");
  return o;
}

FitResult fit_pipeline(const Dataset& data, const AdjacencyGraph& graph,
                       const FitOptions& options) {
  FitResult result;
  HyperHeuristicReport& report = result.hyper;

  const UnitMLE mle = unit_mles(data);
  report.sigma2_hat.assign(mle.sigma2_hat.data(), mle.sigma2_hat.data() + mle.sigma2_hat.size());
  report.m = mle.sigma2_hat.mean();
  report.v = (mle.sigma2_hat.array() - report.m).square().sum() /
             (static_cast<double>(mle.sigma2_hat.size()) - 1.0);
  report.K = options.k_heuristic > 0 ? options.k_heuristic
                                     : default_cluster_count(data.n_units());

  ModelConfig config;
  config.rho = options.rho;
  config.eta = options.eta;

  if (options.nu_sigma && options.lambda_sigma) {
    config.nu_sigma = *options.nu_sigma;
    config.lambda_sigma = *options.lambda_sigma;
  } else {
    const SigmaPrior sp = sigma_prior_from_unit_fits(report.sigma2_hat);
    config.nu_sigma = options.nu_sigma.value_or(sp.nu_sigma);
    config.lambda_sigma = options.lambda_sigma.value_or(sp.lambda_sigma);
  }
  report.nu_sigma = config.nu_sigma;
  report.lambda_sigma = config.lambda_sigma;

  const bool all_scales_given = options.a1 && options.a2 && options.b1 && options.b2;
  if (!all_scales_given) {
    report.heuristic = variance_scales_heuristic(
        {mle.alpha_hat.data(), static_cast<std::size_t>(mle.alpha_hat.size())},
        {mle.beta_hat.data(), static_cast<std::size_t>(mle.beta_hat.size())}, report.m,
        config.rho, report.K);
  }
  config.a1 = options.a1.value_or(report.heuristic.a1);
  config.a2 = options.a2.value_or(report.heuristic.a2);
  config.b1 = options.b1.value_or(report.heuristic.b1);
  config.b2 = options.b2.value_or(report.heuristic.b2);
  if (all_scales_given) {
    report.heuristic.a1 = config.a1;
    report.heuristic.a2 = config.a2;
    report.heuristic.b1 = config.b1;
    report.heuristic.b2 = config.b2;
  }

  const PartitionPrior prior{options.prior, config.eta};

  SearchConfig search_cfg;
  search_cfg.n_particles = options.n_particles;
  search_cfg.lambda = options.lambda;
  search_cfg.max_sweeps = options.max_sweeps;
  search_cfg.seed = options.seed;
  search_cfg.equal_partitions = options.equal_partitions;
  search_cfg.island_percentile = options.island_percentile;
  search_cfg.max_subclusters = options.max_subclusters;

  // preliminary single-particle run under the temporary scales
  Particle map_particle = [&] {
    ModelEngine engine(data, graph, config);
    SearchConfig map_cfg = search_cfg;
    map_cfg.n_particles = 1;
    ParticleOptimizer optimizer(engine, prior, map_cfg);
    return optimizer.run().set.particles.front();
  }();

  report.eb_skipped = options.skip_eb || (options.a1 && options.b1);
  if (!report.eb_skipped) {
    const EmpiricalBayesResult eb = empirical_bayes_scales(data, graph, map_particle, config);
    config.a1 = eb.a1;
    config.b1 = eb.b1;
  }
  report.a1_final = config.a1;
  report.b1_final = config.b1;

  // full run, with the preliminary optimum joining the initialization pool
  result.engine = std::make_unique<ModelEngine>(data, graph, config);
  ParticleOptimizer optimizer(*result.engine, prior, search_cfg);
  const Particle extra[] = {map_particle};
  result.search = optimizer.run(extra);
  result.bma = bma_estimate(result.search.set, *result.engine);
  result.map_particle = std::move(map_particle);
  result.map_log_post = optimizer.log_joint(result.map_particle);
  result.config = config;
  return result;
}

}  // namespace carclust
