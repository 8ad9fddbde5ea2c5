#include "carclust/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "carclust/errors.hpp"

namespace carclust {

namespace {
using json = nlohmann::json;
constexpr double kScaleFloor = 1e-6;
}  // namespace

SigmaPrior sigma_prior_from_unit_fits(std::span<const double> sigma2_hats) {
  const int n = static_cast<int>(sigma2_hats.size());
  if (n < 2) throw InputError("need residual variances from at least two units");
  double m = 0.0;
  for (double s : sigma2_hats) m += s;
  m /= n;
  double v = 0.0;
  for (double s : sigma2_hats) v += (s - m) * (s - m);
  v /= (n - 1);
  if (!(v > 0.0))
    throw InputError(
        "per-unit residual variances are all equal; moment matching is degenerate, choose "
        "nu_sigma and lambda_sigma manually");
  SigmaPrior prior;
  prior.nu_sigma = 2.0 * m * m / v + 4.0;
  prior.lambda_sigma = m * (1.0 - 2.0 / prior.nu_sigma);
  return prior;
}

int default_cluster_count(int n_units) {
  return std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(n_units)))));
}

namespace {

std::pair<double, double> scale_pair(std::span<const double> mles, double sigma2, double rho,
                                     int K, bool& floored) {
  const auto [lo, hi] = std::minmax_element(mles.begin(), mles.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw InputError("constant least squares estimates; heuristic degenerate");
  double max_abs = 0.0;
  for (double m : mles) max_abs = std::max(max_abs, std::abs(m));
  const double kp1 = static_cast<double>(K) + 1.0;
  const double s1 = range * range / (4.0 * kp1 * kp1 * sigma2 / (1.0 - rho));
  double s2 = max_abs * max_abs / (4.0 * sigma2) - s1 / (1.0 - rho);
  floored = !(s2 > kScaleFloor);
  if (floored) s2 = kScaleFloor;
  return {s1, s2};
}

}  // namespace

VarianceScales variance_scales_heuristic(std::span<const double> mle_alpha,
                                         std::span<const double> mle_beta, double sigma2_hat,
                                         double rho, int K) {
  if (!(sigma2_hat > 0.0)) throw InputError("sigma2_hat must be positive");
  if (K < 0) throw InputError("K must be non-negative");
  VarianceScales out;
  std::tie(out.a1, out.a2) = scale_pair(mle_alpha, sigma2_hat, rho, K, out.a2_floored);
  std::tie(out.b1, out.b2) = scale_pair(mle_beta, sigma2_hat, rho, K, out.b2_floored);
  return out;
}

EmpiricalBayesResult empirical_bayes_scales(const Dataset& data, const AdjacencyGraph& graph,
                                            const Particle& map_particle,
                                            const ModelConfig& start, int max_evaluations) {
  const double lo = std::log(1e-6), hi = std::log(1e3);
  int evals = 0;

  auto objective = [&](double la1, double lb1) {
    ModelConfig cfg = start;
    cfg.a1 = std::exp(std::clamp(la1, lo, hi));
    cfg.b1 = std::exp(std::clamp(lb1, lo, hi));
    ModelEngine engine(data, graph, cfg);
    ++evals;
    return engine.log_marginal(map_particle);
  };

  struct Point {
    double x, y, f;
  };
  const double x0 = std::clamp(std::log(start.a1), lo, hi);
  const double y0 = std::clamp(std::log(start.b1), lo, hi);
  const double f0 = objective(x0, y0);
  if (!std::isfinite(f0))
    throw NumericalError("non-finite marginal likelihood at empirical Bayes starting point");

  const double step = 0.5;
  std::vector<Point> simplex = {{x0, y0, f0},
                                {x0 + step, y0, objective(x0 + step, y0)},
                                {x0, y0 + step, objective(x0, y0 + step)}};

  Point best = simplex[0];
  for (const Point& p : simplex)
    if (p.f > best.f) best = p;

  // standard Nelder-Mead on -f
  while (evals < max_evaluations) {
    std::sort(simplex.begin(), simplex.end(), [](const Point& a, const Point& b) {
      return a.f > b.f;  // best first
    });
    if (simplex[0].f > best.f) best = simplex[0];
    if (std::abs(simplex[0].f - simplex[2].f) < 1e-10) break;

    const double cx = 0.5 * (simplex[0].x + simplex[1].x);
    const double cy = 0.5 * (simplex[0].y + simplex[1].y);
    const Point& worst = simplex[2];

    Point refl{cx + (cx - worst.x), cy + (cy - worst.y), 0.0};
    refl.f = objective(refl.x, refl.y);
    if (refl.f > simplex[0].f) {
      Point expd{cx + 2.0 * (cx - worst.x), cy + 2.0 * (cy - worst.y), 0.0};
      if (evals < max_evaluations) {
        expd.f = objective(expd.x, expd.y);
        simplex[2] = expd.f > refl.f ? expd : refl;
      } else {
        simplex[2] = refl;
      }
    } else if (refl.f > simplex[1].f) {
      simplex[2] = refl;
    } else {
      Point contr{cx + 0.5 * (worst.x - cx), cy + 0.5 * (worst.y - cy), 0.0};
      if (evals >= max_evaluations) break;
      contr.f = objective(contr.x, contr.y);
      if (contr.f > worst.f) {
        simplex[2] = contr;
      } else {
        // shrink toward the best vertex
        for (int i = 1; i < 3 && evals < max_evaluations; ++i) {
          simplex[i].x = simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x);
          simplex[i].y = simplex[0].y + 0.5 * (simplex[i].y - simplex[0].y);
          simplex[i].f = objective(simplex[i].x, simplex[i].y);
        }
      }
    }
  }
  for (const Point& p : simplex)
    if (p.f > best.f) best = p;

  EmpiricalBayesResult out;
  out.a1 = std::exp(std::clamp(best.x, lo, hi));
  out.b1 = std::exp(std::clamp(best.y, lo, hi));
  out.objective = best.f;
  out.objective_start = f0;
  out.evaluations = evals;
  return out;
}

std::string HyperHeuristicReport::to_json() const {
  json j;
  j["sigma2_hat"] = sigma2_hat;
  j["m"] = m;
  j["v"] = v;
  j["nu_sigma"] = nu_sigma;
  j["lambda_sigma"] = lambda_sigma;
  j["K"] = K;
  j["heuristic"] = {{"a1", heuristic.a1},
                    {"a2", heuristic.a2},
                    {"b1", heuristic.b1},
                    {"b2", heuristic.b2},
                    {"a2_floored", heuristic.a2_floored},
                    {"b2_floored", heuristic.b2_floored}};
  j["a1_final"] = a1_final;
  j["b1_final"] = b1_final;
  j["eb_skipped"] = eb_skipped;
  return j.dump(2);
}

}  // namespace carclust
