#include "carclust/rng.hpp"

#include <cmath>

#include "carclust/errors.hpp"

namespace carclust {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

long long Rng::poisson(double mean) {
  if (mean < 0.0) throw InputError("poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  long long count = 0;
  double cum = 0.0;
  while (true) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    cum += -std::log(u);
    if (cum >= mean) break;
    ++count;
  }
  return count;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw InputError("categorical weights must have positive sum");
  const double target = uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (target < cum) return i;
  }
  return weights.size() - 1;
}

}  // namespace carclust
