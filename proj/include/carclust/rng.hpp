#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace carclust {

// Seeded random source with hand-rolled draw routines so that streams are
// reproducible bit-for-bit independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // standard normal via Marsaglia's polar method
  double normal();

  // Poisson draw by accumulating unit-rate exponentials; O(mean)
  long long poisson(double mean);

  // index draw proportional to `weights` (non-negative, not all zero)
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace carclust
