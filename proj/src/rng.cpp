#include "ssvd/rng.hpp"

#include <cmath>

namespace ssvd {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream,
                         std::uint64_t counter) {
  std::uint64_t state = master;
  splitmix64(state);
  state ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
  splitmix64(state);
  state ^= 0xd1b54a32d192ed03ULL * (counter + 1);
  return splitmix64(state);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0,1] uniforms; u1 > 0 guaranteed by the +1 ulp shift.
  double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::exponential() {
  double u = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  return -std::log(u);
}

double Rng::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection from the top to avoid modulo bias.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

namespace {

// Knuth product method; O(lambda) uniforms, used for small rates.
long poisson_small(Rng& rng, double lambda) {
  double limit = std::exp(-lambda);
  double product = rng.uniform();
  long count = 0;
  while (product > limit) {
    product *= rng.uniform();
    ++count;
  }
  return count;
}

// Hormann's PTRS transformed rejection; exact and O(1) for lambda >= 10.
long poisson_ptrs(Rng& rng, double lambda) {
  double slam = std::sqrt(lambda);
  double loglam = std::log(lambda);
  double b = 0.931 + 2.53 * slam;
  double a = -0.059 + 0.02483 * b;
  double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        k * loglam - lambda - std::lgamma(k + 1.0)) {
      return static_cast<long>(k);
    }
  }
}

}  // namespace

long Rng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) return poisson_small(*this, lambda);
  return poisson_ptrs(*this, lambda);
}

}  // namespace ssvd
