#pragma once

#include <cstdint>
#include <random>

namespace ssvd {

// One SplitMix64 mixing step; the workhorse for deriving stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Derive an independent seed from (master, stream, counter). Used so that
// replicates and grid points can run in any order with identical results.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream,
                         std::uint64_t counter = 0);

// mt19937_64 engine with hand-coded distributions. The engine's output is
// pinned by the C++ standard; std::normal_distribution and friends are not,
// so coding the transforms here keeps fixed-seed runs identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal();       // standard normal (Box-Muller, cached pair)
  double exponential();  // rate 1
  double rademacher();   // +1 or -1 with equal probability
  long poisson(double lambda);

  // Uniform integer in [0, n), n >= 1 (rejection, unbiased).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ssvd
