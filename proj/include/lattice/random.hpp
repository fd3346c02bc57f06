#pragma once

#include <cstdint>
#include <random>

#include "lattice/field.hpp"
#include "lattice/torus.hpp"

namespace lattice {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Root of the splittable generator tree. Every draw in an experiment comes
/// from `stream(purpose, index)`, so a member's randomness depends only on the
/// seed and its (purpose, index) pair, never on evaluation order.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64 stream(std::uint64_t purpose, std::uint64_t index) const;

 private:
  std::uint64_t seed_;
};

// Stream purposes used by the experiments. Recorded in the run manifest.
enum StreamPurpose : std::uint64_t {
  kAbsorbingInit = 1,
  kTailInit = 2,
  kLipschitzPairs = 3,
  kSqueezePairs = 4,
  kBallSamples = 5,
  kForwardSet = 6,
  kSymbolSamples = 7,
  kRichardson = 8,
  kTestData = 99,
};

// Isotropic Gaussian direction scaled to a radius drawn uniformly in the ball of `radius`.
SystemState random_state_in_ball(int window_radius, double radius, std::mt19937_64& rng);

// Isotropic direction scaled to exactly `radius`.
SystemState random_state_on_sphere(int window_radius, double radius, std::mt19937_64& rng);

TorusPoint random_torus_point(std::size_t kappa, std::mt19937_64& rng);

}  // namespace lattice
