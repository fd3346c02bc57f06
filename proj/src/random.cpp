#include "lattice/random.hpp"

#include <cmath>
#include <numbers>

namespace lattice {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 SeedTree::stream(std::uint64_t purpose, std::uint64_t index) const {
  std::uint64_t s = seed_;
  std::uint64_t a = splitmix64(s);
  std::uint64_t p = a ^ (purpose * 0xD1B54A32D192ED03ULL);
  std::uint64_t b = splitmix64(p);
  std::uint64_t q = b ^ (index * 0x8CB92BA72F3D8DD7ULL);
  return std::mt19937_64(splitmix64(q));
}

namespace {

// Box-Muller on top of the raw engine; std::normal_distribution is
// implementation-defined and would tie outputs to one standard library.
double standard_normal(std::mt19937_64& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(rng() >> 11) * scale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(rng() >> 11) * scale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

SystemState random_state_on_sphere(int window_radius, double radius, std::mt19937_64& rng) {
  SystemState s(window_radius);
  for (auto field : {&s.u(), &s.v(), &s.z()}) {
    for (double& x : field->values()) x = standard_normal(rng);
  }
  const double n = s.norm();
  if (n > 0.0) s *= radius / n;
  return s;
}

SystemState random_state_in_ball(int window_radius, double radius, std::mt19937_64& rng) {
  SystemState s = random_state_on_sphere(window_radius, 1.0, rng);
  const double dim = 3.0 * static_cast<double>(s.sites());
  s *= radius * std::pow(uniform01(rng), 1.0 / dim);
  return s;
}

TorusPoint random_torus_point(std::size_t kappa, std::mt19937_64& rng) {
  std::vector<double> c(kappa);
  for (double& x : c) x = -std::numbers::pi + 2.0 * std::numbers::pi * uniform01(rng);
  return TorusPoint(std::move(c));
}

}  // namespace lattice
