// Randomized invariants over many seeded draws.
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lattice/attractor.hpp"
#include "lattice/estimates.hpp"
#include "lattice/model.hpp"
#include "test_helpers.hpp"

using namespace lattice;
using testing_support::random_field;
using testing_support::random_state;

TEST_CASE("laplacian is symmetric and nonnegative for both closures") {
  std::mt19937_64 rng(101);
  for (int n = 0; n < 200; ++n) {
    const int r = 1 + static_cast<int>(rng() % 12);
    const LatticeField u = random_field(r, rng), v = random_field(r, rng);
    for (Boundary b : {Boundary::dirichlet, Boundary::periodic}) {
      const double uv = inner(discrete_laplacian(u, b), v);
      const double vu = inner(u, discrete_laplacian(v, b));
      CHECK(std::abs(uv - vu) <= 1e-12 * (1 + std::abs(uv)));
      CHECK(inner(discrete_laplacian(u, b), u) >= -1e-12);
      CHECK(discrete_laplacian(u, b).norm_sq() <= 16 * u.norm_sq() * (1 + 1e-12));
    }
  }
}

TEST_CASE("high mode projection is a contraction onto the tail") {
  std::mt19937_64 rng(102);
  for (int n = 0; n < 200; ++n) {
    const int r = static_cast<int>(rng() % 15);
    const SystemState s = random_state(r, rng);
    const long long N = static_cast<long long>(rng() % (r + 3));
    const SystemState hi = high_mode_part(s, N);
    CHECK(hi.norm_sq() <= s.norm_sq());
    CHECK(hi.norm_sq() == doctest::Approx(N <= r ? tail_mass(s, N) : 0.0));
    CHECK(high_mode_part(hi, N) == hi);
  }
}

TEST_CASE("torus translation is a group action") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  const FrequencyVector x({1.0, std::numbers::sqrt2, std::sqrt(3.0)});
  for (int n = 0; n < 500; ++n) {
    const TorusPoint s({ang(rng), ang(rng), ang(rng)});
    const double a = ang(rng), b = ang(rng);
    const TorusPoint lhs = translate_symbol(translate_symbol(s, a, x), b, x);
    const TorusPoint rhs = translate_symbol(s, a + b, x);
    CHECK(torus_distance(lhs, rhs) <= 1e-12);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(lhs[i] >= -std::numbers::pi);
      CHECK(lhs[i] < std::numbers::pi);
    }
  }
}

TEST_CASE("(H1) implies positive decay rates") {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  int accepted = 0;
  for (int n = 0; n < 2000; ++n) {
    ModelParams p = default_params(2);
    p.k = u(rng);
    p.beta = u(rng);
    p.lambda = u(rng);
    p.alpha = u(rng);
    if (!check_H1(p).passed) continue;
    ++accepted;
    const DerivedConstants c = derive_constants(p);
    CHECK(c.theta1 > 0.0);
    CHECK(c.theta2 > 0.0);
    CHECK(c.R >= 0.0);
  }
  CHECK(accepted > 20);
}

TEST_CASE("forcing stays within the profile Lipschitz bound") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> ang(-4.0, 4.0);
  for (ForcingProfile prof : {ForcingProfile::sine, ForcingProfile::sine_sum}) {
    ModelParams p = default_params(1);
    p.forcing_profile = prof;
    for (int n = 0; n < 500; ++n) {
      const TorusPoint a({ang(rng), ang(rng)}), b({ang(rng), ang(rng)});
      for (int i = 1; i <= 3; ++i) {
        CHECK(std::abs(forcing_f(i, a, p) - forcing_f(i, b, p)) <= torus_distance(a, b) + 1e-12);
      }
    }
  }
}

TEST_CASE("tail mass is nonincreasing in the radius") {
  std::mt19937_64 rng(106);
  for (int n = 0; n < 100; ++n) {
    const SystemState s = random_state(10, rng);
    for (long long M = 1; M <= 10; ++M) CHECK(tail_mass(s, M) <= tail_mass(s, M - 1));
  }
}

TEST_CASE("Hausdorff distance is a metric on finite clouds") {
  std::mt19937_64 rng(107);
  auto cloud = [&](int n) {
    PointCloud c;
    for (int i = 0; i < n; ++i) c.points.push_back(random_state(2, rng));
    return c;
  };
  for (int n = 0; n < 100; ++n) {
    const PointCloud A = cloud(1 + n % 4), B = cloud(1 + n % 5), C = cloud(2);
    CHECK(hausdorff_dist(A, A) == 0.0);
    CHECK(hausdorff_dist(A, B) == hausdorff_dist(B, A));
    CHECK(hausdorff_dist(A, B) > 0.0);
    CHECK(hausdorff_dist(A, C) <= hausdorff_dist(A, B) + hausdorff_dist(B, C) + 1e-12);
  }
}
