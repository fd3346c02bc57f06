#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lattice/attractor.hpp"
#include "lattice/errors.hpp"
#include "lattice/random.hpp"
#include "test_helpers.hpp"

using namespace lattice;
using testing_support::random_state;

namespace {

SystemState scalar_state(double u) {
  SystemState s(0);
  s.u().at(0) = u;
  return s;
}

PointCloud scalar_cloud(std::initializer_list<double> us) {
  PointCloud c;
  for (double u : us) c.points.push_back(scalar_state(u));
  return c;
}

PointCloud random_cloud(int radius, int n, std::mt19937_64& rng) {
  PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back(random_state(radius, rng));
  return c;
}

}  // namespace

TEST_CASE("Hausdorff examples") {
  const PointCloud A = scalar_cloud({0.0});
  const PointCloud B = scalar_cloud({3.0, 4.0});
  CHECK(hausdorff_semidist(A, B) == 3.0);
  CHECK(hausdorff_semidist(B, A) == 4.0);
  CHECK(hausdorff_dist(A, B) == 4.0);
  CHECK(hausdorff_dist(A, A) == 0.0);
  CHECK(hausdorff_semidist(A, scalar_cloud({0.0, 9.0})) == 0.0);
}

TEST_CASE("Hausdorff errors") {
  CHECK_THROWS_AS(hausdorff_dist(PointCloud{}, scalar_cloud({1.0})), DomainError);
  PointCloud wide;
  wide.points.push_back(SystemState(2));
  CHECK_THROWS_AS(hausdorff_dist(wide, scalar_cloud({1.0})), DomainError);
}

TEST_CASE("Hausdorff triangle inequality and monotonicity") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud A = random_cloud(3, 5, rng), B = random_cloud(3, 4, rng), C = random_cloud(3, 6, rng);
    CHECK(hausdorff_dist(A, C) <= hausdorff_dist(A, B) + hausdorff_dist(B, C) + 1e-12);
    CHECK(hausdorff_semidist(A, C) <= hausdorff_semidist(A, B) + hausdorff_semidist(B, C) + 1e-12);
    PointCloud BC = B;
    BC.points.insert(BC.points.end(), C.points.begin(), C.points.end());
    CHECK(hausdorff_semidist(A, BC) <= hausdorff_semidist(A, B));
  }
}

TEST_CASE("family bookkeeping") {
  SetFamilySample fam;
  const auto grid = torus_grid(2, 4);
  for (std::size_t j = 0; j < grid.size(); ++j) fam.entries.push_back({grid[j], scalar_cloud({static_cast<double>(j)})});
  CHECK(fam.symbol_spacing() == doctest::Approx(std::numbers::pi / 2));
  CHECK(fam.coverage_tolerance() == doctest::Approx(std::sqrt(2.0) / 2 * std::numbers::pi / 2));
  // entry 0 sits next to entries 1, 3, 4 and 12 on the 4x4 grid; ties resolve to the largest distance
  CHECK(fam.resolution() == 12.0);
  CHECK(fam.merged().size() == grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(fam.nearest(grid[j]) == j);

  SetFamilySample sparse;
  sparse.entries.push_back({TorusPoint({0.0, 0.0}), scalar_cloud({0.0})});
  sparse.entries.push_back({TorusPoint({0.1, 0.0}), scalar_cloud({0.0})});
  CHECK_THROWS_AS(sparse.covering(TorusPoint({3.0, 3.0})), CoverageError);
  CHECK(sparse.covering(TorusPoint({0.09, 0.0})) == 1);
}

TEST_CASE("homogeneous system: every section is {0}") {
  const ModelParams p = testing_support::homogeneous_params(5);
  IntegratorConfig cfg;
  cfg.h = 0.01;
  SeedTree tree(3);
  auto rng = tree.stream(kTestData, 2);
  std::vector<SystemState> b0;
  for (int i = 0; i < 3; ++i) b0.push_back(random_state_in_ball(5, 0.01, rng));
  const auto syms = torus_grid(2, 2);
  const auto D = approximate_uniform_attractor(syms, b0, 40.0, cfg, p);
  for (const auto& pt : D.cloud.points) CHECK(pt.norm() < 1e-12);
  const auto fam = build_pullback_family(syms, D.cloud, 1.0, {1.0, 2.0}, Provenance::pullback_A_eps, cfg, p);
  for (const auto& e : fam.entries) {
    for (const auto& pt : e.cloud.points) CHECK(pt.norm() < 1e-12);
  }
  CHECK(forward_invariance_defect(fam, 1.0, cfg, p) < 1e-12);
}

TEST_CASE("frozen symbol: sections do not depend on sigma through the flow") {
  ModelParams p = testing_support::small_params(4);
  p.frequencies = FrequencyVector::frozen(2);
  IntegratorConfig cfg;
  cfg.h = 0.02;
  std::mt19937_64 rng(9);
  PointCloud D = random_cloud(4, 2, rng);
  const TorusPoint sigma({0.5, -0.5});
  const auto sec = approximate_pullback_section(sigma, D, 1.0, {1.0}, cfg, p);
  REQUIRE(sec.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(sec.points[i] == evolve_to(sigma, D.points[i], 1.0, cfg, p));
}

TEST_CASE("pullback sections") {
  const ModelParams p = testing_support::small_params(4);
  IntegratorConfig cfg;
  cfg.h = 0.02;
  std::mt19937_64 rng(10);
  const PointCloud D = random_cloud(4, 3, rng);
  const TorusPoint sigma({1.0, 0.2});
  SUBCASE("union over depths contains each single depth") {
    const auto both = approximate_pullback_section(sigma, D, 1.0, {1.0, 2.0}, cfg, p);
    const auto one = approximate_pullback_section(sigma, D, 1.0, {2.0}, cfg, p);
    CHECK(both.size() == 6);
    CHECK(hausdorff_semidist(one, both) == 0.0);
  }
  SUBCASE("depth below T is rejected") {
    CHECK_THROWS_AS(approximate_pullback_section(sigma, D, 2.0, {1.0}, cfg, p), DomainError);
  }
  SUBCASE("forward defect vanishes at t = 0") {
    const auto fam = build_pullback_family(torus_grid(2, 3), D, 1.0, {1.0}, Provenance::pullback_B_eps, cfg, p);
    CHECK(forward_invariance_defect(fam, 0.0, cfg, p) == 0.0);
    CHECK(to_string(fam.provenance) == "pullback_B_eps");
  }
}

TEST_CASE("forward attraction curve") {
  const ModelParams p = testing_support::homogeneous_params(3);
  IntegratorConfig cfg;
  cfg.h = 0.01;
  SetFamilySample fam;
  for (const auto& s : torus_grid(2, 2)) fam.entries.push_back({s, PointCloud{{SystemState(3)}}});
  std::mt19937_64 rng(4);
  const PointCloud B = random_cloud(3, 3, rng);
  const auto curve = forward_attraction_curve(B, fam, {0.0, 1.0, 2.0, 4.0}, {TorusPoint({0.0, 0.0})}, cfg, p);
  REQUIRE(curve.values.size() == 4);
  for (std::size_t j = 1; j < 4; ++j) CHECK(curve.values[j] < curve.values[j - 1]);
}

TEST_CASE("exponential rate fits") {
  std::vector<double> t, v;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(i * 0.5);
    v.push_back(3.0 * std::exp(-0.5 * i * 0.5));
  }
  SUBCASE("exact data") {
    const RateFit f = fit_exponential_rate(t, v, 0.0);
    CHECK(f.alpha == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(f.C == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.residual < 1e-10);
    CHECK(f.n_points == 21);
  }
  SUBCASE("constant curve has zero rate") {
    const RateFit f = fit_exponential_rate(t, std::vector<double>(t.size(), 2.0), 0.0);
    CHECK(std::abs(f.alpha) < 1e-12);
  }
  SUBCASE("multiplicative noise") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 0.05);
    std::vector<double> noisy = v;
    for (double& x : noisy) x *= std::exp(n(rng));
    const RateFit f = fit_exponential_rate(t, noisy, 0.0);
    CHECK(f.alpha >= 0.45);
    CHECK(f.alpha <= 0.55);
  }
  SUBCASE("floor drops points") {
    const RateFit f = fit_exponential_rate(t, v, v[10]);
    CHECK(f.n_points == 10);
    CHECK(f.t_max == t[9]);
  }
  SUBCASE("too few points") {
    CHECK_THROWS_AS(fit_exponential_rate({0.0, 1.0, 2.0, 3.0}, {1.0, 0.5, 0.25, 0.125}, 0.0), InsufficientData);
  }
}
