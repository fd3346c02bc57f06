#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lattice/errors.hpp"
#include "lattice/estimates.hpp"
#include "lattice/random.hpp"
#include "test_helpers.hpp"

using namespace lattice;
using testing_support::close_rel;
using testing_support::random_state;

TEST_CASE("cutoff shape") {
  CHECK(CutoffFn::value(0.0) == 0.0);
  CHECK(CutoffFn::value(1.0) == 0.0);
  CHECK(CutoffFn::value(2.0) == 1.0);
  CHECK(CutoffFn::value(7.0) == 1.0);
  CHECK(CutoffFn::slope(1.0) == 0.0);
  CHECK(CutoffFn::slope(2.0) == 0.0);
  CHECK(CutoffFn::slope(1.5) == CutoffFn::max_slope);
  CHECK(CutoffFn::value(1.25) == doctest::Approx(3 * 0.0625 - 2 * 0.015625));
  for (int i = 0; i <= 3000; ++i) {
    const double x = i * 1e-3;
    CHECK(CutoffFn::slope(x) <= CutoffFn::max_slope);
    CHECK(CutoffFn::slope(x) >= 0.0);
  }
  // the slope is the derivative of the value
  for (double x : {1.1, 1.3, 1.7, 1.95}) {
    const double fd = (CutoffFn::value(x + 1e-6) - CutoffFn::value(x - 1e-6)) / 2e-6;
    CHECK(fd == doctest::Approx(CutoffFn::slope(x)).epsilon(1e-6));
  }
}

TEST_CASE("weighted energy") {
  const ModelParams p = default_params(4);
  CHECK(weighted_energy(SystemState(4), p) == 0.0);
  SystemState s(4);
  s.u().at(0) = 1.0;
  CHECK(weighted_energy(s, p) == 1.0);
  std::mt19937_64 rng(2);
  ModelParams q = default_params(4);
  q.alpha = 1.7;
  for (int n = 0; n < 20; ++n) {
    const SystemState r = random_state(4, rng);
    const double plain = q.alpha * r.u().norm_sq() + r.v().norm_sq() + q.alpha * r.z().norm_sq();
    CHECK(close_rel(weighted_energy(r, q), plain, 1e-12));
  }
}

TEST_CASE("Gronwall envelope") {
  const DerivedConstants c = derive_constants(default_params(10));
  CHECK(gronwall_envelope(3.0, 0.0, c) == doctest::Approx(3.0 + c.R0_sq / c.theta1));
  CHECK(gronwall_envelope(3.0, 200.0, c) - c.R0_sq / c.theta1 <= 3.0 * std::exp(-c.theta1 * 200.0) + 1e-18);
  CHECK_THROWS_AS(gronwall_envelope(1.0, -1.0, c), DomainError);
}

TEST_CASE("absorbing check") {
  IntegratorConfig cfg;
  cfg.h = 1e-3;
  cfg.record_stride = 10;
  SUBCASE("zero start is already inside") {
    const ModelParams p = default_params(10);
    const auto c = derive_constants(p);
    const auto tr = evolve_process(TorusPoint({0.3, 0.3}), SystemState(10), 1.0, cfg, p);
    const auto r = absorbing_check(tr, p, c);
    REQUIRE(r.entry_time.has_value());
    CHECK(*r.entry_time == 0.0);
    CHECK(r.t_pred == 0.0);
    CHECK(r.ok());
  }
  SUBCASE("norm 10 enters by the predicted time") {
    const ModelParams p = default_params(20);
    const auto c = derive_constants(p);
    std::mt19937_64 rng(5);
    SystemState s = random_state(20, rng);
    s *= 10.0 / s.norm();
    const double tp = predicted_entry_time(s.norm_sq(), c);
    const auto tr = evolve_process(TorusPoint({1.0, -1.0}), s, tp + 1.0, cfg, p);
    const auto r = absorbing_check(tr, p, c);
    REQUIRE(r.entry_time.has_value());
    CHECK(*r.entry_time <= r.t_pred);
    CHECK(r.norm_bound_ok);
    CHECK(r.envelope_ok);
    // at t_pred the bound equals R^2 exactly
    CHECK(norm_bound(s.norm_sq(), tp, c) == doctest::Approx(c.R * c.R).epsilon(1e-12));
  }
  SUBCASE("homogeneous decay passes with the tolerance") {
    const ModelParams p = default_params(10, 0.0, 0.0);
    const auto c = derive_constants(p);
    std::mt19937_64 rng(6);
    const SystemState s = random_state(10, rng, 0.01);
    const auto tr = evolve_process(TorusPoint({0.0, 0.0}), s, 2.0, cfg, p);
    const auto r = absorbing_check(tr, p, c);
    CHECK(r.norm_bound_ok);
    CHECK(r.envelope_ok);
    CHECK(tr.states.back().norm() < s.norm());
  }
}

TEST_CASE("tail mass") {
  SUBCASE("delta at the origin has no tail") { CHECK(tail_mass(SystemState(LatticeField::delta(3, 0), LatticeField(3), LatticeField(3)), 1) == 0.0); }
  SUBCASE("all-ones u on [-2,2], M = 2") {
    const SystemState s(LatticeField::constant(2, 1.0), LatticeField(2), LatticeField(2));
    CHECK(tail_mass(s, 2) == 2.0);
    CHECK(tail_mass(s, 0) == 5.0);
  }
  SUBCASE("zero state") {
    for (long long M = 0; M <= 4; ++M) CHECK(tail_mass(SystemState(4), M) == 0.0);
  }
  SUBCASE("radius beyond the window") { CHECK_THROWS_AS(tail_mass(SystemState(4), 5), DomainError); }
  SUBCASE("weighted tail sits between the tails at M and 2M") {
    std::mt19937_64 rng(3);
    const SystemState s = random_state(30, rng);
    for (long long M = 1; M <= 15; ++M) {
      const double w = weighted_tail(s, M);
      CHECK(w <= tail_mass(s, M) + 1e-15);
      CHECK(w >= tail_mass(s, 2 * M) - 1e-15);
    }
  }
}

TEST_CASE("tail constant") {
  SUBCASE("homogeneous coefficients give 0") {
    const ModelParams p = default_params(10, 0.0, 0.0);
    const auto c = derive_constants(p);
    for (long long M = 1; M < 20; ++M) CHECK(tail_constant(M, p, c) == 0.0);
  }
  SUBCASE("with only the diffusion term, doubling M halves C") {
    const ModelParams p = default_params(10, 0.0, 0.0);
    DerivedConstants c = derive_constants(p);
    c.R = 1.3;
    for (long long M = 1; M < 20; ++M) CHECK(tail_constant(2 * M, p, c) == doctest::Approx(tail_constant(M, p, c) / 2));
  }
  SUBCASE("matches a brute-force sum and is nonincreasing") {
    ModelParams p = default_params(30, 0.05, 0.01);
    p.c2 = 0.5;
    p.alpha = 1.2;
    const auto c = derive_constants(p);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double prev = std::numeric_limits<double>::infinity();
    for (long long M = 1; M <= 35; ++M) {
      double s = 0.0;
      for (int m = -30; m <= 30; ++m) {
        if (std::abs(m) < M) continue;
        s += (2 * p.alpha * p.c1 * p.c1 / (p.lambda + p.k) * p.b1.at(m) * p.b1.at(m) +
              2 * p.c2 * p.c2 / p.lambda * p.b2.at(m) * p.b2.at(m) +
              2 * c.mu * p.alpha * p.c3 * p.c3 / (c.mu * p.lambda + p.k) * p.b3.at(m) * p.b3.at(m)) *
                 p.kappa * pi2 +
             p.lambda * p.a.at(m) * p.a.at(m);
      }
      s += 4 * c.chi0 * c.R * c.R * (p.d1 * p.alpha + p.d2 + p.d3 * p.alpha) / static_cast<double>(M);
      const double got = tail_constant(M, p, c);
      CHECK(close_rel(got, s, 1e-12));
      CHECK(got <= prev);
      prev = got;
    }
  }
}

TEST_CASE("tail radius and time for a target epsilon") {
  const ModelParams p = default_params(50);
  const auto c = derive_constants(p);
  const double eps = 0.1;
  const long long N = tail_radius_for(eps, p, c);
  CHECK(tail_constant(N, p, c) / (c.delta1 * c.theta1) <= eps * eps / 2);
  if (N > 1) CHECK(tail_constant(N - 1, p, c) / (c.delta1 * c.theta1) > eps * eps / 2);
  const double t1 = tail_time_for(eps, c);
  CHECK(t1 >= c.T0);
  CHECK(c.delta2 / c.delta1 * c.R * c.R * std::exp(-c.theta1 * t1) <= eps * eps / 2 * (1 + 1e-12));
}

TEST_CASE("tail check") {
  IntegratorConfig cfg;
  cfg.h = 1e-2;
  SUBCASE("unforced zero start has zero tails") {
    const ModelParams p = default_params(10, 0.0, 0.0);
    const auto c = derive_constants(p);
    const auto res = tail_check({TorusPoint({0.0, 0.0})}, {SystemState(10)}, {0.0, 1.0}, {1, 2, 4}, 0.1, cfg, p, c);
    for (const auto& r : res.reports) CHECK(r.measured_tail == 0.0);
    CHECK(res.bounds_ok);
  }
  SUBCASE("defaults on a small window stay within the bound") {
    const ModelParams p = default_params(20);
    const auto c = derive_constants(p);
    SeedTree tree(4);
    std::vector<SystemState> phis;
    for (int i = 0; i < 4; ++i) {
      auto rng = tree.stream(kTestData, i);
      phis.push_back(random_state_in_ball(20, c.R, rng));
    }
    const auto res = tail_check({TorusPoint({0.5, 0.5})}, phis, {0.0, 1.0, 5.0, 10.0}, {1, 2, 4, 8}, 0.1, cfg, p, c);
    CHECK(res.bounds_ok);
    CHECK(res.N1 == 2 * res.N);
  }
  SUBCASE("start outside B(0,R) is rejected") {
    const ModelParams p = default_params(10);
    const auto c = derive_constants(p);
    SystemState big(10);
    big.u().at(0) = 2 * c.R;
    CHECK_THROWS_AS(tail_check({TorusPoint({0.0, 0.0})}, {big}, {0.0}, {1}, 0.1, cfg, p, c), DomainError);
  }
}

TEST_CASE("Lipschitz growth") {
  const ModelParams p = default_params(10);
  const auto c = derive_constants(p);
  IntegratorConfig cfg;
  cfg.h = 1e-2;
  SeedTree tree(9);
  auto rng = tree.stream(kTestData, 0);
  const SystemState a = random_state_in_ball(10, c.R, rng);
  SUBCASE("identical pair gives ratio 0") {
    const auto rep = lipschitz_growth({TorusPoint({0.0, 0.0})}, {{a, a}}, {c.T0, 1.0}, cfg, p, c);
    for (double r : rep.worst_ratio) CHECK(r == 0.0);
    CHECK(rep.ok);
  }
  SUBCASE("tiny perturbation under a frozen symbol follows the linearization") {
    ModelParams fp = p;
    fp.frequencies = FrequencyVector::frozen(2);
    const auto fc = derive_constants(fp);
    SystemState d = random_state_in_ball(10, 1.0, rng);
    d *= 1.0 / d.norm();
    SystemState b1 = a + 1e-6 * d;
    SystemState b2 = a + 2e-6 * d;
    const TorusPoint sigma({0.4, 0.1});
    const auto r1 = lipschitz_growth({sigma}, {{a, b1}}, {1.0}, cfg, fp, fc);
    const auto r2 = lipschitz_growth({sigma}, {{a, b2}}, {1.0}, cfg, fp, fc);
    // both ratios approximate the same derivative norm
    CHECK(r1.worst_ratio[0] == doctest::Approx(r2.worst_ratio[0]).epsilon(1e-4));
    CHECK(r1.worst_ratio[0] <= r1.bound[0]);
  }
  SUBCASE("random pairs stay below L_T") {
    std::vector<StatePair> pairs;
    for (int i = 0; i < 30; ++i) pairs.emplace_back(random_state_in_ball(10, c.R, rng), random_state_in_ball(10, c.R, rng));
    const auto rep = lipschitz_growth({TorusPoint({0.2, 0.9})}, pairs, {c.T0, 1.0}, cfg, p, c);
    CHECK(rep.ok);
    CHECK(rep.bound.back() == doctest::Approx(std::exp(0.5 * c.C1)));
  }
}

TEST_CASE("squeezing") {
  const ModelParams p = default_params(10);
  const auto c = derive_constants(p);
  IntegratorConfig cfg;
  cfg.h = 1e-2;
  SeedTree tree(10);
  auto rng = tree.stream(kTestData, 1);
  const SystemState a = random_state_in_ball(10, c.R, rng);
  const SystemState b = random_state_in_ball(10, c.R, rng);
  const TorusPoint sigma({1.0, 0.5});

  SUBCASE("beta^2 formula") {
    const double T = 3.0, N3 = 1e9, t2 = 1.0;
    const double expected = std::exp(-c.theta2 * (T - t2) + c.C1 * t2) +
                            4 * c.chi0 * (p.d1 + p.d2 + p.d3) * std::exp(c.C1 * T) / (N3 * (c.theta2 + c.C1));
    CHECK(squeeze_beta_sq(T, N3, t2, p, c) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("identical pair") {
    const auto rep = squeezing_test({sigma}, {{a, a}}, 1.0, 4, 0.5, cfg, p, c);
    CHECK(rep.beta_measured == 0.0);
  }
  SUBCASE("projection covering the window gives exactly 0") {
    const auto rep = squeezing_test({sigma}, {{a, b}}, 1.0, 11, 0.5, cfg, p, c);
    CHECK(rep.beta_measured == 0.0);
  }
  SUBCASE("ratio is symmetric in the pair") {
    const auto ea = evolve_to(sigma, a, 1.0, cfg, p);
    const auto eb = evolve_to(sigma, b, 1.0, cfg, p);
    CHECK(high_mode_ratio(a, b, ea, eb, 3) == high_mode_ratio(b, a, eb, ea, 3));
  }
  SUBCASE("search on defaults is deterministic and selects beta^2 < 1/4") {
    SqueezeSearchRanges r;
    r.t2 = 1.0;
    const auto s1 = find_squeezing_pair(p, c, r);
    const auto s2 = find_squeezing_pair(p, c, r);
    REQUIRE(s1.found);
    CHECK(s1.beta_sq < 0.25);
    CHECK(s1.T_star == s2.T_star);
    CHECK(s1.N_star == s2.N_star);
    CHECK(s1.N_star == 2 * s1.N3);
    // minimal N3: the previous power of two has no admissible T*
    if (s1.N3 > 1) {
      for (int i = 0; i <= 800; ++i) {
        CHECK(squeeze_beta_sq(r.t2 + i * r.T_step, static_cast<double>(s1.N3 / 2), r.t2, p, c) >= 0.25);
      }
    }
  }
  SUBCASE("homogeneous coefficients: search succeeds") {
    const ModelParams hp = default_params(10, 0.0, 0.0);
    const auto hc = derive_constants(hp);
    SqueezeSearchRanges r;
    r.t2 = 1.0;
    CHECK(find_squeezing_pair(hp, hc, r).found);
  }
  SUBCASE("smaller theta2 forces a later T*") {
    SqueezeSearchRanges r;
    r.t2 = 1.0;
    DerivedConstants slow = c;
    slow.theta2 = 0.8 * c.theta2;
    const auto slow_pair = find_squeezing_pair(p, slow, r);
    REQUIRE(slow_pair.found);
    // the decay term alone must already be below 1/4 at the slower rate
    const double decay_only = r.t2 + (c.C1 * r.t2 + std::log(4.0)) / slow.theta2;
    CHECK(slow_pair.T_star >= decay_only - r.T_step);
    CHECK(slow_pair.T_star > find_squeezing_pair(p, c, r).T_star);
  }
  SUBCASE("empty search range reports the best beta^2") {
    SqueezeSearchRanges r;
    r.t2 = 1.0;
    r.max_log2_N3 = 2;
    r.T_span = 1.0;
    const auto s = find_squeezing_pair(p, c, r);
    CHECK_FALSE(s.found);
    CHECK(s.best_beta_sq >= 0.25);
    CHECK(std::isfinite(s.best_beta_sq));
  }
}

TEST_CASE("absorbing entry time over an ensemble") {
  const ModelParams p = default_params(10);
  const auto c = derive_constants(p);
  IntegratorConfig cfg;
  cfg.h = 1e-2;
  SystemState big(10);
  big.u().at(0) = 3.0;
  const double t = absorbing_entry_time({TorusPoint({0.0, 0.0})}, {SystemState(10), big}, 40.0, cfg, p, c);
  CHECK(t > 0.0);
  CHECK(t <= predicted_entry_time(big.norm_sq(), c));
  CHECK_THROWS_AS(absorbing_entry_time({TorusPoint({0.0, 0.0})}, {big}, 0.05, cfg, p, c), InsufficientData);
}
