#include "lattice/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lattice/errors.hpp"

namespace lattice {

ForcingProfile parse_forcing_profile(std::string_view name) {
  if (name == "sine") return ForcingProfile::sine;
  if (name == "sine_sum") return ForcingProfile::sine_sum;
  throw ConfigError("unknown forcing_profile '" + std::string(name) + "' (valid: sine, sine_sum)");
}

std::string_view to_string(ForcingProfile profile) noexcept {
  switch (profile) {
    case ForcingProfile::sine:
      return "sine";
    case ForcingProfile::sine_sum:
      return "sine_sum";
  }
  return "unknown";
}

LatticeField inverse_square_profile(int window_radius, double amplitude) {
  LatticeField f(window_radius);
  for (int m = -window_radius; m <= window_radius; ++m) {
    f.at(m) = amplitude / (1.0 + static_cast<double>(m) * static_cast<double>(m));
  }
  return f;
}

ModelParams default_params(int window_radius, double a0, double b0) {
  ModelParams p;
  p.a = inverse_square_profile(window_radius, a0);
  p.b1 = inverse_square_profile(window_radius, b0);
  p.b2 = inverse_square_profile(window_radius, b0);
  p.b3 = inverse_square_profile(window_radius, b0);
  p.frequencies = FrequencyVector({1.0, std::numbers::sqrt2});
  return p;
}

double forcing_f(int i, const TorusPoint& sigma, const ModelParams& params) {
  if (i < 1 || i > 3) throw DomainError("forcing component index must be 1, 2 or 3");
  const double c = i == 1 ? params.c1 : (i == 2 ? params.c2 : params.c3);
  const std::size_t kappa = sigma.dimension();
  if (kappa == 0) throw DomainError("empty torus point");
  switch (params.forcing_profile) {
    case ForcingProfile::sine:
      return c * std::sin(sigma[static_cast<std::size_t>(i - 1) % kappa]);
    case ForcingProfile::sine_sum: {
      double s = 0.0;
      for (std::size_t j = 0; j < kappa; ++j) s += std::sin(sigma[j]);
      return c * s / std::sqrt(static_cast<double>(kappa));
    }
  }
  throw ConfigError("unknown forcing profile");
}

SystemState nonlinearity_G(const SystemState& state, const TorusPoint& sigma, const ModelParams& params) {
  const double f1 = forcing_f(1, sigma, params);
  const double f2 = forcing_f(2, sigma, params);
  const double f3 = forcing_f(3, sigma, params);
  const int radius = state.window_radius();
  SystemState g(radius);
  for (int m = -radius; m <= radius; ++m) {
    const double u = state.u().at(m);
    const double v = state.v().at(m);
    const double reaction = u * u * v - params.alpha * u * u * u;
    g.u().at(m) = reaction + params.b1.at(m) * f1;
    g.v().at(m) = params.lambda * params.a.at(m) - reaction + params.b2.at(m) * f2;
    g.z().at(m) = params.b3.at(m) * f3;
  }
  return g;
}

SystemState vector_field(const SystemState& state, const TorusPoint& sigma, const ModelParams& params) {
  SystemState rhs = nonlinearity_G(state, sigma, params);
  const LatticeField au = discrete_laplacian(state.u(), params.boundary);
  const LatticeField av = discrete_laplacian(state.v(), params.boundary);
  const LatticeField az = discrete_laplacian(state.z(), params.boundary);
  const int radius = state.window_radius();
  for (int m = -radius; m <= radius; ++m) {
    const double u = state.u().at(m);
    const double v = state.v().at(m);
    const double z = state.z().at(m);
    rhs.u().at(m) -= params.d1 * au.at(m) + (params.lambda + params.k) * u - params.beta * z;
    rhs.v().at(m) -= params.d2 * av.at(m) + params.lambda * v;
    rhs.z().at(m) -= params.d3 * az.at(m) - params.k * u + (params.lambda + params.beta) * z;
  }
  return rhs;
}

H1Report check_H1(const ModelParams& params) {
  const double rates[] = {params.d1, params.d2, params.d3, params.k, params.alpha, params.beta, params.lambda};
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigError("diffusion and kinetic rates must be finite and positive");
    }
  }
  H1Report report;
  report.mu = params.k / params.beta;
  report.left_bound = 2.0 * params.beta;
  report.sum_bound = params.beta + params.lambda;
  const double denom = 2.0 * report.mu - 1.0;
  report.cubic_bound = denom > 0.0 ? 3.0 * params.lambda / denom : std::numeric_limits<double>::infinity();

  if (!(report.left_bound < params.k)) {
    report.failing = "2β<k";
  } else if (!(params.k < report.cubic_bound)) {
    report.failing = "k<3λ/(2μ−1)";
  } else if (!(params.k < report.sum_bound)) {
    report.failing = "k<β+λ";
  }
  report.passed = report.failing.empty();
  return report;
}

void validate(const ModelParams& params) {
  const H1Report h1 = check_H1(params);
  if (!h1.passed) throw ConfigError("(H1) violated: " + h1.failing + " does not hold");
  const int radius = params.a.window_radius();
  if (params.b1.window_radius() != radius || params.b2.window_radius() != radius ||
      params.b3.window_radius() != radius) {
    throw ConfigError("coefficient sequences must share one window");
  }
  if (!(params.c1 > 0.0 && params.c2 > 0.0 && params.c3 > 0.0)) {
    throw ConfigError("forcing Lipschitz constants c1, c2, c3 must be positive");
  }
  if (params.kappa < 1 || static_cast<std::size_t>(params.kappa) != params.frequencies.dimension()) {
    throw ConfigError("kappa must be positive and match the frequency vector length");
  }
}

DerivedConstants derive_constants(const ModelParams& params) {
  validate(params);
  const double lam = params.lambda;
  const double k = params.k;
  const double beta = params.beta;
  const double alpha = params.alpha;
  const double kappa = static_cast<double>(params.kappa);
  const double pi_sq = std::numbers::pi * std::numbers::pi;

  DerivedConstants c;
  c.mu = k / beta;
  const double mu = c.mu;
  c.theta1 = std::min({1.5 * lam - (mu - 0.5) * k, lam / 2.0, 1.5 * lam + (mu / 2.0 - 1.0) * k / (mu * mu)});
  c.theta2 = std::min({lam + k - beta, 9.0 * lam / 5.0, lam + beta - k});
  if (!(c.theta1 > 0.0) || !(c.theta2 > 0.0)) {
    throw InconsistentParameters("theta1 or theta2 is not positive");
  }
  c.delta1 = std::min(1.0, alpha);
  c.delta2 = std::max(1.0, alpha);

  c.R0_sq = lam * params.a.norm_sq() +
            2.0 * alpha * kappa * params.c1 * params.c1 * pi_sq / (lam + k) * params.b1.norm_sq() +
            2.0 * kappa * params.c2 * params.c2 * pi_sq / lam * params.b2.norm_sq() +
            2.0 * mu * alpha * kappa * params.c3 * params.c3 * pi_sq / (mu * lam + k) * params.b3.norm_sq();
  c.R = 2.0 * std::sqrt(c.R0_sq) / std::sqrt(c.theta1 * c.delta1);
  c.chi0 = 1.5;

  // Schur test on the 3x3 matrix of block norms of Theta, with ||A|| <= 4.
  const double row_max = std::max({4.0 * params.d1 + lam + k + beta, 4.0 * params.d2 + lam,
                                   k + 4.0 * params.d3 + lam + beta});
  const double col_max = std::max({4.0 * params.d1 + lam + k + k, 4.0 * params.d2 + lam,
                                   beta + 4.0 * params.d3 + lam + beta});
  c.C0 = std::sqrt(row_max * col_max);

  // Trajectories from B0 satisfy |phi(t)|^2 <= (delta2/delta1 + 1/4) R^2 for all t >= 0.
  // On that ball the per-site Jacobian of G is bounded by sqrt2 (2 + 3 alpha) rho^2.
  const double rho_sq = (c.delta2 / c.delta1 + 0.25) * c.R * c.R;
  c.L0 = std::numbers::sqrt2 * (2.0 + 3.0 * alpha) * rho_sq;
  c.C1 = 2.0 * (c.C0 + c.L0);
  c.T0 = std::log(4.0 * c.delta2 / (3.0 * c.delta1)) / c.theta1;
  return c;
}

}  // namespace lattice
