#pragma once

#include <string>
#include <string_view>

#include "lattice/field.hpp"
#include "lattice/torus.hpp"

namespace lattice {

enum class ForcingProfile {
  sine,      // f_i(sigma) = c_i sin(sigma_j), j = (i-1) mod kappa
  sine_sum,  // f_i(sigma) = c_i kappa^{-1/2} sum_j sin(sigma_j)
};

ForcingProfile parse_forcing_profile(std::string_view name);
std::string_view to_string(ForcingProfile profile) noexcept;

/// Parameters of the three-component reversible Gray-Scott lattice system.
struct ModelParams {
  double d1 = 0.1, d2 = 0.1, d3 = 0.1;
  double k = 0.25, alpha = 1.0, beta = 0.1, lambda = 1.0;
  LatticeField a, b1, b2, b3;
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
  int kappa = 2;
  ForcingProfile forcing_profile = ForcingProfile::sine;
  FrequencyVector frequencies;
  Boundary boundary = Boundary::dirichlet;

  int window_radius() const noexcept { return a.window_radius(); }
};

// Coefficient sequence amplitude / (1 + m^2) on the window.
LatticeField inverse_square_profile(int window_radius, double amplitude);

// Default parameter set with a_m = a0/(1+m^2), b_im = b0/(1+m^2) and x = (1, sqrt 2).
ModelParams default_params(int window_radius = 50, double a0 = 0.03, double b0 = 0.003);

double forcing_f(int i, const TorusPoint& sigma, const ModelParams& params);

// G(phi, sigma) = (u^2 v - alpha u^3 + b1 f1, lambda a - u^2 v + alpha u^3 + b2 f2, b3 f3)
SystemState nonlinearity_G(const SystemState& state, const TorusPoint& sigma, const ModelParams& params);

// G(phi, sigma) - Theta phi, i.e. the right-hand side of the lattice system.
SystemState vector_field(const SystemState& state, const TorusPoint& sigma, const ModelParams& params);

struct H1Report {
  bool passed = false;
  double mu = 0.0;
  double left_bound = 0.0;   // 2 beta
  double cubic_bound = 0.0;  // 3 lambda / (2 mu - 1)
  double sum_bound = 0.0;    // beta + lambda
  std::string failing;       // name of the first violated inequality, empty on pass
};

H1Report check_H1(const ModelParams& params);

struct DerivedConstants {
  double mu = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double R0_sq = 0.0;
  double R = 0.0;
  double chi0 = 0.0;
  double C0 = 0.0;
  double L0 = 0.0;
  double C1 = 0.0;
  // time after which U_sigma(t,0) B0 stays inside B0 by the closed-form bound
  double T0 = 0.0;
};

DerivedConstants derive_constants(const ModelParams& params);

// Validates params (positivity, windows, kappa, (H1)) and throws ConfigError naming the failure.
void validate(const ModelParams& params);

}  // namespace lattice
