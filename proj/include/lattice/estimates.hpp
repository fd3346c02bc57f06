#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lattice/field.hpp"
#include "lattice/integrator.hpp"
#include "lattice/model.hpp"
#include "lattice/torus.hpp"

namespace lattice {

struct Tolerances {
  double energy_abs = 1e-6;  // absolute, on energies and squared norms
  double tail_rel = 1e-3;    // relative, on tail comparisons
};

/// C^1 cutoff: 0 on [0,1], 1 on [2,inf), cubic smoothstep in between.
struct CutoffFn {
  static constexpr double max_slope = 1.5;  // chi0, attained at x = 3/2
  static double value(double x) noexcept;
  static double slope(double x) noexcept;
};

// alpha|u|^2 + |v|^2 + mu^2 alpha |Z|^2 with Z = (beta/k) z
double weighted_energy(const SystemState& state, const ModelParams& params);

// e^{-theta1 t} E0 + R0^2/theta1
double gronwall_envelope(double energy0, double t, const DerivedConstants& constants);

// Right-hand side of the norm bound (delta2/delta1) e^{-theta1 t}|phi0|^2 + R0^2/(theta1 delta1).
double norm_bound(double norm0_sq, double t, const DerivedConstants& constants);

// Time at which (delta2/delta1) e^{-theta1 t}|phi0|^2 = 3 R0^2/(theta1 delta1); 0 if already below.
double predicted_entry_time(double norm0_sq, const DerivedConstants& constants);

struct AbsorbingReport {
  std::optional<double> entry_time;  // first recorded t with |phi(t)|^2 <= R^2 (+ tol)
  double t_pred = 0.0;
  bool entered_by_prediction = false;
  bool norm_bound_ok = true;
  double worst_norm_excess = 0.0;  // max over t of |phi|^2 - bound (negative when satisfied)
  bool envelope_ok = true;
  double worst_envelope_excess = 0.0;  // max over t of weighted energy - envelope
  bool ok() const noexcept { return norm_bound_ok && envelope_ok && entered_by_prediction; }
};

AbsorbingReport absorbing_check(const Trajectory& trajectory, const ModelParams& params,
                                const DerivedConstants& constants, const Tolerances& tol = {});

// sum_{|m| >= M} |phi_m|_E^2
double tail_mass(const SystemState& state, long long M);

// sum_m chi(|m|/M) |phi_m|_E^2
double weighted_tail(const SystemState& state, long long M);

// C(M, a, b1, b2, b3), the steady forcing of the cut-off energy inequality
double tail_constant(long long M, const ModelParams& params, const DerivedConstants& constants);

// Smallest N with C(N)/(delta1 theta1) <= eps^2/2 (C is nonincreasing, so it holds for all M >= N).
long long tail_radius_for(double epsilon, const ModelParams& params, const DerivedConstants& constants);

// Smallest t >= T0 with (delta2/delta1) R^2 e^{-theta1 t} <= eps^2/2.
double tail_time_for(double epsilon, const DerivedConstants& constants);

struct TailReport {
  long long M = 0;
  double measured_tail = 0.0;
  double bound_transient = 0.0;
  double bound_steady = 0.0;
  double time = 0.0;
  bool within_bound = true;
};

struct TailCheckResult {
  std::vector<TailReport> reports;
  double epsilon = 0.0;
  long long N = 0;
  long long N1 = 0;  // 2N
  double t1 = 0.0;
  double tail_at_t1 = 0.0;  // max over the ensemble of sum_{|m|>=N1} |phi_m(t1)|^2
  bool bounds_ok = true;
  bool epsilon_ok = true;
};

/// Evolves every phi0 (each inside B(0,R)) and compares the measured cut-off
/// tails against the transient + steady bound at each (t, M). `sigmas` holds
/// either one symbol for all members or one per member.
TailCheckResult tail_check(const std::vector<TorusPoint>& sigmas, const std::vector<SystemState>& phi0s,
                           const std::vector<double>& times, const std::vector<long long>& m_grid, double epsilon,
                           const IntegratorConfig& config, const ModelParams& params,
                           const DerivedConstants& constants, const Tolerances& tol = {});

using StatePair = std::pair<SystemState, SystemState>;

struct LipschitzReport {
  std::vector<double> times;
  std::vector<double> worst_ratio;  // max over pairs of |phi_d(t)| / |phi_d(0)|
  std::vector<double> bound;        // L_t = sqrt(e^{C1 t})
  bool ok = true;
};

LipschitzReport lipschitz_growth(const std::vector<TorusPoint>& sigmas, const std::vector<StatePair>& pairs,
                                 const std::vector<double>& times, const IntegratorConfig& config,
                                 const ModelParams& params, const DerivedConstants& constants);

// beta^2 = e^{-theta2 (T* - t2) + C1 t2} + 4 chi0 (d1+d2+d3) e^{C1 T*} / (N3 (theta2 + C1))
double squeeze_beta_sq(double T_star, double N3, double t2, const ModelParams& params,
                       const DerivedConstants& constants);

struct SqueezeSearchRanges {
  double t2 = 1.0;
  double T_span = 40.0;
  double T_step = 0.05;
  int max_log2_N3 = 62;
  long long min_N3 = 1;
};

struct SqueezePair {
  bool found = false;
  double T_star = 0.0;
  long long N3 = 0;
  long long N_star = 0;  // 2 N3
  double beta_sq = 0.0;
  double best_beta_sq = 0.0;  // minimum over the scanned grid, reported on failure
};

/// Scans N3 over powers of two (ascending) and T* over [t2, t2 + T_span]
/// (ascending); the first pair with beta^2 < 1/4 wins.
SqueezePair find_squeezing_pair(const ModelParams& params, const DerivedConstants& constants,
                                const SqueezeSearchRanges& ranges);

struct SqueezeReport {
  double T_star = 0.0;
  long long N_star = 0;
  double t2 = 0.0;
  double beta_predicted = 0.0;
  double beta_measured = 0.0;
  double lipschitz_measured = 0.0;  // max |phi_d(T*)| / |phi_d(0)|
  double lipschitz_bound = 0.0;     // L_{T*}
  bool passed = false;
};

// |(I - P_N)(a - b)| / |a0 - b0|, 0 for identical initial data
double high_mode_ratio(const SystemState& a0, const SystemState& b0, const SystemState& a, const SystemState& b,
                       long long N_star);

SqueezeReport squeezing_test(const std::vector<TorusPoint>& sigmas, const std::vector<StatePair>& pairs,
                             double T_star, long long N_star, double t2, const IntegratorConfig& config,
                             const ModelParams& params, const DerivedConstants& constants);

// Largest first-entry time into B(0,R) over the ensemble, on the recorded grid.
double absorbing_entry_time(const std::vector<TorusPoint>& sigmas, const std::vector<SystemState>& phi0s,
                            double horizon, const IntegratorConfig& config, const ModelParams& params,
                            const DerivedConstants& constants, const Tolerances& tol = {});

}  // namespace lattice
