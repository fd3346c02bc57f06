#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lattice/field.hpp"
#include "lattice/model.hpp"
#include "lattice/torus.hpp"

namespace lattice {

enum class Method { rk4 };

struct IntegratorConfig {
  double h = 1e-3;
  Method method = Method::rk4;
  std::int64_t record_stride = 1;
};

// Horizons are snapped to the nearest multiple of h.
std::int64_t snap_steps(double t, double h);
double snap_time(double t, double h);

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<TorusPoint> symbols;  // symbols[j] = theta_{times[j]} sigma0
  double t_end = 0.0;               // snapped horizon
};

/// Classical four-stage Runge-Kutta for phi' = G(phi, theta_t sigma0) - Theta phi.
///
/// The symbol is advanced in closed form at stage offsets (0, h/2, h/2, h),
/// so step j only depends on sigma0 through theta_{j h + c h} sigma0.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const ModelParams& params);

  // Advances the flat buffer [u | v | z] from t to t + h.
  void advance(std::vector<double>& y, const TorusPoint& sigma0, double t, double h);

 private:
  void rhs(const double* y, const TorusPoint& sigma, double* dy) const;

  const ModelParams& params_;
  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

std::vector<double> flatten(const SystemState& state);
SystemState unflatten(const std::vector<double>& y, int window_radius);

SystemState step(const SystemState& state, const TorusPoint& sigma0, double t, double h,
                 const ModelParams& params);

using StepObserver = std::function<void(std::int64_t step_index, double time, const SystemState& state)>;

/// Runs `steps` steps from time 0 with symbol path theta_t sigma0. The observer,
/// if set, sees step 0, every `stride`-th step and the final step.
SystemState integrate(const TorusPoint& sigma0, const SystemState& phi0, std::int64_t steps, double h,
                      const ModelParams& params, std::int64_t stride = 0, const StepObserver& observer = {});

// phi(t) = U_{sigma0}(t, 0) phi0 recorded every record_stride steps (and at t_end).
Trajectory evolve_process(const TorusPoint& sigma0, const SystemState& phi0, double t_end,
                          const IntegratorConfig& config, const ModelParams& params);

// Endpoint U_{sigma0}(t_end, 0) phi0 without recording.
SystemState evolve_to(const TorusPoint& sigma0, const SystemState& phi0, double t_end,
                      const IntegratorConfig& config, const ModelParams& params);

// States at each requested time (snapped, nondecreasing) along U_{sigma0}(., 0) phi0.
std::vector<SystemState> evolve_sampled(const TorusPoint& sigma0, const SystemState& phi0,
                                        const std::vector<double>& times, const IntegratorConfig& config,
                                        const ModelParams& params);

// U_sigma(0, -s) phi0 = U_{theta_{-s} sigma}(s, 0) phi0
SystemState evolve_pullback(const TorusPoint& sigma, const SystemState& phi0, double s,
                            const IntegratorConfig& config, const ModelParams& params);

// |U_{sigma0}(t+s,0) phi0 - U_{theta_s sigma0}(t,0) U_{sigma0}(s,0) phi0|
double cocycle_residual(const TorusPoint& sigma0, const SystemState& phi0, double s, double t,
                        const IntegratorConfig& config, const ModelParams& params);

// Step-doubling estimate |y_h - y_{h/2}| * 16/15 of the global error at horizon t.
double richardson_error_estimate(const TorusPoint& sigma0, const SystemState& phi0, double t,
                                 const IntegratorConfig& config, const ModelParams& params);

}  // namespace lattice
