#include "lattice/integrator.hpp"

#include <cmath>
#include <string>

#include "lattice/errors.hpp"

namespace lattice {

std::int64_t snap_steps(double t, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step size must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("horizon must be finite and nonnegative");
  return static_cast<std::int64_t>(std::llround(t / h));
}

double snap_time(double t, double h) { return static_cast<double>(snap_steps(t, h)) * h; }

Rk4Stepper::Rk4Stepper(const ModelParams& params)
    : params_(params),
      n_(params.a.size()),
      k1_(3 * n_),
      k2_(3 * n_),
      k3_(3 * n_),
      k4_(3 * n_),
      tmp_(3 * n_) {}

void Rk4Stepper::rhs(const double* y, const TorusPoint& sigma, double* dy) const {
  const ModelParams& p = params_;
  const std::size_t n = n_;
  const double f1 = forcing_f(1, sigma, p);
  const double f2 = forcing_f(2, sigma, p);
  const double f3 = forcing_f(3, sigma, p);
  const double* u = y;
  const double* v = y + n;
  const double* z = y + 2 * n;
  double* du = dy;
  double* dv = dy + n;
  double* dz = dy + 2 * n;
  const double* a = p.a.values().data();
  const double* b1 = p.b1.values().data();
  const double* b2 = p.b2.values().data();
  const double* b3 = p.b3.values().data();
  const double lk = p.lambda + p.k;
  const double lb = p.lambda + p.beta;
  const bool periodic = p.boundary == Boundary::periodic;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t left = i - 1;
    std::size_t right = i + 1;
    double ul = 0.0, ur = 0.0, vl = 0.0, vr = 0.0, zl = 0.0, zr = 0.0;
    if (periodic) {
      left = (i + n - 1) % n;
      right = (i + 1) % n;
      ul = u[left], vl = v[left], zl = z[left];
      ur = u[right], vr = v[right], zr = z[right];
    } else {
      if (i > 0) ul = u[left], vl = v[left], zl = z[left];
      if (i + 1 < n) ur = u[right], vr = v[right], zr = z[right];
    }
    const double ui = u[i];
    const double vi = v[i];
    const double zi = z[i];
    const double reaction = ui * ui * vi - p.alpha * ui * ui * ui;
    du[i] = -p.d1 * (2.0 * ui - ur - ul) - lk * ui + reaction + p.beta * zi + b1[i] * f1;
    dv[i] = -p.d2 * (2.0 * vi - vr - vl) - p.lambda * vi - reaction + p.lambda * a[i] + b2[i] * f2;
    dz[i] = -p.d3 * (2.0 * zi - zr - zl) + p.k * ui - lb * zi + b3[i] * f3;
  }
}

void Rk4Stepper::advance(std::vector<double>& y, const TorusPoint& sigma0, double t, double h) {
  const std::size_t m = y.size();
  const FrequencyVector& x = params_.frequencies;
  const TorusPoint s0 = translate_symbol(sigma0, t, x);
  const TorusPoint s_half = translate_symbol(sigma0, t + 0.5 * h, x);
  const TorusPoint s_full = translate_symbol(sigma0, t + h, x);

  rhs(y.data(), s0, k1_.data());
  for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
  rhs(tmp_.data(), s_half, k2_.data());
  for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
  rhs(tmp_.data(), s_half, k3_.data());
  for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + h * k3_[i];
  rhs(tmp_.data(), s_full, k4_.data());

  const double w = h / 6.0;
  bool finite = true;
  for (std::size_t i = 0; i < m; ++i) {
    y[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    finite = finite && std::isfinite(y[i]);
  }
  if (!finite) throw DivergenceError(t + h);
}

std::vector<double> flatten(const SystemState& state) {
  const std::size_t n = state.sites();
  std::vector<double> y(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = state.u().values()[i];
    y[n + i] = state.v().values()[i];
    y[2 * n + i] = state.z().values()[i];
  }
  return y;
}

SystemState unflatten(const std::vector<double>& y, int window_radius) {
  SystemState s(window_radius);
  const std::size_t n = s.sites();
  if (y.size() != 3 * n) throw DomainError("flat state has wrong length");
  for (std::size_t i = 0; i < n; ++i) {
    s.u().values()[i] = y[i];
    s.v().values()[i] = y[n + i];
    s.z().values()[i] = y[2 * n + i];
  }
  return s;
}

namespace {

void require_window(const SystemState& phi, const ModelParams& params) {
  if (phi.window_radius() != params.window_radius()) {
    throw DomainError("state window " + std::to_string(phi.window_radius()) +
                      " does not match parameter window " + std::to_string(params.window_radius()));
  }
}

}  // namespace

SystemState step(const SystemState& state, const TorusPoint& sigma0, double t, double h,
                 const ModelParams& params) {
  require_window(state, params);
  if (!(h > 0.0)) throw DomainError("step size must be positive");
  Rk4Stepper stepper(params);
  std::vector<double> y = flatten(state);
  stepper.advance(y, sigma0, t, h);
  return unflatten(y, state.window_radius());
}

SystemState integrate(const TorusPoint& sigma0, const SystemState& phi0, std::int64_t steps, double h,
                      const ModelParams& params, std::int64_t stride, const StepObserver& observer) {
  require_window(phi0, params);
  if (steps < 0) throw DomainError("negative step count");
  const int radius = phi0.window_radius();
  if (observer) observer(0, 0.0, phi0);
  if (steps == 0) return phi0;

  Rk4Stepper stepper(params);
  std::vector<double> y = flatten(phi0);
  for (std::int64_t j = 0; j < steps; ++j) {
    stepper.advance(y, sigma0, static_cast<double>(j) * h, h);
    const std::int64_t done = j + 1;
    if (observer && ((stride > 0 && done % stride == 0) || done == steps)) {
      observer(done, static_cast<double>(done) * h, unflatten(y, radius));
    }
  }
  return unflatten(y, radius);
}

Trajectory evolve_process(const TorusPoint& sigma0, const SystemState& phi0, double t_end,
                          const IntegratorConfig& config, const ModelParams& params) {
  const std::int64_t steps = snap_steps(t_end, config.h);
  const std::int64_t stride = std::max<std::int64_t>(1, config.record_stride);
  Trajectory traj;
  traj.t_end = static_cast<double>(steps) * config.h;
  integrate(sigma0, phi0, steps, config.h, params, stride,
            [&](std::int64_t, double time, const SystemState& state) {
              traj.times.push_back(time);
              traj.states.push_back(state);
              traj.symbols.push_back(translate_symbol(sigma0, time, params.frequencies));
            });
  return traj;
}

SystemState evolve_to(const TorusPoint& sigma0, const SystemState& phi0, double t_end,
                      const IntegratorConfig& config, const ModelParams& params) {
  return integrate(sigma0, phi0, snap_steps(t_end, config.h), config.h, params);
}

std::vector<SystemState> evolve_sampled(const TorusPoint& sigma0, const SystemState& phi0,
                                        const std::vector<double>& times, const IntegratorConfig& config,
                                        const ModelParams& params) {
  require_window(phi0, params);
  std::vector<std::int64_t> targets;
  targets.reserve(times.size());
  for (double t : times) {
    const std::int64_t s = snap_steps(t, config.h);
    if (!targets.empty() && s < targets.back()) throw DomainError("sample times must be nondecreasing");
    targets.push_back(s);
  }
  std::vector<SystemState> out;
  out.reserve(times.size());
  if (targets.empty()) return out;

  Rk4Stepper stepper(params);
  std::vector<double> y = flatten(phi0);
  std::size_t next = 0;
  std::int64_t done = 0;
  auto emit = [&] {
    while (next < targets.size() && targets[next] == done) {
      out.push_back(unflatten(y, phi0.window_radius()));
      ++next;
    }
  };
  emit();
  while (next < targets.size()) {
    stepper.advance(y, sigma0, static_cast<double>(done) * config.h, config.h);
    ++done;
    emit();
  }
  return out;
}

SystemState evolve_pullback(const TorusPoint& sigma, const SystemState& phi0, double s,
                            const IntegratorConfig& config, const ModelParams& params) {
  const std::int64_t steps = snap_steps(s, config.h);
  if (steps == 0) return phi0;
  const double duration = static_cast<double>(steps) * config.h;
  const TorusPoint start = translate_symbol(sigma, -duration, params.frequencies);
  return integrate(start, phi0, steps, config.h, params);
}

double cocycle_residual(const TorusPoint& sigma0, const SystemState& phi0, double s, double t,
                        const IntegratorConfig& config, const ModelParams& params) {
  const std::int64_t ns = snap_steps(s, config.h);
  const std::int64_t nt = snap_steps(t, config.h);
  const SystemState direct = integrate(sigma0, phi0, ns + nt, config.h, params);
  const SystemState mid = integrate(sigma0, phi0, ns, config.h, params);
  const TorusPoint shifted = translate_symbol(sigma0, static_cast<double>(ns) * config.h, params.frequencies);
  const SystemState composed = integrate(shifted, mid, nt, config.h, params);
  return distance(direct, composed);
}

double richardson_error_estimate(const TorusPoint& sigma0, const SystemState& phi0, double t,
                                 const IntegratorConfig& config, const ModelParams& params) {
  const std::int64_t n = snap_steps(t, config.h);
  const SystemState coarse = integrate(sigma0, phi0, n, config.h, params);
  const SystemState fine = integrate(sigma0, phi0, 2 * n, 0.5 * config.h, params);
  return distance(coarse, fine) * 16.0 / 15.0;
}

}  // namespace lattice
