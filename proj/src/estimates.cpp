#include "lattice/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lattice/errors.hpp"
#include "lattice/parallel.hpp"

namespace lattice {

double CutoffFn::value(double x) noexcept {
  if (x <= 1.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double s = x - 1.0;
  return s * s * (3.0 - 2.0 * s);
}

double CutoffFn::slope(double x) noexcept {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  const double s = x - 1.0;
  return 6.0 * s * (1.0 - s);
}

double weighted_energy(const SystemState& state, const ModelParams& params) {
  const double mu = params.k / params.beta;
  const double zscale = params.beta / params.k;
  const double Z_sq = zscale * zscale * state.z().norm_sq();
  return params.alpha * state.u().norm_sq() + state.v().norm_sq() + mu * mu * params.alpha * Z_sq;
}

double gronwall_envelope(double energy0, double t, const DerivedConstants& c) {
  if (t < 0.0) throw DomainError("envelope time must be nonnegative");
  return std::exp(-c.theta1 * t) * energy0 + c.R0_sq / c.theta1;
}

double norm_bound(double norm0_sq, double t, const DerivedConstants& c) {
  return c.delta2 / c.delta1 * std::exp(-c.theta1 * t) * norm0_sq + c.R0_sq / (c.theta1 * c.delta1);
}

double predicted_entry_time(double norm0_sq, const DerivedConstants& c) {
  const double target = 3.0 * c.R0_sq / (c.theta1 * c.delta1);
  const double start = c.delta2 / c.delta1 * norm0_sq;
  if (start <= target) return 0.0;
  if (target <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(start / target) / c.theta1;
}

AbsorbingReport absorbing_check(const Trajectory& traj, const ModelParams& params, const DerivedConstants& c,
                                const Tolerances& tol) {
  if (traj.states.empty()) throw DomainError("empty trajectory");
  AbsorbingReport r;
  const double n0 = traj.states.front().norm_sq();
  const double e0 = weighted_energy(traj.states.front(), params);
  const double R_sq = c.R * c.R;
  r.t_pred = predicted_entry_time(n0, c);
  r.worst_norm_excess = -std::numeric_limits<double>::infinity();
  r.worst_envelope_excess = -std::numeric_limits<double>::infinity();

  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const double t = traj.times[j];
    const double nsq = traj.states[j].norm_sq();
    if (!r.entry_time && nsq <= R_sq + tol.energy_abs) r.entry_time = t;
    r.worst_norm_excess = std::max(r.worst_norm_excess, nsq - norm_bound(n0, t, c));
    r.worst_envelope_excess =
        std::max(r.worst_envelope_excess, weighted_energy(traj.states[j], params) - gronwall_envelope(e0, t, c));
  }
  r.norm_bound_ok = r.worst_norm_excess <= tol.energy_abs;
  r.envelope_ok = r.worst_envelope_excess <= tol.energy_abs;
  // A trajectory that ends before t_pred without entering is inconclusive, not a failure.
  r.entered_by_prediction = r.entry_time ? *r.entry_time <= r.t_pred : traj.t_end < r.t_pred;
  return r;
}

double tail_mass(const SystemState& state, long long M) {
  const int radius = state.window_radius();
  if (M > radius) {
    throw DomainError("tail radius " + std::to_string(M) + " exceeds window radius " + std::to_string(radius));
  }
  double sum = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    if (std::llabs(m) >= M) sum += state.site_magnitude_sq(m);
  }
  return sum;
}

double weighted_tail(const SystemState& state, long long M) {
  if (M < 1) throw DomainError("cutoff radius must be at least 1");
  const int radius = state.window_radius();
  double sum = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    const double w = CutoffFn::value(static_cast<double>(std::abs(m)) / static_cast<double>(M));
    if (w > 0.0) sum += w * state.site_magnitude_sq(m);
  }
  return sum;
}

namespace {

double tail_sq_sum(const LatticeField& f, long long M) {
  double s = 0.0;
  const int radius = f.window_radius();
  for (int m = -radius; m <= radius; ++m) {
    if (std::llabs(m) >= M) s += f.at(m) * f.at(m);
  }
  return s;
}

double diffusion_weight(const ModelParams& p) { return p.d1 * p.alpha + p.d2 + p.d3 * p.alpha; }

}  // namespace

double tail_constant(long long M, const ModelParams& p, const DerivedConstants& c) {
  if (M < 1) throw DomainError("tail constant needs M >= 1");
  const double kappa = static_cast<double>(p.kappa);
  const double pi_sq = std::numbers::pi * std::numbers::pi;
  const double forcing = 2.0 * p.alpha * p.c1 * p.c1 / (p.lambda + p.k) * tail_sq_sum(p.b1, M) +
                         2.0 * p.c2 * p.c2 / p.lambda * tail_sq_sum(p.b2, M) +
                         2.0 * c.mu * p.alpha * p.c3 * p.c3 / (c.mu * p.lambda + p.k) * tail_sq_sum(p.b3, M);
  return forcing * kappa * pi_sq + p.lambda * tail_sq_sum(p.a, M) +
         4.0 * c.chi0 * c.R * c.R * diffusion_weight(p) / static_cast<double>(M);
}

long long tail_radius_for(double epsilon, const ModelParams& p, const DerivedConstants& c) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double target = epsilon * epsilon / 2.0 * c.delta1 * c.theta1;
  const long long radius = p.window_radius();
  for (long long N = 1; N <= radius; ++N) {
    if (tail_constant(N, p, c) <= target) return N;
  }
  // Past the window only the diffusion term K/N remains.
  const double K = 4.0 * c.chi0 * c.R * c.R * diffusion_weight(p);
  const long long N = std::max(radius + 1, static_cast<long long>(std::ceil(K / target)));
  return tail_constant(N, p, c) <= target ? N : N + 1;
}

double tail_time_for(double epsilon, const DerivedConstants& c) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double ratio = 2.0 * (c.delta2 / c.delta1) * c.R * c.R / (epsilon * epsilon);
  const double t = ratio > 1.0 ? std::log(ratio) / c.theta1 : 0.0;
  return std::max(c.T0, t);
}

namespace {

const TorusPoint& member_symbol(const std::vector<TorusPoint>& sigmas, std::size_t i, std::size_t count) {
  if (sigmas.empty()) throw DomainError("no symbol samples");
  if (sigmas.size() != 1 && sigmas.size() != count) {
    throw DomainError("symbol list must hold one entry or one per ensemble member");
  }
  return sigmas.size() == 1 ? sigmas.front() : sigmas[i];
}

void require_in_ball(const SystemState& s, const DerivedConstants& c, const char* what) {
  const double limit = c.R * c.R * (1.0 + 1e-12) + 1e-300;
  if (s.norm_sq() > limit) throw DomainError(std::string(what) + " lies outside B(0,R)");
}

// Sorted, de-duplicated step grid.
std::vector<double> snapped_grid(std::vector<double> times, double h) {
  for (double& t : times) t = snap_time(t, h);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::size_t index_of(const std::vector<double>& grid, double t) {
  return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
}

}  // namespace

TailCheckResult tail_check(const std::vector<TorusPoint>& sigmas, const std::vector<SystemState>& phi0s,
                           const std::vector<double>& times, const std::vector<long long>& m_grid, double epsilon,
                           const IntegratorConfig& config, const ModelParams& params, const DerivedConstants& c,
                           const Tolerances& tol) {
  for (const auto& phi : phi0s) require_in_ball(phi, c, "tail initial state");
  for (long long M : m_grid) {
    if (M < 1) throw DomainError("cutoff radius must be at least 1");
  }

  TailCheckResult res;
  res.epsilon = epsilon;
  res.N = tail_radius_for(epsilon, params, c);
  res.N1 = 2 * res.N;
  // Round t1 up onto the step grid so the sampled time is never earlier than required.
  const double t1_exact = tail_time_for(epsilon, c);
  res.t1 = std::ceil(t1_exact / config.h - 1e-9) * config.h;

  std::vector<double> requested = times;
  requested.push_back(res.t1);
  const std::vector<double> grid = snapped_grid(requested, config.h);
  const bool t1_measurable = res.N1 <= params.window_radius();

  struct MemberOut {
    std::vector<double> tails;  // [time index in `times`][M index], flattened
    double at_t1 = 0.0;
  };
  const std::size_t nm = m_grid.size();
  auto members = parallel_map(phi0s.size(), [&](std::size_t i) {
    const auto states = evolve_sampled(member_symbol(sigmas, i, phi0s.size()), phi0s[i], grid, config, params);
    MemberOut out;
    out.tails.resize(times.size() * nm);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const SystemState& s = states[index_of(grid, snap_time(times[ti], config.h))];
      for (std::size_t mi = 0; mi < nm; ++mi) out.tails[ti * nm + mi] = weighted_tail(s, m_grid[mi]);
    }
    if (t1_measurable) out.at_t1 = tail_mass(states[index_of(grid, res.t1)], res.N1);
    return out;
  });

  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = snap_time(times[ti], config.h);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      TailReport rep;
      rep.M = m_grid[mi];
      rep.time = t;
      for (const auto& m : members) rep.measured_tail = std::max(rep.measured_tail, m.tails[ti * nm + mi]);
      rep.bound_transient = c.delta2 / c.delta1 * c.R * c.R * std::exp(-c.theta1 * t);
      rep.bound_steady = tail_constant(rep.M, params, c) / (c.delta1 * c.theta1);
      rep.within_bound = rep.measured_tail <= (rep.bound_transient + rep.bound_steady) * (1.0 + tol.tail_rel);
      res.bounds_ok = res.bounds_ok && rep.within_bound;
      res.reports.push_back(rep);
    }
  }
  for (const auto& m : members) res.tail_at_t1 = std::max(res.tail_at_t1, m.at_t1);
  res.epsilon_ok = res.tail_at_t1 <= epsilon * epsilon;
  return res;
}

LipschitzReport lipschitz_growth(const std::vector<TorusPoint>& sigmas, const std::vector<StatePair>& pairs,
                                 const std::vector<double>& times, const IntegratorConfig& config,
                                 const ModelParams& params, const DerivedConstants& c) {
  for (const auto& [a, b] : pairs) {
    require_in_ball(a, c, "Lipschitz initial state");
    require_in_ball(b, c, "Lipschitz initial state");
  }
  const std::vector<double> grid = snapped_grid(times, config.h);

  auto ratios = parallel_map(pairs.size(), [&](std::size_t i) {
    const TorusPoint& sigma = member_symbol(sigmas, i, pairs.size());
    const auto& [a0, b0] = pairs[i];
    const double d0 = distance(a0, b0);
    std::vector<double> out(grid.size(), 0.0);
    if (d0 == 0.0) return out;
    const auto as = evolve_sampled(sigma, a0, grid, config, params);
    const auto bs = evolve_sampled(sigma, b0, grid, config, params);
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] = distance(as[j], bs[j]) / d0;
    return out;
  });

  LipschitzReport rep;
  rep.times = grid;
  rep.worst_ratio.assign(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (const auto& r : ratios) rep.worst_ratio[j] = std::max(rep.worst_ratio[j], r[j]);
    rep.bound.push_back(std::exp(0.5 * c.C1 * grid[j]));
    rep.ok = rep.ok && rep.worst_ratio[j] <= rep.bound[j];
  }
  return rep;
}

double squeeze_beta_sq(double T_star, double N3, double t2, const ModelParams& p, const DerivedConstants& c) {
  if (!(N3 > 0.0)) throw DomainError("N3 must be positive");
  const double first = std::exp(-c.theta2 * (T_star - t2) + c.C1 * t2);
  const double second =
      4.0 * c.chi0 * (p.d1 + p.d2 + p.d3) * std::exp(c.C1 * T_star) / (N3 * (c.theta2 + c.C1));
  return first + second;
}

SqueezePair find_squeezing_pair(const ModelParams& p, const DerivedConstants& c, const SqueezeSearchRanges& r) {
  if (!(c.theta2 > 0.0)) throw DomainError("squeezing search needs theta2 > 0");
  if (!(r.T_step > 0.0) || r.T_span < 0.0) throw DomainError("invalid T* search range");
  const auto n_T = static_cast<long long>(std::floor(r.T_span / r.T_step + 1e-9));

  SqueezePair best;
  best.best_beta_sq = std::numeric_limits<double>::infinity();
  for (int e = 0; e <= r.max_log2_N3; ++e) {
    const long long N3 = 1LL << e;
    if (N3 < r.min_N3) continue;
    for (long long i = 0; i <= n_T; ++i) {
      const double T = r.t2 + static_cast<double>(i) * r.T_step;
      const double b2 = squeeze_beta_sq(T, static_cast<double>(N3), r.t2, p, c);
      best.best_beta_sq = std::min(best.best_beta_sq, b2);
      if (b2 < 0.25) {
        best.found = true;
        best.T_star = T;
        best.N3 = N3;
        best.N_star = 2 * N3;
        best.beta_sq = b2;
        return best;
      }
    }
  }
  return best;
}

double high_mode_ratio(const SystemState& a0, const SystemState& b0, const SystemState& a, const SystemState& b,
                       long long N_star) {
  const double d0 = distance(a0, b0);
  if (d0 == 0.0) return 0.0;
  const int radius = a.window_radius();
  double sum = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    if (std::llabs(m) < N_star) continue;
    const double du = a.u().at(m) - b.u().at(m);
    const double dv = a.v().at(m) - b.v().at(m);
    const double dz = a.z().at(m) - b.z().at(m);
    sum += du * du + dv * dv + dz * dz;
  }
  return std::sqrt(sum) / d0;
}

SqueezeReport squeezing_test(const std::vector<TorusPoint>& sigmas, const std::vector<StatePair>& pairs,
                             double T_star, long long N_star, double t2, const IntegratorConfig& config,
                             const ModelParams& params, const DerivedConstants& c) {
  for (const auto& [a, b] : pairs) {
    require_in_ball(a, c, "squeezing initial state");
    require_in_ball(b, c, "squeezing initial state");
  }
  SqueezeReport rep;
  rep.T_star = snap_time(T_star, config.h);
  rep.N_star = N_star;
  rep.t2 = t2;
  rep.beta_predicted = std::sqrt(squeeze_beta_sq(T_star, static_cast<double>(N_star) / 2.0, t2, params, c));
  rep.lipschitz_bound = std::exp(0.5 * c.C1 * rep.T_star);

  auto ratios = parallel_map(pairs.size(), [&](std::size_t i) {
    const TorusPoint& sigma = member_symbol(sigmas, i, pairs.size());
    const auto& [a0, b0] = pairs[i];
    const double d0 = distance(a0, b0);
    if (d0 == 0.0) return std::pair<double, double>{0.0, 0.0};
    const SystemState a = evolve_to(sigma, a0, rep.T_star, config, params);
    const SystemState b = evolve_to(sigma, b0, rep.T_star, config, params);
    return std::pair<double, double>{high_mode_ratio(a0, b0, a, b, N_star), distance(a, b) / d0};
  });
  for (const auto& [hi, full] : ratios) {
    rep.beta_measured = std::max(rep.beta_measured, hi);
    rep.lipschitz_measured = std::max(rep.lipschitz_measured, full);
  }
  rep.passed = rep.beta_measured <= rep.beta_predicted && rep.beta_predicted < 0.5;
  return rep;
}

double absorbing_entry_time(const std::vector<TorusPoint>& sigmas, const std::vector<SystemState>& phi0s,
                            double horizon, const IntegratorConfig& config, const ModelParams& params,
                            const DerivedConstants& c, const Tolerances& tol) {
  const double R_sq = c.R * c.R;
  const std::int64_t steps = snap_steps(horizon, config.h);
  const std::int64_t stride = std::max<std::int64_t>(1, config.record_stride);
  auto entries = parallel_map(phi0s.size(), [&](std::size_t i) {
    if (phi0s[i].norm_sq() <= R_sq + tol.energy_abs) return 0.0;
    const TorusPoint& sigma = member_symbol(sigmas, i, phi0s.size());
    Rk4Stepper stepper(params);
    std::vector<double> y = flatten(phi0s[i]);
    for (std::int64_t j = 0; j < steps; ++j) {
      stepper.advance(y, sigma, static_cast<double>(j) * config.h, config.h);
      const std::int64_t done = j + 1;
      if (done % stride != 0 && done != steps) continue;
      double nsq = 0.0;
      for (double v : y) nsq += v * v;
      if (nsq <= R_sq + tol.energy_abs) return static_cast<double>(done) * config.h;
    }
    return std::numeric_limits<double>::infinity();
  });
  double worst = 0.0;
  for (double e : entries) worst = std::max(worst, e);
  if (std::isinf(worst)) throw InsufficientData("ensemble did not enter B(0,R) within the horizon");
  return worst;
}

}  // namespace lattice
