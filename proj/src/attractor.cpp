#include "lattice/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lattice/errors.hpp"
#include "lattice/parallel.hpp"

namespace lattice {

namespace {

void require_nonempty(const PointCloud& c) {
  if (c.empty()) throw DomainError("Hausdorff distance of an empty cloud");
}

}  // namespace

double hausdorff_semidist(const PointCloud& A, const PointCloud& B) {
  require_nonempty(A);
  require_nonempty(B);
  const int radius = A.points.front().window_radius();
  for (const auto& p : B.points) {
    if (p.window_radius() != radius) throw DomainError("clouds live on different windows");
  }
  double worst_sq = 0.0;
  for (const auto& a : A.points) {
    if (a.window_radius() != radius) throw DomainError("clouds live on different windows");
    double best_sq = std::numeric_limits<double>::infinity();
    for (const auto& b : B.points) {
      best_sq = std::min(best_sq, distance_sq(a, b));
      if (best_sq <= worst_sq) break;  // cannot raise the sup any more
    }
    worst_sq = std::max(worst_sq, best_sq);
  }
  return std::sqrt(worst_sq);
}

double hausdorff_dist(const PointCloud& A, const PointCloud& B) {
  return std::max(hausdorff_semidist(A, B), hausdorff_semidist(B, A));
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::uniform_attractor:
      return "uniform_attractor";
    case Provenance::pullback_A_eps:
      return "pullback_A_eps";
    case Provenance::pullback_B_eps:
      return "pullback_B_eps";
  }
  return "unknown";
}

double SetFamilySample::symbol_spacing() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (k != j) best = std::min(best, torus_distance(entries[j].sigma, entries[k].sigma));
    }
    if (std::isfinite(best)) worst = std::max(worst, best);
  }
  return worst;
}

double SetFamilySample::resolution() const {
  if (entries.size() < 2) return 0.0;
  const std::size_t n = entries.size();
  std::vector<double> d(n * n, 0.0);
  auto rows = parallel_map(n, [&](std::size_t j) {
    std::vector<double> row(n, 0.0);
    for (std::size_t k = j + 1; k < n; ++k) row[k] = hausdorff_dist(entries[j].cloud, entries[k].cloud);
    return row;
  });
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) d[j * n + k] = d[k * n + j] = rows[j][k];
  }
  // Nearest neighbour in symbol space, not in cloud space: the lookup error
  // this floor has to absorb comes from replacing a symbol by its grid node.
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double best_sym = std::numeric_limits<double>::infinity();
    double dh = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double ds = torus_distance(entries[j].sigma, entries[k].sigma);
      if (ds < best_sym - 1e-12) {
        best_sym = ds;
        dh = d[j * n + k];
      } else if (std::abs(ds - best_sym) <= 1e-12) {
        dh = std::max(dh, d[j * n + k]);
      }
    }
    worst = std::max(worst, dh);
  }
  return worst;
}

double SetFamilySample::coverage_tolerance() const {
  if (entries.empty()) return 0.0;
  const double kappa = static_cast<double>(entries.front().sigma.dimension());
  return 0.5 * std::sqrt(kappa) * symbol_spacing() * (1.0 + 1e-9);
}

std::size_t SetFamilySample::nearest(const TorusPoint& sigma, double* dist) const {
  if (entries.empty()) throw DomainError("empty set family");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const double d = torus_distance(sigma, entries[j].sigma);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::size_t SetFamilySample::covering(const TorusPoint& sigma) const {
  double d = 0.0;
  const std::size_t j = nearest(sigma, &d);
  const double tol = entries.size() > 1 ? coverage_tolerance() : 0.0;
  if (d > tol + 1e-12) {
    throw CoverageError("no family symbol within " + std::to_string(tol) + " of the query (nearest at " +
                        std::to_string(d) + ")");
  }
  return j;
}

PointCloud SetFamilySample::merged() const {
  PointCloud out;
  for (const auto& e : entries) out.points.insert(out.points.end(), e.cloud.points.begin(), e.cloud.points.end());
  return out;
}

UniformAttractorSample approximate_uniform_attractor(const std::vector<TorusPoint>& symbols,
                                                     const std::vector<SystemState>& b0_samples, double T_burn,
                                                     const IntegratorConfig& config, const ModelParams& params,
                                                     double extra) {
  if (symbols.empty() || b0_samples.empty()) throw DomainError("uniform attractor needs symbols and samples");
  const double T = snap_time(T_burn, config.h);
  const double more = snap_time(extra > 0.0 ? extra : T, config.h);
  const std::size_t ns = symbols.size();
  const std::size_t np = b0_samples.size();

  auto runs = parallel_map(ns * np, [&](std::size_t idx) {
    const TorusPoint& sigma = symbols[idx / np];
    const SystemState& phi = b0_samples[idx % np];
    const SystemState base = evolve_to(sigma, phi, T, config, params);
    const TorusPoint earlier = translate_symbol(sigma, -more, params.frequencies);
    const SystemState longer = evolve_to(earlier, phi, T + more, config, params);
    return std::pair<SystemState, SystemState>{base, longer};
  });

  UniformAttractorSample out;
  out.by_symbol.provenance = Provenance::uniform_attractor;
  out.by_symbol.T_used = T;
  out.by_symbol.s_grid = {T};
  std::vector<PointCloud> longer_clouds(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    FamilyEntry e{translate_symbol(symbols[j], T, params.frequencies), {}};
    for (std::size_t i = 0; i < np; ++i) {
      e.cloud.points.push_back(runs[j * np + i].first);
      longer_clouds[j].points.push_back(runs[j * np + i].second);
      out.cloud.points.push_back(runs[j * np + i].first);
    }
    out.by_symbol.entries.push_back(std::move(e));
  }
  out.resolution = out.by_symbol.resolution();
  for (std::size_t j = 0; j < ns; ++j) {
    out.stationarity_shift =
        std::max(out.stationarity_shift, hausdorff_dist(out.by_symbol.entries[j].cloud, longer_clouds[j]));
  }
  out.stationary = out.stationarity_shift < out.resolution || out.stationarity_shift == 0.0;
  return out;
}

namespace {

void check_depths(double T, const std::vector<double>& s_grid, double h) {
  if (s_grid.empty()) throw DomainError("empty pullback depth grid");
  for (double s : s_grid) {
    if (s < T - 0.5 * h) throw DomainError("pullback depth below T");
  }
}

}  // namespace

PointCloud approximate_pullback_section(const TorusPoint& sigma, const PointCloud& D, double T,
                                        const std::vector<double>& s_grid, const IntegratorConfig& config,
                                        const ModelParams& params) {
  check_depths(T, s_grid, config.h);
  require_nonempty(D);
  PointCloud out;
  for (double s : s_grid) {
    for (const auto& d : D.points) out.points.push_back(evolve_pullback(sigma, d, s, config, params));
  }
  return out;
}

SetFamilySample build_pullback_family(const std::vector<TorusPoint>& symbols, const PointCloud& D, double T,
                                      const std::vector<double>& s_grid, Provenance provenance,
                                      const IntegratorConfig& config, const ModelParams& params) {
  check_depths(T, s_grid, config.h);
  require_nonempty(D);
  const std::size_t per_symbol = s_grid.size() * D.size();
  auto states = parallel_map(symbols.size() * per_symbol, [&](std::size_t idx) {
    const std::size_t j = idx / per_symbol;
    const std::size_t r = idx % per_symbol;
    return evolve_pullback(symbols[j], D.points[r % D.size()], s_grid[r / D.size()], config, params);
  });
  SetFamilySample fam;
  fam.provenance = provenance;
  fam.T_used = T;
  fam.s_grid = s_grid;
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    FamilyEntry e{symbols[j], {}};
    e.cloud.points.assign(states.begin() + static_cast<std::ptrdiff_t>(j * per_symbol),
                          states.begin() + static_cast<std::ptrdiff_t>((j + 1) * per_symbol));
    fam.entries.push_back(std::move(e));
  }
  return fam;
}

double forward_invariance_defect(const SetFamilySample& family, double t, const IntegratorConfig& config,
                                 const ModelParams& params) {
  if (family.entries.empty()) throw DomainError("empty set family");
  const double ts = snap_time(t, config.h);
  // Resolve coverage first so a CoverageError is raised before any simulation.
  std::vector<std::size_t> targets;
  for (const auto& e : family.entries) {
    targets.push_back(family.covering(translate_symbol(e.sigma, ts, params.frequencies)));
  }
  auto defects = parallel_map(family.entries.size(), [&](std::size_t j) {
    const auto& e = family.entries[j];
    PointCloud moved;
    for (const auto& p : e.cloud.points) moved.points.push_back(evolve_to(e.sigma, p, ts, config, params));
    return hausdorff_semidist(moved, family.entries[targets[j]].cloud);
  });
  return *std::max_element(defects.begin(), defects.end());
}

AttractionCurve forward_attraction_curve(const PointCloud& B, const SetFamilySample& family,
                                         const std::vector<double>& t_grid, const std::vector<TorusPoint>& sigmas,
                                         const IntegratorConfig& config, const ModelParams& params) {
  require_nonempty(B);
  if (sigmas.empty()) throw DomainError("no symbol samples for the attraction curve");
  std::vector<double> grid;
  for (double t : t_grid) {
    const double s = snap_time(t, config.h);
    if (!grid.empty() && s <= grid.back()) throw DomainError("time grid must be increasing");
    grid.push_back(s);
  }
  // targets[q][i]: family entry for theta_{t_i} sigma_q
  std::vector<std::vector<std::size_t>> targets(sigmas.size());
  for (std::size_t q = 0; q < sigmas.size(); ++q) {
    for (double t : grid) targets[q].push_back(family.covering(translate_symbol(sigmas[q], t, params.frequencies)));
  }

  const std::size_t nb = B.size();
  auto dists = parallel_map(sigmas.size() * nb, [&](std::size_t idx) {
    const std::size_t q = idx / nb;
    const auto states = evolve_sampled(sigmas[q], B.points[idx % nb], grid, config, params);
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      PointCloud one{{states[i]}};
      d[i] = hausdorff_semidist(one, family.entries[targets[q][i]].cloud);
    }
    return d;
  });

  AttractionCurve curve;
  curve.times = grid;
  curve.values.assign(grid.size(), 0.0);
  curve.resolution = family.resolution();
  for (const auto& d : dists) {
    for (std::size_t i = 0; i < grid.size(); ++i) curve.values[i] = std::max(curve.values[i], d[i]);
  }
  return curve;
}

RateFit fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values, double floor) {
  if (times.size() != values.size()) throw DomainError("curve times and values differ in length");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (values[i] > floor && values[i] > 0.0 && std::isfinite(values[i])) {
      ts.push_back(times[i]);
      ys.push_back(std::log(values[i]));
    }
  }
  if (ts.size() < 5) {
    throw InsufficientData("rate fit needs at least 5 points above the noise floor, got " +
                           std::to_string(ts.size()));
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  if (stt == 0.0) throw InsufficientData("rate fit needs at least two distinct times");
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    ss += r * r;
  }
  RateFit fit;
  fit.C = std::exp(intercept);
  fit.alpha = -slope;
  fit.t_min = *std::min_element(ts.begin(), ts.end());
  fit.t_max = *std::max_element(ts.begin(), ts.end());
  fit.residual = std::sqrt(ss / n);
  fit.n_points = ts.size();
  return fit;
}

}  // namespace lattice
