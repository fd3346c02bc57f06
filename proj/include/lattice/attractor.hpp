#pragma once

#include <string_view>
#include <vector>

#include "lattice/field.hpp"
#include "lattice/integrator.hpp"
#include "lattice/model.hpp"
#include "lattice/torus.hpp"

namespace lattice {

struct PointCloud {
  std::vector<SystemState> points;

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
};

// sup_{a in A} inf_{b in B} |a - b|
double hausdorff_semidist(const PointCloud& A, const PointCloud& B);
// max of both semidistances
double hausdorff_dist(const PointCloud& A, const PointCloud& B);

enum class Provenance { uniform_attractor, pullback_A_eps, pullback_B_eps };
std::string_view to_string(Provenance p) noexcept;

struct FamilyEntry {
  TorusPoint sigma;
  PointCloud cloud;
};

struct SetFamilySample {
  std::vector<FamilyEntry> entries;
  Provenance provenance = Provenance::pullback_A_eps;
  double T_used = 0.0;
  std::vector<double> s_grid;

  // Largest distance from any family symbol to its nearest other symbol.
  double symbol_spacing() const;
  // max_j min_{k != j} hausdorff_dist(cloud_j, cloud_k); 0 for fewer than two entries.
  double resolution() const;
  // sqrt(kappa)/2 times the symbol spacing: farthest a torus point can sit from a grid node.
  double coverage_tolerance() const;
  // Index of the entry whose symbol is nearest to sigma in the torus metric.
  std::size_t nearest(const TorusPoint& sigma, double* dist = nullptr) const;
  // nearest(), but throws CoverageError beyond coverage_tolerance().
  std::size_t covering(const TorusPoint& sigma) const;
  PointCloud merged() const;
};

struct UniformAttractorSample {
  PointCloud cloud;                // all endpoints U_{sigma_j}(T_burn, 0) phi_i
  SetFamilySample by_symbol;       // the same points keyed by theta_{T_burn} sigma_j
  double resolution = 0.0;         // by_symbol.resolution()
  double stationarity_shift = 0.0; // max_j dist between clouds at T_burn and T_burn + extra at matched symbols
  bool stationary = true;          // shift < resolution (or both vanish)
};

/// Endpoints of every (sigma_j, phi_i) pair after T_burn. The stationarity run
/// starts at theta_{-extra} sigma_j and lasts T_burn + extra, so its endpoints
/// carry the same symbols. extra <= 0 uses extra = T_burn.
UniformAttractorSample approximate_uniform_attractor(const std::vector<TorusPoint>& symbols,
                                                     const std::vector<SystemState>& b0_samples, double T_burn,
                                                     const IntegratorConfig& config, const ModelParams& params,
                                                     double extra = 0.0);

// union over s in s_grid of U_sigma(0, -s) D
PointCloud approximate_pullback_section(const TorusPoint& sigma, const PointCloud& D, double T,
                                        const std::vector<double>& s_grid, const IntegratorConfig& config,
                                        const ModelParams& params);

SetFamilySample build_pullback_family(const std::vector<TorusPoint>& symbols, const PointCloud& D, double T,
                                      const std::vector<double>& s_grid, Provenance provenance,
                                      const IntegratorConfig& config, const ModelParams& params);

// max_j d_H(U_{sigma_j}(t,0) cloud_j, cloud at the sample nearest theta_t sigma_j)
double forward_invariance_defect(const SetFamilySample& family, double t, const IntegratorConfig& config,
                                 const ModelParams& params);

struct AttractionCurve {
  std::vector<double> times;
  std::vector<double> values;  // sup over sampled sigma of d_H
  double resolution = 0.0;
};

AttractionCurve forward_attraction_curve(const PointCloud& B, const SetFamilySample& family,
                                         const std::vector<double>& t_grid, const std::vector<TorusPoint>& sigmas,
                                         const IntegratorConfig& config, const ModelParams& params);

struct RateFit {
  double C = 0.0;
  double alpha = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual = 0.0;  // rms of log residuals
  std::size_t n_points = 0;
};

// Least squares of log d_H against t over the points strictly above `floor`.
RateFit fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values, double floor);

}  // namespace lattice
