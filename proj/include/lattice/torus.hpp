#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lattice {

// Reduce an angle to the canonical representative in [-pi, pi).
double wrap_angle(double angle) noexcept;

/// Point on the kappa-torus, stored by canonical representatives in [-pi, pi).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> coords);  // reduces every coordinate
  static TorusPoint zero(std::size_t kappa) { return TorusPoint(std::vector<double>(kappa, 0.0)); }

  std::size_t dimension() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  // (sum sigma_i^2)^{1/2} on representatives
  double norm() const noexcept;

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// Drift x of the linear torus flow. Rational independence is declared by the
/// caller; floating point cannot certify it.
class FrequencyVector {
 public:
  FrequencyVector() = default;
  explicit FrequencyVector(std::vector<double> x);  // requires all entries nonzero and finite
  static FrequencyVector frozen(std::size_t kappa);  // x = 0, for autonomous reductions

  std::size_t dimension() const noexcept { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  std::span<const double> values() const noexcept { return x_; }
  bool is_frozen() const noexcept;

 private:
  std::vector<double> x_;
};

// theta_s sigma0 = (x s + sigma0) mod T^kappa
TorusPoint translate_symbol(const TorusPoint& sigma0, double s, const FrequencyVector& x);

// Euclidean distance between the closest lifts of a and b.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

// Uniform grid with `per_axis` points per coordinate, offset by `phase` (in grid steps).
std::vector<TorusPoint> torus_grid(std::size_t kappa, std::size_t per_axis, double phase = 0.0);

}  // namespace lattice
