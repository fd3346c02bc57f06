#include "lattice/torus.hpp"

#include <cmath>
#include <numbers>

#include "lattice/errors.hpp"

namespace lattice {

double wrap_angle(double angle) noexcept {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (angle >= -pi && angle < pi) return angle;
  double r = angle - two_pi * std::floor((angle + pi) / two_pi);
  // floor can land exactly on the excluded endpoint after rounding
  if (r >= pi) r -= two_pi;
  if (r < -pi) r = -pi;
  return r;
}

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double& c : coords_) {
    if (!std::isfinite(c)) throw DomainError("torus coordinates must be finite");
    c = wrap_angle(c);
  }
}

double TorusPoint::norm() const noexcept {
  double s = 0.0;
  for (double c : coords_) s += c * c;
  return std::sqrt(s);
}

FrequencyVector::FrequencyVector(std::vector<double> x) : x_(std::move(x)) {
  if (x_.empty()) throw ConfigError("frequency vector must be nonempty");
  for (double v : x_) {
    if (!std::isfinite(v) || v == 0.0) throw ConfigError("frequencies must be finite and nonzero");
  }
}

FrequencyVector FrequencyVector::frozen(std::size_t kappa) {
  FrequencyVector f;
  f.x_.assign(kappa, 0.0);
  return f;
}

bool FrequencyVector::is_frozen() const noexcept {
  for (double v : x_) {
    if (v != 0.0) return false;
  }
  return true;
}

TorusPoint translate_symbol(const TorusPoint& sigma0, double s, const FrequencyVector& x) {
  if (sigma0.dimension() != x.dimension()) {
    throw DomainError("torus dimension does not match frequency vector");
  }
  std::vector<double> out(sigma0.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * s + sigma0[i];
  return TorusPoint(std::move(out));
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dimension() != b.dimension()) throw DomainError("torus dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    const double d = wrap_angle(a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<TorusPoint> torus_grid(std::size_t kappa, std::size_t per_axis, double phase) {
  if (kappa == 0 || per_axis == 0) throw DomainError("torus grid needs kappa >= 1 and per_axis >= 1");
  const double step = 2.0 * std::numbers::pi / static_cast<double>(per_axis);
  std::size_t total = 1;
  for (std::size_t i = 0; i < kappa; ++i) total *= per_axis;
  std::vector<TorusPoint> grid;
  grid.reserve(total);
  std::vector<double> coords(kappa);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < kappa; ++i) {
      const auto k = rest % per_axis;
      rest /= per_axis;
      coords[i] = -std::numbers::pi + (static_cast<double>(k) + phase) * step;
    }
    grid.emplace_back(coords);
  }
  return grid;
}

}  // namespace lattice
