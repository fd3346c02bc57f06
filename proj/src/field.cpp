#include "lattice/field.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "lattice/errors.hpp"

namespace lattice {

namespace {

void require_same_window(int a, int b) {
  if (a != b) {
    throw DomainError("window radius mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

LatticeField::LatticeField(int window_radius) : radius_(window_radius) {
  if (window_radius < 0) throw DomainError("window radius must be nonnegative");
  values_.assign(static_cast<std::size_t>(2 * window_radius + 1), 0.0);
}

LatticeField::LatticeField(int window_radius, std::vector<double> values)
    : radius_(window_radius), values_(std::move(values)) {
  if (window_radius < 0) throw DomainError("window radius must be nonnegative");
  if (values_.size() != static_cast<std::size_t>(2 * window_radius + 1)) {
    throw DomainError("expected " + std::to_string(2 * window_radius + 1) + " site values, got " +
                      std::to_string(values_.size()));
  }
  if (!all_finite()) throw DomainError("lattice field entries must be finite");
}

LatticeField LatticeField::delta(int window_radius, int site, double value) {
  LatticeField f(window_radius);
  f.at(site) = value;
  return f;
}

LatticeField LatticeField::constant(int window_radius, double value) {
  LatticeField f(window_radius);
  for (double& x : f.values_) x = value;
  return f;
}

std::size_t LatticeField::index(int site) const {
  if (std::abs(site) > radius_) {
    throw DomainError("site " + std::to_string(site) + " outside window of radius " +
                      std::to_string(radius_));
  }
  return static_cast<std::size_t>(site + radius_);
}

double LatticeField::norm_sq() const noexcept {
  double s = 0.0;
  for (double x : values_) s += x * x;
  return s;
}

bool LatticeField::all_finite() const noexcept {
  for (double x : values_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

LatticeField& LatticeField::operator+=(const LatticeField& other) {
  require_same_window(radius_, other.radius_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

LatticeField& LatticeField::operator-=(const LatticeField& other) {
  require_same_window(radius_, other.radius_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

LatticeField& LatticeField::operator*=(double s) noexcept {
  for (double& x : values_) x *= s;
  return *this;
}

LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }
LatticeField operator*(double s, LatticeField a) { return a *= s; }

double inner(const LatticeField& a, const LatticeField& b) {
  require_same_window(a.window_radius(), b.window_radius());
  auto x = a.values();
  auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

LatticeField discrete_laplacian(const LatticeField& field, Boundary boundary) {
  const auto u = field.values();
  const std::size_t n = u.size();
  LatticeField out(field.window_radius());
  auto a = out.values();
  for (std::size_t i = 0; i < n; ++i) {
    double left = 0.0;
    double right = 0.0;
    if (boundary == Boundary::periodic) {
      left = u[(i + n - 1) % n];
      right = u[(i + 1) % n];
    } else {
      left = i > 0 ? u[i - 1] : 0.0;
      right = i + 1 < n ? u[i + 1] : 0.0;
    }
    a[i] = 2.0 * u[i] - right - left;
  }
  return out;
}

std::pair<LatticeField, LatticeField> difference_ops(const LatticeField& field) {
  // u vanishes outside [-M, M], so Bu and B*u are supported on [-M-1, M+1].
  const int radius = field.window_radius();
  LatticeField fwd(radius + 1);
  LatticeField bwd(radius + 1);
  auto u = [&](int m) { return (m < -radius || m > radius) ? 0.0 : field.at(m); };
  for (int m = -radius - 1; m <= radius + 1; ++m) {
    fwd.at(m) = u(m + 1) - u(m);
    bwd.at(m) = u(m - 1) - u(m);
  }
  return {std::move(fwd), std::move(bwd)};
}

SystemState::SystemState(int window_radius)
    : u_(window_radius), v_(window_radius), z_(window_radius) {}

SystemState::SystemState(LatticeField u, LatticeField v, LatticeField z)
    : u_(std::move(u)), v_(std::move(v)), z_(std::move(z)) {
  require_same_window(u_.window_radius(), v_.window_radius());
  require_same_window(u_.window_radius(), z_.window_radius());
}

double SystemState::site_magnitude_sq(int site) const {
  const double a = u_.at(site);
  const double b = v_.at(site);
  const double c = z_.at(site);
  return a * a + b * b + c * c;
}

double SystemState::norm_sq() const noexcept { return u_.norm_sq() + v_.norm_sq() + z_.norm_sq(); }

double SystemState::norm() const noexcept { return std::sqrt(norm_sq()); }

bool SystemState::all_finite() const noexcept {
  return u_.all_finite() && v_.all_finite() && z_.all_finite();
}

SystemState& SystemState::operator+=(const SystemState& other) {
  u_ += other.u_;
  v_ += other.v_;
  z_ += other.z_;
  return *this;
}

SystemState& SystemState::operator-=(const SystemState& other) {
  u_ -= other.u_;
  v_ -= other.v_;
  z_ -= other.z_;
  return *this;
}

SystemState& SystemState::operator*=(double s) noexcept {
  u_ *= s;
  v_ *= s;
  z_ *= s;
  return *this;
}

SystemState operator+(SystemState a, const SystemState& b) { return a += b; }
SystemState operator-(SystemState a, const SystemState& b) { return a -= b; }
SystemState operator*(double s, SystemState a) { return a *= s; }

double distance_sq(const SystemState& a, const SystemState& b) {
  require_same_window(a.window_radius(), b.window_radius());
  double s = 0.0;
  auto acc = [&s](std::span<const double> x, std::span<const double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
  };
  acc(a.u().values(), b.u().values());
  acc(a.v().values(), b.v().values());
  acc(a.z().values(), b.z().values());
  return s;
}

double distance(const SystemState& a, const SystemState& b) { return std::sqrt(distance_sq(a, b)); }

SystemState high_mode_part(const SystemState& state, long long cutoff) {
  SystemState out(state.window_radius());
  const int radius = state.window_radius();
  for (int m = -radius; m <= radius; ++m) {
    if (std::llabs(m) >= cutoff) {
      out.u().at(m) = state.u().at(m);
      out.v().at(m) = state.v().at(m);
      out.z().at(m) = state.z().at(m);
    }
  }
  return out;
}

}  // namespace lattice
