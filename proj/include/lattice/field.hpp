#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lattice {

enum class Boundary { dirichlet, periodic };

/// Real sequence on the symmetric window m = -M..M of the integer lattice.
///
/// Storage index i corresponds to site m = i - M. Values outside the window are
/// treated as zero by the Dirichlet operators below.
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(int window_radius);
  LatticeField(int window_radius, std::vector<double> values);

  static LatticeField delta(int window_radius, int site, double value = 1.0);
  static LatticeField constant(int window_radius, double value);

  int window_radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int site) const { return values_[index(site)]; }
  double& at(int site) { return values_[index(site)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double norm_sq() const noexcept;
  bool all_finite() const noexcept;

  LatticeField& operator+=(const LatticeField& other);
  LatticeField& operator-=(const LatticeField& other);
  LatticeField& operator*=(double s) noexcept;

  friend bool operator==(const LatticeField&, const LatticeField&) = default;

 private:
  std::size_t index(int site) const;

  int radius_ = 0;
  std::vector<double> values_ = std::vector<double>(1, 0.0);
};

LatticeField operator+(LatticeField a, const LatticeField& b);
LatticeField operator-(LatticeField a, const LatticeField& b);
LatticeField operator*(double s, LatticeField a);

double inner(const LatticeField& a, const LatticeField& b);

// (Au)_m = 2u_m - u_{m+1} - u_{m-1}
LatticeField discrete_laplacian(const LatticeField& field, Boundary boundary = Boundary::dirichlet);

// Forward (Bu)_m = u_{m+1} - u_m and backward (B*u)_m = u_{m-1} - u_m of the
// zero-extended field. The results live on the window of radius M+1, which
// holds their full support, so (Au,u) = |Bu|^2 = |B*u|^2 exactly.
std::pair<LatticeField, LatticeField> difference_ops(const LatticeField& field);

/// Phase-space point (u, v, z) in E = l2 x l2 x l2.
class SystemState {
 public:
  SystemState() = default;
  explicit SystemState(int window_radius);
  SystemState(LatticeField u, LatticeField v, LatticeField z);

  int window_radius() const noexcept { return u_.window_radius(); }
  std::size_t sites() const noexcept { return u_.size(); }

  const LatticeField& u() const noexcept { return u_; }
  const LatticeField& v() const noexcept { return v_; }
  const LatticeField& z() const noexcept { return z_; }
  LatticeField& u() noexcept { return u_; }
  LatticeField& v() noexcept { return v_; }
  LatticeField& z() noexcept { return z_; }

  // |phi_m|_E^2 = u_m^2 + v_m^2 + z_m^2
  double site_magnitude_sq(int site) const;
  double norm_sq() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;

  SystemState& operator+=(const SystemState& other);
  SystemState& operator-=(const SystemState& other);
  SystemState& operator*=(double s) noexcept;

  friend bool operator==(const SystemState&, const SystemState&) = default;

 private:
  LatticeField u_, v_, z_;
};

SystemState operator+(SystemState a, const SystemState& b);
SystemState operator-(SystemState a, const SystemState& b);
SystemState operator*(double s, SystemState a);

double distance(const SystemState& a, const SystemState& b);
double distance_sq(const SystemState& a, const SystemState& b);

// (I - P_N) phi: keeps only sites with |m| >= cutoff.
SystemState high_mode_part(const SystemState& state, long long cutoff);

}  // namespace lattice
