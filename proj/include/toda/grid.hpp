#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace toda {

/// Euclidean disk D_r = {|z| < r} inside the Poincare disk, optionally shrunk
/// to the points at hyperbolic distance > shrink from its boundary.
struct DiskDomain {
  double radius = 0.5;
  double shrink = 0.0;

  DiskDomain(double r, double eps = 0.0);

  /// Hyperbolic radius 2 atanh(r) of D_r for the curvature -1 metric.
  double hyperbolic_radius() const;
  /// Euclidean radius of the shrunken disk.
  double effective_radius() const;
  bool contains(std::complex<double> z) const;
};

/// Hyperbolic distance from the origin to a point at Euclidean radius rho.
double hyperbolic_distance_from_origin(double rho);
/// Inverse of hyperbolic_distance_from_origin.
double euclidean_radius_of(double hyperbolic_radius);

/// Tensor-product polar grid on D_r: rho_k = k h (k = 0..n_r-1, h = r/(n_r-1)),
/// theta_l = 2 pi l / n_theta. All (0, l) are one logical node (index 0); ring
/// k >= 1 occupies indices 1 + (k-1) n_theta + l. Ring n_r-1 is the boundary.
class PolarGrid {
 public:
  PolarGrid(double radius, int n_r, int n_theta);

  double radius() const { return radius_; }
  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  double h() const { return h_; }
  double dtheta() const { return dtheta_; }

  std::size_t size() const { return 1 + static_cast<std::size_t>(n_r_ - 1) * n_theta_; }
  std::size_t index(int ring, int angle) const;
  int ring(std::size_t node) const;
  int angle(std::size_t node) const;
  double rho(std::size_t node) const { return rho_of_ring(ring(node)); }
  double rho_of_ring(int ring) const { return ring == n_r_ - 1 ? radius_ : ring * h_; }
  double theta(std::size_t node) const;
  std::complex<double> z(std::size_t node) const;
  bool is_boundary(std::size_t node) const { return ring(node) == n_r_ - 1; }
  /// Indices of interior nodes in ascending order.
  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }

  /// Same radius, spacing and node layout.
  bool same_layout(const PolarGrid& other) const;

  /// Grid made of rings 0..last_ring of this one (same h and n_theta).
  std::shared_ptr<const PolarGrid> truncated(int last_ring) const;

 private:
  double radius_;
  int n_r_;
  int n_theta_;
  double h_;
  double dtheta_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

GridPtr make_grid(double radius, int n_r, int n_theta);

/// Nodal samples of a real function on a PolarGrid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  static ScalarField from_function(GridPtr grid, const std::function<double(std::complex<double>)>& f);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;
  double max() const;
  double min() const;
  double max_interior() const;
  double min_interior() const;

  /// Bilinear interpolation in (rho, theta); p must lie in the closed disk of the grid.
  double interpolate(std::complex<double> p) const;
  /// Samples this field at the nodes of another grid (which must lie inside this one).
  ScalarField resample(GridPtr target) const;
  /// Restriction to a truncated grid of the same layout (rings 0..last_ring).
  ScalarField restrict_to(GridPtr sub) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Throws ConfigError unless both fields live on grids of identical layout.
void require_same_grid(const ScalarField& a, const ScalarField& b);

/// CSV with header `rho,theta,value`, rows ordered by ring then angle, 17
/// significant digits. The origin is written once per angle so the table is
/// rectangular (n_r * n_theta rows).
void write_field_csv(const ScalarField& field, const std::string& path);
std::string field_to_csv(const ScalarField& field);
ScalarField read_field_csv(const std::string& path);
ScalarField field_from_csv(const std::string& text);

}  // namespace toda
