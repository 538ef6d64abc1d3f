#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>

#include "toda/grid.hpp"

namespace toda {

/// Poincare density g(z) = 4 / (1 - |z|^2)^2 of the complete curvature -1 metric.
double metric_density(std::complex<double> z);

/// Factor (1 - rho^2)^2 / 4 turning the Euclidean Laplacian into Delta_{g}.
double laplace_beltrami_factor(double rho);

/// Five-point polar stencil of the Euclidean Laplacian in flux form. For each
/// interior node the Laplacian is sum_j w_j (u_j - u_node). Multiplying a row
/// by the control-volume area gives a symmetric matrix.
class PolarStencil {
 public:
  struct Neighbor {
    std::size_t node;
    double weight;
  };

  explicit PolarStencil(const PolarGrid& grid);

  /// Neighbours of an interior node (empty for boundary nodes).
  const std::vector<Neighbor>& neighbors(std::size_t node) const { return neighbors_[node]; }
  /// Control-volume area of a node (pi h^2 / 4 at the origin, rho h dtheta on rings).
  double area(std::size_t node) const { return area_[node]; }
  /// (1 - rho^2)^2 / 4 at the node.
  double metric_factor(std::size_t node) const { return factor_[node]; }

 private:
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<double> area_;
  std::vector<double> factor_;
};

/// Discrete Delta_{g} u on interior nodes; boundary entries are set to zero.
ScalarField laplace_beltrami(const ScalarField& u);
/// Same, reusing a stencil built for u's grid.
ScalarField laplace_beltrami(const PolarStencil& stencil, const ScalarField& u);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Matrix of u -> Delta_{g} u - c u on interior rows with identity rows on the
/// boundary. Off-diagonal entries are nonnegative and interior row sums equal -c.
SparseMatrix assemble_operator(const PolarGrid& grid, const ScalarField& c);

struct Eigenpair {
  double lambda = 0.0;
  ScalarField phi;  ///< max-normalised, zero on the boundary
  int iterations = 0;
  double residual = 0.0;  ///< || -L0 phi - lambda phi ||_inf on interior nodes
};

/// Smallest Dirichlet eigenvalue of -Delta_{g} on the grid, by inverse iteration
/// on the symmetric generalized problem.
Eigenpair first_eigenpair(const GridPtr& grid, int max_iterations = 500, double rel_tol = 1e-10);

/// Discrete solution of Delta_{g} psi = -1 with psi = 0 on the boundary.
ScalarField torsion_function(const GridPtr& grid);

}  // namespace toda
