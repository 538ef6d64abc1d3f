#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toda/grid.hpp"

namespace toda {

/// Coefficients (k_1, ..., k_{n-1}) of
///   Delta_g u_i + i(n-i) - k_i exp(2u_i - u_{i-1} - u_{i+1}) = 0,  u_0 = u_n = 0.
struct TodaCoefficients {
  int n = 2;
  std::vector<ScalarField> k;  ///< k[i-1] holds k_i

  TodaCoefficients() = default;
  TodaCoefficients(int rank, std::vector<ScalarField> fields);

  const GridPtr& grid() const { return k.front().grid(); }
  /// Fuchsian coefficients k_i = i(n-i) on a grid.
  static TodaCoefficients fuchsian(const GridPtr& grid, int rank);
  /// Constant coefficients k_i = values[i-1].
  static TodaCoefficients constant(const GridPtr& grid, const std::vector<double>& values);

  double sup() const;
  TodaCoefficients restrict_to(const GridPtr& sub) const;
};

/// Unknowns (u_1, ..., u_{n-1}); u_0 = u_n = 0 are implicit.
struct TodaState {
  std::vector<ScalarField> u;  ///< u[i-1] holds u_i

  TodaState() = default;
  explicit TodaState(std::vector<ScalarField> fields);
  TodaState(const GridPtr& grid, int rank, double fill = 0.0);

  int rank() const { return static_cast<int>(u.size()) + 1; }
  const GridPtr& grid() const { return u.front().grid(); }
  /// u_i at a node with the convention u_0 = u_n = 0 (i in 0..n).
  double at(int i, std::size_t node) const;
  /// E_i(u) = 2u_i - u_{i-1} - u_{i+1} at a node.
  double exponent(int i, std::size_t node) const;

  TodaState restrict_to(const GridPtr& sub) const;
  TodaState resample(const GridPtr& target) const;
  /// Adds the same constant to every u_i on every node.
  TodaState shifted(double c) const;
};

enum class Classification { solution, subsolution, supersolution, none };
std::string to_string(Classification c);

/// Exponents above this value are treated as overflow.
inline constexpr double kMaxExponent = 700.0;

/// R_i = Delta_g u_i + i(n-i) - k_i exp(E_i(u)) on interior nodes (zero on the boundary).
std::vector<ScalarField> residual(const TodaState& u, const TodaCoefficients& k);

/// Largest |R_i| over interior nodes and all i.
double residual_norm(const std::vector<ScalarField>& r);

Classification classify(const TodaState& u, const TodaCoefficients& k, double tol);

/// Per-node (n-1)x(n-1) coefficient matrices c_ij of a linear cooperative system.
struct CouplingMatrixField {
  GridPtr grid;
  int dim = 1;
  std::vector<double> entries;  ///< node-major, row-major within a node

  CouplingMatrixField(GridPtr g, int d);
  double& operator()(std::size_t node, int i, int j) { return entries[(node * dim + i) * dim + j]; }
  double operator()(std::size_t node, int i, int j) const { return entries[(node * dim + i) * dim + j]; }
};

/// Coupling of the difference of two states,
///   Delta delta_i - c_i (2 delta_i - delta_{i-1} - delta_{i+1}) = 0,
/// with c_i = k_i int_0^1 exp(t E_i(u) + (1-t) E_i(v)) dt.
CouplingMatrixField linearized_coupling(const TodaState& u, const TodaState& v, const TodaCoefficients& k);

/// k * (e^a - e^b) / (a - b), with the limit k e^a when |a - b| < 1e-12.
double mean_exponential(double k, double a, double b);

struct CouplingReport {
  bool cooperative = true;          ///< (a) c_ij >= 0 for i != j
  bool row_dominant = true;         ///< (b) sum_j c_ij <= 0
  bool fully_coupled = true;        ///< (c) no split (alpha, beta) with c_ij == 0 on alpha x beta
  bool nonzero_row_sum = false;     ///< (e) some node and row with sum_j c_ij != 0
  std::vector<int> split;           ///< a closed index set alpha (0-based) when (c) fails
  std::string detail;
};

/// Structural check of the maximum-principle hypotheses. Full coupling is decided
/// by growing, from each index, the set of indices reachable through entries that
/// are not identically zero.
CouplingReport validate_coupling(const CouplingMatrixField& c, double tol = 0.0);

/// u_i = (i(n-i)/2) ln( r^2 (1-|z|^2)^2 / (delta (r^2-|z|^2)^2) ): exact solution with
/// k_i = i(n-i) delta on D_r, blowing up on |z| = r.
double bubble_value(int i, int n, double r, double delta, double rho);
TodaState exact_bubble(const GridPtr& grid, double r, double delta, int n);

/// u_i = -(i(n-i)/2) ln C0 with C0 = max(1 + 1e-6, sup k).
TodaState constant_subsolution(const TodaCoefficients& k);
double subsolution_constant(const TodaCoefficients& k);

}  // namespace toda
