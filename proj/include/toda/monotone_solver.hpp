#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toda/grid.hpp"
#include "toda/toda_system.hpp"

namespace toda {

/// How each sweep linearizes the exponential term.
///  - newton: block Newton step. Its matrix is the exact Jacobian, which is a
///    cooperative M-matrix here, so from a supersolution the iterates still
///    decrease and stay above every subsolution. Converges quadratically.
///  - picard: frozen diagonal shift c_i >= d/du_i of the nonlinearity over the
///    order interval. Linear convergence, but monotone from either end.
enum class IterationScheme { newton, picard };
enum class StartFrom { supersolution, subsolution };

std::string to_string(IterationScheme s);
IterationScheme iteration_scheme_from_string(const std::string& s);

struct DirichletProblem {
  TodaCoefficients k;
  TodaState boundary;  ///< only boundary-node values are used
  TodaState sub;
  TodaState super;
  double tol = 1e-8;
  int max_iterations = 500;
  IterationScheme scheme = IterationScheme::newton;
  StartFrom start = StartFrom::supersolution;
  /// Solve for one value per ring when all data are ring-constant.
  bool allow_radial_reduction = true;

  const GridPtr& grid() const { return k.grid(); }
};

struct SweepRecord {
  int level = 0;  ///< index into the level list (0 for a plain Dirichlet solve)
  int sweep = 0;
  double update_norm = 0.0;
  double residual_norm = 0.0;
  double relative_residual = 0.0;
  double wrong_way = 0.0;  ///< largest move against the expected direction
};

struct LevelRecord {
  double level = 0.0;
  int sweeps = 0;
  std::vector<double> center;  ///< u_i at the origin
  double interior_delta = std::numeric_limits<double>::quiet_NaN();
  double residual_norm = 0.0;
};

/// A-priori interior bound from the exact bubble on a hyperbolic disk inside
/// the outer annulus where k_i >= i(n-i) delta.
struct CeilingEstimate {
  double delta = 0.0;
  double annulus_inner = 0.0;  ///< Euclidean radius where the annulus starts
  double width = 0.0;          ///< Euclidean width of the annulus
  double probe_rho = 0.0;      ///< ring radius of the probe disk centres
  double local_radius = 0.0;   ///< Euclidean radius of the probe disk in its own centred chart
  std::vector<double> probe_ceiling;   ///< per i
  std::vector<double> probe_value;     ///< max of u_i over the probe ring (last level)
  std::optional<std::vector<double>> center_ceiling;  ///< when delta holds on the whole grid
  bool respected = true;
  double slack = 0.0;
};

struct SolverReport {
  std::string scheme = "newton";
  std::vector<SweepRecord> sweeps;
  std::vector<LevelRecord> levels;
  std::optional<CeilingEstimate> ceiling;
  std::map<std::string, bool> flags;
  std::size_t boundary_layer_nodes = 0;
  bool converged = false;
  double final_residual = 0.0;
  /// max |R_i| / (i(n-i) + k_i e^{E_i}) after discounting the rounding level of
  /// each node's stencil; the stopping test uses this one
  double final_relative_residual = 0.0;
  std::string note;

  nlohmann::json to_json() const;
};

struct DirichletResult {
  TodaState u;
  SolverReport report;
};

/// Monotone iteration for the Dirichlet problem with data from p.boundary.
/// Throws PreconditionError when sub <= super or sub <= f <= super fails,
/// NumericalError when the sweep budget runs out and ConsistencyError when a
/// monotonicity or sandwich witness fails beyond 1e-10.
DirichletResult solve_dirichlet(const DirichletProblem& p);

struct EigenSupersolution {
  TodaState u;
  double lambda = 0.0;
  double c1 = 0.0;         ///< min of phi over the inner grid
  double threshold = 0.0;  ///< n(n-1)/lambda
};

/// u_i = N phi / C1 with (lambda, phi) the first eigenpair on the outer grid.
EigenSupersolution eigen_supersolution(const GridPtr& outer, const GridPtr& inner, double level, int rank);

struct BlowupSchedule {
  std::vector<double> levels{4.0, 8.0, 16.0};
  bool keep_snapshots = false;
  double interior_fraction = 0.9;  ///< nodes with rho <= fraction * r are certified
  double annulus_fraction = 0.1;   ///< outer annulus used to detect delta
  double tol = 1e-8;
  int max_iterations = 500;
  IterationScheme scheme = IterationScheme::newton;
  bool allow_radial_reduction = true;

  /// Levels first * 2^m, m = 0..m_max.
  static BlowupSchedule doubling(int m_max, double first = 4.0);
  /// Doubling from 4 up to the first level >= 8 max_i i(n-i). Larger levels
  /// only steepen the unresolved boundary layer (see README).
  static BlowupSchedule for_rank(int rank);
};

struct BlowupResult {
  TodaState u;                      ///< solution for the last level
  std::vector<TodaState> snapshots;  ///< one per level when requested
  SolverReport report;
};

/// Increasing boundary levels N_m; each level is a Dirichlet solve warm-started
/// from the previous one shifted by N_m - N_{m-1}.
BlowupResult solve_blowup(const GridPtr& grid, const TodaCoefficients& k, const BlowupSchedule& schedule);

/// Torsion-based supersolution i(n-i) psi + level with Delta_g psi = -1, psi = 0 on the boundary.
TodaState torsion_supersolution(const TodaCoefficients& k, double level);

/// Largest |a_i - b_i| over nodes with rho <= radius, all i.
double sup_difference(const TodaState& a, const TodaState& b, double radius);

}  // namespace toda
