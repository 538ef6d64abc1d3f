#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toda/grid.hpp"
#include "toda/higgs.hpp"
#include "toda/monotone_solver.hpp"
#include "toda/toda_system.hpp"

namespace toda {

/// Radii r_j increasing towards 1, a shared radial step, and the hyperbolic
/// shrink parameters used on each bounded domain.
struct ExhaustionPlan {
  std::vector<double> radii{0.5, 0.75, 0.875, 0.9375, 0.96875, 0.984375};
  int n_r_finest = 1025;  ///< rings on the largest disk; every radius is snapped to a multiple of its step
  int n_theta = 256;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.0};  ///< decreasing, last one 0
  /// Level schedule; BlowupSchedule::for_rank(n) when empty.
  std::optional<BlowupSchedule> schedule;
  double tol = 1e-8;
  /// radii used by the r -> 1 extrapolation (1 keeps the last state)
  int extrapolation_points = 4;
  /// Repeat the exhaustion with step 2h and combine 2 u_h - u_2h before extrapolating.
  /// Radii then snap to even rings and n_r_finest - 1 must be even.
  bool richardson = true;
  /// With 2 or more, the 2h exhaustion runs on its own thread.
  int threads = 1;

  /// r_j = 1 - 2^{-j-1}, j = 0..count-1.
  static std::vector<double> dyadic_radii(int count);
  /// Grid over the largest disk; all per-radius grids are truncations of it.
  GridPtr finest_grid() const;
  /// Ring index of each radius on the finest grid.
  std::vector<int> rings() const;
  void validate() const;

  nlohmann::json to_json() const;
  static ExhaustionPlan from_json(const nlohmann::json& j);
};

/// Candidates whose circle carries k_i above a positivity floor (1e-10 max k_i) for every i.
/// Circles are sampled at the angular nodes of K's grid. Throws PreconditionError naming
/// the blocking circles when none is admissible.
std::vector<double> admissible_radii(const TodaCoefficients& k, const std::vector<double>& candidates);
/// Same test from 2|gamma_i|^2, and circles passing within 1e-3 of a zero of some gamma_i
/// are rejected as well. The error lists the blocking zeros.
std::vector<double> admissible_radii(const HiggsData& h, const std::vector<double>& candidates, int n_theta = 256);

struct ShrinkStage {
  double epsilon = 0.0;
  double radius = 0.0;  ///< snapped radius of the shrunken disk
  int rings = 0;
  std::vector<double> center;
  double delta = std::numeric_limits<double>::quiet_NaN();  ///< sup change from the previous stage on rho <= 0.8 of its radius
  double relative_residual = 0.0;
  int sweeps = 0;
};

struct DomainResult {
  TodaState u;  ///< blow-up solution on the full disk (last stage)
  std::vector<ShrinkStage> stages;
  SolverReport report;  ///< of the last stage
};

/// Blow-up solutions on the shrunken disks D_r^eps, checked to decrease as eps -> 0.
/// Throws ConsistencyError when a later stage exceeds an earlier one by more than 1e-8.
DomainResult maximal_on_domain(const TodaCoefficients& k, const std::vector<double>& epsilons,
                               const BlowupSchedule& schedule);

struct RadiusRecord {
  double radius = 0.0;
  int n_r = 0;
  std::vector<double> center;
  double interior_delta = std::numeric_limits<double>::quiet_NaN();  ///< sup change from the previous radius on rho <= 0.9 r_{j-1}
  double relative_residual = 0.0;
  double sub_margin = 0.0;  ///< min of u - subsolution
  std::vector<double> coarse_center;  ///< centre values of the step-2h run (Richardson only)
  std::vector<ShrinkStage> stages;
};

struct MaximalResult {
  TodaState state;   ///< blow-up solution on the largest disk
  /// Extrapolation r -> 1 on the smallest disk it uses (step 2h with Richardson).
  /// Its outer rings mix boundary levels and are not meaningful.
  TodaState limit;
  std::vector<RadiusRecord> radii;
  SolverReport report;  ///< of the last radius
  nlohmann::json trace() const;
};

/// Exhaustion over the plan radii. k lives on plan.finest_grid(); the subsolution
/// defaults to constant_subsolution(k). The limit is the value at r = 1 of the
/// polynomial in (1 - r) through the last plan.extrapolation_points radii.
MaximalResult maximal_solution(const TodaCoefficients& k, const ExhaustionPlan& plan,
                               const std::optional<TodaState>& sub = std::nullopt);

enum class Dichotomy { strict, identical };
std::string to_string(Dichotomy d);

/// strict when max_i - sub_i > tol on every interior node and every i, identical when
/// |max_i - sub_i| <= tol everywhere. Anything else is a ConsistencyError.
Dichotomy domination_dichotomy(const TodaState& sub, const TodaState& max, double tol);

}  // namespace toda
