#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace toda {

struct AcceptanceOptions {
  int n_r_finest = 1025;  ///< rings on the largest exhaustion disk
  int n_theta = 256;
  double tol = 1e-8;
  unsigned seed = 20261016;
  int threads = 1;  ///< passed to the exhaustion plans
  std::vector<int> only;  ///< criteria to run; empty runs all nine
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  std::string summary;  ///< one line, key numbers
  nlohmann::json details;
};

/// Runs the verification suite. Exceptions inside a criterion count as failures
/// and end up in its summary. Deterministic for fixed options.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// "[PASS] 3 blow-up reconstruction: ..." style table, one line per criterion.
std::string acceptance_table(const std::vector<CriterionResult>& results);
nlohmann::json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace toda
