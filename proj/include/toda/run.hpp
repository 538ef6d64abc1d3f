#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toda/higgs.hpp"
#include "toda/maximal.hpp"

namespace toda {

/// Everything one batch command needs. Built from a JSON document, then
/// overridden field by field by command line flags.
///
/// Coefficient sources: `higgs` (HiggsData JSON) or `k` (explicit), never both.
/// Explicit k is {"constant": [k_1, ..]} or {"manifest": path written by
/// write_coefficients}.
struct RunConfig {
  std::string command;  ///< fuchsian | maximal | dirichlet | verify | bergman | minimal-disk
  int n = 0;            ///< required by fuchsian; otherwise taken from the coefficient source
  std::optional<HiggsData> higgs;
  std::optional<nlohmann::json> k;
  ExhaustionPlan plan;
  // single Dirichlet solve
  double radius = 0.5;
  int n_r = 65;
  int n_theta = 64;
  double boundary = 0.0;  ///< constant boundary value for every u_i
  std::string scheme = "newton";
  // bergman
  std::optional<Holomorphic> f;
  std::vector<double> bergman_radii{0.9, 0.99, 0.999};
  // verify
  std::vector<int> only;
  unsigned seed = 20261016;

  double tol = 1e-8;
  int threads = 1;
  std::string output_dir = ".";

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

struct RunOutcome {
  int status = 0;  ///< 0 ok, 1 numerical or consistency failure, 2 config error
  std::string message;
  std::string report_path;
  nlohmann::json report;
};

/// Runs one command, writes its artifacts under config.output_dir and a
/// report.json. Errors become a status, they do not escape.
RunOutcome run(const RunConfig& config, std::ostream& log);

}  // namespace toda
