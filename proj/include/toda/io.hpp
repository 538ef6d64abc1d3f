#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "toda/toda_system.hpp"

namespace toda {

/// Writes one ScalarField CSV per index, <stem>_<i>.csv, and the manifest
/// <stem>.json = {n, r, n_r, n_theta, fields:[paths]}. Paths in the manifest are
/// relative to its directory. Returns the manifest path.
std::string write_state(const TodaState& u, const std::string& dir, const std::string& stem);
std::string write_coefficients(const TodaCoefficients& k, const std::string& dir, const std::string& stem);

/// Reads a manifest written by write_state or write_coefficients.
TodaState read_state(const std::string& manifest);
TodaCoefficients read_coefficients(const std::string& manifest);

enum class ProfileAxis { radial, angular };
ProfileAxis profile_axis_from_string(const std::string& s);

/// Columns coord,u_1..u_{n-1}. radial: along the theta = 0 ray, coord = rho.
/// angular: around the ring nearest to rho, coord = theta.
std::string emit_profile(const TodaState& u, ProfileAxis axis, double rho = 0.0);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace toda
