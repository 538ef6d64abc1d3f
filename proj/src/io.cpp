#include "toda/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "toda/error.hpp"

namespace toda {

namespace fs = std::filesystem;

namespace {

std::string write_fields(const std::vector<ScalarField>& fields, int n, const std::string& dir, const std::string& stem) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir + ": " + ec.message());
  const auto& g = *fields.front().grid();
  nlohmann::json manifest{{"n", n}, {"r", g.radius()}, {"n_r", g.n_r()}, {"n_theta", g.n_theta()}};
  auto paths = nlohmann::json::array();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto name = stem + "_" + std::to_string(i + 1) + ".csv";
    write_field_csv(fields[i], (fs::path(dir) / name).string());
    paths.push_back(name);
  }
  manifest["fields"] = paths;
  const auto path = (fs::path(dir) / (stem + ".json")).string();
  write_json(path, manifest);
  return path;
}

std::pair<int, std::vector<ScalarField>> read_fields(const std::string& manifest) {
  const auto j = read_json(manifest);
  int n = 0, n_r = 0, n_theta = 0;
  double r = 0.0;
  std::vector<std::string> paths;
  try {
    n = j.at("n").get<int>();
    r = j.at("r").get<double>();
    n_r = j.at("n_r").get<int>();
    n_theta = j.at("n_theta").get<int>();
    paths = j.at("fields").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad manifest " + manifest + ": " + e.what());
  }
  if (n < 2 || static_cast<int>(paths.size()) != n - 1) throw ConfigError("manifest needs n-1 field paths");
  const auto base = fs::path(manifest).parent_path();
  auto grid = make_grid(r, n_r, n_theta);
  std::vector<ScalarField> fields;
  for (const auto& p : paths) {
    auto f = read_field_csv((fs::path(p).is_absolute() ? fs::path(p) : base / p).string());
    if (f.grid()->n_r() != n_r || f.grid()->n_theta() != n_theta) throw ConfigError(p + " does not match the manifest grid");
    auto v = f.values();
    fields.emplace_back(grid, std::vector<double>(v.begin(), v.end()));
  }
  return {n, std::move(fields)};
}

}  // namespace

std::string write_state(const TodaState& u, const std::string& dir, const std::string& stem) {
  return write_fields(u.u, u.rank(), dir, stem);
}

std::string write_coefficients(const TodaCoefficients& k, const std::string& dir, const std::string& stem) {
  return write_fields(k.k, k.n, dir, stem);
}

TodaState read_state(const std::string& manifest) { return TodaState(read_fields(manifest).second); }

TodaCoefficients read_coefficients(const std::string& manifest) {
  auto [n, f] = read_fields(manifest);
  return TodaCoefficients(n, std::move(f));
}

ProfileAxis profile_axis_from_string(const std::string& s) {
  if (s == "radial") return ProfileAxis::radial;
  if (s == "angular") return ProfileAxis::angular;
  throw ConfigError("profile axis must be 'radial' or 'angular'");
}

std::string emit_profile(const TodaState& u, ProfileAxis axis, double rho) {
  const auto& g = *u.grid();
  std::string out = "coord";
  for (int i = 1; i < u.rank(); ++i) out += ",u_" + std::to_string(i);
  out += '\n';
  char buf[64];
  auto row = [&](double coord, std::size_t node) {
    std::snprintf(buf, sizeof buf, "%.17g", coord);
    out += buf;
    for (const auto& f : u.u) {
      std::snprintf(buf, sizeof buf, ",%.17g", f[node]);
      out += buf;
    }
    out += '\n';
  };
  if (axis == ProfileAxis::radial) {
    for (int k = 0; k < g.n_r(); ++k) row(g.rho_of_ring(k), g.index(k, 0));
  } else {
    const int ring = std::clamp(static_cast<int>(std::lround(rho / g.h())), 0, g.n_r() - 1);
    for (int l = 0; l < g.n_theta(); ++l) row(l * g.dtheta(), g.index(ring, l));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << text;
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace toda
