#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "toda/error.hpp"
#include "toda/io.hpp"

using namespace toda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("toda_io_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<double>> parse_rows(const std::string& csv, std::string& header) {
  std::istringstream is(csv);
  std::getline(is, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<double> r;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("state round trip is bit exact") {
  auto g = make_grid(0.7, 9, 16);
  TodaState u(g, 4, 0.0);
  for (int i = 0; i < 3; ++i)
    for (std::size_t node = 0; node < g->size(); ++node) u.u[i][node] = std::sin(0.37 * node + i) / 3.0 + 1e-17 * node;
  auto dir = scratch("state");
  auto manifest = write_state(u, dir.string(), "u");
  auto j = read_json(manifest);
  CHECK(j["n"] == 4);
  CHECK(j["n_r"] == 9);
  CHECK(j["n_theta"] == 16);
  CHECK(j["fields"].size() == 3);
  auto back = read_state(manifest);
  REQUIRE(back.rank() == 4);
  for (int i = 0; i < 3; ++i)
    for (std::size_t node = 0; node < g->size(); ++node) CHECK(back.u[i][node] == u.u[i][node]);

  auto k = TodaCoefficients::fuchsian(g, 3);
  auto kk = read_coefficients(write_coefficients(k, dir.string(), "k"));
  CHECK(kk.n == 3);
  CHECK(kk.k[1][5] == 2.0);
  fs::remove_all(dir);
}

TEST_CASE("manifest errors") {
  auto dir = scratch("bad");
  fs::create_directories(dir);
  write_text((dir / "m.json").string(), R"({"n": 3, "r": 0.5, "n_r": 5, "n_theta": 8, "fields": ["a.csv"]})");
  CHECK_THROWS_AS(read_state((dir / "m.json").string()), ConfigError);
  write_text((dir / "broken.json").string(), "{");
  CHECK_THROWS_AS(read_json((dir / "broken.json").string()), ConfigError);
  CHECK_THROWS_AS(read_state((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("profiles") {
  auto g = make_grid(0.5, 11, 16);
  SUBCASE("constant state gives a flat profile") {
    std::string header;
    auto rows = parse_rows(emit_profile(TodaState(g, 3, 0.25), ProfileAxis::radial), header);
    CHECK(header == "coord,u_1,u_2");
    REQUIRE(rows.size() == 11);
    for (const auto& r : rows) {
      CHECK(r[1] == 0.25);
      CHECK(r[2] == 0.25);
    }
    CHECK(rows.back()[0] == doctest::Approx(0.5));
  }
  SUBCASE("bubble centre value") {
    auto inner = g->truncated(8);
    std::string header;
    auto rows = parse_rows(emit_profile(exact_bubble(inner, 0.5, 2.0, 3), ProfileAxis::radial), header);
    for (int i = 1; i <= 2; ++i) CHECK(rows[0][i] == doctest::Approx(i * (3 - i) / 2.0 * std::log(1.0 / (2.0 * 0.25))));
  }
  SUBCASE("angular profile sits on one ring") {
    std::string header;
    auto u = TodaState(g, 2, 0.0);
    for (std::size_t node = 0; node < g->size(); ++node) u.u[0][node] = g->rho(node);
    auto rows = parse_rows(emit_profile(u, ProfileAxis::angular, 0.3), header);
    REQUIRE(rows.size() == 16);
    for (const auto& r : rows) CHECK(r[1] == doctest::Approx(0.3));
    CHECK(rows[4][0] == doctest::Approx(3.14159265358979 / 2));
  }
  CHECK_THROWS_AS(profile_axis_from_string("diagonal"), ConfigError);
}
