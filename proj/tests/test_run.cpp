#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "toda/error.hpp"
#include "toda/io.hpp"
#include "toda/run.hpp"

using namespace toda;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("toda_run_" + name);
  fs::remove_all(p);
  return p.string();
}

json small_plan() { return {{"n_radii", 4}, {"n_r_finest", 129}, {"n_theta", 16}, {"epsilons", {0.1, 0.0}}, {"extrapolation_points", 3}}; }

}  // namespace

TEST_CASE("config invariants") {
  auto ok = RunConfig::from_json({{"command", "dirichlet"}, {"k", {{"constant", {1.0}}}}});
  CHECK_NOTHROW(ok.validate());

  auto expect_bad = [](json j) {
    CAPTURE(j.dump());
    CHECK_THROWS_AS(RunConfig::from_json(j).validate(), ConfigError);
  };
  expect_bad({{"command", "integrate"}});
  expect_bad({{"command", "dirichlet"}});  // no coefficient source
  expect_bad({{"command", "dirichlet"}, {"k", {{"constant", {1.0}}}}, {"higgs", fuchsian_data(2).to_json()}});
  expect_bad({{"command", "dirichlet"}, {"k", {{"constant", {-1.0}}}}});
  expect_bad({{"command", "dirichlet"}, {"k", {{"constant", {1.0}}}}, {"tol", 0.0}});
  expect_bad({{"command", "dirichlet"}, {"k", {{"constant", {1.0}}}}, {"grid", {{"radius", 1.0}}}});
  expect_bad({{"command", "dirichlet"}, {"k", {{"constant", {1.0}}}}, {"scheme", "jacobi"}});
  expect_bad({{"command", "fuchsian"}});  // n missing
  expect_bad({{"command", "fuchsian"}, {"n", 2}, {"plan", {{"radii", {0.5, 0.4}}}}});
  expect_bad({{"command", "maximal"}, {"n", 3}, {"higgs", fuchsian_data(2).to_json()}});
  expect_bad({{"command", "bergman"}});
  CHECK_THROWS_AS(RunConfig::from_json({{"command", "verify"}, {"colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"command", "verify"}, {"tol", "small"}}), ConfigError);
}

TEST_CASE("config JSON round trip") {
  auto c = RunConfig::from_json({{"command", "maximal"},
                                 {"higgs", fuchsian_data(3).to_json()},
                                 {"plan", small_plan()},
                                 {"tol", 1e-9},
                                 {"threads", 2}});
  auto d = RunConfig::from_json(c.to_json());
  CHECK(d.command == "maximal");
  CHECK(d.higgs->n == 3);
  CHECK(d.plan.radii == c.plan.radii);
  CHECK(d.tol == 1e-9);
  CHECK(d.threads == 2);
}

TEST_CASE("dirichlet command writes a readable state") {
  auto dir = scratch("dirichlet");
  auto c = RunConfig::from_json(
      {{"command", "dirichlet"}, {"k", {{"constant", {2.0}}}}, {"boundary", 0.0}, {"grid", {{"n_r", 17}, {"n_theta", 16}}}, {"output_dir", dir}});
  std::ostringstream log;
  auto out = run(c, log);
  REQUIRE(out.status == 0);
  auto u = read_state(out.report["artifacts"]["state"].get<std::string>());
  // k = 2, zero data: strictly between the constant subsolution -ln(2)/2 and 0
  CHECK(u.u[0][0] < -1e-3);
  CHECK(u.u[0][0] > -std::log(2.0) / 2.0);
  CHECK(fs::exists(fs::path(dir) / "solver_report.json"));
  CHECK(read_json(out.report_path)["status"] == 0);
}

TEST_CASE("bergman command matches pi/6 for f = z") {
  auto c = RunConfig::from_json({{"command", "bergman"}, {"f", {{"kind", "poly"}, {"coeffs", {0, 1}}}}, {"output_dir", scratch("bergman")}});
  std::ostringstream log;
  auto out = run(c, log);
  REQUIRE(out.status == 0);
  CHECK(std::abs(out.report["bergman"]["estimate"].get<double>() - std::numbers::pi / 6.0) < 1e-6);
}

TEST_CASE("fuchsian command on a coarse plan") {
  auto c = RunConfig::from_json({{"command", "fuchsian"}, {"n", 2}, {"plan", small_plan()}, {"output_dir", scratch("fuchsian")}});
  std::ostringstream log;
  auto out = run(c, log);
  // four radii stop at 15/16, far from the 5e-3 level: an honest status 1
  CHECK(out.status == 1);
  CHECK(out.report["centers_decreasing"] == true);
  CHECK(out.report["failed"][0] == "sup bound on |z| <= 0.5");
  CHECK(fs::exists(fs::path(c.output_dir) / "trace.json"));
}

TEST_CASE("minimal-disk command for gamma = z") {
  auto c = RunConfig::from_json({{"command", "minimal-disk"}, {"plan", small_plan()}, {"output_dir", scratch("minimal")}});
  std::ostringstream log;
  auto out = run(c, log);
  REQUIRE(out.status == 0);
  CHECK(out.report["ratio_min"].get<double>() > 0.0);
  CHECK(out.report["ratio_max"].get<double>() < 1.0);
  REQUIRE(out.report["branch_points"].size() == 1);
  CHECK(out.report["branch_points"][0][0] == 0.0);
}

TEST_CASE("errors map to exit status") {
  std::ostringstream log;
  SUBCASE("config error is 2") {
    RunConfig c;
    c.command = "dirichlet";
    c.output_dir = scratch("err2");
    CHECK(run(c, log).status == 2);
  }
  SUBCASE("inadmissible radius is 2") {
    // zero of gamma on the snapped outer circle
    auto plan = ExhaustionPlan::from_json(small_plan());
    const double r = plan.radii.back();
    auto c = RunConfig::from_json({{"command", "maximal"},
                                   {"higgs", {{"n", 2}, {"gammas", {{{"kind", "poly"}, {"coeffs", {-r, 1.0}}}}}}},
                                   {"plan", small_plan()},
                                   {"output_dir", scratch("err_radius")}});
    CHECK(run(c, log).status == 2);
  }
  SUBCASE("exhausted sweep budget is 1") {
    auto c = RunConfig::from_json({{"command", "dirichlet"},
                                   {"k", {{"constant", {1.0}}}},
                                   {"tol", 1e-300},
                                   {"grid", {{"n_r", 9}, {"n_theta", 8}}},
                                   {"output_dir", scratch("err1")}});
    auto out = run(c, log);
    CHECK(out.status == 1);
    CHECK(!out.report_path.empty());
  }
}
