#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "toda/error.hpp"
#include "toda/maximal.hpp"

using namespace toda;

namespace {

ExhaustionPlan small_plan() {
  ExhaustionPlan p;
  p.radii = {0.5, 0.75, 0.875, 0.9375};
  p.n_r_finest = 257;
  p.n_theta = 16;
  p.epsilons = {0.1, 0.0};
  p.extrapolation_points = 3;
  return p;
}

double sup_abs(const TodaState& u, double radius) {
  double s = 0.0;
  for (const auto& f : u.u)
    for (std::size_t node = 0; node < f.size(); ++node)
      if (f.grid()->rho(node) <= radius) s = std::max(s, std::abs(f[node]));
  return s;
}

}  // namespace

TEST_CASE("admissible radii") {
  const std::vector<double> c{0.25, 0.5, 0.75};
  SUBCASE("constant coefficients admit every candidate") {
    auto g = make_grid(0.8, 17, 16);
    CHECK(admissible_radii(TodaCoefficients::fuchsian(g, 4), c) == c);
  }
  SUBCASE("gamma = z admits every positive radius") {
    HiggsData h(2, {Holomorphic::polynomial({0.0, 1.0})});
    CHECK(admissible_radii(h, c) == c);
    auto g = make_grid(0.8, 17, 16);
    CHECK(admissible_radii(coefficients_from_higgs(h, g), c) == c);
    // the centre itself is a zero of k
    CHECK_THROWS_AS(admissible_radii(coefficients_from_higgs(h, g), {1e-13}), PreconditionError);
  }
  SUBCASE("a zero on the circle blocks that radius only") {
    HiggsData h(2, {Holomorphic::polynomial({-0.5, 1.0})});
    CHECK(admissible_radii(h, {0.4, 0.5, 0.6}) == std::vector<double>{0.4, 0.6});
    try {
      admissible_radii(h, {0.5});
      FAIL("expected an error");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("0.5") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(admissible_radii(fuchsian_data(2), {0.5, 0.4}), ConfigError);
}

TEST_CASE("maximal on a disk with k = 1 is the bubble") {
  const double r = 0.5;
  std::vector<double> errors;
  for (int n_r : {129, 257}) {
    auto g = make_grid(r, n_r, 16);
    auto k = TodaCoefficients::fuchsian(g, 2);
    auto res = maximal_on_domain(k, {0.2, 0.1, 0.0}, BlowupSchedule::for_rank(2));
    auto inner = g->truncated((n_r - 1) * 4 / 5);
    auto exact = exact_bubble(inner, r, 1.0, 2);
    CAPTURE(n_r);
    errors.push_back(sup_difference(res.u.restrict_to(inner), exact, inner->radius()));
    REQUIRE(res.stages.size() == 3);
    for (std::size_t m = 1; m < res.stages.size(); ++m) {
      CHECK(res.stages[m].radius > res.stages[m - 1].radius);
      CHECK(res.stages[m].center[0] < res.stages[m - 1].center[0]);
      CHECK(res.stages[m].delta >= 0.0);
    }
  }
  // first order in h: the boundary layer sets the effective radius only to O(h)
  CHECK(errors[0] < 2e-2);
  CHECK(errors[0] / errors[1] > 1.8);
}

TEST_CASE("maximal on a disk dominates the Dirichlet solution with zero data") {
  auto g = make_grid(0.6, 65, 16);
  HiggsData h(2, {Holomorphic::polynomial({0.3, 1.0})});
  auto k = coefficients_from_higgs(h, g);
  auto top = maximal_on_domain(k, {0.1, 0.0}, BlowupSchedule::for_rank(2));
  DirichletProblem p;
  p.k = k;
  p.boundary = TodaState(g, 2, 0.0);
  p.sub = constant_subsolution(k);
  p.super = torsion_supersolution(k, 0.0);
  auto v = solve_dirichlet(p);
  CHECK(domination_dichotomy(v.u, top.u, 1e-8) == Dichotomy::strict);
}

TEST_CASE("shrink stages must end at zero and decrease") {
  auto g = make_grid(0.5, 33, 16);
  auto k = TodaCoefficients::fuchsian(g, 2);
  CHECK_THROWS_AS(maximal_on_domain(k, {0.1}, BlowupSchedule::for_rank(2)), ConfigError);
  CHECK_THROWS_AS(maximal_on_domain(k, {0.1, 0.2, 0.0}, BlowupSchedule::for_rank(2)), ConfigError);
}

TEST_CASE("Fuchsian exhaustion collapses to zero") {
  auto plan = small_plan();
  for (int n = 2; n <= 3; ++n) {
    auto k = TodaCoefficients::fuchsian(plan.finest_grid(), n);
    auto res = maximal_solution(k, plan);
    CAPTURE(n);
    REQUIRE(res.radii.size() == 4);
    for (std::size_t j = 1; j < res.radii.size(); ++j)
      for (int i = 0; i < n - 1; ++i) CHECK(res.radii[j].center[i] < res.radii[j - 1].center[i]);
    for (const auto& rec : res.radii) CHECK(rec.sub_margin >= -1e-8);
    if (n == 2)
      for (const auto& rec : res.radii) CHECK(std::abs(rec.center[0] + std::log(rec.radius)) < 1e-2);
    // raw state on D_0.9375 is still far from zero, the limit is not
    const double scale = n == 2 ? 1.0 : 2.0;
    CHECK(sup_abs(res.state, 0.3) > 0.03 * scale);
    // extrapolation through 0.75, 0.875, 0.9375 alone is off by 2.7e-3 at rho = 0.3
    CHECK(sup_abs(res.limit, 0.3) < 4e-3 * scale);
    CHECK(std::abs(res.limit.grid()->radius() - 0.75) <= plan.finest_grid()->h());
  }
}

TEST_CASE("exhaustion trace and Richardson bookkeeping") {
  auto plan = small_plan();
  auto k = TodaCoefficients::fuchsian(plan.finest_grid(), 2);
  auto res = maximal_solution(k, plan);
  auto t = res.trace();
  REQUIRE(t["radii"].size() == 4);
  CHECK(t["radii"][0]["interior_delta"].is_null());
  CHECK(t["radii"][1]["interior_delta"].get<double>() > 0.0);
  CHECK(t["radii"][0]["coarse_center"].size() == 1);
  CHECK(t["radii"][2]["stages"].size() == 2);
  CHECK(res.state.grid()->n_r() == plan.n_r_finest);
  CHECK(res.limit.grid()->n_r() == plan.rings()[1] / 2 + 1);

  plan.richardson = false;
  auto plain = maximal_solution(k, plan);
  CHECK(plain.radii[0].coarse_center.empty());
  CHECK(plain.limit.grid()->n_r() == plan.rings()[1] + 1);
  // the first-order bias removed by Richardson is visible without it
  CHECK(plain.limit.u[0][0] > res.limit.u[0][0]);
}

TEST_CASE("maximal state dominates a zero-data Dirichlet solution") {
  auto plan = small_plan();
  plan.richardson = false;
  HiggsData h(2, {Holomorphic::polynomial({0.0, 1.0})});
  auto k = coefficients_from_higgs(h, plan.finest_grid());
  auto res = maximal_solution(k, plan);
  DirichletProblem p;
  p.k = k;
  p.boundary = TodaState(k.grid(), 2, 0.0);
  p.sub = constant_subsolution(k);
  p.super = torsion_supersolution(k, 0.0);
  auto v = solve_dirichlet(p);
  CHECK(domination_dichotomy(v.u, res.state, 1e-8) == Dichotomy::strict);
}

TEST_CASE("exhaustion plan validation and JSON") {
  ExhaustionPlan p;
  CHECK(p.radii == ExhaustionPlan::dyadic_radii(6));
  CHECK(p.radii.back() == 63.0 / 64.0);
  for (int r : p.rings()) CHECK(r % 2 == 0);
  p.validate();
  auto q = ExhaustionPlan::from_json(p.to_json());
  CHECK(q.radii == p.radii);
  CHECK(q.extrapolation_points == p.extrapolation_points);

  auto bad = p;
  bad.epsilons = {0.1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.n_r_finest = 1024;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.n_r_finest = 17;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.extrapolation_points = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ExhaustionPlan::from_json(nlohmann::json::parse(R"({"radii": "wide"})")), ConfigError);

  auto k = TodaCoefficients::fuchsian(make_grid(0.5, 33, 16), 2);
  CHECK_THROWS_AS(maximal_solution(k, small_plan()), ConfigError);
  auto plan = small_plan();
  plan.richardson = false;
  // zero of gamma exactly on the snapped middle circle
  HiggsData h(2, {Holomorphic::polynomial({-plan.rings()[1] * plan.finest_grid()->h(), 1.0})});
  CHECK_THROWS_AS(maximal_solution(coefficients_from_higgs(h, plan.finest_grid()), plan), PreconditionError);
}

TEST_CASE("domination dichotomy") {
  auto g = make_grid(0.5, 17, 16);
  TodaState zero(g, 3, 0.0);
  CHECK(domination_dichotomy(zero, zero, 1e-10) == Dichotomy::identical);

  auto k1 = TodaCoefficients::constant(g, {1.0});
  auto sub = TodaState(g, 2, -0.5);  // constant subsolution with C0 = e
  CHECK(domination_dichotomy(sub, TodaState(g, 2, 0.0), 1e-8) == Dichotomy::strict);

  TodaState touching(g, 3, -1.0);
  touching.u[1][g->index(3, 2)] = 0.0;
  CHECK_THROWS_AS(domination_dichotomy(touching, zero, 1e-8), ConsistencyError);
  CHECK_THROWS_AS(domination_dichotomy(TodaState(g, 3, 0.1), zero, 1e-8), PreconditionError);
  CHECK(to_string(Dichotomy::strict) == "strict");
}
