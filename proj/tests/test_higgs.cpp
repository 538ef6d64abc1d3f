#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "toda/error.hpp"
#include "toda/higgs.hpp"

using namespace toda;

TEST_CASE("coefficients from gamma = z are 2|z|^2") {
  auto g = make_grid(0.9, 9, 16);
  HiggsData h(2, {Holomorphic::polynomial({0.0, 1.0})});
  auto k = coefficients_from_higgs(h, g);
  for (std::size_t node = 0; node < g->size(); ++node)
    CHECK(k.k[0][node] == doctest::Approx(2.0 * g->rho(node) * g->rho(node)).epsilon(1e-14));
}

TEST_CASE("Fuchsian data give k_i = i(n-i)") {
  auto g = make_grid(0.5, 5, 8);
  for (int n = 2; n <= 5; ++n) {
    auto k = coefficients_from_higgs(fuchsian_data(n), g);
    for (int i = 1; i < n; ++i) {
      CHECK(k.k[i - 1].min() == doctest::Approx(i * (n - i)).epsilon(1e-14));
      CHECK(k.k[i - 1].max() == doctest::Approx(i * (n - i)).epsilon(1e-14));
    }
  }
}

TEST_CASE("Higgs norm of the zero state is the Fuchsian value") {
  CHECK(fuchsian_norm(2) == doctest::Approx(0.5));
  CHECK(fuchsian_norm(3) == doctest::Approx(2.0));
  auto g = make_grid(0.8, 9, 16);
  for (int n = 2; n <= 4; ++n) {
    auto norm = higgs_norm(TodaState(g, n, 0.0), TodaCoefficients::fuchsian(g, n));
    CHECK(norm.max() == doctest::Approx(fuchsian_norm(n)).epsilon(1e-14));
    CHECK(norm.min() == doctest::Approx(fuchsian_norm(n)).epsilon(1e-14));
  }
}

TEST_CASE("Blaschke products") {
  CHECK(std::abs(blaschke({0.5}, 0.0) - Complex(0.5, 0.0)) < 1e-15);
  const std::vector<Complex> zeros{{0.3, 0.4}, {-0.6, 0.1}, {0.0, -0.9}};
  for (int l = 0; l < 32; ++l) {
    const auto z = std::polar(1.0, 2.0 * std::numbers::pi * l / 32);
    CHECK(std::abs(std::abs(blaschke(zeros, z)) - 1.0) < 1e-12);
  }
  for (auto a : zeros) CHECK(std::abs(blaschke(zeros, a)) < 1e-15);
  CHECK_THROWS_AS(blaschke({0.0}, 0.1), PreconditionError);
  CHECK_THROWS_AS(blaschke({1.0}, 0.1), PreconditionError);
  CHECK_THROWS_AS(blaschke({0.5}, 1.5), DomainError);
}

TEST_CASE("polynomial zeros inside the disk") {
  auto p = Holomorphic::polynomial({Complex(-0.25, 0.0), 0.0, 1.0});  // z^2 - 1/4
  auto z = p.zeros_in_disk();
  REQUIRE(z.size() == 2);
  for (auto r : z) CHECK(std::abs(std::abs(r) - 0.5) < 1e-12);
  CHECK(Holomorphic::polynomial({2.0, -1.0}).zeros_in_disk().empty());
}

TEST_CASE("HiggsData JSON round trip and errors") {
  auto text = R"({"n": 3, "gammas": [{"kind": "poly", "coeffs": [0, [0, 1]]},
                                     {"kind": "blaschke", "zeros": [0.5, [0, -0.25]]}]})";
  auto h = HiggsData::from_json(nlohmann::json::parse(text));
  CHECK(h.n == 3);
  auto again = HiggsData::from_json(h.to_json());
  const Complex z(0.2, -0.3);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(again.gammas[i](z) - h.gammas[i](z)) < 1e-15);
  CHECK(std::abs(h.gammas[0](z) - Complex(0.0, 1.0) * z) < 1e-15);

  CHECK_THROWS_AS(HiggsData::from_json(nlohmann::json::parse(R"({"n": 2})")), ConfigError);
  CHECK_THROWS_AS(HiggsData::from_json(nlohmann::json::parse(R"({"n": 3, "gammas": [{"kind": "poly", "coeffs": [1]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(HiggsData::from_json(nlohmann::json::parse(R"({"n": 2, "gammas": [{"kind": "spline"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(HiggsData::from_json(nlohmann::json::parse(R"({"n": 2, "gammas": [{"kind": "poly", "coeffs": [0, 0]}]})")),
                  PreconditionError);
}

TEST_CASE("metric from state") {
  auto g = make_grid(0.6, 7, 8);
  SUBCASE("zero state is the background metric") {
    auto m = metric_from_state(TodaState(g, 3, 0.0));
    for (int i = 1; i <= 3; ++i)
      for (std::size_t node = 0; node < g->size(); ++node) {
        CHECK(m.w[i - 1][node] == 0.0);
        CHECK(m.density[i - 1][node] == doctest::Approx(background_density(i, 3, g->z(node))).epsilon(1e-14));
      }
  }
  SUBCASE("n = 2 with u = ln 2") {
    auto m = metric_from_state(TodaState(g, 2, std::log(2.0)));
    for (std::size_t node = 0; node < g->size(); ++node) {
      CHECK(m.w[0][node] == doctest::Approx(-std::log(2.0)));
      CHECK(m.w[1][node] == doctest::Approx(std::log(2.0)));
      CHECK(m.density[0][node] == doctest::Approx(background_density(1, 2, g->z(node)) / 2.0).epsilon(1e-14));
    }
  }
  SUBCASE("conformal factors sum to zero") {
    TodaState u(g, 4, 0.0);
    for (int i = 0; i < 3; ++i)
      for (std::size_t node = 0; node < g->size(); ++node) u.u[i][node] = std::sin(node + 1.7 * i) * (i + 1);
    auto m = metric_from_state(u);
    for (std::size_t node = 0; node < g->size(); ++node) {
      double s = 0.0;
      for (const auto& w : m.w) s += w[node];
      CHECK(std::abs(s) < 1e-14);
    }
  }
}

TEST_CASE("background densities multiply to one") {
  for (int n = 2; n <= 5; ++n) {
    double p = 1.0;
    for (int i = 1; i <= n; ++i) p *= background_density(i, n, Complex(0.3, 0.2));
    CHECK(p == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("determinant density is e^{u_k} over the background") {
  auto g = make_grid(0.7, 7, 8);
  TodaState u(g, 3, 0.0);
  for (int i = 0; i < 2; ++i)
    for (std::size_t node = 0; node < g->size(); ++node) u.u[i][node] = 0.3 * std::cos(node + i);
  auto m = metric_from_state(u);
  auto m0 = metric_from_state(TodaState(g, 3, 0.0));
  for (int k = 1; k <= 2; ++k) {
    auto d = determinant_density(m, k);
    auto d0 = determinant_density(m0, k);
    for (std::size_t node = 0; node < g->size(); ++node)
      CHECK(std::log(d[node] / d0[node]) == doctest::Approx(u.u[k - 1][node]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(determinant_density(m, 3), ConfigError);
}

TEST_CASE("weak domination agrees between fields and determinants") {
  auto g = make_grid(0.7, 7, 8);
  TodaState a(g, 3, 0.0), b(g, 3, -0.5), c(g, 3, 0.0);
  c.u[0][3] = 0.2;
  c.u[1][5] = -0.2;
  const std::vector<std::pair<TodaState, TodaState>> pairs{{a, b}, {b, a}, {a, a}, {a, c}};
  const std::vector<Domination> expected{Domination::dominates, Domination::dominated, Domination::equal,
                                         Domination::incomparable};
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [x, y] = pairs[p];
    CHECK(weak_domination(x, y, 1e-12) == expected[p]);
    CHECK(weak_domination(metric_from_state(x), metric_from_state(y), 1e-12) == expected[p]);
  }
}

TEST_CASE("Bergman integral of monomials") {
  for (int m : {0, 1, 2, 5}) {
    std::vector<Complex> c(m + 1, 0.0);
    c[m] = 1.0;
    auto r = bergman_integral(Holomorphic::polynomial(c));
    const double exact = std::numbers::pi / ((m + 1) * (m + 2));
    CHECK(std::abs(r.estimate - exact) < 1e-6);
    // the raw partial over |z| <= 0.999 misses part of the tail
    CHECK(r.partials.back() < exact);
    CHECK_FALSE(r.divergence_suspected);
  }
  auto partial = bergman_integral(Holomorphic::polynomial({1.0}), {0.5});
  const double p = 0.5 * 0.5;
  CHECK(partial.partials[0] == doctest::Approx(2.0 * std::numbers::pi * (p / 2.0 - p * p / 4.0)).epsilon(1e-13));
  CHECK_THROWS_AS(bergman_integral(Holomorphic::polynomial({1.0}), {0.9, 0.5}), ConfigError);
}

TEST_CASE("pullback ratio and density for n = 2") {
  auto g = make_grid(0.8, 9, 16);
  HiggsData h(2, {Holomorphic::polynomial({0.0, 1.0})});
  auto k = coefficients_from_higgs(h, g);
  TodaState u(g, 2, -0.5), top(g, 2, 0.0);
  auto ratio = pullback_ratio(u, top, k);
  CHECK(ratio.max() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(ratio.min() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  auto d = pullback_density(top, k);
  CHECK(d[0] == 0.0);
  for (std::size_t node = 1; node < g->size(); ++node) CHECK(d[node] > 0.0);

  TodaState crossing(g, 2, 0.0);
  crossing.u[0][5] = -0.1;
  CHECK_THROWS_AS(pullback_ratio(crossing, top, k), ConsistencyError);
  CHECK_THROWS_AS(pullback_ratio(top, u, k), PreconditionError);
  CHECK_THROWS_AS(pullback_ratio(TodaState(g, 3, 0.0), TodaState(g, 3, 0.0), TodaCoefficients::fuchsian(g, 3)),
                  ConfigError);
}
