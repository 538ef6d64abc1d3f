#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "toda/error.hpp"
#include "toda/hyperbolic.hpp"
#include "toda/toda_system.hpp"

using namespace toda;

namespace {
double max_interior_abs_diff(const ScalarField& a, double (*f)(double)) {
  double m = 0.0;
  for (auto i : a.grid()->interior()) m = std::max(m, std::abs(a[i] - f(a.grid()->rho(i))));
  return m;
}
double log_weight(double rho) { return std::log(1.0 - rho * rho); }
}  // namespace

TEST_CASE("domain geometry") {
  DiskDomain d(0.5);
  CHECK(d.hyperbolic_radius() == doctest::Approx(2.0 * std::atanh(0.5)));
  CHECK(euclidean_radius_of(hyperbolic_distance_from_origin(0.3)) == doctest::Approx(0.3));
  DiskDomain shrunk(0.5, 0.2);
  CHECK(shrunk.effective_radius() < 0.5);
  CHECK_THROWS_AS(DiskDomain(1.0), ConfigError);
  CHECK_THROWS_AS(metric_density({0.6, 0.8}), DomainError);
  CHECK(metric_density({0.0, 0.0}) == doctest::Approx(4.0));
}

TEST_CASE("grid indexing and csv round trip") {
  auto g = make_grid(0.5, 9, 16);
  CHECK(g->size() == 1 + 8 * 16);
  CHECK(g->index(0, 5) == 0);
  CHECK(g->ring(g->index(3, 17)) == 3);
  CHECK(g->angle(g->index(3, 17)) == 1);
  CHECK(g->rho(g->boundary().front()) == 0.5);
  auto f = ScalarField::from_function(g, [](std::complex<double> z) { return z.real() + 2 * z.imag(); });
  auto back = field_from_csv(field_to_csv(f));
  REQUIRE(back.grid()->same_layout(*g));
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(back[i] == f[i]);
  auto sub = g->truncated(4);
  auto fr = f.restrict_to(sub);
  CHECK(fr.size() == sub->size());
  CHECK(fr[sub->size() - 1] == f[sub->size() - 1]);
  CHECK_THROWS_AS(make_grid(0.5, 9, 15), ConfigError);
}

TEST_CASE("Laplace-Beltrami of ln(1-|z|^2) is -1 with second order error") {
  double prev = 0.0;
  for (int nr : {17, 33, 65}) {
    auto g = make_grid(0.6, nr, 2 * (nr - 1));
    auto f = ScalarField::from_function(g, [](std::complex<double> z) { return log_weight(std::abs(z)); });
    auto lap = laplace_beltrami(f);
    double err = 0.0;
    for (auto i : g->interior()) err = std::max(err, std::abs(lap[i] + 1.0));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.2));
    prev = err;
  }
  auto g = make_grid(0.6, 9, 16);
  auto c = laplace_beltrami(ScalarField(g, 3.0));
  for (auto i : g->interior()) CHECK(std::abs(c[i]) < 1e-12);
}

TEST_CASE("assembled operator has the M-matrix sign pattern") {
  auto g = make_grid(0.5, 9, 16);
  ScalarField c(g, 0.5);
  auto a = assemble_operator(*g, c);
  for (auto i : g->interior()) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      sum += it.value();
      if (static_cast<std::size_t>(it.col()) != i) CHECK(it.value() >= 0.0);
    }
    CHECK(sum == doctest::Approx(-0.5));
  }
  c[g->interior()[3]] = -1.0;
  CHECK_THROWS_AS(assemble_operator(*g, c), PreconditionError);
}

TEST_CASE("first eigenvalue is positive and decreases with the domain") {
  auto small = first_eigenpair(make_grid(0.4, 17, 32));
  auto large = first_eigenpair(make_grid(0.6, 17, 32));
  CHECK(small.lambda > 0.0);
  CHECK(large.lambda < small.lambda);
  CHECK(small.phi.max() == doctest::Approx(1.0));
  // hyperbolic disks have lambda_1 > 1/4
  CHECK(large.lambda > 0.25);
}

TEST_CASE("torsion function solves Delta psi = -1") {
  auto g = make_grid(0.5, 33, 64);
  auto psi = torsion_function(g);
  auto lap = laplace_beltrami(psi);
  for (auto i : g->interior()) CHECK(lap[i] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(psi.min() >= 0.0);
}

TEST_CASE("bubble values") {
  // n = 2, r = 1/2: u(0) = (1/2) ln(r^2 / r^4) = ln 2
  CHECK(bubble_value(1, 2, 0.5, 1.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(bubble_value(1, 2, 0.5, 1.0, 0.5), DomainError);
  // discrete residual of the exact bubble decreases like h^2 away from the rim
  double prev = 0.0;
  for (int nr : {17, 33, 65}) {
    auto g = make_grid(0.25, nr, 2 * (nr - 1));
    auto u = exact_bubble(g, 0.5, 1.0, 3);
    auto k = TodaCoefficients::fuchsian(g, 3);
    const double err = residual_norm(residual(u, k));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.2));
    prev = err;
  }
}

TEST_CASE("classification and constant subsolution") {
  auto g = make_grid(0.5, 9, 16);
  auto k = TodaCoefficients::constant(g, {0.5, 3.0});
  auto sub = constant_subsolution(k);
  CHECK(classify(sub, k, 1e-12) != Classification::supersolution);
  auto r = residual(sub, k);
  for (const auto& f : r) CHECK(f.min_interior() >= -1e-12);
  // u = 0 with k_i = i(n-i): exact solution
  auto k3 = TodaCoefficients::fuchsian(g, 3);
  CHECK(classify(TodaState(g, 3), k3, 1e-12) == Classification::solution);
  CHECK_THROWS_AS(TodaCoefficients::constant(g, {0.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(TodaCoefficients::constant(g, {-1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(residual(TodaState(g, 3, 800.0), TodaCoefficients::constant(g, {1.0, 1.0})), NumericalError);
}

TEST_CASE("mean exponential and coupling structure") {
  CHECK(mean_exponential(1.0, 1.0, 0.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(mean_exponential(1.0, std::log(2.0), 0.0) == doctest::Approx(1.0 / std::log(2.0)));
  auto g = make_grid(0.5, 9, 16);
  auto k = TodaCoefficients::fuchsian(g, 4);
  TodaState u(g, 4, 0.1), v(g, 4, -0.2);
  auto c = linearized_coupling(u, v, k);
  auto rep = validate_coupling(c, 1e-14);
  CHECK(rep.cooperative);
  CHECK(rep.row_dominant);
  CHECK(rep.fully_coupled);
  CHECK(rep.nonzero_row_sum);
}

// Independent oracle: full coupling of a pattern equals strong connectivity
// of its directed graph, checked with Floyd-Warshall reachability.
TEST_CASE("full coupling agrees with strong connectivity") {
  auto g = make_grid(0.5, 5, 8);
  const int d = 4;
  unsigned state = 12345u;
  for (int trial = 0; trial < 200; ++trial) {
    CouplingMatrixField c(g, d);
    std::vector<int> adj(d * d, 0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        state = state * 1103515245u + 12345u;
        if (i != j && ((state >> 16) % 3 == 0)) adj[i * d + j] = 1;
      }
    for (auto node : g->interior())
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
          if (adj[i * d + j]) {
            c(node, i, j) = 1.0;
            s += 1.0;
          }
        c(node, i, i) = -s - 1.0;
      }
    auto reach = adj;
    for (int i = 0; i < d; ++i) reach[i * d + i] = 1;
    for (int m = 0; m < d; ++m)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (reach[i * d + m] && reach[m * d + j]) reach[i * d + j] = 1;
    bool strong = true;
    for (int x : reach) strong = strong && x;
    CHECK(validate_coupling(c).fully_coupled == strong);
  }
}

TEST_CASE("decoupled system is flagged") {
  auto g = make_grid(0.5, 5, 8);
  CouplingMatrixField c(g, 2);
  for (auto node : g->interior()) {
    c(node, 0, 0) = -1.0;
    c(node, 1, 1) = -1.0;
  }
  auto rep = validate_coupling(c);
  CHECK_FALSE(rep.fully_coupled);
  CHECK(rep.split.size() == 1);
}
