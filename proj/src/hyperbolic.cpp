#include "toda/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "toda/error.hpp"

namespace toda {

double metric_density(std::complex<double> z) {
  const double s = std::norm(z);
  if (!(s < 1.0)) throw DomainError("metric_density requires |z| < 1");
  return 4.0 / ((1.0 - s) * (1.0 - s));
}

double laplace_beltrami_factor(double rho) {
  const double s = 1.0 - rho * rho;
  return 0.25 * s * s;
}

PolarStencil::PolarStencil(const PolarGrid& g)
    : neighbors_(g.size()), area_(g.size()), factor_(g.size()) {
  const double h = g.h();
  const double dt = g.dtheta();
  const int nt = g.n_theta();
  for (std::size_t i = 0; i < g.size(); ++i) factor_[i] = laplace_beltrami_factor(g.rho(i));

  area_[0] = std::numbers::pi * h * h / 4.0;
  for (int l = 0; l < nt; ++l) neighbors_[0].push_back({g.index(1, l), 4.0 / (h * h * nt)});

  for (int k = 1; k < g.n_r(); ++k) {
    const double rho = k * h;
    for (int l = 0; l < nt; ++l) {
      const auto node = g.index(k, l);
      area_[node] = rho * h * dt;
      if (k == g.n_r() - 1) continue;
      auto& nb = neighbors_[node];
      nb.push_back({g.index(k - 1, l), (rho - 0.5 * h) / (rho * h * h)});
      nb.push_back({g.index(k + 1, l), (rho + 0.5 * h) / (rho * h * h)});
      const double wa = 1.0 / (rho * rho * dt * dt);
      nb.push_back({g.index(k, l - 1), wa});
      nb.push_back({g.index(k, l + 1), wa});
    }
  }
}

ScalarField laplace_beltrami(const ScalarField& u) {
  PolarStencil st(*u.grid());
  return laplace_beltrami(st, u);
}

ScalarField laplace_beltrami(const PolarStencil& st, const ScalarField& u) {
  const auto& g = *u.grid();
  ScalarField out(u.grid());
  for (auto i : g.interior()) {
    double acc = 0.0;
    for (const auto& [j, w] : st.neighbors(i)) acc += w * (u[j] - u[i]);
    out[i] = st.metric_factor(i) * acc;
  }
  return out;
}

SparseMatrix assemble_operator(const PolarGrid& g, const ScalarField& c) {
  if (c.size() != g.size()) throw ConfigError("coefficient field does not match grid");
  for (auto i : g.interior()) {
    if (c[i] < 0.0) {
      std::ostringstream os;
      os << "assemble_operator requires c >= 0 (node " << i << ", c = " << c[i] << ")";
      throw PreconditionError(os.str());
    }
  }
  PolarStencil st(g);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(6 * g.size() + g.n_theta());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i)) {
      trip.emplace_back(i, i, 1.0);
      continue;
    }
    double diag = 0.0;
    for (const auto& [j, w] : st.neighbors(i)) {
      trip.emplace_back(i, j, st.metric_factor(i) * w);
      diag -= st.metric_factor(i) * w;
    }
    trip.emplace_back(i, i, diag - c[i]);
  }
  SparseMatrix a(g.size(), g.size());
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

namespace {

// Symmetric positive definite form of -Delta_g on interior unknowns: rows are
// scaled by area / metric_factor, so K = -area * Delta_euclid.
struct InteriorSystem {
  std::vector<std::ptrdiff_t> slot;  // node -> unknown index, -1 on boundary
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;  // area / metric_factor
};

InteriorSystem interior_system(const PolarGrid& g, const PolarStencil& st) {
  InteriorSystem sys;
  sys.slot.assign(g.size(), -1);
  std::ptrdiff_t n = 0;
  for (auto i : g.interior()) sys.slot[i] = n++;
  sys.mass.resize(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(6 * n);
  for (auto i : g.interior()) {
    const auto row = sys.slot[i];
    double diag = 0.0;
    for (const auto& [j, w] : st.neighbors(i)) {
      const double a = st.area(i) * w;
      diag += a;
      if (sys.slot[j] >= 0) trip.emplace_back(row, sys.slot[j], -a);
    }
    trip.emplace_back(row, row, diag);
    sys.mass[row] = st.area(i) / st.metric_factor(i);
  }
  sys.stiffness.resize(n, n);
  sys.stiffness.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

}  // namespace

Eigenpair first_eigenpair(const GridPtr& grid, int max_iterations, double rel_tol) {
  const auto& g = *grid;
  PolarStencil st(g);
  auto sys = interior_system(g, st);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(sys.stiffness);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen solver: factorization failed");

  const auto n = sys.mass.size();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigenpair out;
  out.phi = ScalarField(grid);
  double lambda = 0.0;
  std::ostringstream trace;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = solver.solve(sys.mass.cwiseProduct(x));
    y /= y.cwiseAbs().maxCoeff();
    const double num = y.dot(sys.stiffness * y);
    const double den = y.dot(sys.mass.cwiseProduct(y));
    lambda = num / den;
    // residual of the unscaled operator: (K y) / mass - lambda y
    Eigen::VectorXd r = (sys.stiffness * y).cwiseQuotient(sys.mass) - lambda * y;
    out.residual = r.cwiseAbs().maxCoeff();
    x = y;
    out.iterations = it;
    if (it % 50 == 0) trace << " it" << it << ":res=" << out.residual;
    if (out.residual <= rel_tol * lambda) break;
  }
  if (!(out.residual <= 1e-8 * lambda)) {
    throw NumericalError("first_eigenpair did not converge; trace" + trace.str());
  }
  out.lambda = lambda;
  for (auto i : g.interior()) out.phi[i] = x[sys.slot[i]];
  return out;
}

ScalarField torsion_function(const GridPtr& grid) {
  // The data are rotation invariant, so the unique discrete solution is
  // ring-constant and solves a tridiagonal system in the ring values.
  const auto& g = *grid;
  PolarStencil st(g);
  const int m = g.n_r() - 1;  // unknown rings 0..m-1
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  for (int ring = 0; ring < m; ++ring) {
    const auto node = g.index(ring, 0);
    for (const auto& [j, w] : st.neighbors(node)) {
      const int rj = g.ring(j);
      if (rj == ring) continue;
      diag[ring] -= w;
      if (rj < ring) lower[ring] += w;
      else if (rj < m) upper[ring] += w;
    }
    rhs[ring] = -1.0 / st.metric_factor(node);
  }
  // Thomas algorithm; the matrix is diagonally dominant.
  for (int i = 1; i < m; ++i) {
    const double f = lower[i] / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  std::vector<double> psi(m);
  psi[m - 1] = rhs[m - 1] / diag[m - 1];
  for (int i = m - 2; i >= 0; --i) psi[i] = (rhs[i] - upper[i] * psi[i + 1]) / diag[i];
  ScalarField out(grid);
  for (auto i : g.interior()) out[i] = psi[g.ring(i)];
  return out;
}

}  // namespace toda
