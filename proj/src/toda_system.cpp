#include "toda/toda_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toda/error.hpp"
#include "toda/hyperbolic.hpp"

namespace toda {

TodaCoefficients::TodaCoefficients(int rank, std::vector<ScalarField> fields) : n(rank), k(std::move(fields)) {
  if (n < 2) throw ConfigError("rank n must be >= 2");
  if (static_cast<int>(k.size()) != n - 1) throw ConfigError("need exactly n-1 coefficient fields");
  for (std::size_t i = 0; i < k.size(); ++i) {
    require_same_grid(k.front(), k[i]);
    if (!k[i].all_finite()) throw ConfigError("coefficient field has non-finite samples");
    if (k[i].min() < 0.0) throw PreconditionError("coefficients must be nonnegative");
    if (k[i].max() == 0.0) throw PreconditionError("coefficient k_" + std::to_string(i + 1) + " vanishes identically");
  }
}

TodaCoefficients TodaCoefficients::fuchsian(const GridPtr& grid, int rank) {
  std::vector<double> v;
  for (int i = 1; i < rank; ++i) v.push_back(static_cast<double>(i * (rank - i)));
  return constant(grid, v);
}

TodaCoefficients TodaCoefficients::constant(const GridPtr& grid, const std::vector<double>& values) {
  std::vector<ScalarField> f;
  for (double v : values) f.emplace_back(grid, v);
  return TodaCoefficients(static_cast<int>(values.size()) + 1, std::move(f));
}

double TodaCoefficients::sup() const {
  double s = 0.0;
  for (const auto& f : k) s = std::max(s, f.max());
  return s;
}

TodaCoefficients TodaCoefficients::restrict_to(const GridPtr& sub) const {
  std::vector<ScalarField> f;
  for (const auto& ki : k) f.push_back(ki.restrict_to(sub));
  return TodaCoefficients(n, std::move(f));
}

TodaState::TodaState(std::vector<ScalarField> fields) : u(std::move(fields)) {
  if (u.empty()) throw ConfigError("state needs at least one component");
  for (const auto& f : u) require_same_grid(u.front(), f);
}

TodaState::TodaState(const GridPtr& grid, int rank, double fill) {
  if (rank < 2) throw ConfigError("rank n must be >= 2");
  for (int i = 1; i < rank; ++i) u.emplace_back(grid, fill);
}

double TodaState::at(int i, std::size_t node) const {
  if (i <= 0 || i >= rank()) return 0.0;
  return u[i - 1][node];
}

double TodaState::exponent(int i, std::size_t node) const {
  return 2.0 * at(i, node) - at(i - 1, node) - at(i + 1, node);
}

TodaState TodaState::restrict_to(const GridPtr& sub) const {
  std::vector<ScalarField> f;
  for (const auto& ui : u) f.push_back(ui.restrict_to(sub));
  return TodaState(std::move(f));
}

TodaState TodaState::resample(const GridPtr& target) const {
  std::vector<ScalarField> f;
  for (const auto& ui : u) f.push_back(ui.resample(target));
  return TodaState(std::move(f));
}

TodaState TodaState::shifted(double c) const {
  TodaState out = *this;
  for (auto& f : out.u)
    for (auto& v : f.values()) v += c;
  return out;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::solution: return "solution";
    case Classification::subsolution: return "subsolution";
    case Classification::supersolution: return "supersolution";
    case Classification::none: return "none";
  }
  return "none";
}

std::vector<ScalarField> residual(const TodaState& u, const TodaCoefficients& k) {
  if (u.rank() != k.n) throw ConfigError("state and coefficients have different rank");
  require_same_grid(u.u.front(), k.k.front());
  const int n = k.n;
  const auto& g = *u.grid();
  PolarStencil stencil(g);
  std::vector<ScalarField> out;
  for (int i = 1; i < n; ++i) {
    ScalarField r = laplace_beltrami(stencil, u.u[i - 1]);
    const double source = static_cast<double>(i * (n - i));
    for (auto node : g.interior()) {
      const double e = u.exponent(i, node);
      if (e > kMaxExponent) {
        std::ostringstream os;
        os << "exponent overflow: E_" << i << " = " << e << " at node " << node << " (rho = " << g.rho(node)
           << ", theta = " << g.theta(node) << ")";
        throw NumericalError(os.str());
      }
      r[node] += source - k.k[i - 1][node] * std::exp(e);
    }
    out.push_back(std::move(r));
  }
  return out;
}

double residual_norm(const std::vector<ScalarField>& r) {
  double m = 0.0;
  for (const auto& f : r)
    for (auto node : f.grid()->interior()) m = std::max(m, std::abs(f[node]));
  return m;
}

Classification classify(const TodaState& u, const TodaCoefficients& k, double tol) {
  if (!(tol > 0.0)) throw ConfigError("classification tolerance must be positive");
  const auto r = residual(u, k);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& f : r) {
    lo = std::min(lo, f.min_interior());
    hi = std::max(hi, f.max_interior());
  }
  const bool sub = lo >= -tol;
  const bool super = hi <= tol;
  if (sub && super) return Classification::solution;
  if (sub) return Classification::subsolution;
  if (super) return Classification::supersolution;
  return Classification::none;
}

CouplingMatrixField::CouplingMatrixField(GridPtr g, int d)
    : grid(std::move(g)), dim(d), entries(grid->size() * d * d, 0.0) {}

double mean_exponential(double k, double a, double b) {
  if (k == 0.0) return 0.0;
  if (std::abs(a - b) < 1e-12) return k * std::exp(a);
  return k * (std::exp(a) - std::exp(b)) / (a - b);
}

CouplingMatrixField linearized_coupling(const TodaState& u, const TodaState& v, const TodaCoefficients& k) {
  require_same_grid(u.u.front(), v.u.front());
  require_same_grid(u.u.front(), k.k.front());
  const int d = k.n - 1;
  CouplingMatrixField c(u.grid(), d);
  for (auto node : u.grid()->interior()) {
    for (int i = 1; i <= d; ++i) {
      const double ci = mean_exponential(k.k[i - 1][node], u.exponent(i, node), v.exponent(i, node));
      c(node, i - 1, i - 1) = -2.0 * ci;
      if (i > 1) c(node, i - 1, i - 2) = ci;
      if (i < d) c(node, i - 1, i) = ci;
    }
  }
  return c;
}

CouplingReport validate_coupling(const CouplingMatrixField& c, double tol) {
  CouplingReport rep;
  const int d = c.dim;
  std::vector<char> pattern(d * d, 0);
  std::ostringstream detail;
  for (auto node : c.grid->interior()) {
    for (int i = 0; i < d; ++i) {
      double sum = 0.0;
      for (int j = 0; j < d; ++j) {
        const double v = c(node, i, j);
        sum += v;
        if (i != j && v != 0.0) pattern[i * d + j] = 1;
        if (i != j && v < -tol && rep.cooperative) {
          rep.cooperative = false;
          detail << "(a) fails at node " << node << " entry (" << i + 1 << "," << j + 1 << ")=" << v << "; ";
        }
      }
      if (sum > tol && rep.row_dominant) {
        rep.row_dominant = false;
        detail << "(b) fails at node " << node << " row " << i + 1 << " sum=" << sum << "; ";
      }
      if (std::abs(sum) > tol) rep.nonzero_row_sum = true;
    }
  }
  // Closure from each starting index: reach everything that a row in the current
  // set couples to. A closed proper subset is the alpha of a splitting.
  for (int s = 0; s < d && rep.fully_coupled; ++s) {
    std::vector<char> in(d, 0);
    in[s] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (int i = 0; i < d; ++i) {
        if (!in[i]) continue;
        for (int j = 0; j < d; ++j) {
          if (!in[j] && pattern[i * d + j]) {
            in[j] = 1;
            grew = true;
          }
        }
      }
    }
    if (std::count(in.begin(), in.end(), 1) < d) {
      rep.fully_coupled = false;
      for (int i = 0; i < d; ++i)
        if (in[i]) rep.split.push_back(i);
      detail << "(c) fails: index set starting at " << s + 1 << " is closed; ";
    }
  }
  rep.detail = detail.str();
  return rep;
}

double bubble_value(int i, int n, double r, double delta, double rho) {
  if (!(rho < r)) throw DomainError("exact_bubble is only defined for |z| < r");
  const double s = 1.0 - rho * rho;
  const double t = r * r - rho * rho;
  return 0.5 * i * (n - i) * std::log(r * r * s * s / (delta * t * t));
}

TodaState exact_bubble(const GridPtr& grid, double r, double delta, int n) {
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("bubble radius must lie in (0,1]");
  if (!(delta > 0.0)) throw ConfigError("bubble delta must be positive");
  if (!(grid->radius() < r)) throw DomainError("exact_bubble requires the grid inside D_r");
  TodaState out(grid, n);
  for (int i = 1; i < n; ++i)
    for (std::size_t node = 0; node < grid->size(); ++node)
      out.u[i - 1][node] = bubble_value(i, n, r, delta, grid->rho(node));
  return out;
}

double subsolution_constant(const TodaCoefficients& k) {
  const double s = k.sup();
  if (!std::isfinite(s)) throw PreconditionError("coefficients are unbounded");
  return std::max(1.0 + 1e-6, s);
}

TodaState constant_subsolution(const TodaCoefficients& k) {
  const double c0 = subsolution_constant(k);
  TodaState out(k.grid(), k.n);
  for (int i = 1; i < k.n; ++i) {
    const double v = -0.5 * i * (k.n - i) * std::log(c0);
    for (auto& x : out.u[i - 1].values()) x = v;
  }
  return out;
}

}  // namespace toda
