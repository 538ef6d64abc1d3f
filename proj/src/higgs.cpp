#include "toda/higgs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/Polynomials>

#include "toda/error.hpp"
#include "toda/hyperbolic.hpp"
#include "toda/maximal.hpp"

namespace toda {

Holomorphic Holomorphic::polynomial(std::vector<Complex> c) {
  Holomorphic h;
  h.kind = Kind::poly;
  while (c.size() > 1 && c.back() == Complex{}) c.pop_back();
  h.coeffs = std::move(c);
  return h;
}

Holomorphic Holomorphic::blaschke_product(std::vector<Complex> zeros, Complex prefactor) {
  if (std::abs(std::abs(prefactor) - 1.0) > 1e-12) throw ConfigError("Blaschke prefactor must be unimodular");
  for (auto z : zeros)
    if (!(std::abs(z) > 0.0 && std::abs(z) < 1.0)) throw PreconditionError("Blaschke zeros must satisfy 0 < |z| < 1");
  Holomorphic h;
  h.kind = Kind::blaschke;
  h.zeros = std::move(zeros);
  h.prefactor = prefactor;
  return h;
}

Holomorphic Holomorphic::constant(double v) {
  Holomorphic h;
  h.kind = Kind::fuchsian;
  h.value = v;
  return h;
}

Complex Holomorphic::operator()(Complex z) const {
  switch (kind) {
    case Kind::poly: {
      Complex acc{};
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
      return acc;
    }
    case Kind::blaschke:
      return prefactor * blaschke(zeros, z);
    case Kind::fuchsian:
      return value;
  }
  return {};
}

bool Holomorphic::identically_zero() const {
  switch (kind) {
    case Kind::poly:
      return std::all_of(coeffs.begin(), coeffs.end(), [](Complex c) { return c == Complex{}; });
    case Kind::blaschke:
      return false;
    case Kind::fuchsian:
      return value == 0.0;
  }
  return true;
}

std::vector<Complex> Holomorphic::zeros_in_disk() const {
  std::vector<Complex> out;
  if (kind == Kind::blaschke) return zeros;
  if (kind != Kind::poly || coeffs.size() < 2) return out;
  Eigen::VectorXcd c(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) c[static_cast<Eigen::Index>(i)] = coeffs[i];
  Eigen::PolynomialSolver<std::complex<double>, Eigen::Dynamic> solver(c);
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i)
    if (std::abs(solver.roots()[i]) < 1.0) out.push_back(solver.roots()[i]);
  return out;
}

std::string to_string(Holomorphic::Kind k) {
  switch (k) {
    case Holomorphic::Kind::poly: return "poly";
    case Holomorphic::Kind::blaschke: return "blaschke";
    case Holomorphic::Kind::fuchsian: return "fuchsian";
  }
  return "poly";
}

namespace {

nlohmann::json complex_list(const std::vector<Complex>& v) {
  auto a = nlohmann::json::array();
  for (auto c : v) a.push_back(c.imag() == 0.0 ? nlohmann::json(c.real()) : nlohmann::json{c.real(), c.imag()});
  return a;
}

// Accepts numbers or [re, im] pairs.
std::vector<Complex> parse_complex_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  std::vector<Complex> out;
  for (const auto& e : j) {
    if (e.is_number()) {
      out.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ConfigError(std::string(what) + " entries must be numbers or [re, im] pairs");
    }
  }
  return out;
}

}  // namespace

nlohmann::json Holomorphic::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}};
  if (kind == Kind::poly) j["coeffs"] = complex_list(coeffs);
  if (kind == Kind::blaschke) {
    j["zeros"] = complex_list(zeros);
    if (prefactor != Complex{1.0, 0.0}) j["prefactor"] = complex_list({prefactor})[0];
  }
  if (kind == Kind::fuchsian) j["value"] = value;
  return j;
}

Holomorphic Holomorphic::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("gamma descriptor needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "poly") {
    if (!j.contains("coeffs")) throw ConfigError("poly descriptor needs 'coeffs'");
    return polynomial(parse_complex_list(j.at("coeffs"), "coeffs"));
  }
  if (kind == "blaschke") {
    if (!j.contains("zeros")) throw ConfigError("blaschke descriptor needs 'zeros'");
    Complex pre{1.0, 0.0};
    if (j.contains("prefactor")) pre = parse_complex_list(nlohmann::json::array({j.at("prefactor")}), "prefactor")[0];
    return blaschke_product(parse_complex_list(j.at("zeros"), "zeros"), pre);
  }
  if (kind == "fuchsian") {
    if (!j.contains("value")) throw ConfigError("fuchsian descriptor needs 'value'");
    return constant(j.at("value").get<double>());
  }
  throw ConfigError("unknown gamma kind '" + kind + "'");
}

HiggsData::HiggsData(int rank, std::vector<Holomorphic> g) : n(rank), gammas(std::move(g)) {
  if (n < 2) throw ConfigError("rank n must be >= 2");
  if (static_cast<int>(gammas.size()) != n - 1) throw ConfigError("need exactly n-1 gamma descriptors");
  for (std::size_t i = 0; i < gammas.size(); ++i)
    if (gammas[i].identically_zero())
      throw PreconditionError("gamma_" + std::to_string(i + 1) + " vanishes identically");
}

nlohmann::json HiggsData::to_json() const {
  auto g = nlohmann::json::array();
  for (const auto& x : gammas) g.push_back(x.to_json());
  return {{"n", n}, {"gammas", g}};
}

HiggsData HiggsData::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("gammas")) throw ConfigError("HiggsData needs 'n' and 'gammas'");
  if (!j.at("n").is_number_integer()) throw ConfigError("'n' must be an integer");
  if (!j.at("gammas").is_array()) throw ConfigError("'gammas' must be an array");
  std::vector<Holomorphic> g;
  for (const auto& e : j.at("gammas")) g.push_back(Holomorphic::from_json(e));
  return HiggsData(j.at("n").get<int>(), std::move(g));
}

HiggsData fuchsian_data(int n) {
  if (n < 2) throw ConfigError("rank n must be >= 2");
  std::vector<Holomorphic> g;
  for (int i = 1; i < n; ++i) g.push_back(Holomorphic::constant(std::sqrt(i * (n - i) / 2.0)));
  return HiggsData(n, std::move(g));
}

Complex blaschke(const std::vector<Complex>& zeros, Complex z) {
  if (std::abs(z) > 1.0 + 1e-12) throw DomainError("Blaschke products are evaluated on the closed disk");
  Complex acc{1.0, 0.0};
  for (auto a : zeros) {
    const double m = std::abs(a);
    if (!(m > 0.0 && m < 1.0)) throw PreconditionError("Blaschke zeros must satisfy 0 < |z| < 1");
    acc *= (std::conj(a) / m) * (a - z) / (1.0 - std::conj(a) * z);
  }
  return acc;
}

TodaCoefficients coefficients_from_higgs(const HiggsData& h, const GridPtr& grid) {
  std::vector<ScalarField> k;
  for (int i = 1; i < h.n; ++i) {
    ScalarField f(grid);
    for (std::size_t node = 0; node < grid->size(); ++node) {
      const double v = 2.0 * std::norm(h.gammas[i - 1](grid->z(node)));
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "gamma_" << i << " overflows at z = " << grid->z(node);
        throw NumericalError(os.str());
      }
      f[node] = v;
    }
    k.push_back(std::move(f));
  }
  return TodaCoefficients(h.n, std::move(k));
}

double background_density(int i, int n, Complex z) {
  const double half_g = 0.5 * metric_density(z);
  return std::pow(half_g, -0.5 * (n + 1 - 2 * i));
}

MetricSolution metric_from_state(const TodaState& u) {
  const int n = u.rank();
  const auto& grid = u.grid();
  MetricSolution m;
  m.u = u;
  for (int i = 1; i <= n; ++i) {
    ScalarField w(grid), h(grid);
    for (std::size_t node = 0; node < grid->size(); ++node) {
      w[node] = u.at(i - 1, node) - u.at(i, node);
      h[node] = std::exp(w[node]) * background_density(i, n, grid->z(node));
    }
    m.w.push_back(std::move(w));
    m.density.push_back(std::move(h));
  }
  return m;
}

ScalarField determinant_density(const MetricSolution& m, int k) {
  const int n = static_cast<int>(m.density.size());
  if (k < 1 || k > n - 1) throw ConfigError("determinant index out of range");
  ScalarField out(m.density.front().grid(), 1.0);
  for (int j = 1; j <= k; ++j)
    for (std::size_t node = 0; node < out.size(); ++node) out[node] /= m.density[j - 1][node];
  return out;
}

ScalarField higgs_norm(const TodaState& u, const TodaCoefficients& k) {
  if (u.rank() != k.n) throw ConfigError("state and coefficients have different rank");
  require_same_grid(u.u.front(), k.k.front());
  ScalarField out(u.grid());
  for (std::size_t node = 0; node < out.size(); ++node) {
    double s = 0.0;
    for (int i = 1; i < k.n; ++i) s += 0.5 * k.k[i - 1][node] * std::exp(u.exponent(i, node));
    out[node] = s;
  }
  return out;
}

double fuchsian_norm(int n) { return n * (n * n - 1) / 12.0; }

std::string to_string(Domination d) {
  switch (d) {
    case Domination::dominates: return "dominates";
    case Domination::dominated: return "dominated";
    case Domination::incomparable: return "incomparable";
    case Domination::equal: return "equal";
  }
  return "incomparable";
}

namespace {

Domination verdict(bool ge, bool le) {
  if (ge && le) return Domination::equal;
  if (ge) return Domination::dominates;
  if (le) return Domination::dominated;
  return Domination::incomparable;
}

}  // namespace

Domination weak_domination(const TodaState& a, const TodaState& b, double tol) {
  if (a.rank() != b.rank()) throw ConfigError("states have different rank");
  require_same_grid(a.u.front(), b.u.front());
  bool ge = true, le = true;
  for (std::size_t i = 0; i < a.u.size(); ++i)
    for (std::size_t node = 0; node < a.u[i].size(); ++node) {
      const double d = a.u[i][node] - b.u[i][node];
      ge = ge && d >= -tol;
      le = le && d <= tol;
    }
  return verdict(ge, le);
}

Domination weak_domination(const MetricSolution& a, const MetricSolution& b, double tol) {
  if (a.density.size() != b.density.size()) throw ConfigError("metrics have different rank");
  const int n = static_cast<int>(a.density.size());
  bool ge = true, le = true;
  for (int k = 1; k < n; ++k) {
    const auto da = determinant_density(a, k);
    const auto db = determinant_density(b, k);
    require_same_grid(da, db);
    for (std::size_t node = 0; node < da.size(); ++node) {
      const double d = std::log(da[node]) - std::log(db[node]);
      ge = ge && d >= -tol;
      le = le && d <= tol;
    }
  }
  return verdict(ge, le);
}

nlohmann::json BergmanResult::to_json() const {
  return {{"radii", radii},
          {"partials", partials},
          {"estimate", estimate},
          {"growth_ratio", growth_ratio},
          {"divergence_suspected", divergence_suspected}};
}

BergmanResult bergman_integral(const Holomorphic& f, std::vector<double> radii, int panels, int n_theta) {
  if (radii.empty()) throw ConfigError("need at least one quadrature radius");
  if (panels < 1 || n_theta < 8) throw ConfigError("quadrature resolution too small");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0 && radii[i] < 1.0)) throw ConfigError("quadrature radii must lie in (0,1)");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw ConfigError("quadrature radii must increase");
  }
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  auto ring = [&](double rho) {
    double s = 0.0;
    for (int l = 0; l < n_theta; ++l) {
      const double v = std::norm(f(std::polar(rho, l * dtheta)));
      if (!std::isfinite(v)) throw NumericalError("integrand is not finite");
      s += v;
    }
    return s * dtheta * rho * (1.0 - rho * rho);
  };
  BergmanResult out;
  out.radii = radii;
  double total = 0.0, lo = 0.0;
  for (double hi : radii) {
    // panels graded towards the outer end of each annulus
    for (int p = 0; p < panels; ++p) {
      const double a = lo + (hi - lo) * (1.0 - std::pow(0.5, p));
      const double b = p == panels - 1 ? hi : lo + (hi - lo) * (1.0 - std::pow(0.5, p + 1));
      total += Rule::integrate(ring, a, b);
    }
    out.partials.push_back(total);
    lo = hi;
  }
  const auto m = out.partials.size();
  out.estimate = out.partials.back();
  if (m >= 3) {
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    for (int r = 0; r < 3; ++r) {
      const double x = 1.0 - radii[m - 3 + r];
      a(r, 0) = 1.0;
      a(r, 1) = x * x;
      a(r, 2) = x * x * x;
      b[r] = out.partials[m - 3 + r];
    }
    out.estimate = a.fullPivLu().solve(b)[0];
  }
  if (m >= 3) {
    const double d1 = out.partials[m - 2] - out.partials[m - 3];
    const double d2 = out.partials[m - 1] - out.partials[m - 2];
    out.growth_ratio = d1 > 0.0 ? d2 / d1 : 0.0;
    out.divergence_suspected = out.growth_ratio > 0.5;
  }
  return out;
}

ScalarField pullback_ratio(const TodaState& u, const TodaState& u_max, const TodaCoefficients& k, double tol) {
  if (u.rank() != 2 || u_max.rank() != 2 || k.n != 2) throw ConfigError("pullback_ratio is defined for n = 2");
  require_same_grid(u.u.front(), u_max.u.front());
  domination_dichotomy(u, u_max, tol);
  ScalarField out(u.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = std::exp(2.0 * (u.u[0][node] - u_max.u[0][node]));
  return out;
}

ScalarField pullback_density(const TodaState& u_max, const TodaCoefficients& k) {
  if (u_max.rank() != 2 || k.n != 2) throw ConfigError("pullback_density is defined for n = 2");
  require_same_grid(u_max.u.front(), k.k.front());
  ScalarField out(u_max.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = 0.5 * k.k[0][node] * std::exp(2.0 * u_max.u[0][node]);
  return out;
}

}  // namespace toda
