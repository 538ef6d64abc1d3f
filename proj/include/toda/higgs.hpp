#pragma once

#include <complex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toda/grid.hpp"
#include "toda/toda_system.hpp"

namespace toda {

using Complex = std::complex<double>;

/// Holomorphic function on the unit disk: a polynomial, a finite Blaschke
/// product times a unimodular constant, or a constant (Fuchsian case).
struct Holomorphic {
  enum class Kind { poly, blaschke, fuchsian };
  Kind kind = Kind::poly;
  std::vector<Complex> coeffs;  ///< poly: c_0 + c_1 z + ...
  std::vector<Complex> zeros;   ///< blaschke zeros, 0 < |z_j| < 1
  Complex prefactor{1.0, 0.0};  ///< blaschke unimodular constant
  double value = 0.0;           ///< fuchsian constant

  static Holomorphic polynomial(std::vector<Complex> c);
  static Holomorphic blaschke_product(std::vector<Complex> zeros, Complex prefactor = {1.0, 0.0});
  static Holomorphic constant(double v);

  Complex operator()(Complex z) const;
  bool identically_zero() const;
  /// Zeros with |z| < 1 (polynomial roots via the companion matrix).
  std::vector<Complex> zeros_in_disk() const;

  nlohmann::json to_json() const;
  static Holomorphic from_json(const nlohmann::json& j);
};

std::string to_string(Holomorphic::Kind k);

/// Rank-n CVHS data (gamma_1, ..., gamma_{n-1}) over the disk.
struct HiggsData {
  int n = 2;
  std::vector<Holomorphic> gammas;

  HiggsData() = default;
  HiggsData(int rank, std::vector<Holomorphic> g);

  nlohmann::json to_json() const;
  static HiggsData from_json(const nlohmann::json& j);
};

/// gamma_i = sqrt(i(n-i)/2).
HiggsData fuchsian_data(int n);

/// prod_j (conj(z_j)/|z_j|) (z_j - z)/(1 - conj(z_j) z); zeros must satisfy 0 < |z_j| < 1.
Complex blaschke(const std::vector<Complex>& zeros, Complex z);

/// k_i = 2 |gamma_i|^2 at every node.
TodaCoefficients coefficients_from_higgs(const HiggsData& h, const GridPtr& grid);

/// Conformal factors w_i = u_{i-1} - u_i (i = 1..n) and densities h_i = e^{w_i} h~_i
/// with h~_i = (g/2)^{-(n+1-2i)/2}.
struct MetricSolution {
  TodaState u;
  std::vector<ScalarField> w;        ///< w[i-1] holds w_i
  std::vector<ScalarField> density;  ///< density[i-1] holds h_i
};

MetricSolution metric_from_state(const TodaState& u);

/// h~_i at a point for rank n.
double background_density(int i, int n, Complex z);

/// det(h|_{G_k}) = prod_{j <= k} h_j^{-1}, from the densities alone (k = 1..n-1).
ScalarField determinant_density(const MetricSolution& m, int k);

/// |theta|^2 = sum_i (1/2) k_i e^{E_i(u)}.
ScalarField higgs_norm(const TodaState& u, const TodaCoefficients& k);

/// n(n^2 - 1)/12, the value of |theta|^2 for the Fuchsian metric.
double fuchsian_norm(int n);

enum class Domination { dominates, dominated, incomparable, equal };
std::string to_string(Domination d);

/// Order of the u_k fields, which is the order of det(h|_{G_k}).
Domination weak_domination(const TodaState& a, const TodaState& b, double tol);
/// The same verdict computed from determinant densities (log scale).
Domination weak_domination(const MetricSolution& a, const MetricSolution& b, double tol);

struct BergmanResult {
  std::vector<double> radii;
  std::vector<double> partials;  ///< integral over |z| <= R
  double estimate = 0.0;         ///< tail-extrapolated value as R -> 1
  double growth_ratio = 0.0;     ///< last increment / previous increment
  bool divergence_suspected = false;
  nlohmann::json to_json() const;
};

/// Integral of |f|^2 (1 - |z|^2) over |z| <= R for each R (Gauss-Legendre
/// panels in rho, trapezoid in theta). The estimate fits
/// I(R) = I + a (1-R)^2 + b (1-R)^3 through the last three partials.
BergmanResult bergman_integral(const Holomorphic& f, std::vector<double> radii = {0.9, 0.99, 0.999},
                               int panels = 8, int n_theta = 512);

/// e^{2(u_1 - u_max,1)} for n = 2.
ScalarField pullback_ratio(const TodaState& u, const TodaState& u_max, const TodaCoefficients& k, double tol = 1e-8);

/// (1/2) k e^{2 u_max,1}: pullback density of the comparison map, relative to g.
ScalarField pullback_density(const TodaState& u_max, const TodaCoefficients& k);

}  // namespace toda
