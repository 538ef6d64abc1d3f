#include "toda/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "toda/error.hpp"

namespace toda {

DiskDomain::DiskDomain(double r, double eps) : radius(r), shrink(eps) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("disk radius must lie in (0,1)");
  if (!(eps >= 0.0)) throw ConfigError("shrink parameter must be >= 0");
  if (eps >= hyperbolic_radius()) throw ConfigError("shrunken domain is empty");
}

double DiskDomain::hyperbolic_radius() const { return hyperbolic_distance_from_origin(radius); }

double DiskDomain::effective_radius() const {
  return shrink == 0.0 ? radius : euclidean_radius_of(hyperbolic_radius() - shrink);
}

bool DiskDomain::contains(std::complex<double> z) const { return std::abs(z) < effective_radius(); }

double hyperbolic_distance_from_origin(double rho) { return 2.0 * std::atanh(rho); }

double euclidean_radius_of(double hyperbolic_radius) { return std::tanh(0.5 * hyperbolic_radius); }

PolarGrid::PolarGrid(double radius, int n_r, int n_theta)
    : radius_(radius), n_r_(n_r), n_theta_(n_theta) {
  if (!(radius > 0.0 && radius < 1.0)) throw ConfigError("grid radius must lie in (0,1)");
  if (n_r < 3) throw ConfigError("grid too coarse: n_r must be >= 3");
  if (n_theta < 8 || n_theta % 2 != 0) throw ConfigError("n_theta must be even and >= 8");
  h_ = radius / (n_r - 1);
  dtheta_ = 2.0 * std::numbers::pi / n_theta;
  for (std::size_t i = 0; i < size(); ++i) {
    (is_boundary(i) ? boundary_ : interior_).push_back(i);
  }
}

std::size_t PolarGrid::index(int ring, int angle) const {
  if (ring == 0) return 0;
  angle = ((angle % n_theta_) + n_theta_) % n_theta_;
  return 1 + static_cast<std::size_t>(ring - 1) * n_theta_ + angle;
}

int PolarGrid::ring(std::size_t node) const {
  return node == 0 ? 0 : 1 + static_cast<int>((node - 1) / n_theta_);
}

int PolarGrid::angle(std::size_t node) const {
  return node == 0 ? 0 : static_cast<int>((node - 1) % n_theta_);
}

double PolarGrid::theta(std::size_t node) const { return angle(node) * dtheta_; }

std::complex<double> PolarGrid::z(std::size_t node) const { return std::polar(rho(node), theta(node)); }

bool PolarGrid::same_layout(const PolarGrid& other) const {
  return radius_ == other.radius_ && n_r_ == other.n_r_ && n_theta_ == other.n_theta_;
}

std::shared_ptr<const PolarGrid> PolarGrid::truncated(int last_ring) const {
  if (last_ring < 2 || last_ring > n_r_ - 1) throw ConfigError("truncation ring out of range");
  if (last_ring == n_r_ - 1) return std::make_shared<PolarGrid>(*this);
  auto g = std::make_shared<PolarGrid>(last_ring * h_, last_ring + 1, n_theta_);
  return g;
}

GridPtr make_grid(double radius, int n_r, int n_theta) {
  return std::make_shared<const PolarGrid>(radius, n_r, n_theta);
}

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw ConfigError("field requires a grid");
  values_.assign(grid_->size(), fill);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ConfigError("field requires a grid");
  if (values_.size() != grid_->size()) throw ConfigError("field size does not match grid");
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(std::complex<double>)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) out[i] = f(grid->z(i));
  return out;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_interior() const {
  double m = -INFINITY;
  for (auto i : grid_->interior()) m = std::max(m, values_[i]);
  return m;
}

double ScalarField::min_interior() const {
  double m = INFINITY;
  for (auto i : grid_->interior()) m = std::min(m, values_[i]);
  return m;
}

double ScalarField::interpolate(std::complex<double> p) const {
  const auto& g = *grid_;
  const double rho = std::abs(p);
  if (rho > g.radius() * (1.0 + 1e-12)) throw DomainError("interpolation point outside grid");
  double t = std::min(rho / g.h(), static_cast<double>(g.n_r() - 1));
  int k = std::min(static_cast<int>(t), g.n_r() - 2);
  double fr = t - k;
  double th = std::arg(p);
  if (th < 0) th += 2.0 * std::numbers::pi;
  double s = th / g.dtheta();
  int l = static_cast<int>(s) % g.n_theta();
  double fa = s - std::floor(s);
  auto at = [&](int ring, int ang) { return values_[g.index(ring, ang)]; };
  double inner = (1 - fa) * at(k, l) + fa * at(k, l + 1);
  double outer = (1 - fa) * at(k + 1, l) + fa * at(k + 1, l + 1);
  return (1 - fr) * inner + fr * outer;
}

ScalarField ScalarField::resample(GridPtr target) const {
  ScalarField out(target);
  for (std::size_t i = 0; i < target->size(); ++i) out[i] = interpolate(target->z(i));
  return out;
}

ScalarField ScalarField::restrict_to(GridPtr sub) const {
  if (std::abs(sub->h() - grid_->h()) > 1e-13 * grid_->h() || sub->n_theta() != grid_->n_theta() || sub->n_r() > grid_->n_r())
    throw ConfigError("restriction target is not a truncation of this grid");
  std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(sub->size()));
  return ScalarField(std::move(sub), std::move(v));
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!a.grid() || !b.grid() || !a.grid()->same_layout(*b.grid()))
    throw ConfigError("fields live on different grids");
}

std::string field_to_csv(const ScalarField& field) {
  const auto& g = *field.grid();
  std::string out = "rho,theta,value\n";
  char buf[128];
  for (int k = 0; k < g.n_r(); ++k) {
    for (int l = 0; l < g.n_theta(); ++l) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.rho_of_ring(k), l * g.dtheta(),
                    field[g.index(k, l)]);
      out += buf;
    }
  }
  return out;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << field_to_csv(field);
}

ScalarField field_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("rho,theta,value", 0) != 0)
    throw ConfigError("field CSV must start with header rho,theta,value");
  std::vector<double> rho, val;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double r = 0, t = 0, v = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &t, &v) != 3)
      throw ConfigError("malformed field CSV row: " + line);
    if (!std::isfinite(v)) throw ConfigError("non-finite field value in CSV");
    rho.push_back(r);
    val.push_back(v);
  }
  std::size_t n_theta = 0;
  while (n_theta < rho.size() && rho[n_theta] == 0.0) ++n_theta;
  if (n_theta == 0 || rho.size() % n_theta != 0) throw ConfigError("field CSV is not a polar grid table");
  const int n_r = static_cast<int>(rho.size() / n_theta);
  auto grid = make_grid(rho.back(), n_r, static_cast<int>(n_theta));
  ScalarField out(grid);
  out[0] = val[0];
  for (std::size_t row = n_theta; row < val.size(); ++row) {
    out[grid->index(static_cast<int>(row / n_theta), static_cast<int>(row % n_theta))] = val[row];
  }
  return out;
}

ScalarField read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return field_from_csv(ss.str());
}

}  // namespace toda
