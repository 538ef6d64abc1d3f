#include "toda/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "toda/error.hpp"

namespace toda {

namespace {

constexpr double kOrderSlack = 1e-8;
constexpr double kZeroProximity = 1e-3;
constexpr double kFloorFraction = 1e-10;

std::vector<double> center_of(const TodaState& u) {
  std::vector<double> c;
  for (const auto& f : u.u) c.push_back(f[0]);
  return c;
}

// Largest b_i - a_i over the nodes of a's grid; b may live on a larger nested grid.
double excess(const TodaState& a, const TodaState& b) {
  const auto br = b.restrict_to(a.grid());
  double e = -INFINITY;
  for (std::size_t i = 0; i < a.u.size(); ++i)
    for (std::size_t node = 0; node < a.u[i].size(); ++node) e = std::max(e, br.u[i][node] - a.u[i][node]);
  return e;
}

// Every other ring of a field, on the grid with twice the radial step.
ScalarField coarsen(const ScalarField& f) {
  const auto& g = *f.grid();
  auto c = make_grid(g.radius(), (g.n_r() - 1) / 2 + 1, g.n_theta());
  ScalarField out(c);
  for (std::size_t node = 0; node < c->size(); ++node) out[node] = f[g.index(2 * c->ring(node), c->angle(node))];
  return out;
}

TodaState coarsen(const TodaState& u) {
  std::vector<ScalarField> f;
  for (const auto& x : u.u) f.push_back(coarsen(x));
  return TodaState(std::move(f));
}

void check_candidates(const std::vector<double>& c) {
  if (c.empty()) throw ConfigError("no candidate radii");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0 && c[i] < 1.0)) throw ConfigError("candidate radii must lie in (0,1)");
    if (i > 0 && !(c[i] > c[i - 1])) throw ConfigError("candidate radii must increase");
  }
}

}  // namespace

std::vector<double> ExhaustionPlan::dyadic_radii(int count) {
  if (count < 1) throw ConfigError("need at least one radius");
  std::vector<double> r;
  for (int j = 0; j < count; ++j) r.push_back(1.0 - std::ldexp(1.0, -j - 1));
  return r;
}

void ExhaustionPlan::validate() const {
  check_candidates(radii);
  if (n_r_finest < 9) throw ConfigError("n_r_finest too small");
  if (n_theta < 8 || n_theta % 2) throw ConfigError("n_theta must be even and >= 8");
  if (epsilons.empty() || epsilons.back() != 0.0) throw ConfigError("shrink stages must end with epsilon = 0");
  for (std::size_t m = 0; m < epsilons.size(); ++m) {
    if (!(epsilons[m] >= 0.0)) throw ConfigError("shrink parameters must be >= 0");
    if (m > 0 && !(epsilons[m] < epsilons[m - 1])) throw ConfigError("shrink parameters must decrease");
  }
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (extrapolation_points < 1 || extrapolation_points > static_cast<int>(radii.size()))
    throw ConfigError("extrapolation_points must lie in 1..number of radii");
  if (richardson && (n_r_finest - 1) % 2) throw ConfigError("Richardson needs n_r_finest - 1 even");
  auto r = rings();
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (r[j] < (richardson ? 8 : 4)) throw ConfigError("radius " + std::to_string(radii[j]) + " has fewer than 4 rings; raise n_r_finest");
    if (j > 0 && r[j] == r[j - 1]) throw ConfigError("two radii snap to the same ring; raise n_r_finest");
  }
}

GridPtr ExhaustionPlan::finest_grid() const { return make_grid(radii.back(), n_r_finest, n_theta); }

std::vector<int> ExhaustionPlan::rings() const {
  const double h = radii.back() / (n_r_finest - 1);
  std::vector<int> r;
  const int step = richardson ? 2 : 1;
  for (double x : radii) r.push_back(step * static_cast<int>(std::lround(x / (step * h))));
  r.back() = n_r_finest - 1;
  return r;
}

nlohmann::json ExhaustionPlan::to_json() const {
  nlohmann::json j{{"radii", radii}, {"n_r_finest", n_r_finest}, {"n_theta", n_theta},
                   {"epsilons", epsilons}, {"tol", tol},
                   {"extrapolation_points", extrapolation_points}, {"richardson", richardson},
                   {"threads", threads}};
  if (schedule) j["levels"] = schedule->levels;
  return j;
}

ExhaustionPlan ExhaustionPlan::from_json(const nlohmann::json& j) {
  ExhaustionPlan p;
  try {
    if (j.contains("radii")) p.radii = j.at("radii").get<std::vector<double>>();
    if (j.contains("n_radii")) p.radii = dyadic_radii(j.at("n_radii").get<int>());
    if (j.contains("n_r_finest")) p.n_r_finest = j.at("n_r_finest").get<int>();
    if (j.contains("n_theta")) p.n_theta = j.at("n_theta").get<int>();
    if (j.contains("epsilons")) p.epsilons = j.at("epsilons").get<std::vector<double>>();
    if (j.contains("tol")) p.tol = j.at("tol").get<double>();
    if (j.contains("richardson")) p.richardson = j.at("richardson").get<bool>();
    if (j.contains("threads")) p.threads = j.at("threads").get<int>();
    if (j.contains("extrapolation_points")) p.extrapolation_points = j.at("extrapolation_points").get<int>();
    if (j.contains("levels")) {
      BlowupSchedule s;
      s.levels = j.at("levels").get<std::vector<double>>();
      p.schedule = s;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad exhaustion plan: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<double> admissible_radii(const TodaCoefficients& k, const std::vector<double>& candidates) {
  check_candidates(candidates);
  const auto& g = *k.grid();
  std::vector<double> out;
  std::ostringstream blocked;
  for (double r : candidates) {
    if (r > g.radius() * (1.0 + 1e-12)) throw DomainError("candidate radius lies outside the coefficient grid");
    bool ok = true;
    for (int i = 1; i < k.n && ok; ++i) {
      const double floor = kFloorFraction * k.k[i - 1].max();
      for (int l = 0; l < g.n_theta(); ++l) {
        const double v = k.k[i - 1].interpolate(std::polar(r, l * g.dtheta()));
        if (!(v > floor)) {
          blocked << " r=" << r << " (k_" << i << " = " << v << " at theta = " << l * g.dtheta() << ")";
          ok = false;
          break;
        }
      }
    }
    if (ok) out.push_back(r);
  }
  if (out.empty()) throw PreconditionError("no admissible radius; blocking circles:" + blocked.str());
  return out;
}

std::vector<double> admissible_radii(const HiggsData& h, const std::vector<double>& candidates, int n_theta) {
  check_candidates(candidates);
  if (n_theta < 8) throw ConfigError("n_theta must be >= 8");
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  std::vector<std::vector<Complex>> zeros;
  for (const auto& g : h.gammas) zeros.push_back(g.zeros_in_disk());
  std::vector<double> peak(h.gammas.size(), 0.0);
  for (std::size_t i = 0; i < h.gammas.size(); ++i)
    for (double r : candidates)
      for (int l = 0; l < n_theta; ++l) peak[i] = std::max(peak[i], 2.0 * std::norm(h.gammas[i](std::polar(r, l * dtheta))));

  std::vector<double> out;
  std::ostringstream blocked;
  for (double r : candidates) {
    bool ok = true;
    for (std::size_t i = 0; i < h.gammas.size() && ok; ++i) {
      for (auto z0 : zeros[i])
        if (std::abs(std::abs(z0) - r) < kZeroProximity) {
          blocked << " gamma_" << i + 1 << " zero " << z0 << " near r=" << r << ";";
          ok = false;
          break;
        }
      for (int l = 0; l < n_theta && ok; ++l)
        if (!(2.0 * std::norm(h.gammas[i](std::polar(r, l * dtheta))) > kFloorFraction * peak[i])) {
          blocked << " gamma_" << i + 1 << " vanishes on r=" << r << ";";
          ok = false;
        }
    }
    if (ok) out.push_back(r);
  }
  if (out.empty()) throw PreconditionError("no admissible radius; blocking zeros:" + blocked.str());
  return out;
}

DomainResult maximal_on_domain(const TodaCoefficients& k, const std::vector<double>& epsilons,
                               const BlowupSchedule& schedule) {
  if (epsilons.empty() || epsilons.back() != 0.0) throw ConfigError("shrink stages must end with epsilon = 0");
  const auto& full = k.grid();
  const double h = full->h();
  DiskDomain disk(full->radius());
  DomainResult out;
  TodaState prev;
  int prev_ring = -1;
  for (std::size_t m = 0; m < epsilons.size(); ++m) {
    const double eps = epsilons[m];
    if (m > 0 && !(eps < epsilons[m - 1])) throw ConfigError("shrink parameters must decrease");
    if (eps >= disk.hyperbolic_radius()) throw ConfigError("shrink parameter empties the disk");
    int ring = full->n_r() - 1;
    if (eps > 0.0) ring = std::min(ring, static_cast<int>(std::floor(DiskDomain(full->radius(), eps).effective_radius() / h + 1e-9)));
    // coarse grids cannot separate small shrinks from the full disk
    if (ring == prev_ring && m + 1 < epsilons.size()) continue;
    if (ring < 2) throw ConfigError("shrunken disk has fewer than 3 rings");
    auto grid = full->truncated(ring);
    auto km = ring == full->n_r() - 1 ? k : k.restrict_to(grid);
    auto res = solve_blowup(grid, km, schedule);

    ShrinkStage st;
    st.epsilon = eps;
    st.radius = grid->radius();
    st.rings = grid->n_r();
    st.center = center_of(res.u);
    st.relative_residual = res.report.final_relative_residual;
    st.sweeps = static_cast<int>(res.report.sweeps.size());
    if (prev_ring >= 0) {
      const double e = excess(prev, res.u);
      if (e > kOrderSlack) {
        std::ostringstream os;
        os << "shrink stages are not monotone: stage eps=" << eps << " exceeds the previous stage by " << e;
        throw ConsistencyError(os.str());
      }
      st.delta = sup_difference(prev, res.u.restrict_to(prev.grid()), 0.8 * prev.grid()->radius());
    }
    out.stages.push_back(st);
    out.report = std::move(res.report);
    prev = std::move(res.u);
    prev_ring = ring;
  }
  out.u = std::move(prev);
  return out;
}

nlohmann::json MaximalResult::trace() const {
  auto rows = nlohmann::json::array();
  for (const auto& r : radii) {
    auto stages = nlohmann::json::array();
    for (const auto& s : r.stages)
      stages.push_back({{"epsilon", s.epsilon},
                        {"radius", s.radius},
                        {"n_r", s.rings},
                        {"center", s.center},
                        {"delta", std::isnan(s.delta) ? nlohmann::json(nullptr) : nlohmann::json(s.delta)},
                        {"relative_residual", s.relative_residual},
                        {"sweeps", s.sweeps}});
    rows.push_back({{"radius", r.radius},
                    {"n_r", r.n_r},
                    {"center", r.center},
                    {"interior_delta", std::isnan(r.interior_delta) ? nlohmann::json(nullptr) : nlohmann::json(r.interior_delta)},
                    {"relative_residual", r.relative_residual},
                    {"sub_margin", r.sub_margin},
                    {"coarse_center", r.coarse_center},
                    {"stages", stages}});
  }
  return {{"radii", rows},
          {"limit_radius", limit.grid()->radius()},
          {"limit_center", center_of(limit)},
          {"final_report", report.to_json()}};
}

MaximalResult maximal_solution(const TodaCoefficients& k, const ExhaustionPlan& plan, const std::optional<TodaState>& sub) {
  plan.validate();
  const auto finest = plan.finest_grid();
  if (!finest->same_layout(*k.grid())) throw ConfigError("coefficients must live on plan.finest_grid()");
  const TodaState below = sub ? *sub : constant_subsolution(k);
  if (below.rank() != k.n) throw ConfigError("subsolution has the wrong rank");
  require_same_grid(below.u.front(), k.k.front());

  BlowupSchedule schedule = plan.schedule ? *plan.schedule : BlowupSchedule::for_rank(k.n);
  schedule.tol = plan.tol;
  const auto rings = plan.rings();

  // admissibility: k_i > floor on every boundary circle
  for (std::size_t j = 0; j < rings.size(); ++j)
    for (int i = 1; i < k.n; ++i) {
      const double floor = kFloorFraction * k.k[i - 1].max();
      for (int l = 0; l < finest->n_theta(); ++l)
        if (!(k.k[i - 1][finest->index(rings[j], l)] > floor)) {
          std::ostringstream os;
          os << "radius " << plan.radii[j] << " is not admissible: k_" << i << " vanishes on its circle";
          throw PreconditionError(os.str());
        }
    }

  MaximalResult out;
  // One exhaustion pass on k's grid; rings are given on that grid.
  auto exhaust = [&](const TodaCoefficients& kk, const TodaState& sub_all, const std::vector<int>& rr,
                     std::vector<RadiusRecord>& records, SolverReport& report) {
    std::vector<TodaState> states;
    const auto& top = kk.grid();
    for (std::size_t j = 0; j < rr.size(); ++j) {
      auto grid = top->truncated(rr[j]);
      auto kj = j + 1 == rr.size() ? kk : kk.restrict_to(grid);
      auto dom = maximal_on_domain(kj, plan.epsilons, schedule);

      RadiusRecord rec;
      rec.radius = grid->radius();
      rec.n_r = grid->n_r();
      rec.center = center_of(dom.u);
      rec.relative_residual = dom.report.final_relative_residual;
      rec.stages = dom.stages;
      rec.sub_margin = -excess(dom.u, sub_all.restrict_to(grid));
      if (rec.sub_margin < -kOrderSlack) {
        std::ostringstream os;
        os << "subsolution violated on r=" << rec.radius << " by " << -rec.sub_margin;
        throw ConsistencyError(os.str());
      }
      if (!states.empty()) {
        const auto& prev = states.back();
        const double e = excess(prev, dom.u);
        if (e > kOrderSlack) {
          std::ostringstream os;
          os << "exhaustion is not monotone: r=" << rec.radius << " exceeds the previous radius by " << e;
          throw ConsistencyError(os.str());
        }
        rec.interior_delta = sup_difference(prev, dom.u.restrict_to(prev.grid()), 0.9 * prev.grid()->radius());
      }
      records.push_back(std::move(rec));
      report = std::move(dom.report);
      states.push_back(std::move(dom.u));
    }
    return states;
  };

  std::vector<TodaState> states;
  if (plan.richardson) {
    std::vector<ScalarField> kc;
    for (const auto& f : k.k) kc.push_back(coarsen(f));
    const TodaCoefficients k_coarse(k.n, std::move(kc));
    std::vector<int> rc;
    for (int r : rings) rc.push_back(r / 2);
    std::vector<RadiusRecord> coarse_records;
    SolverReport coarse_report;
    const TodaState below_coarse = coarsen(below);
    auto run_coarse = [&] { return exhaust(k_coarse, below_coarse, rc, coarse_records, coarse_report); };
    std::vector<TodaState> coarse;
    std::vector<TodaState> fine;
    if (plan.threads > 1) {
      auto pending = std::async(std::launch::async, run_coarse);
      fine = exhaust(k, below, rings, out.radii, out.report);
      coarse = pending.get();
    } else {
      coarse = run_coarse();
      fine = exhaust(k, below, rings, out.radii, out.report);
    }
    for (std::size_t j = 0; j < fine.size(); ++j) {
      out.radii[j].coarse_center = coarse_records[j].center;
      auto combined = coarse[j];
      const auto fj = coarsen(fine[j]);
      for (int i = 0; i < k.n - 1; ++i)
        for (std::size_t node = 0; node < combined.u[i].size(); ++node)
          combined.u[i][node] = 2.0 * fj.u[i][node] - coarse[j].u[i][node];
      states.push_back(std::move(combined));
    }
    out.state = std::move(fine.back());
  } else {
    states = exhaust(k, below, rings, out.radii, out.report);
    out.state = states.back();
  }

  // Lagrange extrapolation to x = 1 - r = 0 on the smallest grid involved.
  const auto m = static_cast<std::size_t>(plan.extrapolation_points);
  const std::size_t first = states.size() - m;
  const auto& base = states[first].grid();
  std::vector<double> x, w(m, 1.0);
  for (std::size_t a = first; a < states.size(); ++a) x.push_back(1.0 - states[a].grid()->radius());
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b) w[a] *= x[b] / (x[b] - x[a]);
  out.limit = TodaState(base, k.n, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    const auto r = states[first + a].restrict_to(base);
    for (int i = 0; i < k.n - 1; ++i)
      for (std::size_t node = 0; node < base->size(); ++node) out.limit.u[i][node] += w[a] * r.u[i][node];
  }
  return out;
}

std::string to_string(Dichotomy d) { return d == Dichotomy::strict ? "strict" : "identical"; }

Dichotomy domination_dichotomy(const TodaState& sub, const TodaState& max, double tol) {
  if (sub.rank() != max.rank()) throw ConfigError("states have different rank");
  require_same_grid(sub.u.front(), max.u.front());
  const auto& g = *sub.grid();
  double worst_above = -INFINITY, largest_gap = 0.0, smallest_interior_gap = INFINITY;
  for (std::size_t i = 0; i < sub.u.size(); ++i) {
    for (std::size_t node = 0; node < g.size(); ++node) {
      const double d = max.u[i][node] - sub.u[i][node];
      worst_above = std::max(worst_above, -d);
      largest_gap = std::max(largest_gap, std::abs(d));
    }
    for (auto node : g.interior()) smallest_interior_gap = std::min(smallest_interior_gap, max.u[i][node] - sub.u[i][node]);
  }
  if (worst_above > tol) {
    std::ostringstream os;
    os << "sub exceeds max by " << worst_above;
    throw PreconditionError(os.str());
  }
  if (largest_gap <= tol) return Dichotomy::identical;
  if (smallest_interior_gap > tol) return Dichotomy::strict;
  std::ostringstream os;
  os << "dichotomy violated: gap reaches " << largest_gap << " but falls to " << smallest_interior_gap
     << " at an interior node";
  throw ConsistencyError(os.str());
}

}  // namespace toda
