#include "toda/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "toda/acceptance.hpp"
#include "toda/error.hpp"
#include "toda/io.hpp"
#include "toda/monotone_solver.hpp"

namespace toda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"fuchsian", "maximal", "dirichlet", "verify", "bergman", "minimal-disk"};
const std::set<std::string> kKeys{"command", "n",      "higgs",         "k",    "plan", "grid",  "boundary",  "scheme",
                                  "f",       "bergman_radii", "only", "seed", "tol",  "threads", "output_dir"};

constexpr double kFuchsianSupBound = 5e-3;
constexpr double kNormSlack = 1e-3;

double sup_abs(const TodaState& u, double radius) {
  double s = 0.0;
  for (const auto& f : u.u)
    for (std::size_t node = 0; node < f.size(); ++node)
      if (f.grid()->rho(node) <= radius) s = std::max(s, std::abs(f[node]));
  return s;
}

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

TodaCoefficients coefficients_on(const RunConfig& c, const GridPtr& g) {
  if (c.higgs) return coefficients_from_higgs(*c.higgs, g);
  const auto& k = *c.k;
  if (k.contains("constant")) return TodaCoefficients::constant(g, k.at("constant").get<std::vector<double>>());
  auto read = read_coefficients(k.at("manifest").get<std::string>());
  if (!read.grid()->same_layout(*g))
    throw ConfigError("coefficient manifest grid differs from the run grid (r, n_r, n_theta must match)");
  return TodaCoefficients(read.n, [&] {
    std::vector<ScalarField> f;
    for (const auto& x : read.k) f.emplace_back(g, std::vector<double>(x.values().begin(), x.values().end()));
    return f;
  }());
}

int rank_of(const RunConfig& c) {
  if (c.higgs) return c.higgs->n;
  if (c.k && c.k->contains("constant")) return static_cast<int>(c.k->at("constant").size()) + 1;
  if (c.k) return read_coefficients(c.k->at("manifest").get<std::string>()).n;
  return c.n;
}

ExhaustionPlan plan_of(const RunConfig& c) {
  auto p = c.plan;
  p.tol = c.tol;
  p.threads = c.threads;
  return p;
}

json radii_json(const MaximalResult& res) {
  auto a = json::array();
  for (const auto& r : res.radii) a.push_back({{"radius", r.radius}, {"center", r.center}});
  return a;
}

// Largest Higgs norm over rho <= 0.9 of the limit disk.
double limit_norm(const MaximalResult& res, const RunConfig& c, int n) {
  const auto g = res.limit.grid();
  const auto k = c.higgs || c.k ? coefficients_on(c, g) : TodaCoefficients::fuchsian(g, n);
  auto norm = higgs_norm(res.limit, k);
  double top = -INFINITY;
  for (std::size_t node = 0; node < norm.size(); ++node)
    if (g->rho(node) <= 0.9 * g->radius()) top = std::max(top, norm[node]);
  return top;
}

void write_maximal(const MaximalResult& res, const RunConfig& c, json& report) {
  report["artifacts"]["state"] = write_state(res.state, c.output_dir, "maximal_state");
  report["artifacts"]["limit"] = write_state(res.limit, c.output_dir, "maximal_limit");
  write_json(out_path(c, "trace.json"), res.trace());
  report["artifacts"]["trace"] = out_path(c, "trace.json");
  write_text(out_path(c, "profile_radial.csv"), emit_profile(res.limit, ProfileAxis::radial));
  report["artifacts"]["profile"] = out_path(c, "profile_radial.csv");
}

int run_fuchsian(const RunConfig& c, json& report, std::ostream& log) {
  const auto plan = plan_of(c);
  auto res = maximal_solution(TodaCoefficients::fuchsian(plan.finest_grid(), c.n), plan);
  write_maximal(res, c, report);
  const double sup = sup_abs(res.limit, 0.5);
  bool decreasing = true;
  for (std::size_t j = 1; j < res.radii.size(); ++j)
    for (int i = 0; i < c.n - 1; ++i) decreasing = decreasing && res.radii[j].center[i] < res.radii[j - 1].center[i];
  const double norm = limit_norm(res, c, c.n);
  report["sup_abs_limit_r05"] = sup;
  report["sup_bound"] = kFuchsianSupBound;
  report["centers_decreasing"] = decreasing;
  report["max_higgs_norm"] = norm;
  report["norm_bound"] = fuchsian_norm(c.n);
  report["radii"] = radii_json(res);
  log << "sup |u_i| on |z| <= 0.5: " << sup << " (bound " << kFuchsianSupBound << ")\n";
  if (sup > kFuchsianSupBound) report["failed"].push_back("sup bound on |z| <= 0.5");
  if (!decreasing) report["failed"].push_back("centre values not decreasing in r");
  if (norm > fuchsian_norm(c.n) + kNormSlack) report["failed"].push_back("Higgs norm bound");
  return report.contains("failed") ? 1 : 0;
}

int run_maximal(const RunConfig& c, json& report, std::ostream& log) {
  const auto plan = plan_of(c);
  const int n = rank_of(c);
  auto k = coefficients_on(c, plan.finest_grid());
  auto res = maximal_solution(k, plan);
  write_maximal(res, c, report);
  auto norm_field = higgs_norm(res.limit, coefficients_on(c, res.limit.grid()));
  write_field_csv(norm_field, out_path(c, "higgs_norm_limit.csv"));
  report["artifacts"]["higgs_norm"] = out_path(c, "higgs_norm_limit.csv");
  const double norm = limit_norm(res, c, n);
  report["max_higgs_norm"] = norm;
  report["norm_bound"] = fuchsian_norm(n);
  report["radii"] = radii_json(res);
  log << "max Higgs norm on rho <= 0.9 r: " << norm << " (bound " << fuchsian_norm(n) << ")\n";
  if (norm > fuchsian_norm(n) + kNormSlack) report["failed"].push_back("Higgs norm bound");
  return report.contains("failed") ? 1 : 0;
}

int run_dirichlet(const RunConfig& c, json& report, std::ostream& log) {
  GridPtr g = make_grid(c.radius, c.n_r, c.n_theta);
  if (c.k && c.k->contains("manifest")) g = read_coefficients(c.k->at("manifest").get<std::string>()).grid();
  DirichletProblem p;
  p.k = coefficients_on(c, g);
  p.boundary = TodaState(g, p.k.n, c.boundary);
  p.sub = constant_subsolution(p.k);
  double top = -INFINITY;
  for (const auto& f : p.sub.u) top = std::max(top, f.max());
  if (top > c.boundary) p.sub = p.sub.shifted(c.boundary - top);
  p.super = torsion_supersolution(p.k, c.boundary);
  p.tol = c.tol;
  p.scheme = iteration_scheme_from_string(c.scheme);
  if (p.scheme == IterationScheme::picard) p.max_iterations = 20000;
  auto res = solve_dirichlet(p);
  report["artifacts"]["state"] = write_state(res.u, c.output_dir, "dirichlet_state");
  write_json(out_path(c, "solver_report.json"), res.report.to_json());
  report["artifacts"]["solver_report"] = out_path(c, "solver_report.json");
  write_text(out_path(c, "profile_radial.csv"), emit_profile(res.u, ProfileAxis::radial));
  std::vector<double> center;
  for (const auto& f : res.u.u) center.push_back(f[0]);
  report["center"] = center;
  report["sweeps"] = res.report.sweeps.size();
  report["relative_residual"] = res.report.final_relative_residual;
  log << "converged after " << res.report.sweeps.size() << " sweeps, u(0) = " << json(center).dump() << "\n";
  return 0;
}

int run_verify(const RunConfig& c, json& report, std::ostream& log) {
  AcceptanceOptions o;
  o.n_r_finest = c.plan.n_r_finest;
  o.n_theta = c.plan.n_theta;
  o.tol = c.tol;
  o.seed = c.seed;
  o.only = c.only;
  o.threads = c.threads;
  auto results = run_acceptance(o);
  log << acceptance_table(results);
  auto j = acceptance_json(results);
  write_json(out_path(c, "acceptance.json"), j);
  report["artifacts"]["acceptance"] = out_path(c, "acceptance.json");
  report["all_pass"] = j["all_pass"];
  for (const auto& r : results)
    if (!r.pass) report["failed"].push_back("criterion " + std::to_string(r.id));
  return report.contains("failed") ? 1 : 0;
}

int run_bergman(const RunConfig& c, json& report, std::ostream& log) {
  auto r = bergman_integral(*c.f, c.bergman_radii);
  report["bergman"] = r.to_json();
  write_json(out_path(c, "bergman.json"), r.to_json());
  report["artifacts"]["bergman"] = out_path(c, "bergman.json");
  for (std::size_t j = 0; j < r.radii.size(); ++j) log << "R = " << r.radii[j] << ": " << r.partials[j] << "\n";
  log << "estimate " << r.estimate << (r.divergence_suspected ? " (divergence suspected)" : "") << "\n";
  return 0;
}

int run_minimal_disk(const RunConfig& c, json& report, std::ostream& log) {
  RunConfig cc = c;
  if (!cc.higgs && !cc.k) cc.higgs = HiggsData(2, {Holomorphic::polynomial({0.0, 1.0})});
  if (rank_of(cc) != 2) throw ConfigError("minimal-disk needs n = 2");
  const auto plan = plan_of(cc);
  auto k = coefficients_on(cc, plan.finest_grid());
  auto res = maximal_solution(k, plan);
  DirichletProblem p;
  p.k = k;
  p.boundary = TodaState(k.grid(), 2, 0.0);
  p.sub = constant_subsolution(k);
  p.super = torsion_supersolution(k, 0.0);
  p.tol = cc.tol;
  auto v = solve_dirichlet(p).u;
  auto ratio = pullback_ratio(v, res.state, k, cc.tol);
  auto density = pullback_density(res.state, k);
  write_field_csv(ratio, out_path(cc, "pullback_ratio.csv"));
  write_field_csv(density, out_path(cc, "pullback_density.csv"));
  report["artifacts"]["ratio"] = out_path(cc, "pullback_ratio.csv");
  report["artifacts"]["density"] = out_path(cc, "pullback_density.csv");
  report["artifacts"]["state"] = write_state(res.state, cc.output_dir, "maximal_state");

  double lo = INFINITY, hi = -INFINITY;
  int equal = 0;
  for (std::size_t node = 0; node < ratio.size(); ++node) {
    if (std::abs(ratio[node] - 1.0) <= 1e-6) {
      ++equal;
      continue;
    }
    lo = std::min(lo, ratio[node]);
    hi = std::max(hi, ratio[node]);
  }
  // branch points: grid nodes where the density vanishes, each should sit on a zero of gamma
  const auto& g = *k.grid();
  std::vector<Complex> zeros;
  if (cc.higgs) zeros = cc.higgs->gammas[0].zeros_in_disk();
  auto branch = json::array();
  bool explained = true;
  for (std::size_t node = 0; node < density.size(); ++node) {
    if (density[node] != 0.0) continue;
    const auto z = g.z(node);
    branch.push_back({z.real(), z.imag()});
    if (cc.higgs)
      explained = explained && std::any_of(zeros.begin(), zeros.end(), [&](Complex a) { return std::abs(a - z) <= g.h(); });
  }
  auto zj = json::array();
  for (auto a : zeros) zj.push_back({a.real(), a.imag()});
  report["ratio_min"] = lo;
  report["ratio_max"] = hi;
  report["equality_nodes"] = equal;
  report["branch_points"] = branch;
  report["gamma_zeros"] = zj;
  log << "ratio in [" << lo << ", " << hi << "], " << branch.size() << " branch point node(s)\n";
  if (!(lo > 0.0 && hi < 1.0)) report["failed"].push_back("ratio outside (0,1)");
  if (!explained) report["failed"].push_back("density vanishes away from the zeros of gamma");
  return report.contains("failed") ? 1 : 0;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  RunConfig c;
  try {
    if (j.contains("command")) c.command = j.at("command").get<std::string>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("higgs")) c.higgs = HiggsData::from_json(j.at("higgs"));
    if (j.contains("k")) c.k = j.at("k");
    if (j.contains("plan")) c.plan = ExhaustionPlan::from_json(j.at("plan"));
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.radius = g.value("radius", c.radius);
      c.n_r = g.value("n_r", c.n_r);
      c.n_theta = g.value("n_theta", c.n_theta);
    }
    if (j.contains("boundary")) c.boundary = j.at("boundary").get<double>();
    if (j.contains("scheme")) c.scheme = j.at("scheme").get<std::string>();
    if (j.contains("f")) c.f = Holomorphic::from_json(j.at("f"));
    if (j.contains("bergman_radii")) c.bergman_radii = j.at("bergman_radii").get<std::vector<double>>();
    if (j.contains("only")) c.only = j.at("only").get<std::vector<int>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<unsigned>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return c;
}

json RunConfig::to_json() const {
  json j{{"command", command}, {"n", n},       {"plan", plan.to_json()},
         {"grid", {{"radius", radius}, {"n_r", n_r}, {"n_theta", n_theta}}},
         {"boundary", boundary}, {"scheme", scheme}, {"bergman_radii", bergman_radii},
         {"only", only},       {"seed", seed}, {"tol", tol}, {"threads", threads}, {"output_dir", output_dir}};
  if (higgs) j["higgs"] = higgs->to_json();
  if (k) j["k"] = *k;
  if (f) j["f"] = f->to_json();
  return j;
}

void RunConfig::validate() const {
  if (!kCommands.count(command)) throw ConfigError("unknown command '" + command + "'");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (output_dir.empty()) throw ConfigError("output directory must not be empty");
  if (higgs && k) throw ConfigError("give either higgs data or explicit k, not both");
  if (k) {
    if (!k->is_object() || k->contains("constant") == k->contains("manifest"))
      throw ConfigError("explicit k needs exactly one of 'constant' or 'manifest'");
    if (k->contains("constant")) {
      if (!k->at("constant").is_array() || k->at("constant").empty()) throw ConfigError("k.constant must be a non-empty array");
      for (const auto& v : k->at("constant"))
        if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError("k.constant entries must be positive numbers");
    } else if (!k->at("manifest").is_string()) {
      throw ConfigError("k.manifest must be a path");
    }
  }
  const bool exhausts = command == "fuchsian" || command == "maximal" || command == "minimal-disk";
  if (exhausts) plan_of(*this).validate();
  if (command == "fuchsian") {
    if (n < 2) throw ConfigError("fuchsian needs n >= 2");
    if (higgs || k) throw ConfigError("fuchsian builds its own coefficients; drop higgs/k");
  }
  if ((command == "maximal" || command == "dirichlet") && !higgs && !k)
    throw ConfigError(command + " needs a coefficient source (higgs or k)");
  if (command == "dirichlet") {
    if (!(radius > 0.0 && radius < 1.0)) throw ConfigError("grid radius must lie in (0,1)");
    if (n_r < 3 || n_theta < 4) throw ConfigError("grid needs n_r >= 3 and n_theta >= 4");
    if (!std::isfinite(boundary)) throw ConfigError("boundary value must be finite");
    iteration_scheme_from_string(scheme);
  }
  if (command == "bergman") {
    if (!f) throw ConfigError("bergman needs a function (f or --poly)");
    if (bergman_radii.size() < 3) throw ConfigError("bergman needs at least three radii for the tail fit");
  }
  if (n != 0 && command != "fuchsian" && (higgs || k) && command != "verify" && command != "bergman" && n != rank_of(*this))
    throw ConfigError("n disagrees with the coefficient source");
}

RunOutcome run(const RunConfig& config, std::ostream& log) {
  RunOutcome out;
  out.report = {{"command", config.command}, {"config", config.to_json()}, {"artifacts", json::object()}};
  try {
    config.validate();
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw ConfigError("cannot create " + config.output_dir + ": " + ec.message());
    const auto& cmd = config.command;
    if (cmd == "fuchsian") out.status = run_fuchsian(config, out.report, log);
    else if (cmd == "maximal") out.status = run_maximal(config, out.report, log);
    else if (cmd == "dirichlet") out.status = run_dirichlet(config, out.report, log);
    else if (cmd == "verify") out.status = run_verify(config, out.report, log);
    else if (cmd == "bergman") out.status = run_bergman(config, out.report, log);
    else out.status = run_minimal_disk(config, out.report, log);
    out.message = "ok";
    if (out.status != 0) {
      out.message = "failed:";
      for (const auto& w : out.report["failed"]) out.message += " " + w.get<std::string>() + ";";
    }
  } catch (const ConfigError& e) {
    out = {2, e.what(), "", out.report};
  } catch (const DomainError& e) {
    out = {2, e.what(), "", out.report};
  } catch (const PreconditionError& e) {
    out = {2, e.what(), "", out.report};
  } catch (const std::exception& e) {
    out = {1, e.what(), "", out.report};
  }
  out.report["status"] = out.status;
  out.report["message"] = out.message;
  // a config error may leave no usable directory; the message is still returned
  try {
    if (!fs::is_directory(config.output_dir)) return out;
    const auto path = out_path(config, "report.json");
    write_json(path, out.report);
    out.report_path = path;
  } catch (const std::exception&) {
  }
  return out;
}

}  // namespace toda
