#include <CLI11.hpp>

#include <iostream>

#include "toda/error.hpp"
#include "toda/io.hpp"
#include "toda/run.hpp"

using namespace toda;
using nlohmann::json;

namespace {

// Flags overlay the config document key by key; only flags actually given count.
struct Flags {
  std::string config, output_dir, higgs, k_manifest, scheme;
  double tol = 0.0, radius = 0.0, boundary = 0.0;
  int threads = 0, n = 0, n_radii = 0, n_r = 0, n_theta = 0;
  unsigned seed = 0;
  bool no_richardson = false;
  std::vector<double> poly, k_constant, bergman_radii;
  std::vector<int> only;
};

CLI::App* add_exhaustion(CLI::App* sub, Flags& f) {
  sub->add_option("--radii", f.n_radii, "number of dyadic radii 1 - 2^-j-1, j = 0.. (default 6, up to 63/64)");
  sub->add_option("--n-r", f.n_r, "rings on the largest disk (default 1025)");
  sub->add_option("--n-theta", f.n_theta, "angular nodes (default 256)");
  sub->add_flag("--no-richardson", f.no_richardson, "skip the 2h run and its extrapolation");
  return sub;
}

void add_coefficients(CLI::App* sub, Flags& f) {
  sub->add_option("--higgs", f.higgs, "HiggsData JSON file {n, gammas:[...]}")->check(CLI::ExistingFile);
  sub->add_option("--k-constant", f.k_constant, "constant k_1,..,k_{n-1}")->delimiter(',');
  sub->add_option("--k-manifest", f.k_manifest, "coefficient manifest from write_coefficients")->check(CLI::ExistingFile);
}

json overlay(json j, const CLI::App& app, const CLI::App& sub, const Flags& f) {
  auto given = [&](const char* name) {
    for (const CLI::App* a : {&sub, &app})
      if (const auto* o = a->get_option_no_throw(name); o && o->count() > 0) return true;
    return false;
  };
  j["command"] = sub.get_name();
  if (given("--output-dir")) j["output_dir"] = f.output_dir;
  if (given("--tol")) j["tol"] = f.tol;
  if (given("--threads")) j["threads"] = f.threads;
  if (given("--n")) j["n"] = f.n;
  if (given("--higgs")) j["higgs"] = read_json(f.higgs);
  if (given("--k-constant")) j["k"] = {{"constant", f.k_constant}};
  if (given("--k-manifest")) j["k"] = {{"manifest", f.k_manifest}};
  auto& plan = j["plan"];
  if (plan.is_null()) plan = json::object();
  if (given("--radii") && sub.get_name() != "bergman") plan["n_radii"] = f.n_radii;
  // --n-r/--n-theta size the single grid for dirichlet, the exhaustion otherwise
  auto& sizing = sub.get_name() == "dirichlet" ? j["grid"] : plan;
  if (given("--n-r")) sizing[sub.get_name() == "dirichlet" ? "n_r" : "n_r_finest"] = f.n_r;
  if (given("--n-theta")) sizing["n_theta"] = f.n_theta;
  if (given("--no-richardson")) plan["richardson"] = false;
  if (given("--radius")) j["grid"]["radius"] = f.radius;
  if (given("--boundary")) j["boundary"] = f.boundary;
  if (given("--scheme")) j["scheme"] = f.scheme;
  if (given("--poly")) {
    if (sub.get_name() == "bergman") j["f"] = {{"kind", "poly"}, {"coeffs", f.poly}};
    else j["higgs"] = {{"n", 2}, {"gammas", {{{"kind", "poly"}, {"coeffs", f.poly}}}}};
  }
  if (given("--radii") && sub.get_name() == "bergman") j["bergman_radii"] = f.bergman_radii;
  if (given("--only")) j["only"] = f.only;
  if (given("--seed")) j["seed"] = f.seed;
  if (plan.empty()) j.erase("plan");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximal solutions of the Toda system on the Poincare disk.\n"
               "Exit status: 0 ok, 1 numerical or consistency failure, 2 config or parse error."};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON run config; flags override its keys")->check(CLI::ExistingFile);
  app.add_option("--output-dir", f.output_dir, "where fields and reports go (default .)");
  app.add_option("--tol", f.tol, "solver tolerance (default 1e-8)");
  app.add_option("--threads", f.threads, "worker threads (default 1)");

  auto* fuchsian = add_exhaustion(app.add_subcommand("fuchsian", "exhaustion for k_i = i(n-i); reports sup |u_i| on |z| <= 0.5"), f);
  fuchsian->add_option("--n", f.n, "rank n >= 2");

  auto* maximal = add_exhaustion(app.add_subcommand("maximal", "maximal state and trace for general coefficients"), f);
  add_coefficients(maximal, f);

  auto* dirichlet = app.add_subcommand("dirichlet", "single bounded Dirichlet solve with constant boundary data");
  add_coefficients(dirichlet, f);
  dirichlet->add_option("--radius", f.radius, "disk radius (default 0.5)");
  dirichlet->add_option("--n-r", f.n_r, "rings (default 65)");
  dirichlet->add_option("--n-theta", f.n_theta, "angular nodes (default 64)");
  dirichlet->add_option("--boundary", f.boundary, "boundary value of every u_i (default 0)");
  dirichlet->add_option("--scheme", f.scheme, "newton | picard (default newton)");

  auto* verify = app.add_subcommand("verify", "run the acceptance checks and print a pass/fail table");
  verify->add_option("--only", f.only, "criterion ids, e.g. 1,4,9")->delimiter(',');
  verify->add_option("--seed", f.seed, "seed for the randomized checks (default 20261016)");
  verify->add_option("--n-r", f.n_r, "rings of the exhaustion runs (default 1025)");
  verify->add_option("--n-theta", f.n_theta, "angular nodes of the exhaustion runs (default 256)");

  auto* bergman = app.add_subcommand("bergman", "partial integrals of |f|^2 (1-|z|^2) and their tail estimate");
  bergman->add_option("--poly", f.poly, "real polynomial coefficients c_0,c_1,..")->delimiter(',');
  bergman->add_option("--radii", f.bergman_radii, "partial radii (default 0.9,0.99,0.999)")->delimiter(',');

  auto* minimal = add_exhaustion(app.add_subcommand("minimal-disk", "n = 2 pullback ratio and branch points (default gamma = z)"), f);
  minimal->add_option("--poly", f.poly, "real polynomial coefficients of gamma")->delimiter(',');
  minimal->add_option("--higgs", f.higgs, "HiggsData JSON file with n = 2")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig config;
  try {
    json j = f.config.empty() ? json::object() : read_json(f.config);
    auto subs = app.get_subcommands();
    if (!subs.empty()) j = overlay(std::move(j), app, *subs.front(), f);
    else {
      if (app.count("--output-dir")) j["output_dir"] = f.output_dir;
      if (app.count("--tol")) j["tol"] = f.tol;
      if (app.count("--threads")) j["threads"] = f.threads;
    }
    if (!j.contains("command")) throw ConfigError("no command: give a subcommand or a config with \"command\"");
    config = RunConfig::from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "toda-harmonic: " << e.what() << "\n";
    return 2;
  }

  auto outcome = run(config, std::cout);
  if (outcome.status != 0) std::cerr << "toda-harmonic: " << outcome.message << "\n";
  if (!outcome.report_path.empty()) std::cout << "report: " << outcome.report_path << "\n";
  return outcome.status;
}
