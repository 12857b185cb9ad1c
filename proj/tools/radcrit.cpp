#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "radcrit/errors.hpp"
#include "radcrit/functionals.hpp"
#include "radcrit/mountain_pass.hpp"
#include "radcrit/pohozaev.hpp"
#include "radcrit/problem_model.hpp"
#include "radcrit/radial_ode.hpp"
#include "radcrit/scanner.hpp"

namespace {

using namespace radcrit;
using nlohmann::json;

struct Common {
  std::string config;
  std::string out;
  std::string format = "json";
  std::optional<double> tol;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  bool format_given = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "input configuration (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output path (stdout when omitted)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", c.jobs, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", c.seed, "random seed");
}

// Writes to --out or stdout.
void emit_text(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw IoError("cannot write " + c.out);
  f << text;
  if (!f) throw IoError("failed while writing " + c.out);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_solve(const Common& c) {
  const auto spec = load_problem(c.config);
  const double tol = c.tol.value_or(1e-10);
  const auto s = find_dirichlet_solution(spec, HeightRange{}, tol, DirichletOptions{});
  json j = {{"problem", to_json(spec)}, {"found", s.found()}, {"shots", s.samples.size()},
            {"brackets", s.brackets.size()}};
  if (s.found()) {
    j["d_star"] = s.d_star;
    j["boundary_residual"] = s.boundary_residual;
    j["ode_residual"] = s.ode_residual;
    j["boundary_slope"] = s.solution->boundary_slope;
    j["energy"] = profile_energy(*s.solution);
    j["profile"] = profile_to_json(*s.solution);
  }
  if (c.format == "csv") {
    if (!s.found()) throw PreconditionError("no Dirichlet solution in the scanned height range");
    std::ostringstream os;
    write_profile_csv(*s.solution, os);
    emit_text(c, os.str());
    return 0;
  }
  if (!c.out.empty() && s.found()) {
    // profile CSV alongside the JSON summary
    const std::string csv = c.out + ".csv";
    std::ofstream f(csv, std::ios::binary);
    if (!f) throw IoError("cannot write " + csv);
    write_profile_csv(*s.solution, f);
  }
  emit_text(c, j.dump(2) + "\n");
  return 0;
}

int run_certify(const Common& c, int n, double beta, double lambda, std::optional<double> q) {
  const double qq = q.value_or((n + 2.0) / (n - 2.0));
  const auto cert = certify_nonexistence(n, beta, lambda, qq);
  emit_text(c, to_json(cert).dump(2) + "\n");
  return 0;
}

int run_mpa(const Common& c, int iters, double rho, int samples) {
  const auto spec = load_problem(c.config);
  const double tol = c.tol.value_or(1e-6);
  const auto mesh = graded_mesh();
  const auto geometry = verify_mp_geometry(spec, rho, samples, c.seed.value_or(20240611), mesh);
  const auto dir = DiscreteRadialFunction::from_function(spec.dimension, mesh,
                                                         [](double r) { return std::cos(0.5 * M_PI * r); });
  const auto ep = find_endpoint(spec, dir);
  const auto report = mpa_level(spec, ep.e, iters, tol);
  if (c.format == "csv") {
    std::ostringstream os;
    write_mpa_trace_csv(report, os);
    emit_text(c, os.str());
    return 0;
  }
  json j = to_json(report);
  j["endpoint_t"] = ep.t;
  j["geometry"] = {{"rho", geometry.rho},
                   {"samples", geometry.samples},
                   {"seed", geometry.seed},
                   {"a_estimate", geometry.a_estimate},
                   {"geometry_ok", geometry.geometry_ok},
                   {"ray_ok", geometry.ray_ok},
                   {"max_ray_energy", geometry.max_ray_energy}};
  if (spec.main_coefficient.is_zero() && spec.main_offset == 1.0 &&
      spec.main_exponent == critical_exponent(spec.dimension, 0.0)) {
    const double s = sobolev_constant(spec.dimension);
    j["sobolev"] = s;
    j["threshold"] = compactness_threshold(spec.dimension, s);
  }
  emit_text(c, j.dump(2) + "\n");
  return 0;
}

std::vector<double> ladder_or_default(const std::vector<double>& l) {
  return l.empty() ? default_expansion_ladder() : l;
}

int run_expansion(const Common& c, int n, double gamma, double q, const std::vector<double>& ladder) {
  const auto eps = ladder_or_default(ladder);
  const auto rep = expansion_check(n, gamma, q, eps);
  if (c.format == "csv") {
    std::ostringstream os;
    write_expansion_csv(rep, os);
    emit_text(c, os.str());
    return 0;
  }
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"epsilon", r.epsilon},
                    {"norm_sq_minus_S", r.norm_sq_minus_s},
                    {"weighted_integral", r.weighted_integral},
                    {"J_eps", r.j_eps}});
  json j = {{"N", rep.n},
            {"gamma", rep.gamma},
            {"q", rep.q},
            {"sobolev", rep.sobolev},
            {"slope_norm", rep.slope_norm},
            {"predicted_norm", rep.predicted_norm},
            {"slope_weighted", rep.slope_weighted},
            {"predicted_weighted", rep.predicted_weighted},
            {"rows", rows}};
  emit_text(c, j.dump(2) + "\n");
  return 0;
}

int run_c30(const Common& c, int n, double gamma, double fq, const std::vector<double>& ladder) {
  const auto eps = ladder_or_default(ladder);
  const auto f = NonlinearityModel::pure_power(fq);
  std::vector<double> vals(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) vals[i] = c30_integral(f, gamma, n, eps[i]);
  if (c.format == "csv") {
    std::string s = "epsilon,J\n";
    for (std::size_t i = 0; i < eps.size(); ++i) s += num(eps[i]) + "," + num(vals[i]) + "\n";
    emit_text(c, s);
    return 0;
  }
  json j = {{"N", n}, {"gamma", gamma}, {"q", fq}, {"f4_threshold", f4_threshold(n, gamma)},
            {"epsilon", eps}, {"J", vals}};
  emit_text(c, j.dump(2) + "\n");
  return 0;
}

int run_scan(const Common& c, bool quiet) {
  auto cfg = load_scan_config(c.config);
  if (c.jobs > 0) cfg.jobs = c.jobs;
  if (c.seed) cfg.seed = *c.seed;
  if (c.tol) cfg.tolerances.dirichlet = *c.tol;
  cfg.validate();
  ProgressFn progress;
  if (!quiet)
    progress = [](std::size_t done, std::size_t total) { std::fprintf(stderr, "\r[scan] %zu/%zu", done, total); };
  const auto records = scan_grid(cfg, progress);
  if (!quiet) std::fputc('\n', stderr);

  std::string csv = cfg.csv_path;
  std::string js = cfg.json_path;
  if (!c.out.empty()) {
    const bool as_csv = c.format_given ? c.format == "csv" : c.out.ends_with(".csv");
    (as_csv ? csv : js) = c.out;
  }
  if (!csv.empty()) emit_report(records, ReportFormat::Csv, csv);
  if (!js.empty()) emit_report(records, ReportFormat::Json, js);
  if (csv.empty() && js.empty()) {
    if (c.format == "csv") {
      write_csv(records, std::cout);
    } else {
      json arr = json::array();
      for (const auto& r : records) arr.push_back(to_json(r));
      std::cout << arr.dump(2) << '\n';
    }
  }
  if (!quiet) {
    const auto betas = cfg.beta.values();
    for (int n : cfg.dimensions)
      for (double b : betas) {
        const auto br = empirical_threshold(records, n, b);
        std::fprintf(stderr, "[scan] N=%d beta=%.6g empirical bracket [%.6g, %.6g]\n", n, b, br.below, br.above);
      }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial critical-exponent solver: shooting, certificates, mountain pass, scans"};
  app.require_subcommand(1);
  Common common;

  auto* solve = app.add_subcommand("solve", "Dirichlet solution for one problem config");
  add_common(solve, common, true);

  int n = 3;
  double beta = 0.0;
  double lambda = 0.0;
  std::optional<double> q;
  auto* certify = app.add_subcommand("certify", "nonexistence certificate");
  add_common(certify, common, false);
  certify->add_option("-N,--dimension", n)->required()->check(CLI::Range(3, 64));
  certify->add_option("--beta", beta)->required();
  certify->add_option("--lambda", lambda)->required();
  certify->add_option("--q", q, "exponent of the perturbation (default critical)");

  int iters = 500;
  double rho = 0.05;
  int samples = 64;
  auto* mpa = app.add_subcommand("mpa", "mountain-pass level");
  add_common(mpa, common, true);
  mpa->add_option("--iters", iters)->check(CLI::PositiveNumber);
  mpa->add_option("--rho", rho)->check(CLI::PositiveNumber);
  mpa->add_option("--samples", samples)->check(CLI::PositiveNumber);

  double gamma = 0.0;
  std::vector<double> ladder;
  auto* expansion = app.add_subcommand("expansion", "bubble energy expansions");
  add_common(expansion, common, false);
  expansion->add_option("-N,--dimension", n)->required()->check(CLI::Range(3, 64));
  expansion->add_option("--gamma", gamma)->required();
  expansion->add_option("--q", q)->required();
  expansion->add_option("--ladder", ladder, "epsilon values")->delimiter(',');

  auto* c30 = app.add_subcommand("c30", "J(epsilon) along a ladder");
  add_common(c30, common, false);
  c30->add_option("-N,--dimension", n)->required()->check(CLI::Range(3, 64));
  c30->add_option("--gamma", gamma)->required();
  c30->add_option("--q", q, "f(t) = t^q")->required();
  c30->add_option("--ladder", ladder, "epsilon values")->delimiter(',');

  bool quiet = false;
  auto* scan = app.add_subcommand("scan", "phase-diagram scan");
  add_common(scan, common, true);
  scan->add_flag("--quiet", quiet, "no progress output");

  auto* lstar = app.add_subcommand("lambda-star", "threshold of the radial test-function certificate");
  add_common(lstar, common, false);
  lstar->add_option("-N,--dimension", n)->required()->check(CLI::Range(3, 64));
  lstar->add_option("--beta", beta)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  common.format_given = app.get_subcommands().front()->count("--format") > 0;
  if (common.jobs > 0) omp_set_num_threads(common.jobs);

  try {
    if (*solve) return run_solve(common);
    if (*certify) return run_certify(common, n, beta, lambda, q);
    if (*mpa) return run_mpa(common, iters, rho, samples);
    if (*expansion) return run_expansion(common, n, gamma, *q, ladder);
    if (*c30) return run_c30(common, n, gamma, *q, ladder);
    if (*scan) return run_scan(common, quiet);
    if (*lstar) {
      emit_text(common, num(lambda_star(n, beta)) + "\n");
      return 0;
    }
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency violation: " << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
