#include "radcrit/mountain_pass.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "radcrit/errors.hpp"

namespace radcrit {

RayEnergy RayEnergy::of(const EnergyKernel& kernel, std::span<const double> w) {
  RayEnergy ray;
  ray.a = kernel.seminorm_sq(w);
  for (std::size_t j = 0; j < kernel.term_count(); ++j) {
    const double s = kernel.term_power(j);
    ray.power.push_back(s);
    ray.b.push_back(kernel.potential_moment(w, j) / (s + 1.0));
  }
  return ray;
}

double RayEnergy::operator()(double t) const {
  double v = 0.5 * t * t * a;
  for (std::size_t j = 0; j < b.size(); ++j) v -= std::pow(t, power[j] + 1.0) * b[j];
  return v;
}

double RayEnergy::derivative(double t) const {
  double v = t * a;
  for (std::size_t j = 0; j < b.size(); ++j) v -= (power[j] + 1.0) * std::pow(t, power[j]) * b[j];
  return v;
}

RayMaximum maximize_ray(const RayEnergy& ray, double rel_tol) {
  RayMaximum out;
  if (!(ray.a > 0.0)) return out;
  // find T with I'(T) < 0
  double hi = 1.0;
  while (ray.derivative(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e15) return out;
  }
  double lo = hi;
  while (lo > 1e-300 && ray.derivative(lo) < 0.0) lo *= 0.5;
  if (!(ray.derivative(lo) >= 0.0)) return out;
  const int bits = std::max(20, static_cast<int>(-std::log2(rel_tol)));
  const auto res = boost::math::tools::brent_find_minima([&](double t) { return -ray(t); }, lo, hi, bits);
  out.t = res.first;
  out.value = -res.second;
  out.degenerate = false;
  return out;
}

namespace {

std::vector<double> random_shape(const std::vector<double>& mesh, std::mt19937_64& gen) {
  constexpr int kModes = 8;
  std::normal_distribution<double> nd(0.0, 1.0);
  double c[kModes];
  // ground mode plus random higher modes
  c[0] = 1.0 + 0.5 * std::abs(nd(gen));
  for (int k = 1; k < kModes; ++k) c[k] = 0.5 * nd(gen) / ((k + 1.0) * (k + 1.0));
  std::vector<double> v(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < kModes; ++k) s += c[k] * std::cos((k + 0.5) * M_PI * mesh[i]);
    v[i] = std::abs(s);
  }
  v.back() = 0.0;
  return v;
}

}  // namespace

GeometryReport verify_mp_geometry(const ProblemSpec& spec, double rho, int samples, std::uint64_t seed,
                                  std::vector<double> mesh) {
  if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
  if (samples < 1) throw PreconditionError("need at least one sample");
  const EnergyKernel kern(spec, mesh);
  GeometryReport rep;
  rep.rho = rho;
  rep.samples = samples;
  rep.seed = seed;
  rep.a_estimate = std::numeric_limits<double>::infinity();
  rep.max_ray_energy = -std::numeric_limits<double>::infinity();
  rep.ray_ok = true;
  std::mt19937_64 gen(seed);
  for (int s = 0; s < samples; ++s) {
    auto v = random_shape(mesh, gen);
    const double nrm = kern.norm(v);
    if (!(nrm > 0.0)) continue;  // the zero function is not on the sphere
    for (auto& x : v) x /= nrm;
    const auto ray = RayEnergy::of(kern, v);
    const double ray_e = ray(rep.ray_t);
    rep.max_ray_energy = std::max(rep.max_ray_energy, ray_e);
    if (!(ray_e < 0.0)) rep.ray_ok = false;
    double t = 1.0;
    while (ray(t) >= 0.0 && t < 1e12) t *= 2.0;
    rep.max_negative_t = std::max(rep.max_negative_t, t);
    for (auto& x : v) x *= rho;
    rep.a_estimate = std::min(rep.a_estimate, kern.energy(v));
  }
  rep.geometry_ok = rep.a_estimate > 0.0;
  return rep;
}

Endpoint find_endpoint(const ProblemSpec& spec, const DiscreteRadialFunction& direction) {
  if (direction.is_zero()) throw PreconditionError("endpoint direction must be nonzero");
  if (direction.dimension() != spec.dimension) throw PreconditionError("dimension mismatch");
  const EnergyKernel kern(spec, direction.mesh());
  const auto ray = RayEnergy::of(kern, direction.values());
  for (double t = 1.0; t <= 1e12; t *= 2.0) {
    if (ray(t) <= 0.0) {
      // recheck on the actual nodal function
      auto e = direction.scaled(t);
      if (kern.energy(e.values()) <= 0.0) return {std::move(e), t};
    }
  }
  throw DivergenceError("no nonpositive energy along the ray up to t = 1e12", 1e12);
}

MpaReport mpa_level(const ProblemSpec& spec, const DiscreteRadialFunction& e, int iters, double tol,
                    const MpaOptions& opts) {
  if (e.is_zero()) throw PreconditionError("path endpoint must be nonzero");
  if (e.dimension() != spec.dimension) throw PreconditionError("dimension mismatch");
  if (iters < 1 || !(tol > 0.0)) throw PreconditionError("need iters >= 1 and tol > 0");
  const EnergyKernel kern(spec, e.mesh());
  const bool par = opts.parallel;
  if (!(kern.energy(e.values(), par) <= 0.0)) throw PreconditionError("endpoint energy must be nonpositive");

  const std::size_t n = e.size();
  std::vector<double> w(e.values().begin(), e.values().end());
  std::vector<double> u(n);
  std::vector<double> g(n);
  std::vector<double> trial(n);

  MpaReport rep;
  auto ray_max = [&](const std::vector<double>& dir) { return maximize_ray(RayEnergy::of(kern, dir)); };
  RayMaximum cur = ray_max(w);
  if (cur.degenerate) throw PreconditionError("no maximum along the endpoint ray");

  double step = 1.0;
  int flat = 0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) u[i] = cur.t * w[i];
    kern.h1_gradient(u, g, par);
    const double gn = kern.norm(g);
    const double un = kern.norm(u);
    rep.level_trace.push_back(cur.value);
    rep.gradient_trace.push_back(gn);
    rep.iterations = it;
    if (gn <= tol * un) {
      rep.converged = true;
      break;
    }
    // Armijo backtracking on J(w) = max_t I(t w)
    bool accepted = false;
    RayMaximum next;
    double s = std::min(1.0, 2.0 * step);
    for (int bt = 0; bt < 40; ++bt, s *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] - s * g[i];
      next = ray_max(trial);
      if (!next.degenerate && next.value <= cur.value - 1e-4 * s * gn * gn) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.stalled = true;
      break;
    }
    step = s;
    rep.step_trace.push_back(s);
    const double change = (cur.value - next.value) / std::max(std::abs(cur.value), 1e-300);
    w = trial;
    cur = next;
    flat = change < opts.stall_tol ? flat + 1 : 0;
    if (flat >= opts.stall_sweeps) {
      rep.stalled = true;
      for (std::size_t i = 0; i < n; ++i) u[i] = cur.t * w[i];
      kern.h1_gradient(u, g, par);
      rep.level_trace.push_back(cur.value);
      rep.gradient_trace.push_back(kern.norm(g));
      rep.iterations = it + 1;
      break;
    }
    if (it + 1 == iters) {
      for (std::size_t i = 0; i < n; ++i) u[i] = cur.t * w[i];
      kern.h1_gradient(u, g, par);
      rep.level_trace.push_back(cur.value);
      rep.gradient_trace.push_back(kern.norm(g));
      rep.iterations = iters;
    }
  }

  for (std::size_t i = 0; i < n; ++i) u[i] = cur.t * w[i];
  rep.level = kern.energy(u, par);
  rep.gradient_norm = rep.gradient_trace.back();
  const double un = kern.norm(u);
  rep.relative_gradient = rep.gradient_norm / un;
  rep.converged = rep.converged || rep.relative_gradient <= tol;
  rep.nehari = kern.pairing(u, u, par) / (un * un);
  rep.maximizer = DiscreteRadialFunction(spec.dimension, e.mesh(), u);

  // Path 0 → T·w (energy ≤ 0) along the ray, then the segment to e.
  const auto ray = RayEnergy::of(kern, w);
  double t_end = cur.t;
  while (ray(t_end) > 0.0) t_end *= 1.25;
  const int ray_nodes = std::max(3, opts.path_nodes - 2);
  for (int k = 0; k < ray_nodes; ++k) rep.path_energies.push_back(ray(t_end * k / (ray_nodes - 1)));
  for (std::size_t i = 0; i < n; ++i) trial[i] = 0.5 * (t_end * w[i] + e.values()[i]);
  rep.path_energies.push_back(kern.energy(trial, par));
  rep.path_energies.push_back(kern.energy(e.values(), par));
  return rep;
}

nlohmann::json to_json(const MpaReport& r) {
  return nlohmann::json{{"level", r.level},
                        {"iterations", r.iterations},
                        {"gradient_norm", r.gradient_norm},
                        {"relative_gradient", r.relative_gradient},
                        {"nehari", r.nehari},
                        {"converged", r.converged},
                        {"stalled", r.stalled},
                        {"level_trace", r.level_trace},
                        {"path_energies", r.path_energies},
                        {"maximizer", {{"r", r.maximizer.mesh()}, {"u", r.maximizer.values()}}},
                        {"note", "shooting cross-checks of this level are heuristic"}};
}

void write_mpa_trace_csv(const MpaReport& r, std::ostream& out) {
  out << "iteration,level,gradient_norm,step\n";
  char buf[128];
  for (std::size_t i = 0; i < r.level_trace.size(); ++i) {
    const double step = i < r.step_trace.size() ? r.step_trace[i] : 0.0;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, r.level_trace[i], r.gradient_trace[i], step);
    out << buf;
  }
}

std::vector<TLambdaPoint> t_lambda_curve(const ProblemSpec& spec, const DiscreteRadialFunction& u,
                                         std::span<const double> lambdas) {
  if (u.dimension() != spec.dimension) throw PreconditionError("dimension mismatch");
  for (double v : u.values())
    if (v < 0.0) throw PreconditionError("test function must be nonnegative");
  if (u.is_zero()) throw PreconditionError("test function must be nonzero");
  std::vector<TLambdaPoint> out(lambdas.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lambdas.size()); ++i) {
    ProblemSpec s = spec;
    s.lambda = lambdas[static_cast<std::size_t>(i)];
    const EnergyKernel kern(s, u.mesh());
    const auto m = maximize_ray(RayEnergy::of(kern, u.values()));
    out[static_cast<std::size_t>(i)] = {s.lambda, m.t, m.value, m.degenerate};
  }
  return out;
}

}  // namespace radcrit
