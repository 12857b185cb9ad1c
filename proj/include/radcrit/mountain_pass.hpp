#pragma once

// Mountain-pass geometry checks, the minimax level by ray re-maximisation
// and H¹ steepest descent, and the ray maximisers t_λ.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "radcrit/functionals.hpp"

namespace radcrit {

// I(t w) = t²A/2 - Σ_j t^{s_j+1} B_j for a fixed direction w.
struct RayEnergy {
  double a = 0.0;
  std::vector<double> b;      // ∫ c_j w₊^{s_j+1}/(s_j+1)
  std::vector<double> power;  // s_j

  static RayEnergy of(const EnergyKernel& kernel, std::span<const double> w);
  double operator()(double t) const;
  double derivative(double t) const;
};

struct RayMaximum {
  double t = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = true;  // no interior maximum on (0, ∞)
};
// Golden-section search after bracketing the sign change of d/dt.
RayMaximum maximize_ray(const RayEnergy& ray, double rel_tol = 1e-13);

struct GeometryReport {
  double rho = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  double a_estimate = 0.0;        // min sampled I on ‖u‖ = ρ
  bool geometry_ok = false;       // a_estimate > 0
  bool ray_ok = false;            // I(ray_t·u) < 0 for every unit-norm sample
  double ray_t = 40.0;
  double max_ray_energy = 0.0;
  double max_negative_t = 0.0;    // largest doubling t reaching I(t·u) < 0
};

// Samples |Σ_k c_k cos((k-½)πr)|: c_1 = 1 + |N(0,1)|/2, c_k ~ N(0,1)/(2k²) (fixed seed).
GeometryReport verify_mp_geometry(const ProblemSpec& spec, double rho, int samples, std::uint64_t seed = 20240611,
                                  std::vector<double> mesh = graded_mesh());

struct Endpoint {
  DiscreteRadialFunction e;
  double t = 0.0;
};
// t doubled from 1 until I(t·direction) ≤ 0.
Endpoint find_endpoint(const ProblemSpec& spec, const DiscreteRadialFunction& direction);

struct MpaOptions {
  double stall_tol = 1e-12;  // relative level change counted as stalled
  int stall_sweeps = 5;
  int path_nodes = 33;
  bool parallel = true;
};

struct MpaReport {
  double level = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::quiet_NaN();  // ‖I'(u*)‖
  double relative_gradient = std::numeric_limits<double>::quiet_NaN();
  double nehari = std::numeric_limits<double>::quiet_NaN();  // ⟨I'(u*),u*⟩/‖u*‖²
  bool converged = false;
  bool stalled = false;
  DiscreteRadialFunction maximizer;
  std::vector<double> level_trace;
  std::vector<double> gradient_trace;
  std::vector<double> step_trace;
  std::vector<double> path_energies;  // final path 0 → ray → e
};

// Minimax level over paths from 0 to e.
MpaReport mpa_level(const ProblemSpec& spec, const DiscreteRadialFunction& e, int iters, double tol,
                    const MpaOptions& opts = {});

nlohmann::json to_json(const MpaReport& report);
void write_mpa_trace_csv(const MpaReport& report, std::ostream& out);

struct TLambdaPoint {
  double lambda;
  double t;
  double energy;  // I(t_λ u)
  bool degenerate;
};
// For each λ, the maximiser of t ↦ I(t·u) with spec.lambda replaced by λ.
std::vector<TLambdaPoint> t_lambda_curve(const ProblemSpec& spec, const DiscreteRadialFunction& u,
                                         std::span<const double> lambdas);

}  // namespace radcrit
