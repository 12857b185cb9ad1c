#pragma once

// Radial initial value problem u'' + (N-1)/r u' + rhs(r,u) = 0, u(0) = d,
// u'(0) = 0, integrated from the singular centre, and the shooting search
// for Dirichlet solutions u(1) = 0 on the unit ball.

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "radcrit/problem_model.hpp"

namespace radcrit {

struct RadialProfile {
  ProblemSpec spec;
  std::vector<double> r;   // strictly increasing, r.front() == 0
  std::vector<double> u;
  std::vector<double> du;  // u'(r); du.front() == 0
  double shooting_height = 0.0;
  double boundary_slope = std::numeric_limits<double>::quiet_NaN();  // u' at r.back()

  std::size_t size() const noexcept { return r.size(); }
  bool empty() const noexcept { return r.empty(); }
  double r_end() const { return r.empty() ? 0.0 : r.back(); }
  bool covers_unit_interval() const;
};

struct IvpOptions {
  double r_end = 1.0;
  double tol = 1e-14;  // relative local error per step
  bool stop_at_zero = false;  // otherwise continue through sign changes
  double overflow_guard = 1e12;
  // Sample the profile exactly at these radii (sorted, within (0, r_end]);
  // when empty every accepted step is recorded.
  std::vector<double> output_radii;
  // > 0: fixed steps of size fixed_step·min(1, r) instead of error control.
  double fixed_step = 0.0;
  std::size_t max_steps = 5'000'000;
};

struct IvpResult {
  RadialProfile profile;
  std::optional<double> first_zero;  // set when stop_at_zero hit a sign change
};

// Profile up to r_end or the first sign change, whichever comes first.
RadialProfile integrate_ivp(const ProblemSpec& spec, double d, double r_end, double tol);
IvpResult integrate_ivp(const ProblemSpec& spec, double d, const IvpOptions& opts);

// Series start radius used for height d; radii below it are evaluated from
// the centre expansion.
double series_start_radius(const ProblemSpec& spec, double d, double tol);
// Natural length scale of the shot with height d (≤ 1).
double shot_length_scale(const ProblemSpec& spec, double d);

struct FirstZero {
  double radius;
};
struct PositiveAtEnd {
  double u_end;
  double r_end;
};

struct ShootingOutcome {
  std::variant<FirstZero, PositiveAtEnd> result;
  RadialProfile partial;

  bool has_zero() const noexcept { return std::holds_alternative<FirstZero>(result); }
  // R(d), or +inf when the shot stays positive up to the guard radius.
  double first_zero() const noexcept;
};

struct ShootOptions {
  double tol = 1e-17;
  double r_max_guard = 10.0;
  double overflow_guard = 1e12;
  bool keep_profile = false;
};

ShootingOutcome shoot(const ProblemSpec& spec, double d, double tol);
ShootingOutcome shoot(const ProblemSpec& spec, double d, const ShootOptions& opts);

// ---- d-grid classification kernel -----------------------------------------

struct ShotSample {
  enum class Status { FirstZero, PositiveAtEnd, Diverged };
  double d = 0.0;
  Status status = Status::PositiveAtEnd;
  double radius = std::numeric_limits<double>::infinity();  // R(d); +inf if none
  double value = 0.0;  // u at r_max_guard for PositiveAtEnd
};

// points_per_decade log-spaced heights covering [d_min, d_max] inclusive.
std::vector<double> log_grid(double d_min, double d_max, int points_per_decade);

// Serial reference and OpenMP version; identical output for every thread count.
std::vector<ShotSample> scan_shots_serial(const ProblemSpec& spec, std::span<const double> heights,
                                          const ShootOptions& opts);
std::vector<ShotSample> scan_shots_parallel(const ProblemSpec& spec, std::span<const double> heights,
                                            const ShootOptions& opts);

struct HeightRange {
  double lo = 1e-3;
  double hi = 1e6;
};

struct DirichletBracket {
  double d_lo;
  double d_hi;
  double radius_lo;
  double radius_hi;
};

struct DirichletOptions {
  int points_per_decade = 64;
  ShootOptions shot;        // classification shots
  double solve_tol = 1e-16; // integrator tolerance for refinement and final profile
  bool parallel = true;
  int mesh_points_per_efold = 256;
  double mesh_max_spacing = 1.0 / 1024.0;
};

struct DirichletSearch {
  std::optional<RadialProfile> solution;
  std::vector<ShotSample> samples;
  std::vector<DirichletBracket> brackets;  // every sign change of R(d) - 1
  double d_star = std::numeric_limits<double>::quiet_NaN();
  double boundary_residual = std::numeric_limits<double>::quiet_NaN();  // |u(1; d*)|
  double ode_residual = std::numeric_limits<double>::quiet_NaN();

  bool found() const noexcept { return solution.has_value(); }
};

// Scans heights for a sign change of R(d) - 1, then refines the smallest-d
// bracket until |u(1; d*)| <= tol. Later brackets are only recorded.
DirichletSearch find_dirichlet_solution(const ProblemSpec& spec, HeightRange range, double tol,
                                        const DirichletOptions& opts = {});

// Output mesh for a profile with length scale ell: the origin, geometric
// points (ratio e^{1/per_efold}) from 1e-3·ell, then spacing ≤ max_spacing up to 1.
std::vector<double> solution_mesh(double ell, int per_efold = 256, double max_spacing = 1.0 / 1024.0);

// max |u'' + (N-1)/r u' + rhs| / max |rhs| over interior mesh points, with
// u'' from a five-node quartic fit of u'.
double residual_check(const RadialProfile& profile);

// Profile built from a closed-form function and its derivative on a mesh.
template <class F, class DF>
RadialProfile sample_profile(const ProblemSpec& spec, std::span<const double> mesh, F&& u, DF&& du) {
  RadialProfile p;
  p.spec = spec;
  for (double r : mesh) {
    p.r.push_back(r);
    p.u.push_back(u(r));
    p.du.push_back(r == 0.0 ? 0.0 : du(r));
  }
  p.shooting_height = p.u.empty() ? 0.0 : p.u.front();
  p.boundary_slope = p.du.empty() ? 0.0 : p.du.back();
  return p;
}

void write_profile_csv(const RadialProfile& profile, std::ostream& out);
nlohmann::json profile_to_json(const RadialProfile& profile);

}  // namespace radcrit
