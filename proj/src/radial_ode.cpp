#include "radcrit/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "radcrit/errors.hpp"
#include "radcrit/ode_stepper.hpp"

namespace radcrit {

namespace {

using Real = long double;
using State = ode::Vec<Real, 2>;

struct RadialRhs {
  const ProblemSpec* spec;
  Real nm1;
  State operator()(Real r, const State& y) const {
    return {y[1], -nm1 * y[1] / r - spec->rhs<Real>(r, y[0])};
  }
};

// Leading-term Picard expansion around the centre:
// u ≈ d - Σ a r^{e+2}/((e+2)(e+N)),  u' ≈ -Σ a r^{e+1}/(e+N).
struct CentreSeries {
  std::vector<PowerTerm> terms;
  int n;
  double d;
  State at(Real r) const {
    Real u = d;
    Real du = 0;
    for (const auto& t : terms) {
      const Real a = t.amplitude;
      const Real e = t.exponent;
      const Real re1 = pow_real(r, t.exponent + 1.0);
      du -= a * re1 / (e + n);
      u -= a * re1 * r / ((e + 2) * (e + n));
    }
    return {u, du};
  }
};

double length_scale_of(const std::vector<PowerTerm>& terms, int n, double d) {
  double ell = 1.0;
  for (const auto& t : terms) {
    if (t.amplitude == 0.0) continue;
    const double e = t.exponent;
    const double s = std::pow(std::abs(d) * (e + 2.0) * (e + n) / std::abs(t.amplitude), 1.0 / (e + 2.0));
    if (std::isfinite(s)) ell = std::min(ell, s);
  }
  return ell;
}

enum class Stop { End, Zero };

struct CoreOut {
  Stop stop = Stop::End;
  Real r = 0;
  State y{};
};

// Adaptive (or graded fixed-step) integration from the centre. Records into
// `prof` when non-null.
CoreOut integrate_core(const ProblemSpec& spec, double d, const IvpOptions& o, RadialProfile* prof) {
  const int n = spec.dimension;
  const RadialRhs rhs{&spec, static_cast<Real>(n - 1)};
  const auto record = [&](Real r, const State& y) {
    if (prof == nullptr) return;
    prof->r.push_back(static_cast<double>(r));
    prof->u.push_back(static_cast<double>(y[0]));
    prof->du.push_back(static_cast<double>(y[1]));
  };

  record(0, {static_cast<Real>(d), 0});
  const Real r_end = o.r_end;

  if (d == 0.0) {
    // u ≡ 0 solves every member of the family.
    if (!o.output_radii.empty()) {
      for (double r : o.output_radii)
        if (r > 0.0) record(r, {0, 0});
    } else {
      record(r_end, {0, 0});
    }
    return {Stop::End, r_end, {0, 0}};
  }

  const CentreSeries series{spec.rhs_leading_terms(d), n, d};
  const double tol_eff = o.fixed_step > 0.0 ? 1e-16 : o.tol;
  Real r = std::min(series_start_radius(spec, d, tol_eff), 0.5 * o.r_end);
  State y = series.at(r);

  std::size_t next_out = 0;
  const auto& outs = o.output_radii;
  while (next_out < outs.size() && outs[next_out] <= 0.0) ++next_out;
  while (next_out < outs.size() && outs[next_out] <= r) {
    record(outs[next_out], series.at(outs[next_out]));
    ++next_out;
  }

  // Forced step boundaries: tabulated knots, outputs, the end.
  std::vector<double> stops = spec.breakpoints();
  stops.erase(std::remove_if(stops.begin(), stops.end(), [&](double s) { return s <= r || s >= r_end; }),
              stops.end());
  std::sort(stops.begin(), stops.end());
  std::size_t next_stop = 0;

  State f0 = rhs(r, y);
  Real h = r;
  const Real rtol = o.tol;

  for (std::size_t step = 0; r < r_end; ++step) {
    if (step >= o.max_steps) throw DivergenceError("step budget exhausted", static_cast<double>(r));
    while (next_stop < stops.size() && stops[next_stop] <= r) ++next_stop;
    Real target = r_end;
    if (next_stop < stops.size()) target = std::min<Real>(target, stops[next_stop]);
    if (next_out < outs.size()) target = std::min<Real>(target, outs[next_out]);

    if (o.fixed_step > 0.0) h = static_cast<Real>(o.fixed_step) * std::min<Real>(1, r);
    bool lands = false;
    if (r + h >= target || target - (r + h) < Real(1e-14) * target) {
      h = target - r;
      lands = true;
    }

    const auto s = ode::dop853_step(rhs, r, y, f0, h);
    Real factor = 1;
    if (o.fixed_step <= 0.0) {
      // local scale: the far tail of a concentrated shot is O(1/d)
      const Real um = std::max(std::abs(y[0]), std::abs(s.y[0]));
      const Real vm = std::max(std::abs(y[1]), std::abs(s.y[1]));
      const Real rn = r + h;
      State scale{rtol * (um + rn * vm), rtol * vm};
      if (scale[1] == Real(0)) scale[1] = rtol * um;
      const Real err = ode::dop853_error_norm(s, scale, h);
      factor = ode::dop853_step_factor(err);
      if (!(err <= Real(1))) {
        h *= std::min<Real>(factor, Real(0.9));
        if (!(h > Real(64) * std::numeric_limits<Real>::epsilon() * r))
          throw DivergenceError("step size underflow", static_cast<double>(r));
        continue;
      }
    }

    if (!std::isfinite(static_cast<double>(s.y[0])) || std::abs(s.y[0]) > o.overflow_guard)
      throw DivergenceError("solution left the overflow guard", static_cast<double>(r));

    if (o.stop_at_zero && y[0] > 0 && s.y[0] <= 0) {
      // Locate the sign change inside the step using partial steps.
      const auto g = [&](Real hh) {
        if (hh <= 0) return y[0];
        return ode::dop853_step(rhs, r, y, f0, hh).y[0];
      };
      Real lo = 0;
      Real hi = h;
      Real glo = y[0];
      Real ghi = s.y[0];
      int side = 0;
      for (int it = 0; it < 200 && hi - lo > Real(4) * std::numeric_limits<Real>::epsilon() * (r + hi); ++it) {
        // Illinois regula falsi
        Real m = (lo * ghi - hi * glo) / (ghi - glo);
        if (!(m > lo && m < hi)) m = Real(0.5) * (lo + hi);
        const Real gm = g(m);
        if (gm > 0) {
          lo = m;
          glo = gm;
          if (side == -1) ghi *= Real(0.5);
          side = -1;
        } else {
          hi = m;
          ghi = gm;
          if (side == 1) glo *= Real(0.5);
          side = 1;
        }
      }
      const Real hz = hi;
      State yz = hz == h ? s.y : ode::dop853_step(rhs, r, y, f0, hz).y;
      yz[0] = 0;
      record(r + hz, yz);
      return {Stop::Zero, r + hz, yz};
    }

    r = lands ? target : r + h;
    y = s.y;
    f0 = rhs(r, y);
    if (outs.empty()) {
      record(r, y);
    } else if (next_out < outs.size() && r == static_cast<Real>(outs[next_out])) {
      record(r, y);
      ++next_out;
    }
    if (o.fixed_step <= 0.0) h *= factor;
  }
  return {Stop::End, r, y};
}

}  // namespace

bool RadialProfile::covers_unit_interval() const {
  return !r.empty() && r.front() == 0.0 && r.back() >= 1.0;
}

double shot_length_scale(const ProblemSpec& spec, double d) {
  if (d == 0.0) return 1.0;
  return length_scale_of(spec.rhs_leading_terms(d), spec.dimension, d);
}

double series_start_radius(const ProblemSpec& spec, double d, double tol) {
  const double ell = shot_length_scale(spec, d);
  double r0 = std::min(1e-3, std::pow(std::max(tol, 1e-30), 0.25)) * ell;
  const double valid = spec.rhs_leading_terms_radius();
  if (valid > 0.0) r0 = std::min(r0, 0.5 * valid);
  return r0;
}

IvpResult integrate_ivp(const ProblemSpec& spec, double d, const IvpOptions& opts) {
  spec.validate();
  if (!std::isfinite(d) || d < 0.0) throw DomainError("shooting height must be finite and nonnegative");
  if (!(opts.r_end > 0.0) || !std::isfinite(opts.r_end)) throw DomainError("r_end must be positive");
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!std::is_sorted(opts.output_radii.begin(), opts.output_radii.end()))
    throw PreconditionError("output radii must be sorted");
  if (!opts.output_radii.empty() && opts.output_radii.back() > opts.r_end)
    throw PreconditionError("output radii beyond r_end");

  IvpResult res;
  res.profile.spec = spec;
  res.profile.shooting_height = d;
  const CoreOut out = integrate_core(spec, d, opts, &res.profile);
  if (out.stop == Stop::Zero) res.first_zero = static_cast<double>(out.r);
  res.profile.boundary_slope = res.profile.du.back();
  return res;
}

RadialProfile integrate_ivp(const ProblemSpec& spec, double d, double r_end, double tol) {
  IvpOptions o;
  o.r_end = r_end;
  o.tol = tol;
  o.stop_at_zero = true;
  return integrate_ivp(spec, d, o).profile;
}

double ShootingOutcome::first_zero() const noexcept {
  if (const auto* z = std::get_if<FirstZero>(&result)) return z->radius;
  return std::numeric_limits<double>::infinity();
}

ShootingOutcome shoot(const ProblemSpec& spec, double d, const ShootOptions& opts) {
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("shooting height must be positive");
  IvpOptions o;
  o.r_end = opts.r_max_guard;
  o.tol = opts.tol;
  o.stop_at_zero = true;
  o.overflow_guard = opts.overflow_guard;
  ShootingOutcome sh{PositiveAtEnd{0.0, opts.r_max_guard}, {}};
  if (opts.keep_profile) {
    auto res = integrate_ivp(spec, d, o);
    if (res.first_zero) sh.result = FirstZero{*res.first_zero};
    else sh.result = PositiveAtEnd{res.profile.u.back(), res.profile.r.back()};
    sh.partial = std::move(res.profile);
  } else {
    spec.validate();
    const CoreOut out = integrate_core(spec, d, o, nullptr);
    if (out.stop == Stop::Zero) sh.result = FirstZero{static_cast<double>(out.r)};
    else sh.result = PositiveAtEnd{static_cast<double>(out.y[0]), static_cast<double>(out.r)};
    sh.partial.spec = spec;
    sh.partial.shooting_height = d;
  }
  return sh;
}

ShootingOutcome shoot(const ProblemSpec& spec, double d, double tol) {
  ShootOptions o;
  o.tol = tol;
  o.keep_profile = true;
  return shoot(spec, d, o);
}

std::vector<double> log_grid(double d_min, double d_max, int points_per_decade) {
  if (!(d_min > 0.0) || !(d_max > d_min) || points_per_decade < 1)
    throw DomainError("log grid needs 0 < d_min < d_max and points_per_decade >= 1");
  const double l0 = std::log10(d_min);
  const double l1 = std::log10(d_max);
  const auto m = static_cast<std::size_t>(std::ceil((l1 - l0) * points_per_decade - 1e-9));
  std::vector<double> g(m + 1);
  for (std::size_t i = 0; i <= m; ++i) g[i] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(m));
  g.front() = d_min;
  g.back() = d_max;
  return g;
}

namespace {
ShotSample one_shot(const ProblemSpec& spec, double d, const ShootOptions& opts) {
  ShotSample s;
  s.d = d;
  try {
    ShootOptions o = opts;
    o.keep_profile = false;
    const auto sh = shoot(spec, d, o);
    if (const auto* z = std::get_if<FirstZero>(&sh.result)) {
      s.status = ShotSample::Status::FirstZero;
      s.radius = z->radius;
    } else {
      s.status = ShotSample::Status::PositiveAtEnd;
      s.value = std::get<PositiveAtEnd>(sh.result).u_end;
    }
  } catch (const DivergenceError& e) {
    s.status = ShotSample::Status::Diverged;
    s.radius = std::numeric_limits<double>::quiet_NaN();
    s.value = e.last_radius();
  }
  return s;
}
}  // namespace

std::vector<ShotSample> scan_shots_serial(const ProblemSpec& spec, std::span<const double> heights,
                                          const ShootOptions& opts) {
  spec.validate();
  std::vector<ShotSample> out(heights.size());
  for (std::size_t i = 0; i < heights.size(); ++i) out[i] = one_shot(spec, heights[i], opts);
  return out;
}

std::vector<ShotSample> scan_shots_parallel(const ProblemSpec& spec, std::span<const double> heights,
                                            const ShootOptions& opts) {
  spec.validate();
  std::vector<ShotSample> out(heights.size());
  const auto n = static_cast<std::ptrdiff_t>(heights.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = one_shot(spec, heights[i], opts);
  return out;
}

std::vector<double> solution_mesh(double ell, int per_efold, double max_spacing) {
  if (!(ell > 0.0) || per_efold < 1 || !(max_spacing > 0.0)) throw DomainError("invalid mesh parameters");
  const double q = std::exp(1.0 / per_efold);
  std::vector<double> m{0.0};
  double r = 1e-3 * std::min(ell, 1.0);
  while (r < 1.0) {
    m.push_back(r);
    const double next = r * q;
    r = next - r > max_spacing ? r + max_spacing : next;
    if (1.0 - r < 0.25 * (r - m.back())) break;
  }
  m.push_back(1.0);
  return m;
}

DirichletSearch find_dirichlet_solution(const ProblemSpec& spec, HeightRange range, double tol,
                                        const DirichletOptions& opts) {
  spec.validate();
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  DirichletSearch out;
  const auto grid = log_grid(range.lo, range.hi, opts.points_per_decade);
  out.samples = opts.parallel ? scan_shots_parallel(spec, grid, opts.shot)
                              : scan_shots_serial(spec, grid, opts.shot);

  const auto above = [](const ShotSample& s) { return !(s.radius <= 1.0); };  // +inf counts as > 1
  for (std::size_t i = 0; i + 1 < out.samples.size(); ++i) {
    const auto& a = out.samples[i];
    const auto& b = out.samples[i + 1];
    if (a.status == ShotSample::Status::Diverged || b.status == ShotSample::Status::Diverged) continue;
    if (above(a) != above(b)) out.brackets.push_back({a.d, b.d, a.radius, b.radius});
  }
  if (out.brackets.empty()) return out;

  // φ(d) = u(1; d), continued through the first zero; its sign matches R(d) - 1.
  IvpOptions o;
  o.r_end = 1.0;
  o.tol = opts.solve_tol;
  o.overflow_guard = opts.shot.overflow_guard;
  const auto phi = [&](double d) {
    spec.validate();
    return static_cast<double>(integrate_core(spec, d, o, nullptr).y[0]);
  };

  const auto& br = out.brackets.front();
  double lo = br.d_lo;
  double hi = br.d_hi;
  double flo = phi(lo);
  double fhi = phi(hi);
  double d_star = std::abs(flo) < std::abs(fhi) ? lo : hi;
  double f_star = std::min(std::abs(flo), std::abs(fhi));
  if (flo * fhi < 0.0 && f_star > tol) {
    std::uintmax_t iters = 200;
    const auto stop = [&](double a, double b) {
      return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    };
    const auto f = [&](double d) {
      const double v = phi(d);
      if (std::abs(v) < f_star) {
        f_star = std::abs(v);
        d_star = d;
      }
      return f_star <= tol ? 0.0 : v;  // zero value ends the solver
    };
    boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  }
  out.d_star = d_star;
  out.boundary_residual = f_star;

  IvpOptions fin = o;
  fin.output_radii = solution_mesh(shot_length_scale(spec, d_star), opts.mesh_points_per_efold, opts.mesh_max_spacing);
  fin.output_radii.erase(fin.output_radii.begin());  // origin is recorded anyway
  auto res = integrate_ivp(spec, d_star, fin);
  RadialProfile& p = res.profile;
  p.u.back() = 0.0;  // boundary condition; |u(1)| ≤ tol
  p.boundary_slope = p.du.back();
  out.ode_residual = residual_check(p);
  out.solution = std::move(p);
  return out;
}

namespace {

// d/dr of the quartic through (r_j, u'_j), j = i-2..i+2, at r_i. Uses only
// derivative data: second differences of u lose eps·|u|/h² near the centre.
long double quartic_slope(const std::vector<double>& r, const std::vector<double>& du, std::size_t i) {
  const long double xi = r[i];
  long double out = 0;
  for (std::size_t j = i - 2; j <= i + 2; ++j) {
    long double w = 0;
    if (j == i) {
      for (std::size_t m = i - 2; m <= i + 2; ++m)
        if (m != i) w += 1 / (xi - static_cast<long double>(r[m]));
    } else {
      long double num = 1;
      long double den = 1;
      const long double xj = r[j];
      for (std::size_t m = i - 2; m <= i + 2; ++m) {
        if (m == j) continue;
        den *= xj - static_cast<long double>(r[m]);
        if (m != i) num *= xi - static_cast<long double>(r[m]);
      }
      w = num / den;
    }
    out += w * static_cast<long double>(du[j]);
  }
  return out;
}

}  // namespace

double residual_check(const RadialProfile& p) {
  const std::size_t n = p.size();
  if (n < 7 || p.u.size() != n || p.du.size() != n) throw DiagnosticsError("profile has fewer than 7 nodes");
  double max_gap = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(p.r[i] > p.r[i - 1])) throw DiagnosticsError("profile radii are not strictly increasing");
    max_gap = std::max(max_gap, p.r[i] - p.r[i - 1]);
  }
  if (p.r.front() != 0.0 || p.r.back() < 1.0) throw PreconditionError("profile must cover [0,1]");
  if (max_gap > 0.02 * p.r.back())
    throw DiagnosticsError("profile mesh too coarse for the residual reconstruction");

  const auto& spec = p.spec;
  const long double nm1 = spec.dimension - 1;
  long double worst = 0;
  long double scale = 0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(spec.rhs<long double>(p.r[i], p.u[i])));
  if (scale == 0) scale = 1;
  // stencils touching the centre are skipped
  for (std::size_t i = 3; i + 2 < n; ++i) {
    const long double ri = p.r[i];
    const long double res = quartic_slope(p.r, p.du, i) + nm1 / ri * p.du[i] + spec.rhs<long double>(ri, p.u[i]);
    worst = std::max(worst, std::abs(res));
  }
  return static_cast<double>(worst / scale);
}

void write_profile_csv(const RadialProfile& p, std::ostream& out) {
  char buf[96];
  out << "r,u,u_prime\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.r[i], p.u[i], p.du[i]);
    out << buf;
  }
}

nlohmann::json profile_to_json(const RadialProfile& p) {
  return nlohmann::json{{"problem", to_json(p.spec)},
                        {"d_star", p.shooting_height},
                        {"boundary_slope", p.boundary_slope},
                        {"r", p.r},
                        {"u", p.u},
                        {"u_prime", p.du}};
}

}  // namespace radcrit
