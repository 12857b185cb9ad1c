#include "radcrit/functionals.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "radcrit/errors.hpp"

namespace radcrit {

namespace {

// Gauss–Legendre rule mapped to [0,1].
template <unsigned G>
void gauss_rule(std::vector<double>& x, std::vector<double>& w) {
  using Rule = boost::math::quadrature::gauss<double, G>;
  const auto& a = Rule::abscissa();
  const auto& wt = Rule::weights();
  x.clear();
  w.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(0.5);
      w.push_back(0.5 * wt[i]);
    } else {
      x.push_back(0.5 - 0.5 * a[i]);
      w.push_back(0.5 * wt[i]);
      x.push_back(0.5 + 0.5 * a[i]);
      w.push_back(0.5 * wt[i]);
    }
  }
}

void gauss01(int g, std::vector<double>& x, std::vector<double>& w) {
  switch (g) {
    case 3: gauss_rule<3>(x, w); break;
    case 5: gauss_rule<5>(x, w); break;
    case 8: gauss_rule<8>(x, w); break;
    default: throw DomainError("supported Gauss rules: 3, 5, 8 points");
  }
}

double critical_power_of(int n) { return 2.0 * n / (n - 2.0); }

void check_dimension(int n) {
  if (n < 3) throw DomainError("dimension must be at least 3");
}

// ∫_B |x|^{ms}|u|^s on P1 data with 5-point Gauss per segment.
double weighted_power_integral(const DiscreteRadialFunction& u, double s, double m) {
  std::vector<double> x;
  std::vector<double> w;
  gauss01(5, x, w);
  const auto& r = u.mesh();
  const auto& v = u.values();
  const int n = u.dimension();
  const double rpow = m * s + n - 1;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double h = r[i + 1] - r[i];
    if (v[i] == 0.0 && v[i + 1] == 0.0) continue;
    double seg = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double rr = r[i] + x[k] * h;
      const double uu = v[i] + x[k] * (v[i + 1] - v[i]);
      seg += w[k] * std::pow(std::abs(uu), s) * std::pow(rr, rpow);
    }
    total += seg * h;
  }
  return sphere_area(n) * total;
}

}  // namespace

std::vector<double> graded_mesh(int m) {
  if (m < 2) throw DomainError("graded mesh needs at least 2 intervals");
  std::vector<double> r(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) / m;
    r[static_cast<std::size_t>(i)] = t * t;
  }
  r.back() = 1.0;
  return r;
}

DiscreteRadialFunction::DiscreteRadialFunction(int dimension, std::vector<double> mesh, std::vector<double> values)
    : n_(dimension), r_(std::move(mesh)), u_(std::move(values)) {
  check_dimension(n_);
  if (r_.size() < 2 || r_.size() != u_.size()) throw DomainError("mesh and values must have equal size >= 2");
  if (r_.front() != 0.0) throw DomainError("mesh must start at 0");
  for (std::size_t i = 1; i < r_.size(); ++i)
    if (!(r_[i] > r_[i - 1])) throw DomainError("mesh must be strictly increasing");
  for (double v : u_)
    if (!std::isfinite(v)) throw DomainError("nodal values must be finite");
}

double DiscreteRadialFunction::operator()(double r) const {
  if (r < r_.front() || r > r_.back()) return 0.0;
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  if (it == r_.end()) return u_.back();
  const auto i = static_cast<std::size_t>(it - r_.begin()) - 1;
  const double t = (r - r_[i]) / (r_[i + 1] - r_[i]);
  return u_[i] + t * (u_[i + 1] - u_[i]);
}

bool DiscreteRadialFunction::vanishes_at_boundary(double tol) const { return std::abs(u_.back()) <= tol; }

bool DiscreteRadialFunction::is_zero() const {
  return std::all_of(u_.begin(), u_.end(), [](double v) { return v == 0.0; });
}

DiscreteRadialFunction DiscreteRadialFunction::scaled(double c) const {
  auto v = u_;
  for (auto& x : v) x *= c;
  return {n_, r_, std::move(v)};
}

double h1_seminorm_sq(const DiscreteRadialFunction& u) {
  const auto& r = u.mesh();
  const auto& v = u.values();
  const int n = u.dimension();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double h = r[i + 1] - r[i];
    const double slope = (v[i + 1] - v[i]) / h;
    total += slope * slope * (std::pow(r[i + 1], n) - std::pow(r[i], n)) / n;
  }
  return sphere_area(n) * total;
}

double weighted_lp(const DiscreteRadialFunction& u, double s, double m) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw DomainError("weighted_lp needs finite s >= 1");
  if (!(m >= 0.0)) throw DomainError("weighted_lp needs m >= 0");
  return weighted_power_integral(u, s, m);
}

double rayleigh_quotient(const DiscreteRadialFunction& u) {
  const double p = critical_power_of(u.dimension());
  const double den = weighted_power_integral(u, p, 0.0);
  if (!(den > 0.0)) throw PreconditionError("Rayleigh quotient of the zero function");
  return h1_seminorm_sq(u) / std::pow(den, 2.0 / p);
}

std::vector<PotentialTerm> potential_terms(const ProblemSpec& spec) {
  std::vector<PotentialTerm> out;
  out.push_back({[spec](double r) { return spec.main_factor(r); }, spec.main_exponent});
  if (spec.lambda != 0.0 && spec.f.kind == NonlinearityModel::Kind::PurePower && !spec.k.is_zero()) {
    const double lam = spec.lambda;
    const CoefficientModel k = spec.k;
    out.push_back({[lam, k](double r) { return lam * k.value(r); }, spec.f.q});
  }
  return out;
}

double energy(const ProblemSpec& spec, const DiscreteRadialFunction& u) {
  if (spec.dimension != u.dimension()) throw PreconditionError("dimension mismatch between spec and function");
  const EnergyKernel kern(spec, u.mesh());
  return kern.energy(u.values(), false);
}

// ---- EnergyKernel -----------------------------------------------------------

EnergyKernel::EnergyKernel(const ProblemSpec& spec, std::vector<double> mesh, int gauss_points)
    : spec_(spec), r_(std::move(mesh)), g_(gauss_points) {
  spec_.validate();
  if (r_.size() < 2 || r_.front() != 0.0) throw DomainError("mesh must start at 0 with >= 2 nodes");
  for (std::size_t i = 1; i < r_.size(); ++i)
    if (!(r_[i] > r_[i - 1])) throw DomainError("mesh must be strictly increasing");
  const int n = spec_.dimension;
  const double omega = sphere_area(n);
  const std::size_t ns = r_.size() - 1;

  stiff_.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const double h = r_[i + 1] - r_[i];
    stiff_[i] = omega * (std::pow(r_[i + 1], n) - std::pow(r_[i], n)) / (n * h * h);
  }

  std::vector<double> x;
  std::vector<double> w;
  gauss01(g_, x, w);
  const auto terms = potential_terms(spec_);
  for (const auto& t : terms) powers_.push_back(t.power);
  phi_ = std::vector<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) phi_[k] = 1.0 - x[k];
  wt_.resize(ns * x.size());
  coeff_.assign(terms.size(), std::vector<double>(ns * x.size()));
  for (std::size_t i = 0; i < ns; ++i) {
    const double h = r_[i + 1] - r_[i];
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double rr = r_[i] + x[k] * h;
      wt_[i * x.size() + k] = omega * w[k] * h * std::pow(rr, n - 1);
      for (std::size_t j = 0; j < terms.size(); ++j) coeff_[j][i * x.size() + k] = terms[j].coefficient(rr);
    }
  }
}

double EnergyKernel::seminorm_sq(std::span<const double> u) const {
  if (u.size() != r_.size()) throw PreconditionError("nodal vector has the wrong size");
  double total = 0.0;
  for (std::size_t i = 0; i < stiff_.size(); ++i) {
    const double d = u[i + 1] - u[i];
    total += stiff_[i] * d * d;
  }
  return total;
}

double EnergyKernel::potential_moment(std::span<const double> u, std::size_t j, bool parallel) const {
  if (u.size() != r_.size()) throw PreconditionError("nodal vector has the wrong size");
  const std::size_t ns = stiff_.size();
  const std::size_t nq = phi_.size();
  const double s1 = powers_[j] + 1.0;
  const auto& c = coeff_[j];
  const std::size_t nb = (ns + kBlock - 1) / kBlock;
  std::vector<double> partial(nb, 0.0);
  const auto block = [&](std::size_t b) {
    double acc = 0.0;
    const std::size_t end = std::min(ns, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      if (u[i] <= 0.0 && u[i + 1] <= 0.0) continue;
      for (std::size_t k = 0; k < nq; ++k) {
        const double uu = phi_[k] * u[i] + (1.0 - phi_[k]) * u[i + 1];
        if (uu > 0.0) acc += wt_[i * nq + k] * c[i * nq + k] * pow_real(uu, s1);
      }
    }
    partial[b] = acc;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) block(static_cast<std::size_t>(b));
  } else {
    for (std::size_t b = 0; b < nb; ++b) block(b);
  }
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double EnergyKernel::energy(std::span<const double> u, bool parallel) const {
  double e = 0.5 * seminorm_sq(u);
  for (std::size_t j = 0; j < powers_.size(); ++j) e -= potential_moment(u, j, parallel) / (powers_[j] + 1.0);
  return e;
}

double EnergyKernel::energy_reference(std::span<const double> u) const {
  if (u.size() != r_.size()) throw PreconditionError("nodal vector has the wrong size");
  const std::size_t nq = phi_.size();
  double e = 0.5 * seminorm_sq(u);
  for (std::size_t j = 0; j < powers_.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < stiff_.size(); ++i)
      for (std::size_t k = 0; k < nq; ++k) {
        const double uu = phi_[k] * u[i] + (1.0 - phi_[k]) * u[i + 1];
        if (uu > 0.0) acc += wt_[i * nq + k] * coeff_[j][i * nq + k] * std::pow(uu, powers_[j] + 1.0);
      }
    e -= acc / (powers_[j] + 1.0);
  }
  return e;
}

void EnergyKernel::derivative(std::span<const double> u, std::span<double> out, bool parallel) const {
  if (u.size() != r_.size() || out.size() != r_.size()) throw PreconditionError("nodal vector has the wrong size");
  const std::size_t ns = stiff_.size();
  const std::size_t nq = phi_.size();
  // left[i]: contribution of segment i to node i; right[i]: to node i+1
  std::vector<double> left(ns);
  std::vector<double> right(ns);
  const auto seg = [&](std::size_t i) {
    const double d = stiff_[i] * (u[i] - u[i + 1]);
    double l = d;
    double rr = -d;
    if (u[i] > 0.0 || u[i + 1] > 0.0) {
      for (std::size_t k = 0; k < nq; ++k) {
        const double uu = phi_[k] * u[i] + (1.0 - phi_[k]) * u[i + 1];
        if (!(uu > 0.0)) continue;
        double src = 0.0;
        for (std::size_t j = 0; j < powers_.size(); ++j) src += coeff_[j][i * nq + k] * pow_real(uu, powers_[j]);
        src *= wt_[i * nq + k];
        l -= src * phi_[k];
        rr -= src * (1.0 - phi_[k]);
      }
    }
    left[i] = l;
    right[i] = rr;
  };
  const auto node = [&](std::size_t i) {
    double v = 0.0;
    if (i > 0) v += right[i - 1];
    if (i < ns) v += left[i];
    out[i] = v;
  };
  if (parallel) {
#pragma omp parallel
    {
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ns); ++i) seg(static_cast<std::size_t>(i));
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i <= static_cast<std::ptrdiff_t>(ns); ++i) node(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < ns; ++i) seg(i);
    for (std::size_t i = 0; i <= ns; ++i) node(i);
  }
}

void EnergyKernel::derivative_reference(std::span<const double> u, std::span<double> out) const {
  if (u.size() != r_.size() || out.size() != r_.size()) throw PreconditionError("nodal vector has the wrong size");
  const std::size_t nq = phi_.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < stiff_.size(); ++i) {
    out[i] += stiff_[i] * (u[i] - u[i + 1]);
    out[i + 1] += stiff_[i] * (u[i + 1] - u[i]);
    for (std::size_t k = 0; k < nq; ++k) {
      const double uu = phi_[k] * u[i] + (1.0 - phi_[k]) * u[i + 1];
      if (!(uu > 0.0)) continue;
      for (std::size_t j = 0; j < powers_.size(); ++j) {
        const double src = wt_[i * nq + k] * coeff_[j][i * nq + k] * std::pow(uu, powers_[j]);
        out[i] -= src * phi_[k];
        out[i + 1] -= src * (1.0 - phi_[k]);
      }
    }
  }
}

void EnergyKernel::h1_gradient(std::span<const double> u, std::span<double> out, bool parallel) const {
  derivative(u, out, parallel);
  // Thomas algorithm on the free nodes 0..n-2; the boundary node is fixed at 0.
  const std::size_t m = r_.size() - 1;
  std::vector<double> c(m);
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double diag = stiff_[i] + (i > 0 ? stiff_[i - 1] : 0.0);
    const double lower = i > 0 ? -stiff_[i - 1] : 0.0;
    const double denom = diag - (i > 0 ? lower * c[i - 1] : 0.0);
    c[i] = -stiff_[i] / denom;
    d[i] = (out[i] - (i > 0 ? lower * d[i - 1] : 0.0)) / denom;
  }
  out[m] = 0.0;
  out[m - 1] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
}

double EnergyKernel::pairing(std::span<const double> u, std::span<const double> v, bool parallel) const {
  std::vector<double> g(r_.size());
  derivative(u, g, parallel);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * v[i];
  return s;
}

// ---- Talenti family ---------------------------------------------------------

double cutoff(double r, double eta, double delta_c) {
  if (r <= eta) return 1.0;
  if (r >= delta_c) return 0.0;
  const double s = (r - eta) / (delta_c - eta);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff_derivative(double r, double eta, double delta_c) {
  if (r <= eta || r >= delta_c) return 0.0;
  const double w = delta_c - eta;
  const double s = (r - eta) / w;
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
}

namespace {

void check_bubble(const BubbleParams& p) {
  if (!(p.eta > 0.0) || !(p.delta_c > p.eta) || p.delta_c > 1.0)
    throw DomainError("cutoff radii must satisfy 0 < eta < delta_c <= 1");
  if (!(p.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(p.epsilon < p.eta)) throw DomainError("epsilon too large for the cutoff radius");
}

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

// ∫ over [0, b] split at 1, 4, 16, ... and at the extra breakpoints.
template <class F>
double piecewise_integral(F&& f, double b, std::vector<double> extra, double tol) {
  std::vector<double> pts{0.0};
  for (double x = 1.0; x < b; x *= 4.0) pts.push_back(x);
  for (double e : extra)
    if (e > 0.0 && e < b) pts.push_back(e);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double err = 0.0;
    total += GK::integrate(f, pts[i], pts[i + 1], 20, tol, &err);
    err_total += err;
  }
  if (!(err_total <= std::max(1e3 * tol, 1e-10) * std::abs(total)) && total != 0.0)
    throw AccuracyError("adaptive quadrature did not converge", total);
  return total;
}

// Scaled profile V(s) = (1+s²)^{-(N-2)/2} ψ(εs) and its ∫V^{2*}s^{N-1}, ∫V'²s^{N-1}.
struct TalentiPieces {
  double grad;
  double mass;  // ∫ V^{2*} s^{N-1}
};

TalentiPieces talenti_pieces(int n, const BubbleParams& p, double tol) {
  const double eps = p.epsilon;
  const double a = 0.5 * (n - 2);
  const double pc = critical_power_of(n);
  const double b = p.delta_c / eps;
  const std::vector<double> extra{p.eta / eps};
  const auto v = [&](double s) { return std::pow(1.0 + s * s, -a) * cutoff(eps * s, p.eta, p.delta_c); };
  const auto dv = [&](double s) {
    const double base = std::pow(1.0 + s * s, -a);
    return -2.0 * a * s * base / (1.0 + s * s) * cutoff(eps * s, p.eta, p.delta_c) +
           base * eps * cutoff_derivative(eps * s, p.eta, p.delta_c);
  };
  const double grad = piecewise_integral(
      [&](double s) {
        const double d = dv(s);
        return d * d * std::pow(s, n - 1);
      },
      b, extra, tol);
  const double mass = piecewise_integral([&](double s) { return std::pow(v(s), pc) * std::pow(s, n - 1); }, b,
                                         extra, tol);
  return {grad, mass};
}

}  // namespace

DiscreteRadialFunction bubble(const BubbleParams& params, int n) { return bubble(params, n, graded_mesh()); }

DiscreteRadialFunction bubble(const BubbleParams& params, int n, std::vector<double> mesh) {
  check_dimension(n);
  check_bubble(params);
  const double eps = params.epsilon;
  const double a = 0.5 * (n - 2);
  auto u = DiscreteRadialFunction::from_function(n, std::move(mesh), [&](double r) {
    return std::pow(eps, a) * std::pow(eps * eps + r * r, -a) * cutoff(r, params.eta, params.delta_c);
  });
  const double pc = critical_power_of(n);
  const double norm = std::pow(weighted_power_integral(u, pc, 0.0), 1.0 / pc);
  return u.scaled(1.0 / norm);
}

double talenti_quotient(int n, const BubbleParams& params, double tol) {
  check_dimension(n);
  check_bubble(params);
  const auto t = talenti_pieces(n, params, tol);
  const double omega = sphere_area(n);
  return std::pow(omega, 2.0 / n) * t.grad / std::pow(t.mass, (n - 2.0) / n);
}

double talenti_weighted_integral(int n, const BubbleParams& params, double gamma, double q, double tol) {
  check_dimension(n);
  check_bubble(params);
  const auto t = talenti_pieces(n, params, tol);
  const double eps = params.epsilon;
  const double a = 0.5 * (n - 2);
  const double omega = sphere_area(n);
  const double inner = piecewise_integral(
      [&](double s) {
        return std::pow(s, gamma + n - 1) *
               std::pow(std::pow(1.0 + s * s, -a) * cutoff(eps * s, params.eta, params.delta_c), q + 1.0);
      },
      params.delta_c / eps, {params.eta / eps}, tol);
  const double pc = critical_power_of(n);
  const double scale = std::pow(eps, gamma + n - (n - 2) * (q + 1.0) / 2.0);
  return omega * scale * inner / std::pow(omega * t.mass, (q + 1.0) / pc);
}

SobolevEstimate sobolev_estimate(int n, double tol) {
  check_dimension(n);
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  constexpr int kLadder = 8;
  constexpr int kLevels = 4;
  SobolevEstimate out{};
  out.epsilons.resize(kLadder);
  out.quotients.resize(kLadder);
  for (int j = 0; j < kLadder; ++j) out.epsilons[static_cast<std::size_t>(j)] = 0.02 * std::ldexp(1.0, -j);
#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < kLadder; ++j) {
    BubbleParams p;
    p.epsilon = out.epsilons[static_cast<std::size_t>(j)];
    out.quotients[static_cast<std::size_t>(j)] = talenti_quotient(n, p, 1e-14);
  }
  // Richardson on ε-halving with error exponents N-2, N-1, N, ...
  std::vector<std::vector<double>> t(kLadder, std::vector<double>(kLevels + 1));
  for (int j = 0; j < kLadder; ++j) {
    t[static_cast<std::size_t>(j)][0] = out.quotients[static_cast<std::size_t>(j)];
    for (int m = 1; m <= std::min(j, kLevels); ++m) {
      const double f = std::ldexp(1.0, n - 2 + m - 1) - 1.0;
      auto& row = t[static_cast<std::size_t>(j)];
      const auto& prev = t[static_cast<std::size_t>(j - 1)];
      row[static_cast<std::size_t>(m)] =
          row[static_cast<std::size_t>(m - 1)] + (row[static_cast<std::size_t>(m - 1)] - prev[static_cast<std::size_t>(m - 1)]) / f;
    }
  }
  out.value = t[kLadder - 1][kLevels];
  out.error = std::abs(t[kLadder - 1][kLevels] - t[kLadder - 2][kLevels]);
  if (!(out.error <= tol * out.value)) throw AccuracyError("Sobolev extrapolation did not reach the tolerance", out.value);
  return out;
}

double sobolev_constant(int n, double tol) { return sobolev_estimate(n, tol).value; }

double compactness_threshold(int n, double s) {
  check_dimension(n);
  return std::pow(s, 0.5 * n) / n;
}

// ---- expansions -------------------------------------------------------------

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope fit needs >= 2 paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw CalibrationError("log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> default_expansion_ladder() { return {1e-3, 3.16e-4, 1e-4, 3.16e-5, 1e-5}; }

ExpansionReport expansion_check(int n, double gamma, double q, std::span<const double> ladder) {
  check_dimension(n);
  if (ladder.size() < 4) throw PreconditionError("expansion ladder needs at least 4 points");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] < ladder[i - 1])) throw PreconditionError("expansion ladder must be decreasing");
  if (!(gamma >= 0.0)) throw PreconditionError("gamma must be nonnegative");
  if (!(q >= 1.0) || !((n - 2.0) * (q + 1.0) > gamma + n))
    throw PreconditionError("q must satisfy q >= 1 and (N-2)(q+1) > gamma + N");

  ExpansionReport rep{};
  rep.n = n;
  rep.gamma = gamma;
  rep.q = q;
  rep.sobolev = sobolev_constant(n);
  rep.predicted_norm = n - 2.0;
  rep.predicted_weighted = gamma + n - (n - 2.0) * (q + 1.0) / 2.0;
  rep.rows.resize(ladder.size());
  const auto f = NonlinearityModel::pure_power(q);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ladder.size()); ++i) {
    BubbleParams p;
    p.epsilon = ladder[static_cast<std::size_t>(i)];
    auto& row = rep.rows[static_cast<std::size_t>(i)];
    row.epsilon = p.epsilon;
    row.norm_sq_minus_s = talenti_quotient(n, p, 1e-14) - rep.sobolev;
    row.weighted_integral = talenti_weighted_integral(n, p, gamma, q, 1e-14);
    row.j_eps = c30_integral(f, gamma, n, p.epsilon);
  }
  std::vector<double> e;
  std::vector<double> d;
  std::vector<double> w;
  for (const auto& row : rep.rows) {
    if (!(row.norm_sq_minus_s > 0.0))
      throw CalibrationError("non-positive norm excess: the Sobolev estimate is too low");
    e.push_back(row.epsilon);
    d.push_back(row.norm_sq_minus_s);
    w.push_back(row.weighted_integral);
  }
  rep.slope_norm = loglog_slope(e, d);
  rep.slope_weighted = loglog_slope(e, w);
  return rep;
}

void write_expansion_csv(const ExpansionReport& report, std::ostream& out) {
  out << "epsilon,norm_sq_minus_S,weighted_integral,J_eps\n";
  char buf[128];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.epsilon, r.norm_sq_minus_s, r.weighted_integral,
                  r.j_eps);
    out << buf;
  }
}

double c30_integral(const NonlinearityModel& f, double gamma, int n, double epsilon) {
  check_dimension(n);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  if (f.kind == NonlinearityModel::Kind::Zero) return 0.0;
  // F(t) = t^{q+1}/(q+1) factors out the ε powers.
  const double decay = (n - 2) * (f.q + 1.0) / 2.0;
  const double inner = piecewise_integral(
      [&](double r) { return std::pow(r, gamma + n - 1) * std::pow(1.0 + r * r, -decay); }, 1.0 / epsilon, {},
      1e-13);
  return std::pow(epsilon, gamma + 2.0 - decay) * inner / (f.q + 1.0);
}

}  // namespace radcrit
