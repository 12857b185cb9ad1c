#include "radcrit/pohozaev.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "radcrit/errors.hpp"

namespace radcrit {

TestFunctionPsi::TestFunctionPsi(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  for (double v : c_)
    if (!std::isfinite(v)) throw DomainError("test function coefficients must be finite");
}

TestFunctionPsi TestFunctionPsi::radial_family(int n, double a, double b) {
  if (n < 3) throw DomainError("dimension must be at least 3");
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  c[1] += b;
  c[static_cast<std::size_t>(n - 1)] += a;
  return TestFunctionPsi(std::move(c));
}

double TestFunctionPsi::eval(double r, int order) const {
  double s = 0.0;
  for (std::size_t k = static_cast<std::size_t>(order); k < c_.size(); ++k) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
    s += c_[k] * f * std::pow(r, static_cast<double>(k) - order);
  }
  return s;
}

namespace {

void check_profile(const RadialProfile& p) {
  if (!p.covers_unit_interval() || p.size() < 2) throw DomainError("profile must cover [0,1]");
}

// ∫_0^1 F(r, u(r)) dr with cubic Hermite reconstruction of u and 8-point Gauss
// per mesh interval.
template <class F>
double integrate_profile(const RadialProfile& p, F&& f) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.size() && p.r[i] < 1.0; ++i) {
    const double r0 = p.r[i];
    const double r1 = std::min(p.r[i + 1], 1.0);
    const double h = p.r[i + 1] - r0;
    const double half = 0.5 * (r1 - r0);
    const double mid = 0.5 * (r0 + r1);
    double seg = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (int sgn : {-1, 1}) {
        const double r = mid + sgn * half * x[k];
        const double t = (r - r0) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double u = (2 * t3 - 3 * t2 + 1) * p.u[i] + (t3 - 2 * t2 + t) * h * p.du[i] +
                         (-2 * t3 + 3 * t2) * p.u[i + 1] + (t3 - t2) * h * p.du[i + 1];
        seg += w[k] * f(r, u);
      }
    }
    total += half * seg;
  }
  return total;
}

struct Term {
  CoefficientModel coefficient;
  double offset;
  double power;
};

}  // namespace

double pov_residual(const RadialProfile& p, double beta, double lambda, double q) {
  check_profile(p);
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  const auto& spec = p.spec;
  const int n = spec.dimension;
  const double omega = sphere_area(n);
  const double half_n2 = 0.5 * (n - 2);
  const double pm = spec.main_exponent;
  const double lhs = omega * integrate_profile(p, [&](double r, double u) {
    if (!(u > 0.0)) return 0.0;
    const double rn1 = std::pow(r, n - 1);
    const double c = spec.main_factor(r);
    const double dc = spec.main_coefficient.derivative(r);
    double v = (r * dc / (pm + 1.0) + (n / (pm + 1.0) - half_n2) * c) * std::pow(u, pm + 1.0);
    if (lambda != 0.0) {
      const double g = lambda * std::pow(r, beta);
      // x·∇g = λβ r^β
      v += (beta * g / (q + 1.0) + (n / (q + 1.0) - half_n2) * g) * std::pow(u, q + 1.0);
    }
    return v * rn1;
  });
  const double slope = p.du.back();
  const double rhs = 0.5 * omega * slope * slope;
  const double floor = 1e-300;
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + floor);
}

IdentityTerms general_identity_terms(const RadialProfile& p, const TestFunctionPsi& psi,
                                     const CoefficientModel& g_model, double q) {
  check_profile(p);
  if (!psi.vanishes_at_origin()) throw PreconditionError("test function must vanish at the origin");
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  const auto& spec = p.spec;
  const int n = spec.dimension;
  const double nm1 = n - 1;
  const double nm3 = n - 3;

  IdentityTerms out{};
  const double slope = p.du.back();
  out.boundary = psi.value(1.0) * slope * slope;
  out.quadratic = 0.5 * integrate_profile(p, [&](double r, double u) {
    const double k = std::pow(r, n - 4) * (r * r * r * psi.derivative(r, 3) - nm1 * nm3 * r * psi.derivative(r, 1) +
                                           nm1 * nm3 * psi.value(r));
    return k * u * u;
  });

  const auto power_term = [&](auto&& coef, auto&& dcoef, double s) {
    return integrate_profile(p, [&](double r, double u) {
             if (!(u > 0.0)) return 0.0;
             const double c = coef(r);
             const double dc = dcoef(r);
             const double rn1 = std::pow(r, n - 1);
             const double rn2 = std::pow(r, n - 2);
             const double bracket = (s + 3.0) * c * rn1 * psi.derivative(r, 1) - (s - 1.0) * nm1 * c * rn2 * psi.value(r) +
                                    2.0 * dc * rn1 * psi.value(r);
             return std::pow(u, s + 1.0) * bracket;
           }) /
           (s + 1.0);
  };
  out.power_terms.push_back(power_term([&](double r) { return spec.main_factor(r); },
                                       [&](double r) { return spec.main_coefficient.derivative(r); },
                                       spec.main_exponent));
  if (!g_model.is_zero())
    out.power_terms.push_back(power_term([&](double r) { return g_model.value(r); },
                                         [&](double r) { return g_model.derivative(r); }, q));

  double rhs = out.quadratic;
  double scale = std::abs(out.boundary) + std::abs(out.quadratic);
  for (double t : out.power_terms) {
    rhs += t;
    scale += std::abs(t);
  }
  out.residual = std::abs(out.boundary - rhs) / (scale + 1e-300);
  return out;
}

double general_identity_residual(const RadialProfile& p, const TestFunctionPsi& psi, const CoefficientModel& g_model,
                                 double q) {
  return general_identity_terms(p, psi, g_model, q).residual;
}

double h_bracket(int n, double beta, double lambda, double a, double b, double r) {
  if (n < 3) throw DomainError("dimension must be at least 3");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("r must lie in [0,1]");
  const double e2 = beta - n + 2.0;
  double t2 = 0.0;
  if (lambda * b * beta != 0.0) {
    if (r == 0.0 && e2 < 0.0) return -std::copysign(INFINITY, lambda * b * beta);
    t2 = -lambda * b * beta * (n - 2) * (e2 == 0.0 ? 1.0 : std::pow(r, e2));
  }
  const double rb = beta == 0.0 ? 1.0 : std::pow(r, beta);
  return -lambda * a * (n - 2) * (2.0 * (n - 1) + beta) * rb + t2 - 2.0 * a * (n - 1) * (n - 2);
}

double h_function(int n, double beta, double lambda, double a, double b, double r) {
  if (n < 3) throw DomainError("dimension must be at least 3");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("r must lie in [0,1]");
  // combined powers keep r = 0 finite: 2N-3+β, N-1+β, 2N-3
  const auto pw = [r](double e) { return e == 0.0 ? 1.0 : std::pow(r, e); };
  return -lambda * a * (n - 2) * (2.0 * (n - 1) + beta) * pw(2.0 * n - 3 + beta) -
         lambda * b * beta * (n - 2) * pw(n - 1.0 + beta) - 2.0 * a * (n - 1) * (n - 2) * pw(2.0 * n - 3);
}

HMinimum min_h(int n, double beta, double lambda) {
  if (n < 3) throw DomainError("dimension must be at least 3");
  if (!(beta >= n - 2.0)) throw DomainError("min_h requires beta >= N-2");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  constexpr double a = -1.0;
  constexpr double b = 1.0;
  std::vector<double> cand{0.0, 1.0};
  if (beta > n - 2.0) cand.push_back(std::pow((beta - n + 2.0) / (2.0 * n - 2.0 + beta), 1.0 / (n - 2.0)));
  HMinimum best{0.0, INFINITY, 0.0};
  for (double r : cand) {
    const double v = h_bracket(n, beta, lambda, a, b, r);
    if (v < best.h_min) best = {r, v, h_function(n, beta, lambda, a, b, r)};
  }
  return best;
}

std::string_view to_string(Certificate::Kind kind) {
  switch (kind) {
    case Certificate::Kind::PohozaevSign: return "PohozaevSign";
    case Certificate::Kind::RadialTestFunction: return "RadialTestFunction";
    case Certificate::Kind::None: break;
  }
  return "None";
}

Certificate::Kind certificate_kind_from_string(std::string_view s) {
  if (s == "PohozaevSign") return Certificate::Kind::PohozaevSign;
  if (s == "RadialTestFunction") return Certificate::Kind::RadialTestFunction;
  if (s == "None") return Certificate::Kind::None;
  throw FormatError("unknown certificate kind: " + std::string(s));
}

Certificate certify_nonexistence(int n, double beta, double lambda, double q) {
  if (n < 3) throw DomainError("dimension must be at least 3");
  if (!std::isfinite(beta) || !std::isfinite(lambda) || !std::isfinite(q))
    throw DomainError("certificate parameters must be finite");
  Certificate c;
  c.n = n;
  c.beta = beta;
  c.lambda = lambda;
  c.q = q;
  c.critical_q = (2.0 * beta + n + 2.0) / (n - 2.0);
  c.sign_value = ((beta + n) / (q + 1.0) - 0.5 * (n - 2)) * lambda;
  const double q_main = (n + 2.0) / (n - 2.0);

  if (beta >= 0.0 && q >= 1.0) {
    std::string which;
    if (beta == 0.0 && q == q_main) which = "iii";
    else if (q <= c.critical_q && lambda <= 0.0) which = "i";
    else if (q >= c.critical_q && lambda >= 0.0) which = "ii";
    if (!which.empty()) {
      c.kind = Certificate::Kind::PohozaevSign;
      c.pohozaev_case = which;
      c.verdict = "no positive solution: the Pohozaev volume term has the wrong sign (case " + which + ")";
      return c;
    }
  }

  if (beta >= n - 2.0 && lambda >= 0.0 && q == q_main) {
    const double ls = lambda_star(n, beta);
    if (lambda <= ls) {
      const auto m = min_h(n, beta, lambda);
      const double slack = 1e-12 * 2.0 * (n - 1) * (n - 2);
      if (m.h_min >= -slack) {
        c.kind = Certificate::Kind::RadialTestFunction;
        c.a = -1.0;
        c.b = 1.0;
        c.lambda_star = ls;
        c.r_min = m.r_min;
        c.h_min = m.h_min;
        c.verdict = "no radial solution: h >= 0 on [0,1] for psi = -r^{N-1} + r";
        return c;
      }
    }
    c.lambda_star = ls;
  }
  c.verdict = "no certificate applies";
  return c;
}

nlohmann::json to_json(const Certificate& c) {
  nlohmann::json j{{"kind", to_string(c.kind)},      {"N", c.n},
                   {"beta", c.beta},                 {"lambda", c.lambda},
                   {"q", c.q},                       {"critical_q", c.critical_q},
                   {"sign_value", c.sign_value},     {"pohozaev_case", c.pohozaev_case},
                   {"verdict", c.verdict}};
  const auto opt = [&](const char* k, const std::optional<double>& v) {
    j[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  opt("a", c.a);
  opt("b", c.b);
  opt("lambda_star", c.lambda_star);
  opt("r_min", c.r_min);
  opt("h_min", c.h_min);
  return j;
}

Certificate certificate_from_json(const nlohmann::json& j) {
  try {
    Certificate c;
    c.kind = certificate_kind_from_string(j.at("kind").get<std::string>());
    c.n = j.at("N").get<int>();
    c.beta = j.at("beta").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.q = j.at("q").get<double>();
    c.critical_q = j.at("critical_q").get<double>();
    c.sign_value = j.at("sign_value").get<double>();
    c.pohozaev_case = j.value("pohozaev_case", "");
    c.verdict = j.value("verdict", "");
    const auto opt = [&](const char* k) -> std::optional<double> {
      if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
      return j.at(k).get<double>();
    };
    c.a = opt("a");
    c.b = opt("b");
    c.lambda_star = opt("lambda_star");
    c.r_min = opt("r_min");
    c.h_min = opt("h_min");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace radcrit
