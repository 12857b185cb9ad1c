#include "radcrit/problem_model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "radcrit/errors.hpp"

namespace radcrit {

namespace {

constexpr int kSampleCount = 1025;  // deterministic grid for sampled checks

double sample_radius(int i) { return static_cast<double>(i) / (kSampleCount - 1); }

void check_tabulated(const CoefficientModel::Tabulated& t) {
  if (t.radii.size() != t.values.size() || t.radii.empty())
    throw FormatError("tabulated coefficient: radii and values must be non-empty and of equal length");
  for (std::size_t i = 0; i < t.radii.size(); ++i) {
    if (!std::isfinite(t.radii[i]) || !std::isfinite(t.values[i]))
      throw FormatError("tabulated coefficient: non-finite entry");
    if (t.radii[i] < 0.0 || t.radii[i] > 1.0)
      throw FormatError("tabulated coefficient: radius outside [0,1]");
    if (i > 0 && !(t.radii[i] > t.radii[i - 1]))
      throw FormatError("tabulated coefficient: radii must be strictly increasing");
  }
}

}  // namespace

CoefficientModel CoefficientModel::power_law(double a, double beta) {
  if (!(beta >= 0.0)) throw DomainError("power law exponent must be nonnegative");
  return CoefficientModel{PowerLaw{a, beta}};
}

CoefficientModel CoefficientModel::tabulated(std::vector<double> radii,
                                             std::vector<double> values) {
  Tabulated t{std::move(radii), std::move(values)};
  check_tabulated(t);
  return CoefficientModel{std::move(t)};
}

bool CoefficientModel::is_zero() const noexcept {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Zero>) return true;
        else if constexpr (std::is_same_v<T, Tabulated>)
          return std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; });
        else return m.amplitude == 0.0;
      },
      model_);
}

std::string_view CoefficientModel::kind() const noexcept {
  switch (model_.index()) {
    case 0: return "zero";
    case 1: return "constant";
    case 2: return "power_law";
    default: return "tabulated";
  }
}

std::vector<PowerTerm> CoefficientModel::leading_terms() const {
  return std::visit(
      [](const auto& m) -> std::vector<PowerTerm> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return {};
        } else if constexpr (std::is_same_v<T, Constant>) {
          return {{m.amplitude, 0.0}};
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return {{m.amplitude, m.exponent}};
        } else {
          if (m.radii.size() < 2 || m.radii.front() > 0.0) return {{m.values.front(), 0.0}};
          const double slope = (m.values[1] - m.values[0]) / (m.radii[1] - m.radii[0]);
          return {{m.values[0], 0.0}, {slope, 1.0}};
        }
      },
      model_);
}

double CoefficientModel::leading_terms_radius() const {
  if (const auto* t = std::get_if<Tabulated>(&model_)) {
    if (t->radii.size() < 2) return 1.0;
    return t->radii.front() > 0.0 ? t->radii.front() : t->radii[1];
  }
  return 1.0;
}

std::vector<double> CoefficientModel::breakpoints() const {
  std::vector<double> out;
  if (const auto* t = std::get_if<Tabulated>(&model_)) {
    for (double r : t->radii)
      if (r > 0.0 && r < 1.0) out.push_back(r);
  }
  return out;
}

NonlinearityModel NonlinearityModel::pure_power(double q) {
  if (!(q >= 1.0)) throw DomainError("pure power nonlinearity needs q >= 1");
  NonlinearityModel m;
  m.kind = Kind::PurePower;
  m.q = q;
  m.theta = q + 1.0;
  return m;
}

ProblemSpec ProblemSpec::pure_critical(int n) {
  ProblemSpec s;
  s.dimension = n;
  s.main_exponent = critical_exponent(n, 0.0);
  return s;
}

ProblemSpec ProblemSpec::variable_coefficient(int n, double beta, double lambda) {
  ProblemSpec s = pure_critical(n);
  s.lambda = lambda;
  s.k = CoefficientModel::power_law(1.0, beta);
  s.f = NonlinearityModel::pure_power(s.main_exponent);
  return s;
}

double ProblemSpec::critical_power() const {
  return 2.0 * dimension / (dimension - 2.0);
}

std::vector<PowerTerm> ProblemSpec::rhs_leading_terms(double d) const {
  std::vector<PowerTerm> terms;
  if (d <= 0.0) return terms;
  const double up = pow_real(d, main_exponent);
  if (main_offset != 0.0) terms.push_back({main_offset * up, 0.0});
  for (const auto& t : main_coefficient.leading_terms())
    if (t.amplitude != 0.0) terms.push_back({t.amplitude * up, t.exponent});
  if (lambda != 0.0 && f.kind != NonlinearityModel::Kind::Zero) {
    const double fd = f.f(d);
    for (const auto& t : k.leading_terms())
      if (t.amplitude != 0.0) terms.push_back({lambda * t.amplitude * fd, t.exponent});
  }
  return terms;
}

double ProblemSpec::rhs_leading_terms_radius() const {
  double r = main_coefficient.leading_terms_radius();
  if (lambda != 0.0) r = std::min(r, k.leading_terms_radius());
  return r;
}

std::vector<double> ProblemSpec::breakpoints() const {
  auto out = main_coefficient.breakpoints();
  if (lambda != 0.0) {
    const auto kb = k.breakpoints();
    out.insert(out.end(), kb.begin(), kb.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ProblemSpec::validate() const {
  if (dimension < 3) throw DomainError("dimension must be >= 3");
  if (!(main_exponent > 1.0) || !std::isfinite(main_exponent))
    throw DomainError("main exponent must be > 1");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  if (!std::isfinite(main_offset)) throw DomainError("main offset must be finite");
  if (const auto* t = std::get_if<CoefficientModel::Tabulated>(&main_coefficient.variant()))
    check_tabulated(*t);
  if (const auto* t = std::get_if<CoefficientModel::Tabulated>(&k.variant()))
    check_tabulated(*t);
  for (int i = 0; i < kSampleCount; ++i) {
    const double r = sample_radius(i);
    const double c = main_factor(r);
    if (!std::isfinite(c) || c < 0.0) {
      std::ostringstream msg;
      msg << "main coefficient must be finite and nonnegative on [0,1]; value " << c
          << " at r=" << r;
      throw DomainError(msg.str());
    }
  }
}

double eval_rhs(const ProblemSpec& spec, double r, double u) {
  if (!std::isfinite(u)) throw DomainError("eval_rhs: u must be finite");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("eval_rhs: r must lie in [0,1]");
  return spec.rhs(r, u);
}

const AssumptionFlag& AssumptionReport::at(std::string_view name) const {
  for (const auto& f : flags)
    if (f.name == name) return f;
  throw DomainError("unknown assumption " + std::string(name));
}

namespace {

struct SampledRange {
  double min_value = std::numeric_limits<double>::infinity();
  double min_at = 0.0;
  double max_value = -std::numeric_limits<double>::infinity();
  double max_at = 0.0;
  bool finite = true;
};

SampledRange sample(const CoefficientModel& c) {
  SampledRange s;
  for (int i = 0; i < kSampleCount; ++i) {
    const double r = sample_radius(i);
    const double v = c(r);
    if (!std::isfinite(v)) s.finite = false;
    if (v < s.min_value) { s.min_value = v; s.min_at = r; }
    if (v > s.max_value) { s.max_value = v; s.max_at = r; }
  }
  return s;
}

// Largest β with c(r) = O(r^β) at the origin, when decidable in closed form.
std::optional<double> vanishing_order(const CoefficientModel& c) {
  return std::visit(
      [](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CoefficientModel::Zero>) {
          return std::numeric_limits<double>::infinity();
        } else if constexpr (std::is_same_v<T, CoefficientModel::Constant>) {
          if (m.amplitude == 0.0) return std::numeric_limits<double>::infinity();
          return 0.0;
        } else if constexpr (std::is_same_v<T, CoefficientModel::PowerLaw>) {
          if (m.amplitude == 0.0) return std::numeric_limits<double>::infinity();
          return m.exponent;
        } else {
          if (m.radii.size() < 2 || m.radii.front() > 0.0) return m.values.front() == 0.0 ? std::nullopt : std::optional<double>(0.0);
          if (m.values.front() != 0.0) return 0.0;
          return 1.0;  // piecewise linear through (0,0)
        }
      },
      c.variant());
}

// Exponent γ > 0 with c(r) ≥ C r^γ near 0, C > 0; empty if none is decidable.
std::optional<double> lower_power_bound(const CoefficientModel& c) {
  return std::visit(
      [](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CoefficientModel::Zero>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, CoefficientModel::Constant>) {
          if (m.amplitude > 0.0) return 0.0;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, CoefficientModel::PowerLaw>) {
          if (m.amplitude > 0.0) return m.exponent;
          return std::nullopt;
        } else {
          if (m.radii.size() < 2 || m.radii.front() > 0.0)
            return m.values.front() > 0.0 ? std::optional<double>(0.0) : std::nullopt;
          if (m.values.front() > 0.0) return 0.0;
          if (m.values.front() == 0.0 && m.values[1] > 0.0) return 1.0;
          return std::nullopt;
        }
      },
      c.variant());
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

AssumptionReport validate_assumptions(const ProblemSpec& spec) {
  if (const auto* t = std::get_if<CoefficientModel::Tabulated>(&spec.k.variant()))
    check_tabulated(*t);
  if (const auto* t = std::get_if<CoefficientModel::Tabulated>(&spec.main_coefficient.variant()))
    check_tabulated(*t);
  if (spec.dimension < 3) throw DomainError("dimension must be >= 3");

  const int n = spec.dimension;
  AssumptionReport rep;
  auto add = [&rep](std::string name, bool holds, double r, std::string note) {
    rep.flags.push_back({std::move(name), holds, r, std::move(note)});
  };

  // ---- k ----
  const SampledRange ks = sample(spec.k);
  const bool k_nonneg = ks.finite && ks.min_value >= 0.0;
  const bool k_nonzero = ks.max_value > 0.0;
  add("k1", k_nonneg && k_nonzero, k_nonneg ? ks.max_at : ks.min_at,
      !ks.finite ? "non-finite sample" : !k_nonneg ? "negative value " + fmt(ks.min_value)
      : !k_nonzero ? "k vanishes identically" : "nonnegative, not identically zero");

  const auto order = vanishing_order(spec.k);
  const bool k2 = order && *order > 0.0;
  if (k2) rep.beta = std::isinf(*order) ? 1.0 : *order;
  add("k2", k2, 0.0, k2 ? "k = O(r^" + fmt(*rep.beta) + ")" : "k(0) != 0 or order undecidable");

  const auto lower = lower_power_bound(spec.k);
  bool k3 = false;
  std::string k3_note = "no lower power bound near the origin";
  if (lower && k2) {
    // γ ≥ β > 0 with k ≥ C r^γ near the origin
    k3 = *lower >= *rep.beta && *lower > 0.0;
    if (k3) {
      rep.gamma = *lower;
      k3_note = "k >= C r^" + fmt(*lower);
    }
  } else if (lower && *lower == 0.0) {
    k3 = true;
    rep.gamma = rep.beta.value_or(1.0);
    k3_note = "k bounded below by a positive constant";
  }
  add("k3", k3, 0.0, k3_note);
  add("k4", k_nonzero, ks.max_at,
      k_nonzero ? "k(" + fmt(ks.max_at) + ") = " + fmt(ks.max_value) + " > 0" : "k <= 0 on every sample");

  // ---- f ----
  const auto& f = spec.f;
  const bool is_power = f.kind == NonlinearityModel::Kind::PurePower;
  add("f1", true, 0.0, is_power ? "f = t_+^q" : "f = 0");

  const double beta_for_f2 = rep.beta.value_or(0.0);
  const double qcrit = critical_exponent(n, std::isfinite(beta_for_f2) ? beta_for_f2 : 0.0);
  bool f2 = true;
  std::string f2_note = "f = 0";
  if (is_power) {
    f2 = f.q > 1.0 && f.q < qcrit;
    f2_note = f.q <= 1.0 ? "f(t)/t does not vanish at 0 (q <= 1)"
              : f.q >= qcrit ? "q >= (N+2+2β)/(N-2) = " + fmt(qcrit)
              : "1 < q < " + fmt(qcrit);
  }
  add("f2", f2, 0.0, f2_note);

  bool f3 = false;
  std::string f3_note;
  if (!(f.theta > 2.0)) {
    f3_note = "declared theta must exceed 2";
  } else if (is_power) {
    f3 = f.theta <= f.q + 1.0;
    f3_note = f3 ? "f(t)t = (q+1)F(t) >= theta F(t)" : "theta exceeds q+1";
  } else {
    f3 = true;
    f3_note = "f = 0";
  }
  add("f3", f3, 1.0, f3_note);

  bool f4 = false;
  std::string f4_note = "needs (k3) exponent";
  if (rep.gamma) {
    const double p = f4_threshold(n, *rep.gamma);
    f4 = is_power && f.q > p;
    f4_note = "threshold p = " + fmt(p);
  }
  add("f4", f4, 0.0, f4_note);
  add("f5", is_power, 0.0, is_power ? "f > 0 on (0, inf)" : "f = 0");

  // ---- g (the main coefficient read as 1 + g) ----
  const SampledRange gs = sample(spec.main_coefficient);
  const bool g_is_perturbation = spec.main_offset == 1.0;
  const bool g1 = g_is_perturbation && gs.finite && gs.min_value >= -1.0;
  add("g1", g1, gs.min_at,
      !g_is_perturbation ? "main factor is not of the form 1+g"
      : g1 ? "g >= -1" : "g(" + fmt(gs.min_at) + ") = " + fmt(gs.min_value) + " < -1");

  const double g0 = spec.main_coefficient(0.0);
  add("g2", g_is_perturbation && g0 == 0.0, 0.0, "g(0) = " + fmt(g0));

  const auto g_lower = lower_power_bound(spec.main_coefficient);
  const auto g_order = vanishing_order(spec.main_coefficient);
  bool g3 = false;
  std::string g3_note = "no bound g >= C r^gamma with 0 < gamma < N-2";
  if (g_is_perturbation && g_lower && g_order && *g_lower > 0.0 && *g_lower < n - 2.0) {
    g3 = true;
    g3_note = "g >= C r^" + fmt(*g_lower);
  }
  add("g3", g3, 0.0, g3_note);
  return rep;
}

double critical_exponent(int n, double beta) {
  if (n < 3) throw DomainError("critical_exponent: N must be >= 3");
  if (!(beta >= 0.0)) throw DomainError("critical_exponent: beta must be >= 0");
  return (n + 2.0 + 2.0 * beta) / (n - 2.0);
}

double lambda_star(int n, double beta) {
  if (n < 3) throw DomainError("lambda_star: N must be >= 3");
  const double nm2 = n - 2.0;
  if (!(beta >= nm2)) throw DomainError("lambda_star: requires beta >= N-2");
  const double base = 2.0 * (n - 1.0) / nm2;
  if (beta == nm2) return base;
  const double excess = beta - nm2;
  return base * std::pow((2.0 * n - 2.0 + beta) / excess, excess / nm2);
}

double f4_threshold(int n, double gamma) {
  if (n < 3) throw DomainError("f4_threshold: N must be >= 3");
  return std::max(1.0, (2.0 * gamma + 6.0 - n) / (n - 2.0));
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// ---------------------------------------------------------------------------
// configuration I/O

nlohmann::json to_json(const CoefficientModel& c) {
  return std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CoefficientModel::Zero>)
          return {{"kind", "zero"}};
        else if constexpr (std::is_same_v<T, CoefficientModel::Constant>)
          return {{"kind", "constant"}, {"amplitude", m.amplitude}};
        else if constexpr (std::is_same_v<T, CoefficientModel::PowerLaw>)
          return {{"kind", "power_law"}, {"amplitude", m.amplitude}, {"exponent", m.exponent}};
        else
          return {{"kind", "tabulated"}, {"radii", m.radii}, {"values", m.values}};
      },
      c.variant());
}

CoefficientModel coefficient_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") return CoefficientModel::zero();
    if (kind == "constant") return CoefficientModel::constant(j.at("amplitude").get<double>());
    if (kind == "power_law")
      return CoefficientModel::power_law(j.value("amplitude", 1.0), j.at("exponent").get<double>());
    if (kind == "tabulated")
      return CoefficientModel::tabulated(j.at("radii").get<std::vector<double>>(),
                                         j.at("values").get<std::vector<double>>());
    throw FormatError("unknown coefficient kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("coefficient: ") + e.what());
  }
}

nlohmann::json to_json(const ProblemSpec& spec) {
  nlohmann::json f;
  if (spec.f.kind == NonlinearityModel::Kind::PurePower)
    f = {{"kind", "pure_power"}, {"q", spec.f.q}, {"theta", spec.f.theta}};
  else
    f = {{"kind", "zero"}, {"theta", spec.f.theta}};
  nlohmann::json main = to_json(spec.main_coefficient);
  main["offset"] = spec.main_offset;
  return {{"dimension", spec.dimension},
          {"main_exponent", spec.main_exponent},
          {"main_coefficient", main},
          {"lambda", spec.lambda},
          {"k", to_json(spec.k)},
          {"f", f}};
}

ProblemSpec problem_from_json(const nlohmann::json& j) {
  try {
    ProblemSpec s;
    s.dimension = j.at("dimension").get<int>();
    if (s.dimension < 3) throw DomainError("dimension must be >= 3");
    s.main_exponent = j.contains("main_exponent") ? j["main_exponent"].get<double>()
                                                  : critical_exponent(s.dimension, 0.0);
    if (j.contains("main_coefficient")) {
      const auto& m = j["main_coefficient"];
      s.main_coefficient = coefficient_from_json(m);
      s.main_offset = m.value("offset", 1.0);
    }
    s.lambda = j.value("lambda", 0.0);
    if (j.contains("k")) s.k = coefficient_from_json(j["k"]);
    if (j.contains("f")) {
      const auto& f = j["f"];
      const std::string kind = f.value("kind", "zero");
      if (kind == "pure_power") {
        s.f = NonlinearityModel::pure_power(f.at("q").get<double>());
        s.f.theta = f.value("theta", s.f.q + 1.0);
      } else if (kind == "zero") {
        s.f = NonlinearityModel::zero();
        s.f.theta = f.value("theta", 0.0);
      } else {
        throw FormatError("unknown nonlinearity kind '" + kind + "'");
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("problem spec: ") + e.what());
  }
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return problem_from_json(j);
}

}  // namespace radcrit
