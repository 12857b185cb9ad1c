#pragma once

// Equation family -Δu = c(|x|) u₊^p + λ k(|x|) f(u) on the unit ball, its
// radial coefficient models, assumption checks and closed-form thresholds.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace radcrit {

// One term a·r^e of a near-origin expansion.
struct PowerTerm {
  double amplitude;
  double exponent;
};

// Integer powers are common (5, 3, 6, ...); multiply instead of calling pow.
template <class Real>
Real pow_real(Real base, double exponent) {
  const double rounded = std::nearbyint(exponent);
  if (rounded == exponent && rounded >= 0.0 && rounded <= 64.0) {
    auto n = static_cast<unsigned>(rounded);
    Real result = 1;
    Real b = base;
    while (n != 0U) {
      if ((n & 1U) != 0U) result *= b;
      b *= b;
      n >>= 1U;
    }
    return result;
  }
  return std::pow(base, static_cast<Real>(exponent));
}

class CoefficientModel {
 public:
  struct Zero {};
  struct Constant {
    double amplitude = 0.0;
  };
  // amplitude · r^exponent
  struct PowerLaw {
    double amplitude = 0.0;
    double exponent = 0.0;
  };
  // Piecewise-linear through (radii[i], values[i]); constant outside.
  struct Tabulated {
    std::vector<double> radii;
    std::vector<double> values;
  };
  using Variant = std::variant<Zero, Constant, PowerLaw, Tabulated>;

  CoefficientModel() = default;
  explicit CoefficientModel(Variant v) : model_(std::move(v)) {}

  static CoefficientModel zero() { return CoefficientModel{Zero{}}; }
  static CoefficientModel constant(double a) { return CoefficientModel{Constant{a}}; }
  static CoefficientModel power_law(double a, double beta);
  // Throws FormatError unless radii are strictly increasing inside [0,1].
  static CoefficientModel tabulated(std::vector<double> radii, std::vector<double> values);

  const Variant& variant() const noexcept { return model_; }
  bool is_zero() const noexcept;
  std::string_view kind() const noexcept;

  template <class Real>
  Real value(Real r) const;
  template <class Real>
  Real derivative(Real r) const;

  double operator()(double r) const { return value<double>(r); }

  // Exact expansion a_j r^{e_j} valid on [0, leading_terms_radius()].
  std::vector<PowerTerm> leading_terms() const;
  double leading_terms_radius() const;

  // Interior radii where the model is not smooth (Tabulated knots).
  std::vector<double> breakpoints() const;

 private:
  Variant model_{Zero{}};
};

struct NonlinearityModel {
  enum class Kind { Zero, PurePower };

  Kind kind = Kind::Zero;
  double q = 1.0;      // exponent for PurePower: f(t) = t₊^q
  double theta = 0.0;  // declared Ambrosetti–Rabinowitz constant (0 = undeclared)
  std::optional<double> positivity_constant;  // declared c with f > 0 on (0,c)

  static NonlinearityModel zero() { return {}; }
  static NonlinearityModel pure_power(double q);

  template <class Real>
  Real f(Real t) const {
    if (kind == Kind::Zero || !(t > Real(0))) return Real(0);
    return pow_real(t, q);
  }
  // F(t) = ∫₀ᵗ f
  template <class Real>
  Real primitive(Real t) const {
    if (kind == Kind::Zero || !(t > Real(0))) return Real(0);
    return pow_real(t, q + 1.0) / static_cast<Real>(q + 1.0);
  }
};

// -Δu = (main_offset + main_coefficient(r)) u₊^{main_exponent} + λ k(r) f(u)
struct ProblemSpec {
  int dimension = 3;
  double main_exponent = 5.0;
  double main_offset = 1.0;
  CoefficientModel main_coefficient;
  double lambda = 0.0;
  CoefficientModel k;
  NonlinearityModel f;

  // (N+2)/(N-2) with g ≡ 0, λ = 0.
  static ProblemSpec pure_critical(int n);
  // The paper's problem (p) with g = λ r^β: main factor 1, k = r^β, f = u₊^{2*-1}.
  static ProblemSpec variable_coefficient(int n, double beta, double lambda);

  double critical_power() const;  // 2* = 2N/(N-2)

  template <class Real>
  Real main_factor(Real r) const {
    return static_cast<Real>(main_offset) + main_coefficient.value(r);
  }
  template <class Real>
  Real rhs(Real r, Real u) const {
    Real out = 0;
    if (u > Real(0)) out = main_factor(r) * pow_real(u, main_exponent);
    if (lambda != 0.0 && f.kind != NonlinearityModel::Kind::Zero) {
      const Real kr = k.value(r);
      if (kr != Real(0)) out += static_cast<Real>(lambda) * kr * f.f(u);
    }
    return out;
  }

  // Near-origin expansion of r ↦ rhs(r, d).
  std::vector<PowerTerm> rhs_leading_terms(double d) const;
  double rhs_leading_terms_radius() const;
  std::vector<double> breakpoints() const;

  // Throws DomainError on the invariants (N ≥ 3, p > 1, finite λ, finite
  // nonnegative main factor on [0,1]).
  void validate() const;
};

// eval_rhs with domain checks; negative u contributes nothing.
double eval_rhs(const ProblemSpec& spec, double r, double u);

struct AssumptionFlag {
  std::string name;  // "k1" ... "g3"
  bool holds = false;
  double sample_radius = 0.0;  // witness or counterexample location
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionFlag> flags;
  std::optional<double> beta;   // exponent witnessing (k2)
  std::optional<double> gamma;  // exponent witnessing (k3)

  const AssumptionFlag& at(std::string_view name) const;
  bool holds(std::string_view name) const { return at(name).holds; }
};

AssumptionReport validate_assumptions(const ProblemSpec& spec);

double critical_exponent(int n, double beta);
double lambda_star(int n, double beta);
double f4_threshold(int n, double gamma);

// Surface area of the unit sphere S^{N-1}.
double sphere_area(int n);

// Configuration file (JSON) round trip.
nlohmann::json to_json(const CoefficientModel& c);
CoefficientModel coefficient_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const nlohmann::json& j);
ProblemSpec load_problem(const std::string& path);

// ---------------------------------------------------------------------------

template <class Real>
Real CoefficientModel::value(Real r) const {
  return std::visit(
      [r](const auto& m) -> Real {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return Real(0);
        } else if constexpr (std::is_same_v<T, Constant>) {
          return static_cast<Real>(m.amplitude);
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          if (m.exponent == 0.0) return static_cast<Real>(m.amplitude);
          if (r <= Real(0)) return Real(0);
          return static_cast<Real>(m.amplitude) * pow_real(r, m.exponent);
        } else {
          const auto& x = m.radii;
          const auto& y = m.values;
          if (x.empty()) return Real(0);
          if (r <= static_cast<Real>(x.front())) return static_cast<Real>(y.front());
          if (r >= static_cast<Real>(x.back())) return static_cast<Real>(y.back());
          std::size_t lo = 0;
          std::size_t hi = x.size() - 1;
          while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (static_cast<Real>(x[mid]) <= r) lo = mid;
            else hi = mid;
          }
          const Real s = (r - static_cast<Real>(x[lo])) /
                         static_cast<Real>(x[hi] - x[lo]);
          return static_cast<Real>(y[lo]) + s * static_cast<Real>(y[hi] - y[lo]);
        }
      },
      model_);
}

template <class Real>
Real CoefficientModel::derivative(Real r) const {
  return std::visit(
      [r](const auto& m) -> Real {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Zero> || std::is_same_v<T, Constant>) {
          return Real(0);
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          if (m.exponent == 0.0 || r <= Real(0)) return Real(0);
          return static_cast<Real>(m.amplitude * m.exponent) *
                 pow_real(r, m.exponent - 1.0);
        } else {
          const auto& x = m.radii;
          const auto& y = m.values;
          if (x.size() < 2) return Real(0);
          if (r < static_cast<Real>(x.front()) || r > static_cast<Real>(x.back()))
            return Real(0);
          std::size_t lo = 0;
          std::size_t hi = x.size() - 1;
          while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (static_cast<Real>(x[mid]) <= r) lo = mid;
            else hi = mid;
          }
          return static_cast<Real>((y[hi] - y[lo]) / (x[hi] - x[lo]));
        }
      },
      model_);
}

}  // namespace radcrit
