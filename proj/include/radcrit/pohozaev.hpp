#pragma once

// Pohozaev-type identities evaluated on computed radial profiles, the
// h(r) bracket of the test-function argument, and nonexistence certificates.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radcrit/radial_ode.hpp"

namespace radcrit {

// ψ(r) = Σ_k c_k r^k.
class TestFunctionPsi {
 public:
  TestFunctionPsi() = default;
  explicit TestFunctionPsi(std::vector<double> coefficients);

  // ψ = a r^{N-1} + b r
  static TestFunctionPsi radial_family(int n, double a, double b);
  static TestFunctionPsi identity() { return TestFunctionPsi({0.0, 1.0}); }

  const std::vector<double>& coefficients() const noexcept { return c_; }
  double value(double r) const { return eval(r, 0); }
  double derivative(double r, int order) const { return eval(r, order); }
  bool vanishes_at_origin() const { return c_.empty() || c_[0] == 0.0; }

 private:
  double eval(double r, int order) const;
  std::vector<double> c_;
};

// Radial form of the classical identity with g = λ r^β and exponent q; the
// main term of profile.spec contributes with its own exponent.
// Returns |LHS - RHS| / (|LHS| + |RHS| + floor).
double pov_residual(const RadialProfile& profile, double beta, double lambda, double q);

struct IdentityTerms {
  double boundary;    // ψ(1) u'(1)²
  double quadratic;   // ½ ∫ K u²
  std::vector<double> power_terms;
  double residual;    // normalised mismatch
};
// Identity with multiplier r^{N-1}ψu' for -u'' - (N-1)/r u' = c u₊^p + g u₊^q,
// c the main factor of profile.spec.
IdentityTerms general_identity_terms(const RadialProfile& profile, const TestFunctionPsi& psi,
                                     const CoefficientModel& g_model, double q);
double general_identity_residual(const RadialProfile& profile, const TestFunctionPsi& psi,
                                 const CoefficientModel& g_model, double q);

// r^{2N-3}[-λa(N-2)(2(N-1)+β)r^β - λbβ(N-2)r^{β-N+2} - 2a(N-1)(N-2)]
double h_function(int n, double beta, double lambda, double a, double b, double r);
// The bracket h(r)/r^{2N-3}, continuous at 0 for β ≥ N-2.
double h_bracket(int n, double beta, double lambda, double a, double b, double r);

struct HMinimum {
  double r_min;
  double h_min;     // minimum of the bracket over [0,1] (a = -1, b = 1)
  double h_at_min;  // h itself at r_min
};
HMinimum min_h(int n, double beta, double lambda);

struct Certificate {
  enum class Kind { None, PohozaevSign, RadialTestFunction };
  Kind kind = Kind::None;
  int n = 3;
  double beta = 0.0;
  double lambda = 0.0;
  double q = 0.0;
  double critical_q = 0.0;  // (2β+N+2)/(N-2)
  double sign_value = 0.0;  // ((β+N)/(q+1) - (N-2)/2)·λ
  std::string pohozaev_case;  // "i", "ii", "iii"
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> lambda_star;
  std::optional<double> r_min;
  std::optional<double> h_min;
  std::string verdict;

  bool certified() const noexcept { return kind != Kind::None; }
};

std::string_view to_string(Certificate::Kind kind);
Certificate::Kind certificate_kind_from_string(std::string_view s);

Certificate certify_nonexistence(int n, double beta, double lambda, double q);

nlohmann::json to_json(const Certificate& c);
Certificate certificate_from_json(const nlohmann::json& j);

}  // namespace radcrit
