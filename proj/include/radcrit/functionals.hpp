#pragma once

// Radial P1 functions on a graded mesh, their norms and the energy, the
// Sobolev constant from the Talenti family, and the ε-expansion checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "radcrit/problem_model.hpp"

namespace radcrit {

// r_i = (i/M)², i = 0..M.
std::vector<double> graded_mesh(int m = 4096);

class DiscreteRadialFunction {
 public:
  DiscreteRadialFunction() = default;
  // Throws DomainError unless N ≥ 3, the mesh is strictly increasing from 0
  // and sizes agree.
  DiscreteRadialFunction(int dimension, std::vector<double> mesh, std::vector<double> values);

  template <class F>
  static DiscreteRadialFunction from_function(int dimension, std::vector<double> mesh, F&& fn) {
    std::vector<double> v(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) v[i] = fn(mesh[i]);
    return {dimension, std::move(mesh), std::move(v)};
  }

  int dimension() const noexcept { return n_; }
  const std::vector<double>& mesh() const noexcept { return r_; }
  const std::vector<double>& values() const noexcept { return u_; }
  std::vector<double>& values() noexcept { return u_; }
  std::size_t size() const noexcept { return r_.size(); }

  double operator()(double r) const;  // piecewise-linear, 0 outside the mesh
  bool vanishes_at_boundary(double tol = 0.0) const;
  bool is_zero() const;

  DiscreteRadialFunction scaled(double c) const;

 private:
  int n_ = 3;
  std::vector<double> r_;
  std::vector<double> u_;
};

// ∫_B |∇u|², exact for P1 data.
double h1_seminorm_sq(const DiscreteRadialFunction& u);
// ∫_B |x|^{m s} |u|^s dx.
double weighted_lp(const DiscreteRadialFunction& u, double s, double m);
// ∫|∇u|² / (∫|u|^{2*})^{2/2*}
double rayleigh_quotient(const DiscreteRadialFunction& u);

// One term ∫ c(r) u₊^{s+1}/(s+1) of the potential part of the energy.
struct PotentialTerm {
  std::function<double(double)> coefficient;
  double power;  // s
};
// Main term (offset + main coefficient, p_main) and, when present, λk with f's q.
std::vector<PotentialTerm> potential_terms(const ProblemSpec& spec);

// I(u) = ½‖u‖² - ∫ (main factor) u₊^{p+1}/(p+1) - λ ∫ k F(u).
double energy(const ProblemSpec& spec, const DiscreteRadialFunction& u);

// Cached quadrature for repeated energy/gradient evaluations on one mesh.
// Reductions run over fixed blocks so the parallel and serial-blocked sums
// agree bit for bit for every thread count.
class EnergyKernel {
 public:
  EnergyKernel(const ProblemSpec& spec, std::vector<double> mesh, int gauss_points = 5);

  const std::vector<double>& mesh() const noexcept { return r_; }
  const ProblemSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return r_.size(); }
  std::size_t term_count() const noexcept { return powers_.size(); }
  double term_power(std::size_t j) const { return powers_[j]; }

  double seminorm_sq(std::span<const double> u) const;
  // ∫ c_j u₊^{s_j+1} (no 1/(s_j+1) factor)
  double potential_moment(std::span<const double> u, std::size_t j, bool parallel = true) const;
  double energy(std::span<const double> u, bool parallel = true) const;
  // Plain left-to-right reference sums; equal to energy() up to rounding.
  double energy_reference(std::span<const double> u) const;

  // Nodal derivative dI/du_i.
  void derivative(std::span<const double> u, std::span<double> out, bool parallel = true) const;
  void derivative_reference(std::span<const double> u, std::span<double> out) const;

  // Riesz representative of I'(u) in the H¹ seminorm (zero at r = 1).
  void h1_gradient(std::span<const double> u, std::span<double> out, bool parallel = true) const;
  // ‖g‖ for a nodal function g.
  double norm(std::span<const double> g) const { return std::sqrt(seminorm_sq(g)); }
  // ⟨I'(u), v⟩
  double pairing(std::span<const double> u, std::span<const double> v, bool parallel = true) const;

  // Stiffness matrix diagonal / off-diagonal (segment weights).
  const std::vector<double>& segment_stiffness() const noexcept { return stiff_; }

 private:
  ProblemSpec spec_;
  std::vector<double> r_;
  std::vector<double> stiff_;  // ω (r_{i+1}^N - r_i^N)/(N h_i²)
  int g_ = 5;
  std::vector<double> phi_;                  // basis value 1 - t at each Gauss node
  std::vector<double> wt_;                   // segment·node weight incl. ω r^{N-1}
  std::vector<std::vector<double>> coeff_;   // coefficient of term j at each node
  std::vector<double> powers_;
  static constexpr std::size_t kBlock = 256;
};

// ---- Talenti family and Sobolev constant -----------------------------------

// ψ = 1 on [0, η], quintic blend, 0 beyond δ_c.
double cutoff(double r, double eta, double delta_c);
double cutoff_derivative(double r, double eta, double delta_c);

struct BubbleParams {
  double epsilon = 0.01;
  double eta = 0.25;
  double delta_c = 0.5;
};

// v_ε = ψU_ε / ‖ψU_ε‖_{L^{2*}} sampled on the mesh (default graded_mesh()).
DiscreteRadialFunction bubble(const BubbleParams& params, int n);
DiscreteRadialFunction bubble(const BubbleParams& params, int n, std::vector<double> mesh);

// Rayleigh quotient of ψU_ε by adaptive quadrature of the closed form.
double talenti_quotient(int n, const BubbleParams& params, double tol = 1e-13);
// ∫_B |x|^γ (ψU_ε/‖ψU_ε‖_{2*})^{q+1} dx by adaptive quadrature.
double talenti_weighted_integral(int n, const BubbleParams& params, double gamma, double q, double tol = 1e-13);

struct SobolevEstimate {
  double value;
  double error;  // |last two extrapolants|
  std::vector<double> epsilons;
  std::vector<double> quotients;
};
// Richardson extrapolation of talenti_quotient along ε = 0.02·2^{-j}.
SobolevEstimate sobolev_estimate(int n, double tol = 1e-10);
double sobolev_constant(int n, double tol = 1e-10);
// S^{N/2}/N
double compactness_threshold(int n, double s);

struct ExpansionRow {
  double epsilon;
  double norm_sq_minus_s;
  double weighted_integral;
  double j_eps;
};
struct ExpansionReport {
  int n;
  double gamma;
  double q;
  double sobolev;
  double slope_norm;           // fitted exponent of ‖v_ε‖² - S
  double slope_weighted;       // fitted exponent of ∫|x|^γ v_ε^{q+1}
  double predicted_norm;       // N - 2
  double predicted_weighted;   // γ + N - (N-2)(q+1)/2
  std::vector<ExpansionRow> rows;
};
std::vector<double> default_expansion_ladder();
ExpansionReport expansion_check(int n, double gamma, double q, std::span<const double> ladder);
void write_expansion_csv(const ExpansionReport& report, std::ostream& out);

// ε^{γ+2} ∫_0^{1/ε} F[(ε^{-1}/(1+r²))^{(N-2)/2}] r^{γ+N-1} dr
double c30_integral(const NonlinearityModel& f, double gamma, int n, double epsilon);

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace radcrit
