#pragma once

// Test-side reference computations, written without the library's numerics.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// (1+r²)^{-(N-2)/2} solves -Δu = N(N-2) u^{(N+2)/(N-2)}.
inline double bubble(int n, double r) { return std::pow(1.0 + r * r, -0.5 * (n - 2)); }
inline double bubble_prime(int n, double r) { return -(n - 2) * r * std::pow(1.0 + r * r, -0.5 * n); }

inline double sobolev_closed_form(int n) {
  return std::numbers::pi * n * (n - 2) * std::pow(std::tgamma(0.5 * n) / std::tgamma(1.0 * n), 2.0 / n);
}

inline double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

// Composite Simpson on [a,b] with m (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Whole-space Talenti quotient ‖∇U‖²/‖U‖²_{2*} with r = tan θ.
inline double talenti_quotient_tan(int n, int panels) {
  const double ps = 2.0 * n / (n - 2.0);
  const double half_pi = 0.5 * std::numbers::pi;
  auto grad = [n](double t) {
    t = std::min(t, 0.5 * std::numbers::pi - 1e-9);
    const double r = std::tan(t);
    const double sec2 = 1.0 + r * r;
    const double up = bubble_prime(n, r);
    return up * up * std::pow(r, n - 1) * sec2;
  };
  auto mass = [n, ps](double t) {
    if (t >= 0.5 * std::numbers::pi) return 0.0;
    const double r = std::tan(t);
    const double sec2 = 1.0 + r * r;
    return std::pow(bubble(n, r), ps) * std::pow(r, n - 1) * sec2;
  };
  const double w = sphere_area(n);
  const double a = w * simpson(grad, 0.0, half_pi, panels);
  const double b = w * simpson(mass, 0.0, half_pi, panels);
  return a / std::pow(b, 2.0 / ps);
}

// Classical RK4 for u'' + (N-1)/r u' + f(r,u) = 0, u(0)=d, from a series start.
struct Rk4Shot {
  bool zero = false;
  double radius = 0.0;  // first zero (linear interpolation)
  double u_end = 0.0;
};

inline Rk4Shot rk4_shot(int n, const std::function<double(double, double)>& f, double d, double r_end = 1.0,
                        int steps = 20000) {
  const double r0 = 1e-5;
  double r = r0;
  double u = d - f(0.0, d) * r0 * r0 / (2.0 * n);
  double v = -f(0.0, d) * r0 / n;
  const double h = (r_end - r0) / steps;
  auto rhs = [&](double rr, double uu, double vv, double& du, double& dv) {
    du = vv;
    dv = -(n - 1) / rr * vv - f(rr, uu);
  };
  for (int i = 0; i < steps; ++i) {
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    rhs(r, u, v, k1u, k1v);
    rhs(r + h / 2, u + h / 2 * k1u, v + h / 2 * k1v, k2u, k2v);
    rhs(r + h / 2, u + h / 2 * k2u, v + h / 2 * k2v, k3u, k3v);
    rhs(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
    const double un = u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    const double vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    if (un <= 0.0) return {true, r + h * u / (u - un), un};
    u = un;
    v = vn;
    r += h;
  }
  return {false, 0.0, u};
}

// Dense d-grid then bisection on "first zero before r = 1".
inline double dirichlet_height(int n, const std::function<double(double, double)>& f, double d_lo, double d_hi,
                               int grid = 200, int bisections = 40) {
  double prev = d_lo;
  bool prev_zero = rk4_shot(n, f, prev).zero;
  for (int i = 1; i <= grid; ++i) {
    const double d = d_lo * std::pow(d_hi / d_lo, static_cast<double>(i) / grid);
    const bool z = rk4_shot(n, f, d).zero;
    if (z != prev_zero) {
      double a = prev;
      double b = d;
      for (int k = 0; k < bisections; ++k) {
        const double m = std::sqrt(a * b);
        (rk4_shot(n, f, m).zero == prev_zero ? a : b) = m;
      }
      return std::sqrt(a * b);
    }
    prev = d;
    prev_zero = z;
  }
  return std::nan("");
}

// Ray maximiser of t²A/2 - t^{m}B/m.
inline double ray_argmax(double a, double b, double m) { return std::pow(a / b, 1.0 / (m - 2.0)); }

inline double lambda_star(int n, double beta) {
  const double base = 2.0 * (n - 1) / (n - 2);
  if (beta == n - 2) return base;
  return base * std::pow((2.0 * n - 2 + beta) / (beta - n + 2), (beta - n + 2) / (n - 2));
}

}  // namespace oracle
