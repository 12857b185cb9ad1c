#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "radcrit/errors.hpp"
#include "radcrit/functionals.hpp"
#include "radcrit/radial_ode.hpp"

using namespace radcrit;
using std::numbers::pi;

namespace {

DiscreteRadialFunction fn(int n, double (*f)(double), int m = 4096) {
  return DiscreteRadialFunction::from_function(n, graded_mesh(m), f);
}

// Random smooth zero-trace profile: Σ c_k cos((k-½)πr).
DiscreteRadialFunction random_profile(std::mt19937_64& gen, int n, int m = 4096) {
  std::normal_distribution<double> nd;
  std::vector<double> c(6);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = nd(gen) / (k + 1.0);
  return DiscreteRadialFunction::from_function(n, graded_mesh(m), [&](double r) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos((k + 0.5) * pi * r);
    return s;
  });
}

}  // namespace

TEST_CASE("graded mesh") {
  const auto m = graded_mesh(64);
  CHECK(m.size() == 65);
  CHECK(m.front() == 0.0);
  CHECK(m.back() == 1.0);
  CHECK(m[1] == doctest::Approx(1.0 / 4096));
}

TEST_CASE("h1 seminorm examples") {
  CHECK(h1_seminorm_sq(fn(3, [](double) { return 0.0; })) == 0.0);
  const auto u = fn(3, [](double r) { return 1.0 - r; });
  CHECK(h1_seminorm_sq(u) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
  CHECK(h1_seminorm_sq(u.scaled(3.0)) == doctest::Approx(9.0 * h1_seminorm_sq(u)).epsilon(1e-14));
}

TEST_CASE("weighted Lp examples") {
  CHECK(weighted_lp(fn(3, [](double) { return 0.0; }), 2.0, 1.0) == 0.0);
  CHECK(weighted_lp(fn(3, [](double) { return 1.0; }), 1.0, 1.0) == doctest::Approx(pi).epsilon(1e-10));
  const auto bump = fn(3, [](double r) { return r < 0.2 ? std::pow(1.0 - r / 0.2, 2) : 0.0; });
  double prev = INFINITY;
  for (double m : {0.0, 0.5, 1.0, 2.0}) {
    const double v = weighted_lp(bump, 2.0, m);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("energy examples") {
  const auto s = ProblemSpec::variable_coefficient(3, 0.5, 1.0);
  CHECK(energy(s, fn(3, [](double) { return 0.0; })) == 0.0);
  const auto neg = fn(3, [](double r) { return -std::cos(0.5 * pi * r); });
  CHECK(energy(s, neg) == doctest::Approx(0.5 * h1_seminorm_sq(neg)).epsilon(1e-14));

  auto sub = ProblemSpec::pure_critical(3);
  sub.main_exponent = 3.0;
  const auto res = find_dirichlet_solution(sub, HeightRange{}, 1e-10);
  REQUIRE(res.found());
  const auto& p = *res.solution;
  const auto u = DiscreteRadialFunction::from_function(3, graded_mesh(), [&](double r) {
    const auto it = std::lower_bound(p.r.begin(), p.r.end(), r);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - p.r.begin(), 1));
    const double t = (r - p.r[i - 1]) / (p.r[i] - p.r[i - 1]);
    return (1 - t) * p.u[i - 1] + t * p.u[i];
  });
  const double e = energy(sub, u);
  CHECK(e > 0.0);
  // Nehari: ‖u‖² = ∫u⁴ on a solution, so I = ‖u‖²/4.
  CHECK(e == doctest::Approx(0.25 * h1_seminorm_sq(u)).epsilon(1e-3));
}

TEST_CASE("EnergyKernel agrees with energy() and its parallel path is exact") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3 + trial % 3;
    auto s = ProblemSpec::variable_coefficient(n, 0.25 * trial, 2.0 * trial);
    const auto u = random_profile(gen, n);
    const EnergyKernel k(s, u.mesh());
    const double a = k.energy(u.values(), true);
    const double b = k.energy(u.values(), false);
    CHECK(a == b);
    CHECK(a == doctest::Approx(energy(s, u)).epsilon(1e-10));
    CHECK(a == doctest::Approx(k.energy_reference(u.values())).epsilon(1e-12));
    std::vector<double> d1(u.size());
    std::vector<double> d2(u.size());
    k.derivative(u.values(), d1, true);
    k.derivative(u.values(), d2, false);
    CHECK(d1 == d2);
  }
}

TEST_CASE("property: derivative matches directional finite differences") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 6; ++trial) {
    const auto s = ProblemSpec::variable_coefficient(3, 0.5, 1.0 + trial);
    const auto u = random_profile(gen, 3, 512);
    const auto v = random_profile(gen, 3, 512);
    const EnergyKernel k(s, u.mesh());
    std::vector<double> d(u.size());
    k.derivative(u.values(), d);
    double dir = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) dir += d[i] * v.values()[i];
    const double h = 1e-6;
    std::vector<double> up(u.values());
    std::vector<double> um(u.values());
    for (std::size_t i = 0; i < up.size(); ++i) {
      up[i] += h * v.values()[i];
      um[i] -= h * v.values()[i];
    }
    const double fd = (k.energy(up) - k.energy(um)) / (2 * h);
    CHECK(dir == doctest::Approx(fd).epsilon(1e-6));
    CHECK(k.pairing(u.values(), v.values()) == doctest::Approx(dir).epsilon(1e-12));
  }
}

TEST_CASE("Sobolev constant against the closed form and a second quadrature") {
  for (int n : {3, 4, 5, 6}) {
    const double s = sobolev_constant(n);
    CHECK(s == doctest::Approx(oracle::sobolev_closed_form(n)).epsilon(1e-8));
    CHECK(s == doctest::Approx(oracle::talenti_quotient_tan(n, 4000)).epsilon(1e-4));
  }
  const auto est = sobolev_estimate(3);
  CHECK(est.error < 1e-8);
  CHECK(compactness_threshold(3, est.value) == doctest::Approx(std::pow(est.value, 1.5) / 3.0));
}

TEST_CASE("property: Rayleigh quotient of zero-trace functions is at least S") {
  std::mt19937_64 gen(5);
  for (int n : {3, 4}) {
    const double s = sobolev_constant(n);
    for (int i = 0; i < 40; ++i) CHECK(rayleigh_quotient(random_profile(gen, n, 1024)) >= s - 1e-8);
  }
}

TEST_CASE("bubble construction") {
  for (int n : {3, 4, 5}) {
    const double ps = 2.0 * n / (n - 2.0);
    double prev0 = 0.0;
    for (double eps : {0.1, 0.05, 0.025}) {
      const BubbleParams bp{eps, 0.25, 0.5};
      const auto v = bubble(bp, n);
      CHECK(std::pow(weighted_lp(v, ps, 0.0), 1.0 / ps) == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(v.values().front() > prev0);
      prev0 = v.values().front();
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v.mesh()[i] >= bp.delta_c) CHECK(v.values()[i] == 0.0);
    }
  }
  CHECK_THROWS_AS(bubble(BubbleParams{0.3, 0.25, 0.5}, 3), DomainError);
}

TEST_CASE("Rayleigh quotient of v_eps decreases toward S") {
  const double s = sobolev_constant(3);
  double prev = INFINITY;
  for (double eps : {0.08, 0.04, 0.02, 0.01, 0.005}) {
    const double q = talenti_quotient(3, BubbleParams{eps, 0.25, 0.5});
    CHECK(q > s);
    // gap is O(eps) for N = 3
    if (std::isfinite(prev)) CHECK((prev - s) / (q - s) == doctest::Approx(2.0).epsilon(0.1));
    prev = q;
  }
}

TEST_CASE("property: mesh refinement invariance") {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 5; ++i) {
    auto g1 = gen;
    const auto a = random_profile(g1, 3, 2048);
    const auto b = random_profile(gen, 3, 4096);
    CHECK(h1_seminorm_sq(a) == doctest::Approx(h1_seminorm_sq(b)).epsilon(1e-5));
    CHECK(weighted_lp(a, 3.0, 0.5) == doctest::Approx(weighted_lp(b, 3.0, 0.5)).epsilon(1e-5));
  }
}

TEST_CASE("property: ray energy eventually decreases to minus infinity") {
  std::mt19937_64 gen(3);
  const auto s = ProblemSpec::variable_coefficient(3, 0.5, 1.0);
  for (int i = 0; i < 10; ++i) {
    auto u = random_profile(gen, 3);
    for (auto& x : u.values()) x = std::abs(x);
    const double e10 = energy(s, u.scaled(10));
    const double e20 = energy(s, u.scaled(20));
    const double e40 = energy(s, u.scaled(40));
    CHECK(e10 > e20);
    CHECK(e20 > e40);
    CHECK(e40 < 0.0);
  }
}

TEST_CASE("expansion slopes") {
  const auto r1 = expansion_check(3, 0.5, 3.0, default_expansion_ladder());
  CHECK(r1.slope_norm == doctest::Approx(1.0).epsilon(0.1));
  CHECK(r1.predicted_weighted == doctest::Approx(1.5));
  CHECK(std::abs(r1.slope_weighted - 1.5) < 0.08);
  const auto r2 = expansion_check(3, 1.0, 4.0, default_expansion_ladder());
  CHECK(r2.predicted_weighted == doctest::Approx(1.5));
  CHECK(std::abs(r2.slope_weighted - 1.5) < 0.08);

  std::ostringstream os;
  write_expansion_csv(r1, os);
  CHECK(os.str().rfind("epsilon,norm_sq_minus_S,weighted_integral,J_eps\n", 0) == 0);

  const std::vector<double> short_ladder{1e-3, 1e-4, 1e-5};
  CHECK_THROWS_AS(expansion_check(3, 0.5, 3.0, short_ladder), PreconditionError);
  const std::vector<double> rising{1e-5, 1e-4, 1e-3, 1e-2};
  CHECK_THROWS_AS(expansion_check(3, 0.5, 3.0, rising), PreconditionError);
}

TEST_CASE("c30 integral") {
  const std::vector<double> ladder{0.1, 0.03, 0.01, 0.003};
  for (double e : ladder) CHECK(c30_integral(NonlinearityModel::zero(), 1.0, 3, e) == 0.0);
  double prev = -INFINITY;
  for (double e : ladder) {
    const double j = c30_integral(NonlinearityModel::pure_power(6.0), 1.0, 3, e);
    CHECK(j > prev);
    prev = j;
  }
  double hi = 0.0;
  for (double e : ladder) hi = std::max(hi, c30_integral(NonlinearityModel::pure_power(3.0), 1.0, 3, e));
  MESSAGE("q = 3 along the ladder: max J = " << hi);
  CHECK(std::isfinite(hi));
}

TEST_CASE("loglog slope of a power law") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  CHECK(loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("cutoff") {
  CHECK(cutoff(0.1, 0.25, 0.5) == 1.0);
  CHECK(cutoff(0.6, 0.25, 0.5) == 0.0);
  double prev = 1.0;
  for (double r = 0.25; r <= 0.5; r += 0.01) {
    CHECK(cutoff(r, 0.25, 0.5) <= prev);
    prev = cutoff(r, 0.25, 0.5);
  }
  const double h = 1e-6;
  CHECK(cutoff_derivative(0.4, 0.25, 0.5) ==
        doctest::Approx((cutoff(0.4 + h, 0.25, 0.5) - cutoff(0.4 - h, 0.25, 0.5)) / (2 * h)).epsilon(1e-6));
}
