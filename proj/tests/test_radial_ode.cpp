#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "radcrit/errors.hpp"
#include "radcrit/radial_ode.hpp"

using namespace radcrit;

namespace {

ProblemSpec bubble_spec(int n) {
  auto s = ProblemSpec::pure_critical(n);
  s.main_offset = n * (n - 2.0);
  return s;
}

ProblemSpec subcritical(double p) {
  auto s = ProblemSpec::pure_critical(3);
  s.main_exponent = p;
  return s;
}

}  // namespace

TEST_CASE("bubble reproduced by the IVP integrator") {
  for (int n : {3, 4, 5}) {
    const auto p = integrate_ivp(bubble_spec(n), 1.0, 1.0, 1e-14);
    REQUIRE(p.r.back() == doctest::Approx(1.0));
    CHECK(p.du.front() == 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      worst = std::max(worst, std::abs(p.u[i] / oracle::bubble(n, p.r[i]) - 1.0));
    CHECK(worst < 1e-8);
  }
  const auto p3 = integrate_ivp(bubble_spec(3), 1.0, 1.0, 1e-14);
  CHECK(p3.u.back() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("zero datum gives zero profile") {
  const auto p = integrate_ivp(ProblemSpec::variable_coefficient(3, 0.5, 2.0), 0.0, 1.0, 1e-12);
  for (double v : p.u) CHECK(v == 0.0);
}

TEST_CASE("second derivative at the centre") {
  IvpOptions o;
  o.output_radii = {1e-4};
  o.r_end = 1e-4;
  const auto res = integrate_ivp(ProblemSpec::pure_critical(3), 1.0, o);
  const auto& p = res.profile;
  const double r = p.r.back();
  CHECK(p.du.front() == 0.0);
  CHECK((p.u.back() - 1.0) / (0.5 * r * r) == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));
  CHECK(p.du.back() / r == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("blow-up reports divergence") {
  auto s = ProblemSpec::pure_critical(3);
  s.lambda = -50.0;
  s.k = CoefficientModel::constant(1.0);
  s.f = NonlinearityModel::pure_power(7.0);
  try {
    integrate_ivp(s, 10.0, 1.0, 1e-12);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.last_radius() > 0.0);
    CHECK(e.last_radius() < 1.0);
  }
}

TEST_CASE("pure critical shots stay positive") {
  for (double d : {0.1, 1.0, 100.0}) {
    const auto o = shoot(ProblemSpec::pure_critical(3), d, 1e-14);
    CHECK_FALSE(o.has_zero());
    CHECK(std::get<PositiveAtEnd>(o.result).u_end > 0.0);
  }
}

TEST_CASE("subcritical first-zero scaling") {
  const auto s = subcritical(3.0);
  const double r1 = shoot(s, 1.0, 1e-16).first_zero();
  REQUIRE(std::isfinite(r1));
  for (double d : {2.0, 4.0, 16.0}) CHECK(shoot(s, d, 1e-16).first_zero() == doctest::Approx(r1 / d).epsilon(1e-6));
}

TEST_CASE("property: R(d) d^{(p-1)/2} invariant over a log grid") {
  for (double p : {2.0, 3.0, 4.0}) {
    const auto s = subcritical(p);
    const double ref = shoot(s, 100.0, 1e-16).first_zero() * std::pow(100.0, 0.5 * (p - 1.0));
    REQUIRE(std::isfinite(ref));
    for (double d : log_grid(5.0, 5000.0, 3)) {
      const double c = shoot(s, d, 1e-16).first_zero() * std::pow(d, 0.5 * (p - 1.0));
      CHECK(c == doctest::Approx(ref).epsilon(1e-5));
    }
  }
}

TEST_CASE("property: critical scaling u(r;d) = d u(d^{2/(N-2)} r; 1)") {
  for (int n : {3, 4}) {
    const auto s = ProblemSpec::pure_critical(n);
    for (double d : {0.5, 2.0, 3.0}) {
      const double k = std::pow(d, 2.0 / (n - 2));
      std::vector<double> radii;
      for (int i = 1; i <= 20; ++i) radii.push_back(0.05 * i * std::min(1.0, 1.0 / k));
      IvpOptions a;
      a.output_radii = radii;
      a.r_end = radii.back();
      IvpOptions b;
      for (double r : radii) b.output_radii.push_back(k * r);
      b.r_end = b.output_radii.back();
      const auto pd = integrate_ivp(s, d, a).profile;
      const auto p1 = integrate_ivp(s, 1.0, b).profile;
      REQUIRE(pd.size() == p1.size());
      for (std::size_t i = 1; i < pd.size(); ++i) CHECK(pd.u[i] == doctest::Approx(d * p1.u[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("power law g produces a first zero crossing r = 1") {
  const auto s = ProblemSpec::variable_coefficient(3, 0.5, 1.0);
  bool below = false;
  bool above = false;
  for (double d : log_grid(0.1, 1e4, 8)) {
    const double r = shoot(s, d, 1e-15).first_zero();
    if (r < 1.0) below = true;
    if (r > 1.0) above = true;
  }
  CHECK(below);
  CHECK(above);
}

TEST_CASE("subcritical Dirichlet height against a dense-grid RK4 oracle") {
  const auto s = subcritical(3.0);
  const auto res = find_dirichlet_solution(s, HeightRange{}, 1e-12);
  REQUIRE(res.found());
  const double ref = oracle::dirichlet_height(3, [](double, double u) { return u > 0 ? u * u * u : 0.0; }, 1.0, 100.0);
  CHECK(res.d_star == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("pure critical problem has no Dirichlet solution") {
  const auto res = find_dirichlet_solution(ProblemSpec::pure_critical(3), HeightRange{1e-3, 1e6}, 1e-10);
  CHECK_FALSE(res.found());
  CHECK(res.brackets.empty());
  CHECK(res.samples.size() > 500);
  for (const auto& x : res.samples) CHECK(x.status == ShotSample::Status::PositiveAtEnd);
}

TEST_CASE("Dirichlet profile invariants") {
  const double tol = 1e-10;
  for (double beta : {0.25, 0.5, 0.75}) {
    const auto res = find_dirichlet_solution(ProblemSpec::variable_coefficient(3, beta, 1.0), HeightRange{}, tol);
    REQUIRE(res.found());
    const auto& p = *res.solution;
    CHECK(p.covers_unit_interval());
    CHECK(p.r.front() == 0.0);
    CHECK(p.du.front() == 0.0);
    CHECK(res.boundary_residual <= tol);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) CHECK(p.u[i] > 0.0);
    CHECK(std::abs(p.u.back()) <= tol);
    CHECK(res.ode_residual < 1e-6);
    CHECK(residual_check(p) < 10 * tol);
    CHECK(p.boundary_slope < 0.0);
  }
}

TEST_CASE("residual_check oracles") {
  const auto mesh = solution_mesh(1.0);
  const auto p = sample_profile(bubble_spec(3), mesh, [](double r) { return oracle::bubble(3, r); },
                                [](double r) { return oracle::bubble_prime(3, r); });
  CHECK(residual_check(p) < 1e-8);

  const auto z = sample_profile(ProblemSpec::pure_critical(3), mesh, [](double) { return 0.0; },
                                [](double) { return 0.0; });
  CHECK(residual_check(z) == 0.0);

  const std::vector<double> coarse{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto c = sample_profile(bubble_spec(3), coarse, [](double r) { return oracle::bubble(3, r); },
                                [](double r) { return oracle::bubble_prime(3, r); });
  CHECK_THROWS_AS(residual_check(c), DiagnosticsError);

  // a perturbed profile is detected
  auto bad = sample_profile(bubble_spec(3), mesh, [](double r) { return oracle::bubble(3, r) * (1 + 1e-3 * r * r); },
                            [](double r) { return oracle::bubble_prime(3, r) * (1 + 1e-3 * r * r) + oracle::bubble(3, r) * 2e-3 * r; });
  CHECK(residual_check(bad) > 1e-5);
}

TEST_CASE("convergence order of the fixed-step integrator") {
  const auto s = bubble_spec(3);
  double prev = 0.0;
  for (double h : {0.05, 0.025}) {
    IvpOptions o;
    o.fixed_step = h;
    const auto p = integrate_ivp(s, 1.0, o).profile;
    const double err = std::abs(p.u.back() - std::sqrt(0.5));
    if (prev > 0.0) CHECK(prev / err > 128.0);
    prev = err;
  }
}

TEST_CASE("serial and parallel shot scans agree exactly") {
  const auto s = ProblemSpec::variable_coefficient(3, 0.5, 1.0);
  const auto d = log_grid(1e-2, 1e3, 8);
  const auto a = scan_shots_serial(s, d, ShootOptions{});
  const auto b = scan_shots_parallel(s, d, ShootOptions{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].status == b[i].status);
    CHECK(a[i].radius == b[i].radius);
    CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("profile export") {
  const auto res = find_dirichlet_solution(subcritical(3.0), HeightRange{}, 1e-10);
  REQUIRE(res.found());
  std::ostringstream os;
  write_profile_csv(*res.solution, os);
  const auto text = os.str();
  CHECK(text.rfind("r,u,u_prime\n", 0) == 0);
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(static_cast<std::size_t>(lines) == res.solution->size() + 1);
  const auto j = profile_to_json(*res.solution);
  CHECK(j.contains("problem"));
  CHECK(j.at("d_star").get<double>() == res.d_star);
}

TEST_CASE("log grid covers its range") {
  const auto g = log_grid(1e-3, 1e6, 64);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e6);
  CHECK(g.size() == 9 * 64 + 1);
  CHECK_THROWS(log_grid(1.0, 0.5, 4));
}
