#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "radcrit/errors.hpp"
#include "radcrit/pohozaev.hpp"

using namespace radcrit;

namespace {

ProblemSpec perturbed(int n, double p, double lambda, double beta, double q) {
  auto s = ProblemSpec::pure_critical(n);
  s.main_exponent = p;
  s.lambda = lambda;
  s.k = CoefficientModel::power_law(1.0, beta);
  s.f = NonlinearityModel::pure_power(q);
  return s;
}

TestFunctionPsi random_psi(std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  return TestFunctionPsi({0.0, nd(gen), nd(gen), nd(gen), nd(gen)});
}

}  // namespace

TEST_CASE("test function family") {
  const auto psi = TestFunctionPsi::radial_family(3, -1.0, 1.0);
  CHECK(psi.vanishes_at_origin());
  CHECK(psi.value(0.0) == 0.0);
  CHECK(psi.value(1.0) == 0.0);
  CHECK(psi.value(0.5) == doctest::Approx(-0.25 + 0.5));
  std::mt19937_64 gen(17);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_psi(gen);
    CHECK(p.value(0.0) == 0.0);
    for (double r : {0.2, 0.5, 0.9}) {
      const double h = 1e-5;
      for (int k = 0; k < 3; ++k) {
        const double fd = (p.derivative(r + h, k) - p.derivative(r - h, k)) / (2 * h);
        CHECK(p.derivative(r, k + 1) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("pov residual") {
  const std::vector<double> mesh = solution_mesh(1.0);
  const auto zero = sample_profile(ProblemSpec::pure_critical(3), mesh, [](double) { return 0.0; },
                                   [](double) { return 0.0; });
  CHECK(pov_residual(zero, 1.0, 1.0, 3.0) == 0.0);

  const auto s = perturbed(3, 3.0, 0.5, 1.0, 3.0);
  const auto res = find_dirichlet_solution(s, HeightRange{}, 1e-10);
  REQUIRE(res.found());
  CHECK(pov_residual(*res.solution, 1.0, 0.5, 3.0) < 1e-5);

  // β = 0, q critical: volume side is identically 0, so any nonzero flux is exposed
  const auto p = sample_profile(ProblemSpec::pure_critical(3), mesh,
                                [](double r) { return std::cos(0.5 * std::numbers::pi * r); },
                                [](double r) { return -0.5 * std::numbers::pi * std::sin(0.5 * std::numbers::pi * r); });
  CHECK(pov_residual(p, 0.0, 2.0, 5.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("general identity on a subcritical solution") {
  const auto s = perturbed(3, 3.0, 0.5, 1.0, 3.0);
  const auto res = find_dirichlet_solution(s, HeightRange{}, 1e-10);
  REQUIRE(res.found());
  const auto g = CoefficientModel::power_law(0.5, 1.0);
  CHECK(general_identity_residual(*res.solution, TestFunctionPsi(std::vector<double>{}), g, 3.0) == 0.0);
  CHECK(general_identity_residual(*res.solution, TestFunctionPsi::identity(), g, 3.0) < 1e-5);
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 20; ++i) CHECK(general_identity_residual(*res.solution, random_psi(gen), g, 3.0) < 1e-5);
  CHECK_THROWS_AS(general_identity_residual(*res.solution, TestFunctionPsi({1.0, 1.0}), g, 3.0), PreconditionError);
}

TEST_CASE("property: identity soundness on accepted solutions") {
  const double tol = 1e-8;  // acceptance level for the ODE residual
  struct Case {
    int n;
    double p, lambda, beta, q;
  };
  const Case cases[] = {{3, 3.0, 1.0, 0.5, 2.0}, {3, 4.0, 2.0, 2.0, 3.0}, {4, 2.0, 1.0, 1.0, 1.5},
                        {4, 2.5, 0.5, 0.0, 2.0}};
  for (const auto& c : cases) {
    const auto res = find_dirichlet_solution(perturbed(c.n, c.p, c.lambda, c.beta, c.q), HeightRange{}, 1e-10);
    REQUIRE(res.found());
    REQUIRE(res.ode_residual < tol);
    CHECK(pov_residual(*res.solution, c.beta, c.lambda, c.q) < 10 * tol);
    CHECK(general_identity_residual(*res.solution, TestFunctionPsi::identity(),
                                    CoefficientModel::power_law(c.lambda, c.beta), c.q) < 10 * tol);
  }
}

TEST_CASE("h function examples") {
  for (int n : {3, 4, 5})
    for (double r : {0.1, 0.5, 1.0})
      CHECK(h_function(n, 1.0, 0.0, -1.0, 1.0, r) ==
            doctest::Approx(2.0 * (n - 1) * (n - 2) * std::pow(r, 2 * n - 3)).epsilon(1e-14));
  CHECK(h_bracket(3, 1.0, 4.0, -1.0, 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h_function(3, 1.3, 7.0, 0.0, 0.0, 0.4) == 0.0);
}

TEST_CASE("property: h is linear in lambda") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const int n = 3 + i % 3;
    const double beta = n - 2 + 2 * u(gen);
    const double r = u(gen);
    const double a = u(gen) - 0.5;
    const double b = u(gen) - 0.5;
    const double l1 = 10 * u(gen);
    const double l2 = 10 * u(gen);
    const double h0 = h_function(n, beta, 0.0, a, b, r);
    const double lhs = h_function(n, beta, l1 + l2, a, b, r) - h0;
    const double rhs = (h_function(n, beta, l1, a, b, r) - h0) + (h_function(n, beta, l2, a, b, r) - h0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("min_h examples") {
  const auto a = min_h(3, 1.0, 4.0);
  CHECK(a.r_min == 0.0);
  CHECK(std::abs(a.h_min) < 1e-12);
  const auto b = min_h(3, 2.0, 24.0);
  // stationary point r^{N-2} = (β-N+2)/(2N-2+β) = 1/6
  CHECK(b.r_min == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(std::abs(b.h_min) < 1e-10);
  CHECK(min_h(3, 1.0, 3.0).h_min == doctest::Approx(1.0));
  CHECK_THROWS_AS(min_h(3, 0.5, 1.0), DomainError);
}

TEST_CASE("property: min_h vanishes at lambda_star") {
  for (int n : {3, 4, 5})
    for (double beta : {n - 2.0, n - 1.5, n - 1.0, 2.0 * (n - 2)}) {
      const double ls = lambda_star(n, beta);
      CHECK(std::abs(min_h(n, beta, ls).h_min) < 1e-10);
      CHECK(min_h(n, beta, 0.99 * ls).h_min > 0.0);
      CHECK(min_h(n, beta, 1.01 * ls).h_min < 0.0);
    }
}

TEST_CASE("certificates") {
  const auto rt = certify_nonexistence(3, 1.0, 3.9, 5.0);
  CHECK(rt.kind == Certificate::Kind::RadialTestFunction);
  REQUIRE(rt.a);
  REQUIRE(rt.b);
  CHECK(*rt.a + *rt.b == 0.0);
  CHECK(*rt.h_min >= 0.0);
  CHECK(*rt.lambda_star == 4.0);

  const auto ps = certify_nonexistence(3, 2.0, -1.0, 3.0);
  CHECK(ps.kind == Certificate::Kind::PohozaevSign);
  CHECK(ps.pohozaev_case == "i");

  CHECK(certify_nonexistence(3, 1.0, 100.0, 5.0).kind == Certificate::Kind::None);
  CHECK(certify_nonexistence(3, 0.0, -7.0, 5.0).pohozaev_case == "iii");
  CHECK(certify_nonexistence(3, 0.5, 2.0, 9.0).pohozaev_case == "ii");

  for (const auto* c : {&rt, &ps}) {
    const auto back = certificate_from_json(to_json(*c));
    CHECK(to_json(back) == to_json(*c));
  }
}

TEST_CASE("certified points have no Dirichlet solution") {
  for (double lambda : {0.0, 2.0, 4.0}) {
    REQUIRE(certify_nonexistence(3, 1.0, lambda, 5.0).certified());
    CHECK_FALSE(find_dirichlet_solution(ProblemSpec::variable_coefficient(3, 1.0, lambda), HeightRange{}, 1e-10).found());
  }
  REQUIRE(certify_nonexistence(3, 2.0, -1.0, 3.0).certified());
  auto s = ProblemSpec::pure_critical(3);
  s.lambda = -1.0;
  s.k = CoefficientModel::power_law(1.0, 2.0);
  s.f = NonlinearityModel::pure_power(3.0);
  CHECK_FALSE(find_dirichlet_solution(s, HeightRange{}, 1e-10).found());
}
