#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "btower/errors.hpp"
#include "btower/quadrature.hpp"
#include "oracles.hpp"

using namespace btower;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("Gaussian integral on the line") {
  auto r = integrate_line([](double x) { return std::exp(-x * x); }, 1.0, 1.0, 1.0);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(r.err <= 1e-12);
  CHECK_THROWS_AS(integrate_line([](double) { return 1.0; }, 1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("panels") {
  auto r = integrate_panels([](double x) { return std::cos(x); }, {0.0, 1.0, M_PI / 2});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(integrate_panels([](double x) { return x; }, {1.0, 0.0}), DomainError);
}

TEST_CASE("profile moments against the Beta reduction") {
  for (int N : {3, 4, 5}) {
    const double ps = (N + 2.0) / (N - 2.0);
    for (auto [s, c] : std::vector<std::pair<double, double>>{{ps + 1.0, 0.0}, {ps, 1.0}, {2.5, -0.7}, {6.0, 2.0}}) {
      const auto q = profile_moment(N, s, c);
      CHECK(rel(q.value, oracle::beta_moment(N, s, c)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(profile_moment(3, 1.0, 1.0), DomainError);
}

TEST_CASE("Beta oracle agrees with the frozen extended-precision values") {
  CHECK(rel(oracle::beta_moment(3, 6.0, 0.0), oracle::n3::int_U6) < 1e-13);
  CHECK(rel(oracle::beta_moment(3, 5.0, 1.0), oracle::n3::int_U5_exp) < 1e-13);
  CHECK(rel(oracle::beta_log_moment(3, 6.0), oracle::n3::int_U6_logU) < 1e-12);
}

TEST_CASE("energy constants, N = 3, q = 4") {
  const auto C = energy_constants(3, 4.0);
  const auto o = oracle::beta_constants(3, 4.0, 7.0);
  CHECK(rel(C.a1, o.a1) < 1e-10);
  CHECK(rel(C.a2, o.a2) < 1e-10);
  CHECK(rel(C.a3, o.a3) < 1e-10);
  CHECK(rel(C.a5(), o.a5_sub) < 1e-10);
  CHECK(rel(C.int_U_pstar_exp, o.int_U_pstar_exp) < 1e-10);
  CHECK(rel(C.a1, oracle::n3::a1) < 1e-10);
  CHECK(rel(C.a2, 2.0 * std::sqrt(3.0)) < 1e-10);
  CHECK(rel(C.a4, oracle::n3::a4) < 1e-9);
  CHECK(rel(C.a1, C.a1_via_identity) < 1e-10);
  CHECK(C.C_N == doctest::Approx(std::pow(3.0, 0.25)));
  CHECK(C.err.a1 < 1e-11);
  CHECK_THROWS_AS(C.a5_hat(), RegimeMismatch);
  // the log moment has its own closed form
  CHECK(rel(C.int_U_pstar1_logU, oracle::beta_log_moment(3, 6.0)) < 1e-10);
}

TEST_CASE("energy constants, N = 3, q = 7") {
  const auto C = energy_constants(3, 7.0);
  CHECK(rel(C.a5_hat(), oracle::n3::a5_hat_q7) < 1e-10);
  CHECK_THROWS_AS(C.a5(), RegimeMismatch);
  CHECK_THROWS_AS(energy_constants(3, 2.0), DomainError);
}

TEST_CASE("energy constants in other dimensions") {
  for (int N : {4, 5}) {
    const double ps = (N + 2.0) / (N - 2.0);
    const double ps_low = N / (N - 2.0);
    const double q = 0.5 * (ps + ps_low);
    const auto C = energy_constants(N, q);
    const auto o = oracle::beta_constants(N, q, ps + 2.0);
    CHECK(rel(C.a1, o.a1) < 1e-10);
    CHECK(rel(C.a2, o.a2) < 1e-10);
    CHECK(rel(C.a5(), o.a5_sub) < 1e-10);
  }
}
