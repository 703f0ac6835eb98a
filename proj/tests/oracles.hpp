#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the quadrature or reduced-model code under test.

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// High-precision reference values for N = 3 (30-digit quadrature, frozen).
namespace n3 {
inline constexpr double gamma = 1.31607401295249246;
inline constexpr double int_U6 = 0.51013107119087377;        // int U^{p*+1}
inline constexpr double int_U5_exp = 0.65803700647624623;    // int U^{p*} e^x
inline constexpr double int_U6_logU = -0.0859540800038303961;
inline constexpr double a1 = 0.680174761587831694;
inline constexpr double a2 = 3.46410161513775459;  // 2 sqrt(3)
inline constexpr double a3 = 0.340087380793915847;
inline constexpr double a4 = 0.0284959875337182263;
inline constexpr double a5_q4 = 0.526429605180996984;
inline constexpr double a5_hat_q7 = 0.220893233455532337;
inline constexpr double lambda1_q4 = 0.646026320417498235;
inline constexpr double lambda1_hat_q7 = 0.877382675301661641;
}  // namespace n3

inline double gamma_N(int N) { return std::pow(double(N) * (N - 2), (N - 2) / 4.0); }

// int U^s e^{cx} dx: with t = x/m it becomes gamma^s m int (2 cosh t)^{-ms} e^{cmt} dt
// = gamma^s m B((ms + cm)/2, (ms - cm)/2) / 2.
inline double beta_moment(int N, double s, double c) {
  const double m = 0.5 * (N - 2);
  return std::pow(gamma_N(N), s) * m * 0.5 * boost::math::beta(0.5 * (m * s + c * m), 0.5 * (m * s - c * m));
}

// int U^s log U, the s-derivative of beta_moment(N, s, 0).
inline double beta_log_moment(int N, double s) {
  const double m = 0.5 * (N - 2);
  using boost::math::digamma;
  return beta_moment(N, s, 0.0) * (std::log(gamma_N(N)) + m * (digamma(0.5 * m * s) - digamma(m * s)));
}

struct ConstantsOracle {
  double a1, a2, a3, a5_sub, a5_super, int_U_pstar_exp;
};

inline ConstantsOracle beta_constants(int N, double q_sub, double q_super) {
  const double ps = (N + 2.0) / (N - 2.0);
  const double beta = 4.0 / ((N - 2.0) * (N - 2.0));
  const double P1 = beta_moment(N, ps + 1.0, 0.0);
  ConstantsOracle o{};
  o.a3 = beta / (ps + 1.0) * P1;
  o.a1 = beta * (0.5 - 1.0 / (ps + 1.0)) * P1;
  o.int_U_pstar_exp = beta_moment(N, ps, 1.0);
  o.a2 = beta * gamma_N(N) * o.int_U_pstar_exp;
  o.a5_sub = beta / (q_sub + 1.0) * beta_moment(N, q_sub + 1.0, -(ps - q_sub));
  o.a5_super = beta / (q_super + 1.0) * beta_moment(N, q_super + 1.0, -(q_super - ps));
  return o;
}

// Damped Newton maximiser that only sees function values: gradient and
// Hessian by central differences, backtracking on the objective.
inline Eigen::VectorXd maximize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                double lower_bound) {
  const double hg = 1e-5;
  const double hh = 1e-4;
  for (int it = 0; it < 200; ++it) {
    const long n = x.size();
    Eigen::VectorXd g(n);
    Eigen::MatrixXd H(n, n);
    const double f0 = f(x);
    for (long i = 0; i < n; ++i) {
      Eigen::VectorXd a = x, b = x;
      a[i] += hg * x[i];
      b[i] -= hg * x[i];
      g[i] = (f(a) - f(b)) / (2.0 * hg * x[i]);
      Eigen::VectorXd c = x, d = x;
      c[i] += hh * x[i];
      d[i] -= hh * x[i];
      H(i, i) = (f(c) - 2.0 * f0 + f(d)) / (hh * x[i] * hh * x[i]);
      for (long j = 0; j < i; ++j) {
        Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
        const double si = hh * x[i], sj = hh * x[j];
        pp[i] += si; pp[j] += sj;
        pm[i] += si; pm[j] -= sj;
        mp[i] -= si; mp[j] += sj;
        mm[i] -= si; mm[j] -= sj;
        H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * si * sj);
      }
    }
    Eigen::VectorXd step = -H.ldlt().solve(g);
    if (g.dot(step) <= 0.0) step = g;  // not an ascent direction: fall back to the gradient
    double t = 1.0;
    Eigen::VectorXd next = x;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      next = x + t * step;
      if ((next.array() > lower_bound).all() && f(next) >= f0) break;
    }
    const double moved = (next - x).norm();
    x = next;
    if (moved < 1e-14 * (1.0 + x.norm())) break;
  }
  return x;
}

inline std::vector<Eigen::VectorXd> random_starts(int count, int k, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logu(std::log(0.1), std::log(10.0));
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(k);
    for (int j = 0; j < k; ++j) x[j] = std::exp(logu(rng));
    out.push_back(x);
  }
  return out;
}

}  // namespace oracle
