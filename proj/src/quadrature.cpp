#include "btower/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "btower/errors.hpp"
#include "btower/profiles.hpp"

namespace btower {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr unsigned kMaxDepth = 20;

// Radius beyond which bound * e^{-decay x} integrates to less than tail_tol.
double tail_radius(double bound, double decay, double tail_tol) {
  return std::max(1.0, std::log(bound / (decay * tail_tol)) / decay);
}

}  // namespace

QuadResult integrate_line(const std::function<double(double)>& f, double bound, double decay_left,
                          double decay_right, double tol) {
  if (!(decay_left > 0.0) || !(decay_right > 0.0)) {
    throw DomainError("integrate_line needs positive decay rates");
  }
  if (!(tol > 0.0)) throw DomainError("integrate_line needs a positive tolerance");
  bound = std::max(bound, std::numeric_limits<double>::min());

  const double tail_tol = tol / 20.0;  // per side, so both tails stay below tol/10
  const double left = tail_radius(bound, decay_left, tail_tol);
  const double right = tail_radius(bound, decay_right, tail_tol);
  const double tail = bound * (std::exp(-decay_left * left) / decay_left +
                               std::exp(-decay_right * right) / decay_right);

  // scale estimate so the relative Kronrod tolerance maps onto an absolute one
  double l1_guess = 0.0;
  Kronrod::integrate(f, -left, 0.0, 0, 1.0, nullptr, &l1_guess);
  double l1_right = 0.0;
  Kronrod::integrate(f, 0.0, right, 0, 1.0, nullptr, &l1_right);
  l1_guess = std::max(l1_guess + l1_right, std::numeric_limits<double>::min());

  const double panel_tol = 0.4 * (tol - tail);
  const double rel = std::max(panel_tol / l1_guess, 2.0 * std::numeric_limits<double>::epsilon());

  double err_left = 0.0;
  double err_right = 0.0;
  const double vl = Kronrod::integrate(f, -left, 0.0, kMaxDepth, rel, &err_left);
  const double vr = Kronrod::integrate(f, 0.0, right, kMaxDepth, rel, &err_right);

  QuadResult out{vl + vr, err_left + err_right + tail};
  if (!std::isfinite(out.value)) throw DomainError("integrand is not finite on the line");
  if (out.err > tol) {
    throw ConvergenceError("integrate_line: tolerance " + std::to_string(tol) +
                               " not reached (error bound " + std::to_string(out.err) + ")",
                           out.value, out.err);
  }
  return out;
}

QuadResult integrate_panels(const std::function<double(double)>& f, const std::vector<double>& breaks,
                            double tol) {
  if (breaks.size() < 2) throw DomainError("integrate_panels needs at least two breakpoints");
  if (!(tol > 0.0)) throw DomainError("integrate_panels needs a positive tolerance");
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) throw DomainError("breakpoints must be increasing");
  }
  double scale = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    double l1 = 0.0;
    Kronrod::integrate(f, breaks[i - 1], breaks[i], 0, 1.0, nullptr, &l1);
    scale += l1;
  }
  scale = std::max(scale, std::numeric_limits<double>::min());
  const double panels = static_cast<double>(breaks.size() - 1);
  const double rel = std::max(0.5 * tol / (panels * scale), 2.0 * std::numeric_limits<double>::epsilon());
  QuadResult out;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    double e = 0.0;
    out.value += Kronrod::integrate(f, breaks[i - 1], breaks[i], kMaxDepth, rel, &e);
    out.err += e;
  }
  if (!std::isfinite(out.value)) throw DomainError("integrand is not finite on the panels");
  if (out.err > tol) {
    throw ConvergenceError("integrate_panels: tolerance " + std::to_string(tol) + " not reached",
                           out.value, out.err);
  }
  return out;
}

QuadResult profile_moment(int N, double s, double c, double tol) {
  if (!(s > std::abs(c))) throw DomainError("profile_moment needs s > |c|");
  const double g = model_constants(N).gamma_N;
  auto f = [N, s, c](double x) { return std::exp(s * profile_logU(x, N) + c * x); };
  // U <= gamma e^{-|x|}
  return integrate_line(f, std::pow(g, s), s + c, s - c, tol);
}

double EnergyConstants::a5() const {
  if (!a5_value) {
    throw RegimeMismatch("a5 is only defined for N/(N-2) < q < (N+2)/(N-2)");
  }
  return *a5_value;
}

double EnergyConstants::a5_hat() const {
  if (!a5_hat_value) throw RegimeMismatch("a5_hat is only defined for q > (N+2)/(N-2)");
  return *a5_hat_value;
}

EnergyConstants energy_constants(int N, double q, double tol) {
  const auto [ps, pstar] = critical_exponents(N);
  if (!(q > ps)) throw DomainError("energy constants need q > N/(N-2)");
  const auto [g, beta] = model_constants(N);
  const double m = 0.5 * (N - 2);

  EnergyConstants C;
  C.N = N;
  C.q = q;
  C.C_N = g;

  const auto pow_p1 = profile_moment(N, pstar + 1.0, 0.0, tol);
  const auto pow_p_exp = profile_moment(N, pstar, 1.0, tol);
  C.int_U_pstar1 = pow_p1.value;
  C.int_U_pstar_exp = pow_p_exp.value;

  // |log U| <= |log gamma| + m log 2 + |x| and |x| e^{-|x|/2} <= 2/e
  const double s = pstar + 1.0;
  const double log_bound = std::abs(std::log(g)) + m * std::log(2.0) + 2.0 / std::exp(1.0);
  const auto log_moment = integrate_line(
      [N, s](double x) {
        const double lu = profile_logU(x, N);
        return std::exp(s * lu) * lu;
      },
      std::pow(g, s) * log_bound, s - 0.5, s - 0.5, tol);
  C.int_U_pstar1_logU = log_moment.value;

  // I_0(U) = 1/2 int (U'^2 + U^2) - beta/(p*+1) int U^{p*+1}
  const auto grad_part = integrate_line(
      [N](double x) {
        const double u = profile_U(x, N);
        const double du = profile_dU(x, N);
        return 0.5 * (du * du + u * u);
      },
      g * g, 2.0, 2.0, tol);

  C.a3 = beta / (pstar + 1.0) * pow_p1.value;
  C.err.a3 = beta / (pstar + 1.0) * pow_p1.err;
  C.a1 = grad_part.value - C.a3;
  C.err.a1 = grad_part.err + C.err.a3;
  C.a1_via_identity = beta * (0.5 - 1.0 / (pstar + 1.0)) * pow_p1.value;
  C.a2 = beta * C.C_N * pow_p_exp.value;
  C.err.a2 = beta * C.C_N * pow_p_exp.err;
  const double inv = 1.0 / (pstar + 1.0);
  C.a4 = inv * inv * pow_p1.value - inv * log_moment.value;
  C.err.a4 = inv * inv * pow_p1.err + inv * log_moment.err;

  if (q < pstar) {
    const auto r = profile_moment(N, q + 1.0, -(pstar - q), tol);
    C.a5_value = beta / (q + 1.0) * r.value;
    C.err.a5 = beta / (q + 1.0) * r.err;
  } else if (q > pstar) {
    const auto r = profile_moment(N, q + 1.0, -(q - pstar), tol);
    C.a5_hat_value = beta / (q + 1.0) * r.value;
    C.err.a5_hat = beta / (q + 1.0) * r.err;
  }
  return C;
}

}  // namespace btower
