#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace btower {

struct QuadResult {
  double value = 0.0;
  double err = 0.0;  ///< bound on |value - exact|, tail truncation included
};

/// Integral over the real line of f with |f(x)| <= bound * e^{-decay_left |x|}
/// for x < 0 and <= bound * e^{-decay_right x} for x > 0. The domain is cut
/// where the analytic tail falls below tol/10 and the rest is integrated by
/// adaptive Gauss-Kronrod panels. Throws ConvergenceError (with the best
/// estimate) if the requested tolerance is not met.
QuadResult integrate_line(const std::function<double(double)>& f, double bound, double decay_left,
                          double decay_right, double tol = 1e-12);

/// Integral of f over [breaks.front(), breaks.back()], adaptive Gauss-Kronrod
/// on each panel between consecutive breakpoints. Throws ConvergenceError if
/// the summed error estimate exceeds tol.
QuadResult integrate_panels(const std::function<double(double)>& f, const std::vector<double>& breaks,
                            double tol = 1e-12);

/// Integral of U^s e^{c x}, requires s > |c|.
QuadResult profile_moment(int N, double s, double c, double tol = 1e-12);

struct EnergyConstants {
  int N = 3;
  double q = 0.0;
  double a1 = 0.0;  ///< I_0(U)
  double a2 = 0.0;  ///< beta C_N int U^{p*} e^x
  double a3 = 0.0;  ///< beta/(p*+1) int U^{p*+1}
  double a4 = 0.0;  ///< 1/(p*+1)^2 int U^{p*+1} - 1/(p*+1) int U^{p*+1} log U
  double C_N = 0.0; ///< interaction coefficient, the e^{-|x|} tail amplitude of U

  /// Integrals behind the constants, kept for cross-checks.
  double int_U_pstar1 = 0.0;        ///< int U^{p*+1}
  double int_U_pstar_exp = 0.0;     ///< int U^{p*} e^x
  double int_U_pstar1_logU = 0.0;   ///< int U^{p*+1} log U
  double a1_via_identity = 0.0;     ///< beta (1/2 - 1/(p*+1)) int U^{p*+1}

  struct Errors {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0, a5_hat = 0.0;
  } err;

  std::optional<double> a5_value;      ///< present iff p^s < q < p*
  std::optional<double> a5_hat_value;  ///< present iff q > p*

  /// beta/(q+1) int e^{-(p*-q)x} U^{q+1}; throws RegimeMismatch unless q < p*.
  double a5() const;
  /// beta/(q+1) int e^{-(q-p*)x} U^{q+1}; throws RegimeMismatch unless q > p*.
  double a5_hat() const;
};

EnergyConstants energy_constants(int N, double q, double tol = 1e-12);

}  // namespace btower
