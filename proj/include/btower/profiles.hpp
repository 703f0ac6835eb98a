#pragma once

// Closed-form bubble profiles, model constants and the Emden-Fowler change
// of variables between radial functions u(r) and functions v(x) on the line.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace btower {

/// Exponent regime of the absorption power q relative to p* = (N+2)/(N-2).
/// SubQ: N/(N-2) < q < p*, towers of concentrating bubbles.
/// SuperQ: q > p*, towers of flat bubbles.
enum class Regime { SubQ, SuperQ };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view text);

/// A bounded radial potential V(r) with finite limit at infinity.
struct PotentialSpec {
  std::function<double(double)> evaluator;
  double V0 = 0.0;    ///< V(0)
  double Vinf = 0.0;  ///< lim V(r) as r -> infinity
  double bound = 0.0; ///< sup |V| on [0, inf)
  std::string label;

  double operator()(double r) const { return evaluator(r); }

  static PotentialSpec constant(double c);
  /// V(r) = a + b r^2 / (1 + r^2), so V(0) = a and V_inf = a + b.
  static PotentialSpec rational(double a, double b);
  /// Parses the presets "const:c" and "rational:a,b".
  static PotentialSpec parse(std::string_view text);
};

struct ModelParams {
  int N = 3;
  double q = 4.0;
  double epsilon = 1e-2;
  int k = 1;
  Regime regime = Regime::SubQ;
  PotentialSpec potential = PotentialSpec::constant(-1.0);

  double p_s() const;
  double p_star() const;
  double gamma_N() const;
  double beta() const;
  /// (N-2)/2, the Emden-Fowler weight exponent 2/(p*-1).
  double half_dim() const;
  /// +1 for SubQ (r = e^{-x/m}), -1 for SuperQ (r = e^{+x/m}).
  double orientation() const;
  /// |p* - q|, the exponent gap that sets the first spike location.
  double exponent_gap() const;
  /// V(0) in SubQ, V_inf in SuperQ: the potential value the first spike sees.
  double potential_at_spike() const;

  /// Structural checks: N >= 3, q inside the regime window, k >= 1,
  /// epsilon in [0, 1). Throws DomainError.
  void validate() const;
  /// Regime hypotheses on top of validate(): epsilon > 0 and the
  /// sign condition on V. Throws HypothesisViolation naming the regime.
  void check_hypotheses() const;
};

std::pair<double, double> critical_exponents(int N);

struct ModelConstants {
  double gamma_N;
  double beta;
};
ModelConstants model_constants(int N);

/// The bubble w_{lambda,xi}(y) = gamma_N (lambda / (lambda^2 + |y - xi|^2))^{(N-2)/2}.
double bubble_w(double lambda, std::span<const double> center, std::span<const double> y, int N);
/// Radial form w_{lambda,0}(r).
double bubble_w_radial(double lambda, double r, int N);

/// U(x) = gamma_N (2 cosh(2x/(N-2)))^{-(N-2)/2}, the Emden-Fowler image of w_{1,0}.
double profile_U(double x, int N);
double profile_logU(double x, int N);
double profile_dU(double x, int N);
double profile_d2U(double x, int N);

/// A radial function with a declared algebraic decay u(r) = O(r^{-decay}).
struct RadialFunction {
  std::function<double(double)> eval;
  double decay = 0.0;
  double operator()(double r) const { return eval(r); }
};

/// A function on the real line with declared exponential decay rates.
struct LineFunction {
  std::function<double(double)> eval;
  double decay_left = 1.0;
  double decay_right = 1.0;
  double operator()(double x) const { return eval(x); }
};

/// r(x) for the regime orientation.
double ef_radius(double x, int N, Regime regime);
/// x(r), the inverse of ef_radius.
double ef_coordinate(double r, int N, Regime regime);

/// v(x) = r^{(N-2)/2} u(r) with r = e^{-+ 2x/(N-2)}.
LineFunction ef_forward(const RadialFunction& u, int N, Regime regime);
/// u(r) = r^{-(N-2)/2} v(x(r)).
RadialFunction ef_inverse(const LineFunction& v, int N, Regime regime);

}  // namespace btower
