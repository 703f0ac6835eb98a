#include "btower/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "btower/errors.hpp"

namespace btower {

std::string_view to_string(Regime regime) {
  return regime == Regime::SubQ ? "sub" : "super";
}

Regime parse_regime(std::string_view text) {
  if (text == "sub" || text == "subq" || text == "SubQ") return Regime::SubQ;
  if (text == "super" || text == "superq" || text == "SuperQ") return Regime::SuperQ;
  throw DomainError("unknown regime '" + std::string(text) + "' (expected sub|super)");
}

PotentialSpec PotentialSpec::constant(double c) {
  PotentialSpec v;
  v.evaluator = [c](double) { return c; };
  v.V0 = c;
  v.Vinf = c;
  v.bound = std::abs(c);
  std::ostringstream os;
  os.precision(17);
  os << "const:" << c;
  v.label = os.str();
  return v;
}

PotentialSpec PotentialSpec::rational(double a, double b) {
  PotentialSpec v;
  v.evaluator = [a, b](double r) {
    const double r2 = r * r;
    // r^2/(1+r^2) written to stay finite for huge r
    return a + b / (1.0 + 1.0 / r2);
  };
  v.V0 = a;
  v.Vinf = a + b;
  v.bound = std::max(std::abs(a), std::abs(a + b));
  std::ostringstream os;
  os.precision(17);
  os << "rational:" << a << "," << b;
  v.label = os.str();
  return v;
}

PotentialSpec PotentialSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("potential preset must look like const:c or rational:a,b");
  }
  const std::string kind(text.substr(0, colon));
  const std::string args(text.substr(colon + 1));
  try {
    if (kind == "const") {
      std::size_t used = 0;
      const double c = std::stod(args, &used);
      if (used != args.size()) throw std::invalid_argument(args);
      return constant(c);
    }
    if (kind == "rational") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw std::invalid_argument(args);
      return rational(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
    }
  } catch (const std::logic_error&) {
    throw DomainError("cannot parse potential arguments '" + args + "'");
  }
  throw DomainError("unknown potential preset '" + kind + "'");
}

double ModelParams::p_s() const { return critical_exponents(N).first; }
double ModelParams::p_star() const { return critical_exponents(N).second; }
double ModelParams::gamma_N() const { return model_constants(N).gamma_N; }
double ModelParams::beta() const { return model_constants(N).beta; }
double ModelParams::half_dim() const { return 0.5 * (N - 2); }
double ModelParams::orientation() const { return regime == Regime::SubQ ? 1.0 : -1.0; }
double ModelParams::exponent_gap() const { return std::abs(p_star() - q); }
double ModelParams::potential_at_spike() const {
  return regime == Regime::SubQ ? potential.V0 : potential.Vinf;
}

void ModelParams::validate() const {
  if (N < 3) throw DomainError("dimension N must be at least 3");
  if (k < 1) throw DomainError("tower height k must be positive");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  if (!potential.evaluator) throw DomainError("potential has no evaluator");
  const auto [ps, pstar] = critical_exponents(N);
  if (regime == Regime::SubQ && !(ps < q && q < pstar)) {
    throw DomainError("regime sub requires N/(N-2) < q < (N+2)/(N-2)");
  }
  if (regime == Regime::SuperQ && !(q > pstar)) {
    throw DomainError("regime super requires q > (N+2)/(N-2)");
  }
}

void ModelParams::check_hypotheses() const {
  validate();
  if (!(epsilon > 0.0)) {
    throw HypothesisViolation("the perturbation epsilon must be strictly positive");
  }
  if (regime == Regime::SubQ && !(potential.V0 < 0.0)) {
    throw HypothesisViolation(
        "SubQ regime requires V(0) < 0 for N/(N-2) < q < (N+2)/(N-2); got V(0) = " +
        std::to_string(potential.V0));
  }
  if (regime == Regime::SuperQ && !(potential.Vinf < 0.0)) {
    throw HypothesisViolation("SuperQ regime requires lim V(r) < 0 as r -> infinity for q > (N+2)/(N-2); got V_inf = " +
                              std::to_string(potential.Vinf));
  }
}

std::pair<double, double> critical_exponents(int N) {
  if (N < 3) throw DomainError("critical exponents need N >= 3");
  const double n = N;
  return {n / (n - 2.0), (n + 2.0) / (n - 2.0)};
}

ModelConstants model_constants(int N) {
  if (N < 3) throw DomainError("model constants need N >= 3");
  const double n = N;
  return {std::pow(n * (n - 2.0), (n - 2.0) / 4.0), std::pow(2.0 / (n - 2.0), 2)};
}

double bubble_w(double lambda, std::span<const double> center, std::span<const double> y, int N) {
  if (center.size() != y.size()) throw DomainError("bubble center and point differ in dimension");
  double dist2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dist2 += (y[i] - center[i]) * (y[i] - center[i]);
  return bubble_w_radial(lambda, std::sqrt(dist2), N);
}

double bubble_w_radial(double lambda, double r, int N) {
  if (!(lambda > 0.0)) throw DomainError("bubble scale lambda must be positive");
  const double g = model_constants(N).gamma_N;
  return g * std::pow(lambda / (lambda * lambda + r * r), 0.5 * (N - 2));
}

namespace {

// log(2 cosh t) without overflow
double log_two_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

double profile_logU(double x, int N) {
  const auto [g, beta] = model_constants(N);
  (void)beta;
  const double m = 0.5 * (N - 2);
  return std::log(g) - m * log_two_cosh(x / m);
}

double profile_U(double x, int N) { return std::exp(profile_logU(x, N)); }

// U' = -tanh(2x/(N-2)) U
double profile_dU(double x, int N) {
  const double m = 0.5 * (N - 2);
  return -std::tanh(x / m) * profile_U(x, N);
}

// U'' = (tanh^2(y) - sech^2(y)/m) U with y = x/m
double profile_d2U(double x, int N) {
  const double m = 0.5 * (N - 2);
  const double t = std::tanh(x / m);
  const double sech2 = 1.0 - t * t;
  return (t * t - sech2 / m) * profile_U(x, N);
}

double ef_radius(double x, int N, Regime regime) {
  const double m = 0.5 * (N - 2);
  const double s = regime == Regime::SubQ ? -1.0 : 1.0;
  return std::exp(s * x / m);
}

double ef_coordinate(double r, int N, Regime regime) {
  const double m = 0.5 * (N - 2);
  const double s = regime == Regime::SubQ ? -1.0 : 1.0;
  return s * m * std::log(r);
}

LineFunction ef_forward(const RadialFunction& u, int N, Regime regime) {
  const double m = 0.5 * (N - 2);
  LineFunction v;
  v.eval = [u, N, regime, m](double x) {
    const double r = ef_radius(x, N, regime);
    const double val = u(r);
    if (val == 0.0) return 0.0;
    return std::exp(m * std::log(r)) * val;
  };
  // r -> 0 side decays like e^{-|x|} for bounded u; r -> inf side like e^{-(d-m)|x|/m}
  const double near_origin = 1.0;
  const double far_field = (u.decay - m) / m;
  if (regime == Regime::SubQ) {
    v.decay_right = near_origin;
    v.decay_left = far_field;
  } else {
    v.decay_left = near_origin;
    v.decay_right = far_field;
  }
  return v;
}

RadialFunction ef_inverse(const LineFunction& v, int N, Regime regime) {
  const double m = 0.5 * (N - 2);
  RadialFunction u;
  u.eval = [v, N, regime, m](double r) {
    const double x = ef_coordinate(r, N, regime);
    const double val = v(x);
    if (val == 0.0) return 0.0;
    return std::exp(-m * std::log(r)) * val;
  };
  const double far = regime == Regime::SubQ ? v.decay_left : v.decay_right;
  u.decay = m * (far + 1.0);
  return u;
}

}  // namespace btower
