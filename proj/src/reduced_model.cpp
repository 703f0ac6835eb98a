#include "btower/reduced_model.hpp"

#include <cmath>
#include <string>

#include "btower/errors.hpp"

namespace btower {

namespace {

void require_positive(const std::vector<double>& Lambda) {
  if (Lambda.empty()) throw DomainError("Lambda must have at least one component");
  for (double l : Lambda) {
    if (!(l > 0.0)) throw DomainError("every Lambda_i must be positive");
  }
}

// a5 in SubQ, a5_hat in SuperQ
double potential_constant(const EnergyConstants& C, const ModelParams& params) {
  return params.regime == Regime::SubQ ? C.a5() : C.a5_hat();
}

void require_size(const std::vector<double>& Lambda, const ModelParams& params) {
  if (static_cast<int>(Lambda.size()) != params.k) {
    throw DomainError("Lambda has " + std::to_string(Lambda.size()) + " components, expected k = " +
                      std::to_string(params.k));
  }
}

}  // namespace

std::vector<double> spike_locations(const std::vector<double>& Lambda, double epsilon,
                                    const ModelParams& params) {
  require_positive(Lambda);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("spike locations need epsilon in (0, 1)");
  const double log_eps = std::log(epsilon);
  std::vector<double> xi(Lambda.size());
  xi[0] = -log_eps / params.exponent_gap() - std::log(Lambda[0]);
  for (std::size_t i = 1; i < Lambda.size(); ++i) {
    xi[i] = xi[i - 1] - log_eps - std::log(Lambda[i]);
  }
  if (!(xi[0] > 0.0)) throw ValidityError("first spike location is not positive; epsilon too large");
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (!(xi[i] > xi[i - 1])) {
      throw ValidityError("spike locations are not increasing; epsilon too large for this Lambda");
    }
  }
  return xi;
}

std::vector<std::vector<double>> spike_jacobian(const std::vector<double>& Lambda) {
  require_positive(Lambda);
  const std::size_t k = Lambda.size();
  std::vector<std::vector<double>> J(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t l = 0; l <= i; ++l) J[i][l] = -1.0 / Lambda[l];
  }
  return J;
}

double psi_k(const std::vector<double>& Lambda, const EnergyConstants& C, const ModelParams& params) {
  require_positive(Lambda);
  require_size(Lambda, params);
  const int k = params.k;
  const double g = params.exponent_gap();
  double value = C.a3 * k * std::log(Lambda[0]) +
                 potential_constant(C, params) * params.potential_at_spike() * std::pow(Lambda[0], g);
  for (int i = 2; i <= k; ++i) {
    const double l = Lambda[i - 1];
    value += (k - i + 1) * C.a3 * std::log(l) - C.a2 * l;
  }
  return value;
}

std::vector<double> grad_psi_k(const std::vector<double>& Lambda, const EnergyConstants& C,
                               const ModelParams& params) {
  require_positive(Lambda);
  require_size(Lambda, params);
  const int k = params.k;
  const double g = params.exponent_gap();
  const double c5v = potential_constant(C, params) * params.potential_at_spike();
  std::vector<double> grad(k);
  grad[0] = C.a3 * k / Lambda[0] + g * c5v * std::pow(Lambda[0], g - 1.0);
  for (int i = 2; i <= k; ++i) grad[i - 1] = (k - i + 1) * C.a3 / Lambda[i - 1] - C.a2;
  return grad;
}

std::vector<double> hess_psi_k_diagonal(const std::vector<double>& Lambda, const EnergyConstants& C,
                                        const ModelParams& params) {
  require_positive(Lambda);
  require_size(Lambda, params);
  const int k = params.k;
  const double g = params.exponent_gap();
  const double c5v = potential_constant(C, params) * params.potential_at_spike();
  std::vector<double> h(k);
  h[0] = -C.a3 * k / (Lambda[0] * Lambda[0]) + g * (g - 1.0) * c5v * std::pow(Lambda[0], g - 2.0);
  for (int i = 2; i <= k; ++i) {
    const double l = Lambda[i - 1];
    h[i - 1] = -(k - i + 1) * C.a3 / (l * l);
  }
  return h;
}

std::vector<double> critical_lambda(const EnergyConstants& C, const ModelParams& params) {
  params.validate();
  const double V = params.potential_at_spike();
  if (params.regime == Regime::SubQ && !(V < 0.0)) {
    throw HypothesisViolation("SubQ regime requires V(0) < 0 for a critical point of Psi_k");
  }
  if (params.regime == Regime::SuperQ && !(V < 0.0)) {
    throw HypothesisViolation("SuperQ regime requires V_inf < 0 for a critical point of Psi_k");
  }
  const int k = params.k;
  const double g = params.exponent_gap();
  std::vector<double> L(k);
  L[0] = std::pow(-C.a3 * k / (g * potential_constant(C, params) * V), 1.0 / g);
  for (int i = 2; i <= k; ++i) L[i - 1] = (k - i + 1) * C.a3 / C.a2;
  return L;
}

std::vector<double> amplitudes(const std::vector<double>& Lambda_star, const EnergyConstants& C,
                               const ModelParams& params) {
  require_size(Lambda_star, params);
  const int k = params.k;
  const double g = params.exponent_gap();
  const double V = params.potential_at_spike();
  const double lead = std::pow(-potential_constant(C, params) * V * g / (C.a3 * k), 1.0 / g);
  std::vector<double> alpha(k);
  // (k-j)!/(k-1)! accumulated as a running product
  double factorial_ratio = 1.0;
  double ratio_pow = 1.0;
  for (int j = 1; j <= k; ++j) {
    if (j > 1) {
      factorial_ratio /= (k - j + 1);
      ratio_pow *= C.a2 / C.a3;
    }
    alpha[j - 1] = lead * ratio_pow * factorial_ratio;
  }
  return alpha;
}

TowerConfig predicted_tower(const EnergyConstants& C, const ModelParams& params) {
  TowerConfig t;
  t.regime = params.regime;
  t.Lambda = critical_lambda(C, params);
  t.xi = spike_locations(t.Lambda, params.epsilon, params);
  t.alpha = amplitudes(t.Lambda, C, params);
  return t;
}

double energy_coefficient(const std::vector<double>& Lambda, const EnergyConstants& C,
                          const ModelParams& params) {
  if (params.regime == Regime::SubQ) return psi_k(Lambda, C, params);
  require_positive(Lambda);
  require_size(Lambda, params);
  const int k = params.k;
  double value = -C.a3 * k * std::log(Lambda[0]) +
                 C.a5_hat() * params.potential.Vinf * std::pow(Lambda[0], params.exponent_gap());
  for (int i = 2; i <= k; ++i) {
    const double l = Lambda[i - 1];
    value += -(k - i + 1) * C.a3 * std::log(l) - C.a2 * l;
  }
  return value;
}

EnergyBreakdown predicted_energy(const std::vector<double>& Lambda, double epsilon,
                                 const EnergyConstants& C, const ModelParams& params) {
  const int k = params.k;
  const double g = params.exponent_gap();
  EnergyBreakdown e;
  e.leading = k * C.a1;
  if (epsilon > 0.0) {
    e.psi_term = epsilon * energy_coefficient(Lambda, C, params);
    e.a4_term = k * epsilon * params.beta() * C.a4;
    const double coeff = C.a3 * k / (2.0 * g) * ((1 - k) * g - 2.0);
    // -coeff in SubQ; the reversed weight e^{-eps x} flips it in SuperQ
    e.log_term = -params.orientation() * coeff * epsilon * std::log(epsilon);
  }
  e.total = e.leading + e.psi_term + e.a4_term + e.log_term + e.remainder;
  return e;
}

std::vector<double> predicted_heights(const ModelParams& params, const EnergyConstants& C) {
  const auto Lambda = critical_lambda(C, params);
  const auto alpha = amplitudes(Lambda, C, params);
  const double g = params.exponent_gap();
  std::vector<double> h(params.k);
  for (int j = 1; j <= params.k; ++j) {
    const double rate = (j - 1) + 1.0 / g;
    h[j - 1] = params.gamma_N() * alpha[j - 1] * std::pow(params.epsilon, -params.orientation() * rate);
  }
  return h;
}

RadialFunction predicted_solution(const ModelParams& params, const EnergyConstants& C) {
  params.check_hypotheses();
  const auto Lambda = critical_lambda(C, params);
  const auto alpha = amplitudes(Lambda, C, params);
  const double g = params.exponent_gap();
  const double m = params.half_dim();
  std::vector<double> scale(params.k);
  for (int j = 1; j <= params.k; ++j) {
    const double rate = (j - 1) + 1.0 / g;
    scale[j - 1] = alpha[j - 1] * std::pow(params.epsilon, -params.orientation() * rate);
  }
  const double gamma = params.gamma_N();
  RadialFunction u;
  u.decay = 2.0 * m;
  u.eval = [scale, gamma, m](double r) {
    double sum = 0.0;
    for (double s : scale) sum += s * std::pow(1.0 + std::pow(s, 2.0 / m) * r * r, -m);
    return gamma * sum;
  };
  return u;
}

}  // namespace btower
