#pragma once

// The finite-dimensional reduced functional Psi_k, its critical point
// Lambda*, the spike locations it induces and the predicted amplitudes,
// energies and solution profiles.

#include <vector>

#include "btower/profiles.hpp"
#include "btower/quadrature.hpp"

namespace btower {

struct TowerConfig {
  std::vector<double> Lambda;
  std::vector<double> xi;
  std::vector<double> alpha;
  Regime regime = Regime::SubQ;
};

struct EnergyBreakdown {
  double total = 0.0;
  double leading = 0.0;    ///< k a1
  double psi_term = 0.0;   ///< epsilon times the O(1) Lambda-dependent coefficient
  double a4_term = 0.0;    ///< k epsilon beta a4
  double log_term = 0.0;   ///< epsilon log epsilon contribution
  double remainder = 0.0;  ///< zero for predictions
};

/// xi_1 = -log(eps)/|p*-q| - log Lambda_1, xi_{i+1} - xi_i = -log(eps) - log Lambda_{i+1}.
/// Throws DomainError for non-positive Lambda and ValidityError if the result
/// is not strictly increasing and positive.
std::vector<double> spike_locations(const std::vector<double>& Lambda, double epsilon,
                                    const ModelParams& params);

/// d xi_i / d Lambda_l (lower-triangular, -1/Lambda_l for l <= i).
std::vector<std::vector<double>> spike_jacobian(const std::vector<double>& Lambda);

double psi_k(const std::vector<double>& Lambda, const EnergyConstants& C, const ModelParams& params);
std::vector<double> grad_psi_k(const std::vector<double>& Lambda, const EnergyConstants& C,
                               const ModelParams& params);
/// Psi_k is separable, so its Hessian is diagonal; returns the diagonal.
std::vector<double> hess_psi_k_diagonal(const std::vector<double>& Lambda, const EnergyConstants& C,
                                        const ModelParams& params);

/// Closed-form maximiser of Psi_k. Throws HypothesisViolation when the
/// potential has the wrong sign for the regime.
std::vector<double> critical_lambda(const EnergyConstants& C, const ModelParams& params);

/// Amplitudes alpha_j, so that the j-th bubble has height
/// gamma_N alpha_j eps^{-+(j-1+1/|p*-q|)}.
std::vector<double> amplitudes(const std::vector<double>& Lambda_star, const EnergyConstants& C,
                               const ModelParams& params);

TowerConfig predicted_tower(const EnergyConstants& C, const ModelParams& params);

/// Asymptotic energy of the ansatz sum_i U(x - xi_i(Lambda)) to order epsilon.
EnergyBreakdown predicted_energy(const std::vector<double>& Lambda, double epsilon,
                                 const EnergyConstants& C, const ModelParams& params);

/// O(1) coefficient of epsilon in the energy expansion. Equals psi_k in the
/// SubQ regime; in the SuperQ regime the e^{-eps x} weight reverses the sign
/// of every a3 log Lambda term.
double energy_coefficient(const std::vector<double>& Lambda, const EnergyConstants& C,
                          const ModelParams& params);

/// Explicit k-bubble superposition predicted at params.epsilon.
RadialFunction predicted_solution(const ModelParams& params, const EnergyConstants& C);

/// Height of the j-th predicted bubble, gamma_N alpha_j eps^{-+(j-1+1/|p*-q|)}.
std::vector<double> predicted_heights(const ModelParams& params, const EnergyConstants& C);

}  // namespace btower
