#pragma once

// Sampled functions on a truncated line, the discrete energy and the
// operators of the Emden-Fowler equation
//
//   v'' - v + beta [ e^{+-eps x} v^{p*+eps} - omega(x) e^{-+(p*-q)x} v^q ] = 0
//
// discretised with second-order differences and homogeneous Dirichlet values
// one node past each end. The discrete energy is built so that its gradient
// with respect to the nodal values is exactly h times discrete_operator().

#include <cstddef>
#include <vector>

#include "btower/profiles.hpp"
#include "btower/quadrature.hpp"

namespace btower {

struct Grid {
  double x0 = 0.0;
  double h = 0.02;
  std::size_t n = 0;

  double x(std::size_t j) const { return x0 + h * static_cast<double>(j); }
  double x_last() const { return x(n - 1); }
};

/// Uniform grid covering [left, right] with spacing at most h.
Grid make_grid(double left, double right, double h);

struct GridFunction {
  Grid grid;
  std::vector<double> values;
  double decay = 1.0;  ///< declared e^{-decay |x|} decay towards both ends

  GridFunction() = default;
  GridFunction(Grid g, double decay_rate = 1.0)
      : grid(g), values(g.n, 0.0), decay(decay_rate) {}
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
  double& operator[](std::size_t j) { return values[j]; }
};

/// Soft check that the end values are compatible with the decay tag relative
/// to the peak: |value at end| <= slack * max|value| * e^{-decay * distance}.
bool boundary_consistent(const GridFunction& f, double slack = 10.0);

/// Discrete L^2 pairing h * sum f_j g_j.
double inner(const GridFunction& f, const GridFunction& g);

struct SpikeFrame {
  std::vector<double> xi;
  double sigma = 0.5;

  /// Throws DomainError unless 0 < sigma < min{1, p*-1, 2q-p*-1}.
  void validate(const ModelParams& params) const;
  double weight(double x) const;
};

double sigma_upper_bound(const ModelParams& params);
/// Half of sigma_upper_bound.
double default_sigma(const ModelParams& params);

/// [xi_1 - W, xi_k + W] with W = max(30, 10/sigma), widened to nodes on h*Z.
Grid tower_grid(const std::vector<double>& xi, double sigma, double h);

/// Ubar = sum_i U(x - xi_i).
GridFunction ubar(const std::vector<double>& xi, const Grid& grid, int N);
/// Z_i = U'(x - xi_i).
GridFunction kernel_direction(double xi_i, const Grid& grid, int N);

double star_norm(const GridFunction& psi, const SpikeFrame& frame);
double sup_norm(const GridFunction& psi);

/// Nodal weights of the two nonlinear terms.
struct EquationWeights {
  std::vector<double> w_p;  ///< e^{+-eps x}
  std::vector<double> w_q;  ///< omega(x) e^{-+(p*-q) x}
  double p = 0.0;           ///< p* + eps
  double q = 0.0;
  double beta = 0.0;
};
EquationWeights equation_weights(const Grid& grid, double epsilon, const ModelParams& params);

/// omega(x) = V(r(x)).
double omega(double x, const ModelParams& params);

/// Discrete E_eps(psi). Throws TruncationError if the declared decay of psi is
/// too slow for a weighted term to be integrable at the truncation ends.
double energy(const GridFunction& psi, double epsilon, const ModelParams& params);
/// Same, split as 1/2 int(psi'^2+psi^2) - beta/(p+1) int w_p|psi|^{p+1}
/// + beta/(q+1) int w_q |psi|^{q+1}.
struct EnergyParts {
  double quadratic = 0.0;
  double power_p = 0.0;
  double power_q = 0.0;
  double total() const { return quadratic + power_p + power_q; }
};
EnergyParts energy_parts(const GridFunction& psi, double epsilon, const ModelParams& params);

/// E_eps(Ubar) on the whole line by adaptive quadrature with the analytic
/// derivative of Ubar; no grid involved.
QuadResult continuum_energy(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                            double tol = 1e-11);

/// F_h(psi) = -D2 psi + psi - beta [w_p psi_+^p - w_q psi_+^q].
GridFunction discrete_operator(const GridFunction& psi, double epsilon, const ModelParams& params);

/// The residual of Ubar in closed form:
/// beta sum U_i^{p*} - beta w_p Ubar^{p} + beta w_q Ubar^q
/// (uses U_i'' = U_i - beta U_i^{p*}).
GridFunction residual_R(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                        const Grid& grid);
/// -Ubar'' + Ubar - beta[...] with Ubar'' from the analytic second derivative.
GridFunction ubar_operator_analytic(const std::vector<double>& xi, double epsilon,
                                    const ModelParams& params, const Grid& grid);

/// N^1 + N^2, the superlinear remainder of the nonlinearity around Ubar.
GridFunction nonlinear_N(const GridFunction& phi, const std::vector<double>& xi, double epsilon,
                         const ModelParams& params);

/// beta [p w_p Ubar^{p-1} - q w_q Ubar^{q-1}], the potential of L_eps.
std::vector<double> linearized_potential(const std::vector<double>& xi, double epsilon,
                                         const ModelParams& params, const Grid& grid);

/// L_eps phi = -D2 phi + phi - beta[p w_p Ubar^{p-1} - q w_q Ubar^{q-1}] phi.
GridFunction linearized_apply(const GridFunction& phi, const std::vector<double>& xi, double epsilon,
                              const ModelParams& params);

/// Degree-5 local Lagrange interpolation of grid samples with zero values
/// beyond the ends; gives value and first two derivatives.
class GridInterpolant {
 public:
  explicit GridInterpolant(GridFunction f);
  double value(double x) const { return eval(x, 0); }
  double d1(double x) const { return eval(x, 1); }
  double d2(double x) const { return eval(x, 2); }
  const GridFunction& samples() const { return f_; }

 private:
  double eval(double x, int order) const;
  double node(long j) const;
  GridFunction f_;
};

}  // namespace btower
