#pragma once

// Numerical Lyapunov-Schmidt reduction on the Emden-Fowler line: the
// projected linear solver, the fixed point for phi(xi), the reduced energy
// and the outer Newton solve for the critical Lambda.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <vector>

#include "btower/field.hpp"
#include "btower/quadrature.hpp"

namespace btower {

struct ReductionOptions {
  double h = 0.01;
  double sigma = 0.0;  ///< 0 selects default_sigma(params)
  double tol_fp = 1e-10;
  double tol_orth = 1e-10;
  double tol_c = 1e-8;
  double tol_newton = 1e-8;
  int max_fp_iterations = 200;
  int max_newton_iterations = 30;
  double fd_step = 1e-4;
  double delta = 0.05;  ///< Newton box [delta, 1/delta]^k
  double M = 10.0;
};

/// log(1/(M eps)) < min gap and xi_k < k log(1/(M eps)).
struct WindowConstraint {
  double M = 10.0;
  double epsilon = 0.0;
  int k = 1;

  double scale() const;
  bool gaps_ok(const std::vector<double>& xi) const;
  bool top_ok(const std::vector<double>& xi) const;
  bool satisfied(const std::vector<double>& xi) const { return gaps_ok(xi) && top_ok(xi); }
};

struct ReductionState {
  GridFunction phi;
  std::vector<double> xi;
  std::vector<double> c;
  double sigma = 0.0;
  double epsilon = 0.0;
  double star_norm_phi = 0.0;
  double star_norm_R = 0.0;  ///< ||F_h(Ubar)||_*
  double last_increment = 0.0;
  double max_orth_defect = 0.0;
  int iterations = 0;
  bool converged = false;
  bool window_ok = false;
};

enum class SaddleRoute { Bordered, BlockElimination };

struct ProjectedSolution {
  GridFunction phi;
  std::vector<double> c;
  double relative_residual = 0.0;
};

/// Factorised saddle system
///   [ L  -Z ] [phi]   [h]
///   [-Z^T 0 ] [ c ] = [0]
/// for fixed spikes, reused across right-hand sides. Z^T phi is the nodal sum,
/// so the constraint is <Z_i, phi> = 0 up to the factor h.
class ProjectedSolver {
 public:
  ProjectedSolver(const std::vector<double>& xi, double epsilon, const ModelParams& params, const Grid& grid,
                  SaddleRoute route = SaddleRoute::Bordered);
  ~ProjectedSolver();
  ProjectedSolver(const ProjectedSolver&) = delete;
  ProjectedSolver& operator=(const ProjectedSolver&) = delete;

  /// Throws ConditioningError if the solve is unreliable.
  ProjectedSolution solve(const GridFunction& h) const;
  const Grid& grid() const { return grid_; }
  const std::vector<GridFunction>& kernel() const { return Z_; }

 private:
  Grid grid_;
  SaddleRoute route_;
  std::vector<GridFunction> Z_;
  Eigen::SparseMatrix<double> A_;  // bordered or plain L
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::MatrixXd X_;              // L^{-1} Z (block route)
  Eigen::MatrixXd schur_;          // Z^T L^{-1} Z (block route)
};

ProjectedSolution solve_projected_linear(const GridFunction& h, const std::vector<double>& xi, double epsilon,
                                         const ModelParams& params,
                                         SaddleRoute route = SaddleRoute::Bordered);

/// max ||T h||_* over `count` random h with ||h||_* = 1 (weight times
/// uniform noise), drawn from a generator seeded with `seed`.
double operator_norm_probe(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                           const ReductionOptions& options, int count, std::uint64_t seed);

/// Fixed point phi = T(N(phi) - F_h(Ubar)) on tower_grid(xi).
ReductionState solve_phi(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                         const ReductionOptions& options = {});

/// E_h(Ubar + phi(xi(Lambda))) at the given epsilon.
double reduced_energy(const std::vector<double>& Lambda, double epsilon, const ModelParams& params,
                      const ReductionOptions& options = {});
/// Same but also returns the converged state.
double reduced_energy(const std::vector<double>& Lambda, double epsilon, const ModelParams& params,
                      const ReductionOptions& options, ReductionState& state);

struct ReducedSolution {
  std::vector<double> Lambda;
  std::vector<double> Lambda_star;
  ReductionState state;
  double grad_norm = 0.0;  ///< ||grad Phi_eps|| at Lambda
  double energy = 0.0;
  int newton_iterations = 0;
  bool c_ok = false;  ///< max |c_i| < tol_c
};

/// Newton on the finite-difference gradient of Phi_eps = E/eps, started at
/// the closed-form Lambda*. Throws DomainError when an iterate leaves the box
/// and ConvergenceError on line-search stagnation or iteration cap.
ReducedSolution solve_reduced(const ModelParams& params, const EnergyConstants& C,
                              const ReductionOptions& options = {});

/// u = r^{-(N-2)/2} (Ubar + phi)(x(r)) with derivatives for residual checks.
class AssembledSolution {
 public:
  AssembledSolution(const ReductionState& state, const ModelParams& params);

  double u(double r) const;
  double du(double r) const;
  double d2u(double r) const;
  /// v = Ubar + phi on the line.
  double v(double x) const { return v_.value(x); }
  const GridFunction& samples() const { return v_.samples(); }
  RadialFunction radial() const;
  /// |u'' + (N-1)u'/r + u^p - V u^q| divided by the sum of the magnitudes
  /// of the four terms.
  double radial_residual(double r) const;

 private:
  GridInterpolant v_;
  ModelParams params_;
  double p_;
};

/// n radii spaced logarithmically from lambda_min/4 to 16 lambda_max, where
/// lambda_i = r(xi_i) is the scale of the i-th bubble.
std::vector<double> residual_radii(const ReductionState& state, const ModelParams& params, int n = 100);
double max_radial_residual(const AssembledSolution& u, const std::vector<double>& radii);

/// Throws AssemblyError when Ubar + phi is negative somewhere.
AssembledSolution assemble_solution(const ReductionState& state, const ModelParams& params);

}  // namespace btower
