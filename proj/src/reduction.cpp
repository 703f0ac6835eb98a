#include "btower/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "btower/errors.hpp"
#include "btower/reduced_model.hpp"

namespace btower {

using SpMat = Eigen::SparseMatrix<double>;

double WindowConstraint::scale() const { return std::log(1.0 / (M * epsilon)); }

bool WindowConstraint::gaps_ok(const std::vector<double>& xi) const {
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (!(xi[i] - xi[i - 1] > scale())) return false;
  }
  return true;
}

bool WindowConstraint::top_ok(const std::vector<double>& xi) const {
  return !xi.empty() && xi.back() < k * scale();
}

namespace {

void add_operator(std::vector<Eigen::Triplet<double>>& t, const Grid& grid, const std::vector<double>& pot) {
  const double ih2 = 1.0 / (grid.h * grid.h);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const int jj = static_cast<int>(j);
    t.emplace_back(jj, jj, 2.0 * ih2 + 1.0 - pot[j]);
    if (j > 0) t.emplace_back(jj, jj - 1, -ih2);
    if (j + 1 < grid.n) t.emplace_back(jj, jj + 1, -ih2);
  }
}

double inf_norm(const SpMat& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.maxCoeff();
}

std::string describe(const char* what, const Grid& grid, std::size_t k, double detail) {
  std::ostringstream os;
  os << what << " (n = " << grid.n << ", h = " << grid.h << ", k = " << k << ", indicator = " << detail
     << "); spikes too close or grid too coarse";
  return os.str();
}

}  // namespace

ProjectedSolver::ProjectedSolver(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                                 const Grid& grid, SaddleRoute route)
    : grid_(grid), route_(route) {
  const std::size_t n = grid.n;
  const std::size_t k = xi.size();
  for (double c : xi) Z_.push_back(kernel_direction(c, grid, params.N));
  const auto pot = linearized_potential(xi, epsilon, params, grid);

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n + 2 * n * k);
  add_operator(t, grid, pot);
  if (route == SaddleRoute::Bordered) {
    for (std::size_t i = 0; i < k; ++i) {
      const int col = static_cast<int>(n + i);
      for (std::size_t j = 0; j < n; ++j) {
        const double z = Z_[i][j];
        if (z == 0.0) continue;
        t.emplace_back(static_cast<int>(j), col, -z);
        t.emplace_back(col, static_cast<int>(j), -z);
      }
    }
    A_.resize(static_cast<int>(n + k), static_cast<int>(n + k));
  } else {
    A_.resize(static_cast<int>(n), static_cast<int>(n));
  }
  A_.setFromTriplets(t.begin(), t.end());
  A_.makeCompressed();
  lu_.analyzePattern(A_);
  lu_.factorize(A_);
  if (lu_.info() != Eigen::Success) {
    throw ConditioningError(describe("saddle system factorisation failed", grid, k, 0.0));
  }
  if (route == SaddleRoute::BlockElimination) {
    Eigen::MatrixXd Z(n, k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) Z(j, i) = Z_[i][j];
    }
    X_ = lu_.solve(Z);
    schur_ = Z.transpose() * X_;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(schur_);
    const auto& sv = svd.singularValues();
    const double rcond = sv(sv.size() - 1) / sv(0);
    if (!(rcond > 1e-12)) throw ConditioningError(describe("Schur complement is singular", grid, k, rcond));
  }
}

ProjectedSolver::~ProjectedSolver() = default;

ProjectedSolution ProjectedSolver::solve(const GridFunction& h) const {
  const std::size_t n = grid_.n;
  const std::size_t k = Z_.size();
  if (h.size() != n) throw DomainError("right-hand side lives on a different grid");
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(h.values.data(), static_cast<long>(n));

  ProjectedSolution out;
  out.phi = GridFunction(grid_, h.decay);
  out.c.assign(k, 0.0);
  Eigen::VectorXd phi;
  Eigen::VectorXd c(k);
  if (route_ == SaddleRoute::Bordered) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(n + k));
    rhs.head(static_cast<long>(n)) = b;
    const Eigen::VectorXd x = lu_.solve(rhs);
    phi = x.head(static_cast<long>(n));
    c = x.tail(static_cast<long>(k));
  } else {
    const Eigen::VectorXd y = lu_.solve(b);
    Eigen::VectorXd zy(k);
    for (std::size_t i = 0; i < k; ++i) {
      zy[static_cast<long>(i)] =
          Eigen::Map<const Eigen::VectorXd>(Z_[i].values.data(), static_cast<long>(n)).dot(y);
    }
    c = -schur_.fullPivLu().solve(zy);
    phi = y + X_ * c;
  }

  // residual of the full saddle system
  Eigen::VectorXd r(static_cast<long>(n + k));
  Eigen::VectorXd Lphi;
  if (route_ == SaddleRoute::Bordered) {
    Eigen::VectorXd x(static_cast<long>(n + k));
    x << phi, c;
    r = A_ * x;
    r.head(static_cast<long>(n)) -= b;
  } else {
    Lphi = A_ * phi;
    r.head(static_cast<long>(n)) = Lphi - b;
    for (std::size_t i = 0; i < k; ++i) {
      const auto z = Eigen::Map<const Eigen::VectorXd>(Z_[i].values.data(), static_cast<long>(n));
      r.head(static_cast<long>(n)) -= c[static_cast<long>(i)] * z;
      r[static_cast<long>(n + i)] = -z.dot(phi);
    }
  }
  const double xnorm = std::max(phi.lpNorm<Eigen::Infinity>(), c.lpNorm<Eigen::Infinity>());
  const double denom = inf_norm(A_) * xnorm + b.lpNorm<Eigen::Infinity>();
  out.relative_residual = denom > 0.0 ? r.lpNorm<Eigen::Infinity>() / denom : 0.0;
  if (!phi.allFinite() || !c.allFinite() || out.relative_residual > 1e-6) {
    throw ConditioningError(describe("saddle solve is unreliable", grid_, k, out.relative_residual));
  }
  for (std::size_t j = 0; j < n; ++j) out.phi[j] = phi[static_cast<long>(j)];
  for (std::size_t i = 0; i < k; ++i) out.c[i] = c[static_cast<long>(i)];
  return out;
}

ProjectedSolution solve_projected_linear(const GridFunction& h, const std::vector<double>& xi, double epsilon,
                                         const ModelParams& params, SaddleRoute route) {
  ProjectedSolver solver(xi, epsilon, params, h.grid, route);
  return solver.solve(h);
}

double operator_norm_probe(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                           const ReductionOptions& options, int count, std::uint64_t seed) {
  const double sigma = options.sigma > 0.0 ? options.sigma : default_sigma(params);
  const SpikeFrame frame{xi, sigma};
  frame.validate(params);
  const Grid grid = tower_grid(xi, sigma, options.h);
  const ProjectedSolver T(xi, epsilon, params, grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    GridFunction h(grid, sigma);
    for (std::size_t j = 0; j < grid.n; ++j) h[j] = frame.weight(grid.x(j)) * unit(rng);
    const double norm = star_norm(h, frame);
    for (auto& v : h.values) v /= norm;
    worst = std::max(worst, star_norm(T.solve(h).phi, frame));
  }
  return worst;
}

ReductionState solve_phi(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                         const ReductionOptions& options) {
  params.validate();
  ReductionState st;
  st.xi = xi;
  st.epsilon = epsilon;
  st.sigma = options.sigma > 0.0 ? options.sigma : default_sigma(params);
  const SpikeFrame frame{xi, st.sigma};
  frame.validate(params);
  if (epsilon > 0.0) st.window_ok = WindowConstraint{options.M, epsilon, params.k}.satisfied(xi);

  const Grid grid = tower_grid(xi, st.sigma, options.h);
  const ProjectedSolver T(xi, epsilon, params, grid);
  const auto F0 = discrete_operator(ubar(xi, grid, params.N), epsilon, params);
  st.star_norm_R = star_norm(F0, frame);

  GridFunction phi(grid, st.sigma);
  double damping = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;
  ProjectedSolution step;
  for (int it = 1; it <= options.max_fp_iterations; ++it) {
    auto rhs = nonlinear_N(phi, xi, epsilon, params);
    for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] -= F0[j];
    step = T.solve(rhs);
    GridFunction next(grid, st.sigma);
    GridFunction diff(grid, st.sigma);
    for (std::size_t j = 0; j < grid.n; ++j) {
      next[j] = phi[j] + damping * (step.phi[j] - phi[j]);
      diff[j] = next[j] - phi[j];
    }
    const double inc = star_norm(diff, frame);
    if (!std::isfinite(inc)) throw DivergenceError("fixed-point iterate is not finite");
    if (inc > previous) {
      damping = 0.5;
      if (++increases >= 3) {
        throw DivergenceError("fixed-point increment grew three consecutive times (last " +
                              std::to_string(inc) + ")");
      }
    } else {
      increases = 0;
    }
    previous = inc;
    phi = std::move(next);
    st.iterations = it;
    st.last_increment = inc;
    if (inc < options.tol_fp) {
      st.converged = true;
      break;
    }
  }
  if (!st.converged) {
    throw ConvergenceError("fixed point for phi did not converge in " +
                               std::to_string(options.max_fp_iterations) + " iterations",
                           star_norm(phi, frame), st.last_increment);
  }
  // multipliers consistent with the final phi
  auto rhs = nonlinear_N(phi, xi, epsilon, params);
  for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] -= F0[j];
  st.c = T.solve(rhs).c;

  for (const auto& z : T.kernel()) st.max_orth_defect = std::max(st.max_orth_defect, std::abs(inner(z, phi)));
  st.star_norm_phi = star_norm(phi, frame);
  st.phi = std::move(phi);
  return st;
}

double reduced_energy(const std::vector<double>& Lambda, double epsilon, const ModelParams& params,
                      const ReductionOptions& options, ReductionState& state) {
  const auto xi = spike_locations(Lambda, epsilon, params);
  state = solve_phi(xi, epsilon, params, options);
  auto v = ubar(xi, state.phi.grid, params.N);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += state.phi[j];
  return energy(v, epsilon, params);
}

double reduced_energy(const std::vector<double>& Lambda, double epsilon, const ModelParams& params,
                      const ReductionOptions& options) {
  ReductionState state;
  return reduced_energy(Lambda, epsilon, params, options, state);
}

namespace {

class ReducedObjective {
 public:
  ReducedObjective(const ModelParams& params, const ReductionOptions& options)
      : params_(params), options_(options) {}

  double phi(const Eigen::VectorXd& L) const {
    try {
      return reduced_energy(to_vec(L), params_.epsilon, params_, options_) / params_.epsilon;
    } catch (const ValidityError& e) {
      throw DomainError(std::string("Newton left the admissible spike region: ") + e.what());
    }
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& L) const {
    const double s = options_.fd_step;
    Eigen::VectorXd g(L.size());
    for (long i = 0; i < L.size(); ++i) {
      Eigen::VectorXd a = L;
      Eigen::VectorXd b = L;
      a[i] += s;
      b[i] -= s;
      g[i] = (phi(a) - phi(b)) / (2.0 * s);
    }
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& L) const {
    const double s = 10.0 * options_.fd_step;
    const long k = L.size();
    Eigen::MatrixXd H(k, k);
    const double f0 = phi(L);
    for (long i = 0; i < k; ++i) {
      Eigen::VectorXd a = L;
      Eigen::VectorXd b = L;
      a[i] += s;
      b[i] -= s;
      H(i, i) = (phi(a) - 2.0 * f0 + phi(b)) / (s * s);
      for (long j = 0; j < i; ++j) {
        Eigen::VectorXd pp = L, pm = L, mp = L, mm = L;
        pp[i] += s; pp[j] += s;
        pm[i] += s; pm[j] -= s;
        mp[i] -= s; mp[j] += s;
        mm[i] -= s; mm[j] -= s;
        H(i, j) = H(j, i) = (phi(pp) - phi(pm) - phi(mp) + phi(mm)) / (4.0 * s * s);
      }
    }
    return H;
  }

  static std::vector<double> to_vec(const Eigen::VectorXd& L) { return {L.data(), L.data() + L.size()}; }

 private:
  const ModelParams& params_;
  const ReductionOptions& options_;
};

void check_box(const Eigen::VectorXd& L, double delta) {
  for (long i = 0; i < L.size(); ++i) {
    if (!(L[i] > delta && L[i] < 1.0 / delta)) {
      std::ostringstream os;
      os << "Newton iterate left the box [" << delta << ", " << 1.0 / delta << "]^k: Lambda_" << i + 1
         << " = " << L[i];
      throw DomainError(os.str());
    }
  }
}

}  // namespace

ReducedSolution solve_reduced(const ModelParams& params, const EnergyConstants& C,
                              const ReductionOptions& options) {
  params.check_hypotheses();
  ReducedSolution out;
  out.Lambda_star = critical_lambda(C, params);
  const ReducedObjective obj(params, options);

  Eigen::VectorXd L = Eigen::Map<const Eigen::VectorXd>(out.Lambda_star.data(),
                                                        static_cast<long>(out.Lambda_star.size()));
  check_box(L, options.delta);
  Eigen::VectorXd g = obj.gradient(L);
  int it = 0;
  while (g.norm() >= options.tol_newton) {
    if (++it > options.max_newton_iterations) {
      throw ConvergenceError("Newton on grad Phi_eps hit the iteration cap", L[0], g.norm());
    }
    const Eigen::VectorXd d = -obj.hessian(L).fullPivLu().solve(g);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = L + t * d;
      check_box(trial, options.delta);
      const Eigen::VectorXd gt = obj.gradient(trial);
      if (gt.norm() < g.norm()) {
        L = trial;
        g = gt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceError("line search stagnated in Newton on grad Phi_eps", L[0], g.norm());
    }
  }
  out.Lambda = ReducedObjective::to_vec(L);
  out.grad_norm = g.norm();
  out.newton_iterations = it;
  out.energy = reduced_energy(out.Lambda, params.epsilon, params, options, out.state);
  double cmax = 0.0;
  for (double c : out.state.c) cmax = std::max(cmax, std::abs(c));
  out.c_ok = cmax < options.tol_c;
  return out;
}

AssembledSolution::AssembledSolution(const ReductionState& state, const ModelParams& params)
    : v_([&] {
        auto v = ubar(state.xi, state.phi.grid, params.N);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += state.phi[j];
        return v;
      }()),
      params_(params),
      p_(params.p_star() + state.epsilon) {}

namespace {

// Clamp x away from the grid end that maps to r = 0, where the truncation
// to zero would otherwise show up.
double clamp_inner(double x, const Grid& g, Regime regime) {
  constexpr double margin = 5.0;
  if (regime == Regime::SubQ) return std::min(x, g.x_last() - margin);
  return std::max(x, g.x0 + margin);
}

}  // namespace

double AssembledSolution::u(double r) const {
  if (!(r > 0.0)) throw DomainError("assembled solution is sampled at r > 0");
  const double m = params_.half_dim();
  const double x = clamp_inner(ef_coordinate(r, params_.N, params_.regime), v_.samples().grid, params_.regime);
  const double rr = ef_radius(x, params_.N, params_.regime);
  return std::pow(rr, -m) * v_.value(x);
}

double AssembledSolution::du(double r) const {
  const double m = params_.half_dim();
  const double o = params_.orientation();
  const double x = ef_coordinate(r, params_.N, params_.regime);
  return -m * std::pow(r, -m - 1.0) * (v_.value(x) + o * v_.d1(x));
}

double AssembledSolution::d2u(double r) const {
  const double m = params_.half_dim();
  const double o = params_.orientation();
  const double x = ef_coordinate(r, params_.N, params_.regime);
  const double v = v_.value(x);
  const double v1 = v_.d1(x);
  const double v2 = v_.d2(x);
  const double rm2 = std::pow(r, -m - 2.0);
  return m * (m + 1.0) * rm2 * (v + o * v1) + m * m * rm2 * (o * v1 + v2);
}

RadialFunction AssembledSolution::radial() const {
  RadialFunction f;
  f.decay = params_.N - 2.0;
  const AssembledSolution self = *this;
  f.eval = [self](double r) { return self.u(r); };
  return f;
}

double AssembledSolution::radial_residual(double r) const {
  const double u0 = u(r);
  const double up = std::max(u0, 0.0);
  const double t1 = d2u(r);
  const double t2 = (params_.N - 1.0) / r * du(r);
  const double t3 = std::pow(up, p_);
  const double t4 = params_.potential(r) * std::pow(up, params_.q);
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);
  return scale > 0.0 ? std::abs(t1 + t2 + t3 - t4) / scale : 0.0;
}

std::vector<double> residual_radii(const ReductionState& state, const ModelParams& params, int n) {
  if (n < 2 || state.xi.empty()) throw DomainError("residual radii need n >= 2 and at least one spike");
  double lo = INFINITY;
  double hi = 0.0;
  for (double c : state.xi) {
    const double lambda = ef_radius(c, params.N, params.regime);
    lo = std::min(lo, lambda);
    hi = std::max(hi, lambda);
  }
  const double a = std::log(lo / 4.0);
  const double b = std::log(16.0 * hi);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = std::exp(a + (b - a) * i / (n - 1));
  return r;
}

double max_radial_residual(const AssembledSolution& u, const std::vector<double>& radii) {
  double worst = 0.0;
  for (double r : radii) worst = std::max(worst, u.radial_residual(r));
  return worst;
}

AssembledSolution assemble_solution(const ReductionState& state, const ModelParams& params) {
  if (!state.converged) throw AssemblyError("cannot assemble an unconverged reduction state");
  AssembledSolution sol(state, params);
  const auto& v = sol.samples();
  const double top = sup_norm(v);
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] < -1e-10 * top) {
      std::ostringstream os;
      os << "Ubar + phi is negative at x = " << v.grid.x(j) << " (value " << v[j] << ")";
      throw AssemblyError(os.str());
    }
  }
  return sol;
}

}  // namespace btower
