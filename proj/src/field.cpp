#include "btower/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "btower/errors.hpp"

namespace btower {

Grid make_grid(double left, double right, double h) {
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  if (!(right > left)) throw DomainError("grid interval is empty");
  const auto cells = static_cast<std::size_t>(std::ceil((right - left) / h - 1e-9));
  Grid g;
  g.x0 = left;
  g.n = std::max<std::size_t>(cells + 1, 3);
  g.h = (right - left) / static_cast<double>(g.n - 1);
  return g;
}

bool boundary_consistent(const GridFunction& f, double slack) {
  if (f.size() < 3) return false;
  std::size_t peak = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (std::abs(f[j]) > std::abs(f[peak])) peak = j;
  }
  const double top = std::abs(f[peak]);
  if (top == 0.0) return true;
  const double xp = f.grid.x(peak);
  const double left_bound = slack * top * std::exp(-f.decay * (xp - f.grid.x0));
  const double right_bound = slack * top * std::exp(-f.decay * (f.grid.x_last() - xp));
  return std::abs(f.values.front()) <= left_bound && std::abs(f.values.back()) <= right_bound;
}

double inner(const GridFunction& f, const GridFunction& g) {
  if (f.size() != g.size()) throw DomainError("inner product of functions on different grids");
  long double s = 0.0L;
  for (std::size_t j = 0; j < f.size(); ++j) s += static_cast<long double>(f[j]) * g[j];
  return static_cast<double>(s) * f.grid.h;
}

double sigma_upper_bound(const ModelParams& params) {
  const double ps = params.p_star();
  return std::min({1.0, ps - 1.0, 2.0 * params.q - ps - 1.0});
}

double default_sigma(const ModelParams& params) { return 0.5 * sigma_upper_bound(params); }

void SpikeFrame::validate(const ModelParams& params) const {
  const double upper = sigma_upper_bound(params);
  if (!(sigma > 0.0 && sigma < upper)) {
    throw DomainError("star-norm weight sigma must lie in (0, " + std::to_string(upper) + ")");
  }
  if (xi.empty()) throw DomainError("spike frame has no spikes");
}

double SpikeFrame::weight(double x) const {
  double w = 0.0;
  for (double c : xi) w += std::exp(-sigma * std::abs(x - c));
  return w;
}

Grid tower_grid(const std::vector<double>& xi, double sigma, double h) {
  if (xi.empty()) throw DomainError("tower grid needs at least one spike");
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  const double W = std::max(30.0, 10.0 / sigma);
  // nodes on the lattice h*Z, so moving a spike never shifts the nodes
  const double first = std::floor((xi.front() - W) / h);
  const double last = std::ceil((xi.back() + W) / h);
  Grid g;
  g.x0 = first * h;
  g.h = h;
  g.n = static_cast<std::size_t>(last - first) + 1;
  return g;
}

GridFunction ubar(const std::vector<double>& xi, const Grid& grid, int N) {
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (!(xi[i] > xi[i - 1])) throw DomainError("spike locations must be increasing");
  }
  GridFunction f(grid, 1.0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    double s = 0.0;
    for (double c : xi) s += profile_U(grid.x(j) - c, N);
    f[j] = s;
  }
  return f;
}

GridFunction kernel_direction(double xi_i, const Grid& grid, int N) {
  GridFunction z(grid, 1.0);
  for (std::size_t j = 0; j < grid.n; ++j) z[j] = profile_dU(grid.x(j) - xi_i, N);
  return z;
}

double star_norm(const GridFunction& psi, const SpikeFrame& frame) {
  double best = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    best = std::max(best, std::abs(psi[j]) / frame.weight(psi.grid.x(j)));
  }
  return best;
}

double sup_norm(const GridFunction& psi) {
  double best = 0.0;
  for (double v : psi.values) best = std::max(best, std::abs(v));
  return best;
}

double omega(double x, const ModelParams& params) {
  return params.potential(ef_radius(x, params.N, params.regime));
}

EquationWeights equation_weights(const Grid& grid, double epsilon, const ModelParams& params) {
  const double s = params.orientation();
  const double gap = params.p_star() - params.q;
  EquationWeights w;
  w.p = params.p_star() + epsilon;
  w.q = params.q;
  w.beta = params.beta();
  w.w_p.resize(grid.n);
  w.w_q.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    w.w_p[j] = std::exp(s * epsilon * x);
    w.w_q[j] = omega(x, params) * std::exp(-s * gap * x);
  }
  return w;
}

namespace {

double positive_pow(double v, double e) { return v > 0.0 ? std::pow(v, e) : 0.0; }

// -D2 psi with zero values one node beyond each end
double minus_d2(const GridFunction& psi, std::size_t j) {
  const double left = j > 0 ? psi[j - 1] : 0.0;
  const double right = j + 1 < psi.size() ? psi[j + 1] : 0.0;
  const double h = psi.grid.h;
  return (2.0 * psi[j] - left - right) / (h * h);
}

void check_integrable(const GridFunction& psi, const EquationWeights& w, double epsilon,
                      const ModelParams& params) {
  // Both weights grow at most exponentially towards one end: the q-weight at
  // rate |p*-q| on the left, the p-weight at rate eps on one side.
  const double gap = std::abs(params.p_star() - params.q);
  if (!((w.q + 1.0) * psi.decay > gap)) {
    throw TruncationError("potential term is not integrable for decay rate " +
                          std::to_string(psi.decay) + " at the truncation end");
  }
  if (!((w.p + 1.0) * psi.decay > epsilon)) {
    throw TruncationError("power term is not integrable for decay rate " +
                          std::to_string(psi.decay) + " at the truncation end");
  }
}

}  // namespace

EnergyParts energy_parts(const GridFunction& psi, double epsilon, const ModelParams& params) {
  const auto w = equation_weights(psi.grid, epsilon, params);
  check_integrable(psi, w, epsilon, params);
  const double h = psi.grid.h;
  const std::size_t n = psi.size();

  long double grad = 0.0L;
  long double mass = 0.0L;
  long double pp = 0.0L;
  long double pq = 0.0L;
  double prev = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double cur = j < n ? psi[j] : 0.0;
    const double d = (cur - prev) / h;
    grad += static_cast<long double>(d) * d;
    prev = cur;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::abs(psi[j]);
    mass += static_cast<long double>(a) * a;
    if (a > 0.0) {
      pp += w.w_p[j] * std::pow(a, w.p + 1.0);
      pq += w.w_q[j] * std::pow(a, w.q + 1.0);
    }
  }
  EnergyParts e;
  e.quadratic = static_cast<double>(0.5L * h * (grad + mass));
  e.power_p = -w.beta / (w.p + 1.0) * static_cast<double>(h * pp);
  e.power_q = w.beta / (w.q + 1.0) * static_cast<double>(h * pq);
  return e;
}

double energy(const GridFunction& psi, double epsilon, const ModelParams& params) {
  return energy_parts(psi, epsilon, params).total();
}

QuadResult continuum_energy(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                            double tol) {
  if (xi.empty()) throw DomainError("continuum energy needs at least one spike");
  const int N = params.N;
  const double s = params.orientation();
  const double gap = params.p_star() - params.q;
  const double p = params.p_star() + epsilon;
  const double q = params.q;
  const double beta = params.beta();
  auto f = [&](double x) {
    double u = 0.0;
    double du = 0.0;
    for (double c : xi) {
      u += profile_U(x - c, N);
      du += profile_dU(x - c, N);
    }
    double val = 0.5 * (du * du + u * u);
    if (u > 0.0) {
      val -= beta / (p + 1.0) * std::exp(s * epsilon * x) * std::pow(u, p + 1.0);
      val += beta / (q + 1.0) * omega(x, params) * std::exp(-s * gap * x) * std::pow(u, q + 1.0);
    }
    return val;
  };
  // beyond 60 units from the outer spikes every term is below e^{-100}
  std::vector<double> breaks{xi.front() - 60.0, xi.front() - 8.0};
  for (std::size_t i = 0; i < xi.size(); ++i) {
    breaks.push_back(xi[i]);
    if (i + 1 < xi.size()) breaks.push_back(0.5 * (xi[i] + xi[i + 1]));
  }
  breaks.push_back(xi.back() + 8.0);
  breaks.push_back(xi.back() + 60.0);
  return integrate_panels(f, breaks, tol);
}

GridFunction discrete_operator(const GridFunction& psi, double epsilon, const ModelParams& params) {
  const auto w = equation_weights(psi.grid, epsilon, params);
  GridFunction out(psi.grid, psi.decay);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double v = psi[j];
    out[j] = minus_d2(psi, j) + v -
             w.beta * (w.w_p[j] * positive_pow(v, w.p) - w.w_q[j] * positive_pow(v, w.q));
  }
  return out;
}

GridFunction residual_R(const std::vector<double>& xi, double epsilon, const ModelParams& params,
                        const Grid& grid) {
  const auto w = equation_weights(grid, epsilon, params);
  const double ps = params.p_star();
  GridFunction out(grid, 1.0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    double sum = 0.0;
    double sum_crit = 0.0;
    for (double c : xi) {
      const double u = profile_U(grid.x(j) - c, params.N);
      sum += u;
      sum_crit += std::pow(u, ps);
    }
    out[j] = w.beta * (sum_crit - w.w_p[j] * positive_pow(sum, w.p) + w.w_q[j] * positive_pow(sum, w.q));
  }
  return out;
}

GridFunction ubar_operator_analytic(const std::vector<double>& xi, double epsilon,
                                    const ModelParams& params, const Grid& grid) {
  const auto w = equation_weights(grid, epsilon, params);
  GridFunction out(grid, 1.0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    double u = 0.0;
    double d2 = 0.0;
    for (double c : xi) {
      u += profile_U(grid.x(j) - c, params.N);
      d2 += profile_d2U(grid.x(j) - c, params.N);
    }
    out[j] = -d2 + u - w.beta * (w.w_p[j] * positive_pow(u, w.p) - w.w_q[j] * positive_pow(u, w.q));
  }
  return out;
}

GridFunction nonlinear_N(const GridFunction& phi, const std::vector<double>& xi, double epsilon,
                         const ModelParams& params) {
  const auto w = equation_weights(phi.grid, epsilon, params);
  const auto base = ubar(xi, phi.grid, params.N);
  GridFunction out(phi.grid, phi.decay);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double u = base[j];
    const double f = phi[j];
    const double v = u + f;
    const double n1 = positive_pow(v, w.p) - positive_pow(u, w.p) - w.p * positive_pow(u, w.p - 1.0) * f;
    const double n2 = positive_pow(v, w.q) - positive_pow(u, w.q) - w.q * positive_pow(u, w.q - 1.0) * f;
    out[j] = w.beta * (w.w_p[j] * n1 - w.w_q[j] * n2);
  }
  return out;
}

std::vector<double> linearized_potential(const std::vector<double>& xi, double epsilon,
                                         const ModelParams& params, const Grid& grid) {
  const auto w = equation_weights(grid, epsilon, params);
  const auto base = ubar(xi, grid, params.N);
  std::vector<double> pot(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double u = base[j];
    pot[j] = w.beta * (w.p * w.w_p[j] * positive_pow(u, w.p - 1.0) -
                       w.q * w.w_q[j] * positive_pow(u, w.q - 1.0));
  }
  return pot;
}

GridFunction linearized_apply(const GridFunction& phi, const std::vector<double>& xi, double epsilon,
                              const ModelParams& params) {
  const auto pot = linearized_potential(xi, epsilon, params, phi.grid);
  GridFunction out(phi.grid, phi.decay);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    out[j] = minus_d2(phi, j) + phi[j] - pot[j] * phi[j];
  }
  return out;
}

GridInterpolant::GridInterpolant(GridFunction f) : f_(std::move(f)) {
  if (f_.size() < 6) throw DomainError("interpolation needs at least six samples");
}

double GridInterpolant::node(long j) const {
  if (j < 0 || j >= static_cast<long>(f_.size())) return 0.0;
  return f_[static_cast<std::size_t>(j)];
}

double GridInterpolant::eval(double x, int order) const {
  const double h = f_.grid.h;
  const double t = (x - f_.grid.x0) / h;
  const long base = static_cast<long>(std::floor(t));
  constexpr int kPoints = 6;
  double nodes[kPoints];
  double vals[kPoints];
  for (int i = 0; i < kPoints; ++i) {
    const long j = base - 2 + i;
    nodes[i] = static_cast<double>(j) - t;  // node offset from x, in cells
    vals[i] = node(j);
  }
  // Lagrange basis and its derivatives at offset 0
  double result = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    double denom = 1.0;
    for (int a = 0; a < kPoints; ++a) {
      if (a != i) denom *= nodes[i] - nodes[a];
    }
    double num = 0.0;
    if (order == 0) {
      num = 1.0;
      for (int a = 0; a < kPoints; ++a) {
        if (a != i) num *= -nodes[a];
      }
    } else if (order == 1) {
      for (int a = 0; a < kPoints; ++a) {
        if (a == i) continue;
        double prod = 1.0;
        for (int b = 0; b < kPoints; ++b) {
          if (b != i && b != a) prod *= -nodes[b];
        }
        num += prod;
      }
    } else {
      for (int a = 0; a < kPoints; ++a) {
        if (a == i) continue;
        for (int b = 0; b < kPoints; ++b) {
          if (b == i || b == a) continue;
          double prod = 1.0;
          for (int c = 0; c < kPoints; ++c) {
            if (c != i && c != a && c != b) prod *= -nodes[c];
          }
          num += prod;
        }
      }
    }
    result += vals[i] * num / denom;
  }
  return result / std::pow(h, order);
}

}  // namespace btower
