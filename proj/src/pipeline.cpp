#include "btower/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <variant>

#include "btower/errors.hpp"
#include "btower/reduced_model.hpp"
#include "btower/verifier.hpp"
#include "json.hpp"

#ifndef BTOWER_VERSION
#define BTOWER_VERSION "0.0.0"
#endif

namespace btower {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Constants: return "constants";
    case Command::Predict: return "predict";
    case Command::Reduce: return "reduce";
    case Command::Verify: return "verify";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

namespace {

using Cell = std::variant<double, std::string>;

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error("non-finite value in output");
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void check_json(const json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) throw Error("non-finite value in JSON output");
  if (j.is_structured()) {
    for (const auto& item : j) check_json(item);
  }
}

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<Cell>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ",";
        if (const auto* d = std::get_if<double>(&row[i])) {
          os << format_number(*d);
        } else {
          os << std::get<std::string>(row[i]);
        }
      }
      os << "\n";
    }
    write(name, os.str());
  }

  void json_file(const std::string& name, const json& j) {
    check_json(j);
    write(name, j.dump(2) + "\n");
  }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir_ / name).string());
    f << content;
    files_.push_back(name);
  }
  fs::path dir_;
  std::vector<std::string> files_;
};

// Runs fn and tags any library error with the stage name.
template <class F>
auto staged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const HypothesisViolation&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

json params_json(const RunConfig& cfg) {
  const auto& p = cfg.params;
  json j;
  j["N"] = p.N;
  j["q"] = p.q;
  j["k"] = p.k;
  j["epsilon"] = p.epsilon;
  j["regime"] = std::string(to_string(p.regime));
  j["V"] = cfg.potential_text;
  return j;
}

json vec(const std::vector<double>& v) { return json(v); }

json constants_json(const EnergyConstants& C) {
  json j;
  j["a1"] = {{"value", C.a1}, {"error_bound", C.err.a1}};
  j["a2"] = {{"value", C.a2}, {"error_bound", C.err.a2}};
  j["a3"] = {{"value", C.a3}, {"error_bound", C.err.a3}};
  j["a4"] = {{"value", C.a4}, {"error_bound", C.err.a4}};
  if (C.a5_value) j["a5"] = {{"value", *C.a5_value}, {"error_bound", C.err.a5}};
  if (C.a5_hat_value) j["a5_hat"] = {{"value", *C.a5_hat_value}, {"error_bound", C.err.a5_hat}};
  j["C_N"] = {{"value", C.C_N}, {"error_bound", 0.0}};
  j["integrals"] = {{"U^{p*+1}", C.int_U_pstar1},
                    {"U^{p*} e^x", C.int_U_pstar_exp},
                    {"U^{p*+1} log U", C.int_U_pstar1_logU}};
  j["a1_via_identity"] = C.a1_via_identity;
  return j;
}

json breakdown_json(const EnergyBreakdown& e) {
  return json{{"total", e.total},       {"leading", e.leading},   {"psi_term", e.psi_term},
              {"a4_term", e.a4_term},   {"log_term", e.log_term}, {"remainder", e.remainder}};
}

json state_json(const ReductionState& st) {
  json j;
  j["xi"] = vec(st.xi);
  j["c"] = vec(st.c);
  j["star_norm_phi"] = st.star_norm_phi;
  j["star_norm_R"] = st.star_norm_R;
  j["sigma"] = st.sigma;
  j["iterations"] = st.iterations;
  j["last_increment"] = st.last_increment;
  j["max_orthogonality_defect"] = st.max_orth_defect;
  j["converged"] = st.converged;
  j["window_constraint_satisfied"] = st.window_ok;
  j["grid"] = {{"x0", st.phi.grid.x0}, {"h", st.phi.grid.h}, {"n", st.phi.grid.n}};
  return j;
}

void write_profile(Artifacts& out, const std::string& name, const ReductionState& st, const ModelParams& params) {
  const auto base = ubar(st.xi, st.phi.grid, params.N);
  const double m = params.half_dim();
  std::vector<std::vector<Cell>> rows;
  rows.reserve(st.phi.size());
  for (std::size_t j = 0; j < st.phi.size(); ++j) {
    const double x = st.phi.grid.x(j);
    const double r = ef_radius(x, params.N, params.regime);
    const double v = base[j] + st.phi[j];
    rows.push_back({x, r, base[j], st.phi[j], v, std::pow(r, -m) * v});
  }
  out.csv(name, {"x", "r", "ubar", "phi", "v", "u"}, rows);
}

struct ReduceOutcome {
  ReducedSolution sol;
  double residual = 0.0;
};

ReduceOutcome reduce_stage(const RunConfig& cfg, const EnergyConstants& C) {
  ReduceOutcome r;
  r.sol = staged("reduce", [&] { return solve_reduced(cfg.params, C, cfg.reduction); });
  const auto assembled = staged("assemble", [&] { return assemble_solution(r.sol.state, cfg.params); });
  r.residual = max_radial_residual(assembled, residual_radii(r.sol.state, cfg.params));
  return r;
}

json reduce_json(const RunConfig& cfg, const ReduceOutcome& r) {
  json j;
  j["Lambda_star"] = vec(r.sol.Lambda_star);
  j["Lambda_eps"] = vec(r.sol.Lambda);
  j["grad_norm"] = r.sol.grad_norm;
  j["newton_iterations"] = r.sol.newton_iterations;
  j["energy"] = r.sol.energy;
  j["multipliers_below_tol"] = r.sol.c_ok;
  j["state"] = state_json(r.sol.state);
  j["max_radial_residual"] = r.residual;
  if (cfg.probes > 0) {
    j["operator_norm_probe"] = staged("probe", [&] {
      return operator_norm_probe(r.sol.state.xi, cfg.params.epsilon, cfg.params, cfg.reduction, cfg.probes,
                                 cfg.seed);
    });
  }
  return j;
}

SweepRow sweep_point(const RunConfig& cfg, const EnergyConstants& C, double eps) {
  SweepRow row;
  row.epsilon = eps;
  try {
    ModelParams p = cfg.params;
    p.epsilon = eps;
    p.check_hypotheses();
    const auto L = critical_lambda(C, p);
    const auto xi = spike_locations(L, eps, p);
    const double sigma = cfg.reduction.sigma > 0.0 ? cfg.reduction.sigma : default_sigma(p);
    const Grid grid = tower_grid(xi, sigma, cfg.reduction.h);
    row.star_R = star_norm(residual_R(xi, eps, p, grid), SpikeFrame{xi, sigma});
    row.star_phi = solve_phi(xi, eps, p, cfg.reduction).star_norm_phi;
    row.energy_ubar = continuum_energy(xi, eps, p).value;
    row.energy_predicted = predicted_energy(L, eps, C, p).total;
    row.energy_gap = std::abs(row.energy_ubar - row.energy_predicted) / eps;
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log slope needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("log-log slope needs distinct x values");
  return (n * sxy - sx * sy) / den;
}

SweepReport sweep(const RunConfig& cfg, const std::vector<double>& eps_list) {
  if (eps_list.size() < 2) throw UsageError("sweep needs at least two epsilon values");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw UsageError("sweep epsilon values must be strictly decreasing");
  }
  const auto C = energy_constants(cfg.params.N, cfg.params.q, cfg.quad_tol);
  SweepReport rep;
  rep.rows.resize(eps_list.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  for (std::size_t start = 0; start < eps_list.size(); start += workers) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = start; i < std::min(eps_list.size(), start + workers); ++i) {
      batch.push_back(std::async(std::launch::async, sweep_point, std::cref(cfg), std::cref(C), eps_list[i]));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) rep.rows[start + i] = batch[i].get();
  }
  std::vector<double> e, R, phi, gap;
  for (const auto& row : rep.rows) {
    if (!row.ok) continue;
    e.push_back(row.epsilon);
    R.push_back(row.star_R);
    phi.push_back(row.star_phi);
    gap.push_back(row.energy_gap);
  }
  if (e.size() >= 2) {
    rep.slope_R = loglog_slope(e, R);
    rep.slope_phi = loglog_slope(e, phi);
    rep.slope_energy = loglog_slope(e, gap);
  } else {
    rep.slope_R = rep.slope_phi = rep.slope_energy = NAN;
  }
  return rep;
}

RunReport run(const RunConfig& cfg) {
  RunReport report;
  report.stage = "config";
  std::unique_ptr<Artifacts> out;
  json results;
  try {
    cfg.params.validate();
    if (cfg.command == Command::Sweep && cfg.eps_list.size() < 2) {
      throw UsageError("sweep needs at least two epsilon values");
    }
    out = std::make_unique<Artifacts>(cfg.out_dir);

    report.stage = "constants";
    const auto C = staged("constants", [&] { return energy_constants(cfg.params.N, cfg.params.q, cfg.quad_tol); });

    switch (cfg.command) {
      case Command::Constants: {
        std::vector<std::vector<Cell>> rows{{std::string("a1"), C.a1, C.err.a1},
                                            {std::string("a2"), C.a2, C.err.a2},
                                            {std::string("a3"), C.a3, C.err.a3},
                                            {std::string("a4"), C.a4, C.err.a4}};
        if (C.a5_value) rows.push_back({std::string("a5"), *C.a5_value, C.err.a5});
        if (C.a5_hat_value) rows.push_back({std::string("a5_hat"), *C.a5_hat_value, C.err.a5_hat});
        rows.push_back({std::string("C_N"), C.C_N, 0.0});
        out->csv("constants.csv", {"name", "value", "error_bound"}, rows);
        results = constants_json(C);
        out->json_file("constants.json", results);
        break;
      }
      case Command::Predict: {
        report.stage = "predict";
        cfg.params.check_hypotheses();
        const auto tower = staged("predict", [&] { return predicted_tower(C, cfg.params); });
        results["Lambda_star"] = vec(tower.Lambda);
        results["xi"] = vec(tower.xi);
        results["alpha"] = vec(tower.alpha);
        results["heights"] = vec(predicted_heights(cfg.params, C));
        results["energy"] = breakdown_json(predicted_energy(tower.Lambda, cfg.params.epsilon, C, cfg.params));
        results["hessian_diagonal"] = vec(hess_psi_k_diagonal(tower.Lambda, C, cfg.params));
        out->json_file("predict.json", results);
        break;
      }
      case Command::Reduce: {
        report.stage = "reduce";
        cfg.params.check_hypotheses();
        const auto r = reduce_stage(cfg, C);
        results = reduce_json(cfg, r);
        out->json_file("reduce.json", results);
        write_profile(*out, "profile.csv", r.sol.state, cfg.params);
        break;
      }
      case Command::Verify: {
        report.stage = "reduce";
        cfg.params.check_hypotheses();
        const auto r = reduce_stage(cfg, C);
        report.stage = "shoot";
        const auto tower = staged("predict", [&] { return predicted_tower(C, cfg.params); });
        const auto shot = staged("shoot", [&] { return find_tower(cfg.params, tower, C); });
        report.stage = "compare";
        const auto assembled = assemble_solution(r.sol.state, cfg.params);
        const auto& xi = r.sol.state.xi;
        const auto m = compare([&](double x) { return assembled.v(x); },
                               ef_image(shot.radial(), cfg.params.N, cfg.params.regime), xi.front() - 2.0,
                               xi.back() + 2.0);
        results["reduction"] = reduce_json(cfg, r);
        const double predicted_u0 = predicted_solution(cfg.params, C)(0.0);
        json s;
        s["u0"] = shot.u0;
        s["classification"] = std::string(to_string(shot.classification));
        s["peak_count_ef"] = shot.peak_count_ef;
        s["peak_x"] = vec(shot.peak_x);
        s["peak_v"] = vec(shot.peak_v);
        s["last_r"] = shot.last_r;
        results["shot"] = s;
        json cmp;
        cmp["window"] = {xi.front() - 2.0, xi.back() + 2.0};
        cmp["sup_rel"] = m.sup_rel;
        cmp["l2_rel"] = m.l2_rel;
        json peaks = json::array();
        for (std::size_t i = 0; i < std::min(m.peaks_a.size(), m.peaks_b.size()); ++i) {
          peaks.push_back({{"x_reduction", m.peaks_a[i].x},
                           {"v_reduction", m.peaks_a[i].height},
                           {"x_shooting", m.peaks_b[i].x},
                           {"v_shooting", m.peaks_b[i].height}});
        }
        cmp["peaks"] = peaks;
        results["comparison"] = cmp;
        json pred;
        pred["xi_star"] = vec(tower.xi);
        pred["u0_predicted"] = predicted_u0;
        pred["u0_relative_discrepancy"] = std::abs(shot.u0 / predicted_u0 - 1.0);
        std::vector<double> loc;
        for (std::size_t i = 0; i < std::min(shot.peak_x.size(), tower.xi.size()); ++i) {
          // shot peaks come in order of increasing r
          const std::size_t ti = cfg.params.regime == Regime::SubQ ? tower.xi.size() - 1 - i : i;
          loc.push_back(std::abs(shot.peak_x[i] - tower.xi[ti]));
        }
        pred["peak_location_discrepancy"] = vec(loc);
        results["against_prediction"] = pred;
        out->json_file("verify.json", results);
        std::vector<std::vector<Cell>> rows;
        for (std::size_t i = 0; i < shot.r.size(); ++i) rows.push_back({shot.r[i], shot.u[i], shot.du[i]});
        out->csv("shot.csv", {"r", "u", "du"}, rows);
        break;
      }
      case Command::Sweep: {
        report.stage = "sweep";
        const auto rep = sweep(cfg, cfg.eps_list);
        std::vector<std::vector<Cell>> rows;
        json pts = json::array();
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
          const auto& row = rep.rows[i];
          json pt{{"epsilon", row.epsilon}, {"ok", row.ok}};
          if (row.ok) {
            pt["star_norm_R"] = row.star_R;
            pt["star_norm_phi"] = row.star_phi;
            pt["energy_ubar"] = row.energy_ubar;
            pt["energy_predicted"] = row.energy_predicted;
            pt["energy_gap_over_eps"] = row.energy_gap;
            rows.push_back({row.epsilon, row.star_R, row.star_phi, row.energy_ubar, row.energy_predicted,
                            row.energy_gap, std::string("ok")});
          } else {
            pt["error"] = row.error;
          }
          out->json_file("sweep_point_" + std::to_string(i) + ".json", pt);
          pts.push_back(pt);
        }
        out->csv("sweep.csv",
                 {"epsilon", "star_norm_R", "star_norm_phi", "energy_ubar", "energy_predicted",
                  "energy_gap_over_eps", "status"},
                 rows);
        results["points"] = pts;
        if (std::isfinite(rep.slope_R)) {
          results["slopes"] = {{"star_norm_R", rep.slope_R},
                               {"star_norm_phi", rep.slope_phi},
                               {"energy_gap_over_eps", rep.slope_energy}};
        } else {
          results["slopes"] = nullptr;
        }
        out->json_file("sweep.json", results);
        break;
      }
    }
    report.stage = "done";
  } catch (const UsageError& e) {
    report.exit_code = 2;
    report.message = std::string("usage error: ") + e.what();
  } catch (const HypothesisViolation& e) {
    report.exit_code = 3;
    report.message = std::string("hypothesis violated: ") + e.what();
  } catch (const StageError& e) {
    report.exit_code = 4;
    report.stage = e.stage();
    report.message = e.stage() + ": " + e.what();
  } catch (const DomainError& e) {
    report.exit_code = report.stage == "config" ? 2 : 4;
    report.message = report.stage + ": " + e.what();
  } catch (const std::exception& e) {
    report.exit_code = 4;
    report.message = report.stage + ": " + e.what();
  }

  if (out) {
    json man;
    man["tool"] = "btower";
    man["version"] = BTOWER_VERSION;
    man["command"] = std::string(to_string(cfg.command));
    if (cfg.write_timestamp) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::ostringstream ts;
      ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
      man["created_at"] = ts.str();
    }
    man["params"] = params_json(cfg);
    man["seed"] = cfg.seed;
    man["probes"] = cfg.probes;
    man["workers"] = cfg.workers;
    man["eps_list"] = vec(cfg.eps_list);
    man["grid"] = {{"h", cfg.reduction.h},
                   {"sigma", cfg.reduction.sigma > 0.0 ? cfg.reduction.sigma : default_sigma(cfg.params)},
                   {"half_width_rule", "max(30, 10/sigma)"}};
    man["tolerances"] = {{"quadrature", cfg.quad_tol},     {"fixed_point", cfg.reduction.tol_fp},
                         {"orthogonality", cfg.reduction.tol_orth}, {"multipliers", cfg.reduction.tol_c},
                         {"newton", cfg.reduction.tol_newton},  {"fd_step", cfg.reduction.fd_step}};
    man["window"] = {{"M", cfg.reduction.M}, {"delta", cfg.reduction.delta}};
    man["files"] = out->files();
    man["status"] = {{"exit_code", report.exit_code}, {"stage", report.stage}, {"message", report.message}};
    try {
      out->json_file("manifest.json", man);
    } catch (const std::exception& e) {
      report.exit_code = 4;
      report.message = std::string("manifest: ") + e.what();
    }
    report.files = out->files();
  }
  return report;
}

}  // namespace btower
