// btower_cli: constants, predictions, reductions, verification and sweeps
// for radial bubble towers.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "btower/errors.hpp"
#include "btower/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace btower;
  CLI::App app{"Bubble-tower constants, reductions and shooting checks"};
  app.set_help_flag("--help", "print this help message and exit");
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string regime = "sub";
  app.add_option("--N", cfg.params.N, "space dimension")->capture_default_str();
  app.add_option("--q", cfg.params.q, "absorption exponent")->capture_default_str();
  app.add_option("--k", cfg.params.k, "number of bubbles")->capture_default_str();
  app.add_option("--eps", cfg.params.epsilon, "supercritical excess epsilon")->capture_default_str();
  app.add_option("--V", cfg.potential_text, "potential preset const:c or rational:a,b")->capture_default_str();
  app.add_option("--regime", regime, "sub (q < p*) or super (q > p*)")
      ->check(CLI::IsMember({"sub", "super"}))
      ->capture_default_str();
  app.add_option("--h", cfg.reduction.h, "grid spacing on the Emden-Fowler line")->capture_default_str();
  app.add_option("--sigma", cfg.reduction.sigma, "star-norm decay (0 = default)")->capture_default_str();
  app.add_option("--M", cfg.reduction.M, "window constant M")->capture_default_str();
  app.add_option("--delta", cfg.reduction.delta, "Newton box [delta, 1/delta]^k")->capture_default_str();
  app.add_option("--tol-fp", cfg.reduction.tol_fp, "fixed-point tolerance")->capture_default_str();
  app.add_option("--tol-c", cfg.reduction.tol_c, "multiplier tolerance")->capture_default_str();
  app.add_option("--tol-newton", cfg.reduction.tol_newton, "Newton tolerance on grad Phi")->capture_default_str();
  app.add_option("--quad-tol", cfg.quad_tol, "quadrature tolerance")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for randomized probes")->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->envname("BTOWER_OUT")->capture_default_str();
  app.add_flag("--no-timestamp", [&](std::int64_t) { cfg.write_timestamp = false; },
               "omit the timestamp from manifest.json");

  auto* constants = app.add_subcommand("constants", "energy constants with error bounds");
  auto* predict = app.add_subcommand("predict", "critical Lambda*, spike locations, amplitudes, energy");
  auto* reduce = app.add_subcommand("reduce", "Lyapunov-Schmidt reduction and assembled solution");
  reduce->add_option("--probes", cfg.probes, "random operator-norm probes of the projected solver");
  auto* verify = app.add_subcommand("verify", "reduction plus shooting cross-check");
  auto* sweep = app.add_subcommand("sweep", "trend metrics over several epsilon values");
  sweep->add_option("--eps-list", cfg.eps_list, "decreasing epsilon values")->delimiter(',')->required();
  sweep->add_option("--workers", cfg.workers, "concurrent sweep points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.params.regime = parse_regime(regime);
    cfg.params.potential = PotentialSpec::parse(cfg.potential_text);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (*constants) cfg.command = Command::Constants;
  if (*predict) cfg.command = Command::Predict;
  if (*reduce) cfg.command = Command::Reduce;
  if (*verify) cfg.command = Command::Verify;
  if (*sweep) cfg.command = Command::Sweep;

  const auto report = run(cfg);
  for (const auto& f : report.files) std::cout << cfg.out_dir << "/" << f << "\n";
  if (report.exit_code != 0) std::cerr << report.message << "\n";
  return report.exit_code;
}
