#pragma once

// Command pipelines behind the btower_cli front end. Every run writes its
// artifacts plus manifest.json into RunConfig::out_dir.

#include <cstdint>
#include <string>
#include <vector>

#include "btower/profiles.hpp"
#include "btower/reduction.hpp"

namespace btower {

enum class Command { Constants, Predict, Reduce, Verify, Sweep };
std::string_view to_string(Command c);

struct RunConfig {
  Command command = Command::Constants;
  ModelParams params;
  std::string potential_text = "const:-1";
  ReductionOptions reduction;
  double quad_tol = 1e-12;
  std::string out_dir = "btower_out";
  std::uint64_t seed = 12345;
  int probes = 0;  ///< random operator-norm probes in `reduce`
  std::vector<double> eps_list;
  int workers = 1;
  bool write_timestamp = true;
};

struct RunReport {
  int exit_code = 0;  ///< 0 ok, 2 usage, 3 hypothesis, 4 numerical failure
  std::string stage;
  std::string message;
  std::vector<std::string> files;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Executes the command; never throws for numerical or hypothesis failures
/// (they are reported through exit_code and message).
RunReport run(const RunConfig& config);

struct SweepRow {
  double epsilon = 0.0;
  bool ok = false;
  std::string error;
  double star_R = 0.0;       ///< ||R_eps||_* at xi(Lambda*)
  double star_phi = 0.0;     ///< ||phi(xi(Lambda*))||_*
  double energy_gap = 0.0;   ///< |E_eps(Ubar) - predicted_energy| / eps
  double energy_ubar = 0.0;
  double energy_predicted = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double slope_R = 0.0;
  double slope_phi = 0.0;
  double slope_energy = 0.0;
};

/// Per-epsilon metrics at Lambda* plus least-squares log-log slopes. Needs at
/// least two strictly decreasing epsilon values (UsageError otherwise). A
/// failing point is recorded in its row and left out of the fits.
SweepReport sweep(const RunConfig& config, const std::vector<double>& eps_list);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace btower
