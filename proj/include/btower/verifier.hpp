#pragma once

// Independent check of the reduction: shooting for the radial ODE
//   u'' + (N-1)/r u' + u^{p*+eps} - V(r) u^q = 0,  u'(0) = 0,
// and comparison utilities for radial profiles.

#include <string>
#include <vector>

#include "btower/profiles.hpp"
#include "btower/reduced_model.hpp"

namespace btower {

enum class ShotClass { Decaying, Crossing, Blowing };
std::string_view to_string(ShotClass c);

struct ShootOptions {
  enum class Method { Adaptive, RK4 };
  Method method = Method::Adaptive;
  double tol = 1e-12;        ///< dopri5 absolute and relative tolerance
  double rk4_step = 0.01;    ///< fixed step in s = log r
  double r0 = 0.0;           ///< 0 selects min(1e-6, 1e-4 u0^{-(p-1)/2})
  double r_max = 0.0;        ///< hard stop; 0 means no radial cap
  int expected_peaks = 1;    ///< Blowing is only decided after this many EF peaks
  double depth = 12.0;       ///< EF distance past the last peak that counts as Decaying
  double sample_ds = 0.005;  ///< spacing of the stored samples in s
  bool ignore_blowup = false;  ///< integrate to r_max regardless of the EF image
};

struct ShotProfile {
  double u0 = 0.0;
  double epsilon = 0.0;
  Regime regime = Regime::SubQ;
  int N = 3;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  ShotClass classification = ShotClass::Decaying;
  int peak_count_ef = 0;
  std::vector<double> peak_x;  ///< EF coordinates of the peaks of v
  std::vector<double> peak_v;
  double last_r = 0.0;

  /// Cubic B-spline interpolant in s = log r over the stored samples.
  RadialFunction radial() const;
};

ShotProfile shoot(double u0, const ModelParams& params, const ShootOptions& options = {});

struct TowerSearch {
  double bracket_low = 0.5;   ///< relative to the predicted height
  double bracket_high = 1.5;
  int scan_points = 21;
  int max_bisections = 80;
  double rel_tol = 1e-15;
};

/// Bisection on u0 between Crossing and Blowing orbits with the requested
/// number of EF peaks, seeded at the predicted central height. Throws
/// NotFoundError with the scan table if no change of class is found.
ShotProfile find_tower(const ModelParams& params, const TowerConfig& guess, const EnergyConstants& C,
                       const TowerSearch& search = {}, const ShootOptions& options = {});

struct PeakRow {
  double x = 0.0;
  double height = 0.0;
};

struct CompareMetrics {
  double sup_rel = 0.0;  ///< max |a - b| / max |a|
  double l2_rel = 0.0;   ///< ||a - b||_2 / ||a||_2
  std::vector<PeakRow> peaks_a;
  std::vector<PeakRow> peaks_b;
};

/// Sampled comparison of two functions of one variable on [lo, hi] with
/// n points; throws DomainError for an empty window.
CompareMetrics compare(const std::function<double(double)>& a, const std::function<double(double)>& b, double lo,
                       double hi, int n = 2001);
/// Radial version on [r_lo, r_hi] with logarithmic sampling.
CompareMetrics compare(const RadialFunction& a, const RadialFunction& b, double r_lo, double r_hi, int n = 2001);

/// EF image x -> r^{(N-2)/2} u(r(x)) of a radial function.
std::function<double(double)> ef_image(const RadialFunction& u, int N, Regime regime);

}  // namespace btower
