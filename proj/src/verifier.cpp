#include "btower/verifier.hpp"

#include <algorithm>
#include <array>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>
#include <sstream>

#include "btower/errors.hpp"

namespace btower {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;  // (u, r u')

std::string_view to_string(ShotClass c) {
  switch (c) {
    case ShotClass::Decaying: return "decaying";
    case ShotClass::Crossing: return "crossing";
    case ShotClass::Blowing: return "blowing";
  }
  return "?";
}

namespace {

class RadialSystem {
 public:
  RadialSystem(const ModelParams& params, double p) : params_(params), p_(p) {}
  void operator()(const State& y, State& dy, double s) const {
    const double r = std::exp(s);
    const double u = std::max(y[0], 0.0);
    const double source = u > 0.0 ? std::pow(u, p_) - params_.potential(r) * std::pow(u, params_.q) : 0.0;
    dy[0] = y[1];
    dy[1] = -(params_.N - 2.0) * y[1] - r * r * source;
  }

 private:
  const ModelParams& params_;
  double p_;
};

// Tracks the EF image v = r^m u along the orbit and decides when to stop.
class Classifier {
 public:
  Classifier(const ModelParams& params, const ShootOptions& options, double u0)
      : params_(params), options_(options), u0_(u0), m_(params.half_dim()) {}

  // returns true when the orbit is classified
  bool observe(double s, const State& y) {
    const double r = std::exp(s);
    if (y[0] < 0.0) return finish(ShotClass::Crossing);
    if (y[0] > 10.0 * u0_) return finish(ShotClass::Blowing);
    const double v = std::exp(m_ * s) * y[0];
    const double slope = m_ * y[0] + y[1];  // sign of dv/ds
    const double x = ef_coordinate(r, params_.N, params_.regime);
    if (have_prev_) {
      if (prev_slope_ > 0.0 && slope <= 0.0) {
        if (static_cast<int>(peak_x.size()) >= options_.expected_peaks && !options_.ignore_blowup) {
          // a further peak after the expected ones
          return finish(ShotClass::Blowing);
        }
        peak_x.push_back(prev_x_);
        peak_v.push_back(prev_v_);
      } else if (prev_slope_ <= 0.0 && slope > 0.0 && !options_.ignore_blowup &&
                 static_cast<int>(peak_x.size()) >= options_.expected_peaks) {
        return finish(ShotClass::Blowing);
      }
    }
    if (!options_.ignore_blowup && static_cast<int>(peak_x.size()) >= options_.expected_peaks &&
        std::abs(x - peak_x.back()) >= options_.depth && slope < 0.0) {
      return finish(ShotClass::Decaying);
    }
    have_prev_ = true;
    prev_slope_ = slope;
    prev_x_ = x;
    prev_v_ = v;
    return false;
  }

  // end of the integration range without a decision
  void close(const State& y) {
    if (decided) return;
    const double slope = m_ * y[0] + y[1];
    result = (y[0] > 0.0 && (slope < 0.0 || options_.ignore_blowup)) ? ShotClass::Decaying : ShotClass::Blowing;
    decided = true;
  }

  bool decided = false;
  ShotClass result = ShotClass::Decaying;
  std::vector<double> peak_x;
  std::vector<double> peak_v;

 private:
  bool finish(ShotClass c) {
    result = c;
    decided = true;
    return true;
  }
  const ModelParams& params_;
  const ShootOptions& options_;
  double u0_;
  double m_;
  bool have_prev_ = false;
  double prev_slope_ = 0.0;
  double prev_x_ = 0.0;
  double prev_v_ = 0.0;
};

}  // namespace

ShotProfile shoot(double u0, const ModelParams& params, const ShootOptions& options) {
  if (!(u0 > 0.0)) throw DomainError("shooting needs u0 > 0");
  const double p = params.p_star() + params.epsilon;
  const int N = params.N;
  const double r0 = options.r0 > 0.0 ? options.r0 : std::min(1e-6, 1e-4 * std::pow(u0, -(p - 1.0) / 2.0));
  const double c = std::pow(u0, p) - params.potential(0.0) * std::pow(u0, params.q);

  ShotProfile prof;
  prof.u0 = u0;
  prof.epsilon = params.epsilon;
  prof.regime = params.regime;
  prof.N = N;

  const double s0 = std::log(r0);
  const double s_end = options.r_max > 0.0 ? std::log(options.r_max) : s0 + 200.0;
  State y{u0 - c * r0 * r0 / (2.0 * N), -c * r0 * r0 / N};
  const RadialSystem sys(params, p);
  Classifier cls(params, options, u0);

  auto record = [&](double s, const State& st) {
    prof.r.push_back(std::exp(s));
    prof.u.push_back(st[0]);
    prof.du.push_back(st[1] / std::exp(s));
    if (!std::isfinite(st[0]) || !std::isfinite(st[1])) {
      throw IntegrationError("radial ODE state is not finite", prof.r.size() > 1 ? prof.r[prof.r.size() - 2] : r0);
    }
    return cls.observe(s, st);
  };

  record(s0, y);
  try {
    if (options.method == ShootOptions::Method::RK4) {
      odeint::runge_kutta4<State> stepper;
      const double ds = options.rk4_step;
      double s = s0;
      for (long j = 1; s < s_end - 1e-12; ++j) {
        const double step = std::min(ds, s_end - s);
        stepper.do_step(sys, y, s, step);
        s = s0 + static_cast<double>(j) * ds;
        if (step < ds) s = s_end;
        if (record(s, y)) break;
      }
    } else {
      auto stepper = odeint::make_dense_output(options.tol, options.tol, odeint::runge_kutta_dopri5<State>());
      stepper.initialize(y, s0, options.sample_ds);
      double next = s0 + options.sample_ds;
      long j = 1;
      bool done = false;
      while (!done && next <= s_end) {
        stepper.do_step(sys);
        while (next <= stepper.current_time() && next <= s_end) {
          State st;
          stepper.calc_state(next, st);
          if (record(next, st)) {
            done = true;
            break;
          }
          ++j;
          next = s0 + static_cast<double>(j) * options.sample_ds;
        }
      }
      y = State{prof.u.back(), prof.du.back() * prof.r.back()};
    }
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("radial ODE integration failed: ") + e.what(), prof.r.back());
  }
  cls.close(y);
  prof.classification = cls.result;
  prof.peak_x = cls.peak_x;
  prof.peak_v = cls.peak_v;
  prof.peak_count_ef = static_cast<int>(cls.peak_x.size());
  prof.last_r = prof.r.back();
  return prof;
}

RadialFunction ShotProfile::radial() const {
  if (r.size() < 4) throw DomainError("shot has too few samples to interpolate");
  std::vector<double> vals(u);
  const double s0 = std::log(r.front());
  const double ds = std::log(r[1]) - s0;
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      vals.begin(), vals.end(), s0, ds);
  const double r_first = r.front();
  const double r_last = r.back();
  const double u_first = u.front();
  const double u_last = u.back();
  const double tail = N - 2.0;
  RadialFunction f;
  f.decay = tail;
  f.eval = [=](double rr) {
    if (rr <= r_first) return u_first;
    if (rr >= r_last) return u_last * std::pow(r_last / rr, tail);
    return (*spline)(std::log(rr));
  };
  return f;
}

ShotProfile find_tower(const ModelParams& params, const TowerConfig& guess, const EnergyConstants& C,
                       const TowerSearch& search, const ShootOptions& options) {
  params.check_hypotheses();
  ShootOptions opt = options;
  opt.expected_peaks = static_cast<int>(guess.xi.empty() ? params.k : guess.xi.size());
  const double predicted = predicted_solution(params, C)(0.0);

  struct Sample {
    double u0;
    ShotClass cls;
    int peaks;
  };
  std::vector<Sample> scan;
  for (int i = 0; i < search.scan_points; ++i) {
    const double t = search.scan_points > 1 ? static_cast<double>(i) / (search.scan_points - 1) : 0.0;
    const double u0 = predicted * (search.bracket_low + t * (search.bracket_high - search.bracket_low));
    const auto shot = shoot(u0, params, opt);
    if (shot.classification == ShotClass::Decaying && shot.peak_count_ef == opt.expected_peaks) return shot;
    scan.push_back({u0, shot.classification, shot.peak_count_ef});
  }
  std::size_t bracket = scan.size();
  for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
    const bool change = (scan[i].cls == ShotClass::Crossing && scan[i + 1].cls == ShotClass::Blowing) ||
                        (scan[i].cls == ShotClass::Blowing && scan[i + 1].cls == ShotClass::Crossing);
    if (change && scan[i].peaks >= opt.expected_peaks - 1 && scan[i + 1].peaks >= opt.expected_peaks - 1) {
      bracket = i;
      break;
    }
  }
  if (bracket == scan.size()) {
    std::ostringstream os;
    os << "no Crossing/Blowing change in the u0 scan around " << predicted << ":";
    for (const auto& s : scan) os << " (" << s.u0 << ", " << to_string(s.cls) << ", " << s.peaks << " peaks)";
    throw NotFoundError(os.str());
  }
  double lo = scan[bracket].u0;
  double hi = scan[bracket + 1].u0;
  const ShotClass cls_lo = scan[bracket].cls;
  ShotProfile best;
  for (int it = 0; it < search.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    best = shoot(mid, params, opt);
    if (best.classification == ShotClass::Decaying) break;
    if (best.classification == cls_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
    if ((hi - lo) <= search.rel_tol * mid) break;
  }
  if (best.classification != ShotClass::Decaying || best.peak_count_ef != opt.expected_peaks) {
    std::ostringstream os;
    os << "bisection ended at u0 = " << best.u0 << " with a " << to_string(best.classification) << " orbit and "
       << best.peak_count_ef << " EF peaks";
    throw NotFoundError(os.str());
  }
  return best;
}

namespace {

std::vector<PeakRow> local_maxima(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<PeakRow> out;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i] > f[i - 1] && f[i] >= f[i + 1]) out.push_back({t[i], f[i]});
  }
  return out;
}

CompareMetrics compare_samples(const std::vector<double>& t, const std::vector<double>& a,
                               const std::vector<double>& b) {
  CompareMetrics m;
  double amax = 0.0;
  double dmax = 0.0;
  long double a2 = 0.0L;
  long double d2 = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = a[i] - b[i];
    amax = std::max(amax, std::abs(a[i]));
    dmax = std::max(dmax, std::abs(d));
    a2 += static_cast<long double>(a[i]) * a[i];
    d2 += static_cast<long double>(d) * d;
  }
  m.sup_rel = amax > 0.0 ? dmax / amax : (dmax > 0.0 ? INFINITY : 0.0);
  m.l2_rel = a2 > 0.0L ? static_cast<double>(std::sqrt(d2 / a2)) : (d2 > 0.0L ? INFINITY : 0.0);
  m.peaks_a = local_maxima(t, a);
  m.peaks_b = local_maxima(t, b);
  return m;
}

}  // namespace

CompareMetrics compare(const std::function<double(double)>& a, const std::function<double(double)>& b, double lo,
                       double hi, int n) {
  if (!(hi > lo) || n < 2) throw DomainError("comparison window is empty");
  std::vector<double> t(n), fa(n), fb(n);
  for (int i = 0; i < n; ++i) {
    t[i] = lo + (hi - lo) * i / (n - 1);
    fa[i] = a(t[i]);
    fb[i] = b(t[i]);
  }
  return compare_samples(t, fa, fb);
}

CompareMetrics compare(const RadialFunction& a, const RadialFunction& b, double r_lo, double r_hi, int n) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || n < 2) throw DomainError("comparison window is empty");
  std::vector<double> t(n), fa(n), fb(n);
  const double l0 = std::log(r_lo);
  const double l1 = std::log(r_hi);
  for (int i = 0; i < n; ++i) {
    t[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    fa[i] = a(t[i]);
    fb[i] = b(t[i]);
  }
  return compare_samples(t, fa, fb);
}

std::function<double(double)> ef_image(const RadialFunction& u, int N, Regime regime) {
  const double m = 0.5 * (N - 2);
  return [u, N, regime, m](double x) {
    const double r = ef_radius(x, N, regime);
    return std::pow(r, m) * u(r);
  };
}

}  // namespace btower
