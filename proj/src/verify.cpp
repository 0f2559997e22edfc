#include "roa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace roa {

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::completed: return "completed";
    case ExitReason::left_X: return "left_X";
    case ExitReason::step_failure: return "step_failure";
  }
  return "unknown";
}

std::string to_string(OracleReason r) {
  switch (r) {
    case OracleReason::none: return "in_roa";
    case OracleReason::left_X: return "left_X";
    case OracleReason::missed_target: return "missed_target";
    case OracleReason::step_failure: return "step_failure";
  }
  return "unknown";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

using Vec = std::vector<double>;

void hermite(double h, double theta, const Vec& y0, const Vec& f0, const Vec& y1, const Vec& f1, Vec& out) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  }
}

}  // namespace

Trajectory integrate(const VectorField& f, std::span<const double> x0, double T, const IntegrateOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("integration horizon must be positive");
  const std::size_t n = x0.size();
  for (double v : x0) {
    if (!std::isfinite(v)) throw std::invalid_argument("initial state must be finite");
  }
  Trajectory tr;
  Vec y(x0.begin(), x0.end());
  tr.times.push_back(0.0);
  tr.states.push_back(y);
  if (opts.margin && opts.margin(y) < 0.0) {
    tr.exit_reason = ExitReason::left_X;
    return tr;
  }

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), dense(n);
  double t = 0.0;
  f(t, y, k1);

  auto norm = [&](const Vec& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      s += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(std::max<std::size_t>(n, 1)));
  };
  // Initial step (Hairer & Wanner, II.4).
  double h;
  {
    const double d0 = norm(y), d1 = norm(k1);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, T);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k1[i];
    f(t + h0, ytmp, k2);
    Vec diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = k2[i] - k1[i];
    const double d2 = norm(diff) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100 * h0, h1, T});
  }

  double err_old = 1e-4;
  bool reject = false;
  std::size_t steps = 0;
  while (t < T) {
    if (++steps > opts.max_steps || h < 1e-14 * std::max(1.0, std::abs(t))) {
      tr.exit_reason = ExitReason::step_failure;
      return tr;
    }
    if (t + h > T) h = T - t;
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    f(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    f(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(std::max<std::size_t>(n, 1)));
    if (!std::isfinite(err)) {
      h *= 0.2;
      reject = true;
      continue;
    }

    if (err <= 1.0) {
      const double t_new = (T - (t + h) < 1e-12 * T) ? T : t + h;
      if (opts.margin && opts.margin(ynew) < 0.0) {
        // Bisection on the Hermite interpolant for the first crossing.
        double lo = 0.0, hi = 1.0;
        while ((hi - lo) * h > opts.crossing_tol) {
          const double mid = 0.5 * (lo + hi);
          hermite(h, mid, y, k1, ynew, k7, dense);
          if (opts.margin(dense) < 0.0) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        hermite(h, hi, y, k1, ynew, k7, dense);
        tr.times.push_back(t + hi * h);
        tr.states.push_back(dense);
        tr.exit_reason = ExitReason::left_X;
        return tr;
      }
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);
      tr.times.push_back(t);
      tr.states.push_back(y);
      double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, 10.0);
      if (reject) fac = std::min(fac, 1.0);
      h *= fac;
      err_old = std::max(err, 1e-4);
      reject = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      reject = true;
    }
  }
  tr.exit_reason = ExitReason::completed;
  return tr;
}

namespace {

/// X margin in recast coordinates, skipping the (s, c) range bounds which
/// hold identically for mapped points.
double recast_margin(const DynSystem& sys, std::span<const double> r) {
  std::vector<bool> skip(sys.n(), false);
  if (sys.trig_map) {
    for (const auto& p : sys.trig_map->pairs) skip[p.sin_index] = skip[p.cos_index] = true;
  }
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sys.X.box.size(); ++i) {
    if (skip[i]) continue;
    m = std::min({m, r[i] - sys.X.box[i].lo, sys.X.box[i].hi - r[i]});
  }
  for (const auto& g : sys.X.inequalities) m = std::min(m, g.evaluate(r));
  return m;
}

OracleResult classify(const Trajectory& tr, double terminal_margin) {
  OracleResult res;
  res.end_time = tr.times.back();
  switch (tr.exit_reason) {
    case ExitReason::left_X: res.reason = OracleReason::left_X; return res;
    case ExitReason::step_failure: res.reason = OracleReason::step_failure; return res;
    case ExitReason::completed: break;
  }
  res.terminal_margin = terminal_margin;
  res.in_roa = terminal_margin >= -1e-9;
  res.reason = res.in_roa ? OracleReason::none : OracleReason::missed_target;
  return res;
}

}  // namespace

OracleResult roa_oracle_original(const DynSystem& sys, std::span<const double> ode_state, double T, double rtol) {
  if (!sys.trig_map) throw std::invalid_argument("system has no trigonometric map");
  const TrigMap& tm = *sys.trig_map;
  const TrigOde& ode = tm.original;
  VectorField field = [&ode](double, std::span<const double> x, std::span<double> dx) { ode.eval(x, dx); };
  IntegrateOptions io;
  io.rtol = rtol;
  io.margin = [&](std::span<const double> x) { return recast_margin(sys, tm.to_recast(x)); };
  Trajectory tr = integrate(field, ode_state, T, io);
  const auto r = tm.to_recast(tr.states.back());
  return classify(tr, tr.exit_reason == ExitReason::completed ? sys.target.margin(r) : 0.0);
}

OracleResult roa_oracle(const DynSystem& sys, std::span<const double> x0, double T, double rtol) {
  if (x0.size() != sys.n()) throw std::invalid_argument("state dimension mismatch");
  if (!sys.X.contains(x0, 1e-12)) throw std::invalid_argument("initial state outside X");
  if (sys.trig_map) {
    for (const auto& g : sys.X.equalities) {
      if (std::abs(g.evaluate(x0)) > 1e-8) throw std::invalid_argument("initial state off the equality manifold");
    }
    const auto orig = sys.trig_map->to_original(x0);
    return roa_oracle_original(sys, orig, T, rtol);
  }
  IntegrateOptions io;
  io.rtol = rtol;
  io.margin = [&](std::span<const double> x) { return sys.X.margin(x); };
  Trajectory tr = integrate(polynomial_field(sys.f), x0, T, io);
  return classify(tr, tr.exit_reason == ExitReason::completed ? sys.target.margin(tr.states.back()) : 0.0);
}

double CrossReport::outer_violation_rate() const {
  return outer_checked ? static_cast<double>(outer_violations) / static_cast<double>(outer_checked) : 0.0;
}

double CrossReport::inner_violation_rate() const {
  return inner_checked ? static_cast<double>(inner_violations) / static_cast<double>(inner_checked) : 0.0;
}

CrossReport cross_validate(const ROAApprox& outer, const std::optional<ROAApprox>& inner, const DynSystem& sys,
                           std::size_t n_samples, std::uint64_t seed, double band) {
  if (outer.vars != sys.vars || (inner && inner->vars != sys.vars)) {
    throw std::invalid_argument("approximations and system use different variables");
  }
  CrossReport rep;
  rep.seed = seed;
  rep.samples = n_samples;
  rep.band = band;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double T = sys.horizon;

  for (std::size_t s = 0; s < n_samples; ++s) {
    std::vector<double> point, x;
    OracleResult oracle;
    if (sys.trig_map) {
      const TrigMap& tm = *sys.trig_map;
      std::vector<double> th(tm.pairs.size()), om;
      for (auto& t : th) t = -std::numbers::pi + 2.0 * std::numbers::pi * unif(rng);
      for (auto r : tm.passthrough_recast) om.push_back(sys.X.box[r].lo + sys.X.box[r].width() * unif(rng));
      point = th;
      point.insert(point.end(), om.begin(), om.end());
      x = recast_point(outer, th, om);
      std::vector<double> ode(tm.original.states.size());
      for (std::size_t p = 0; p < tm.pairs.size(); ++p) {
        ode[tm.pairs[p].original_index] = th[p] - (p < tm.angle_offset.size() ? tm.angle_offset[p] : 0.0);
      }
      for (std::size_t k = 0; k < om.size(); ++k) ode[tm.passthrough_original[k]] = om[k];
      oracle = roa_oracle_original(sys, ode, T);
    } else {
      x.resize(sys.n());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = sys.X.box[i].lo + sys.X.box[i].width() * unif(rng);
      point = x;
      oracle = roa_oracle(sys, x, T);
    }
    if (oracle.reason == OracleReason::step_failure) {
      ++rep.step_failures;
      continue;
    }
    if (oracle.in_roa) ++rep.oracle_in;

    const double vo = outer.v0.evaluate(x);
    const double vi = inner ? inner->v0.evaluate(x) : 0.0;
    if (vo >= 0.0) ++rep.outer_members;
    if (inner && vi < 0.0) ++rep.inner_members;
    bool outer_bad = false, inner_bad = false;
    if (std::abs(vo) > band) {
      ++rep.outer_checked;
      outer_bad = oracle.in_roa && vo < 0.0;
    }
    if (inner && std::abs(vi) > band) {
      ++rep.inner_checked;
      inner_bad = vi < 0.0 && !oracle.in_roa;
    }
    if (outer_bad) ++rep.outer_violations;
    if (inner_bad) ++rep.inner_violations;
    for (int which = 0; which < 2; ++which) {
      if ((which == 0 && outer_bad) || (which == 1 && inner_bad)) {
        rep.witnesses.push_back({which == 0 ? "outer" : "inner", point, vo, vi, to_string(oracle.reason)});
      }
    }
  }
  if (rep.outer_checked == 0 && (!inner || rep.inner_checked == 0)) {
    throw std::runtime_error("no usable samples outside the boundary band");
  }
  return rep;
}

}  // namespace roa
