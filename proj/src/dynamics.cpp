#include "roa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace roa {

VectorField polynomial_field(const std::vector<Poly>& f) {
  return [f](double, std::span<const double> x, std::span<double> dx) {
    for (std::size_t i = 0; i < f.size(); ++i) dx[i] = f[i].evaluate(x);
  };
}

Poly box_face(const std::vector<std::string>& vars, std::size_t i, const Interval& iv) {
  Poly x = Poly::variable(vars, i);
  return (x - iv.lo) * (Poly::constant(vars, iv.hi) - x);
}

std::vector<Poly> SemiAlgSet::constraint_polys(const std::vector<std::string>& vars) const {
  std::vector<Poly> out;
  if (!box.empty() && box.size() != vars.size()) throw PolyError("box dimension mismatch");
  for (std::size_t i = 0; i < box.size(); ++i) out.push_back(box_face(vars, i, box[i]));
  for (const auto& g : inequalities) out.push_back(g);
  return out;
}

double SemiAlgSet::margin(std::span<const double> x) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < box.size(); ++i) {
    m = std::min({m, x[i] - box[i].lo, box[i].hi - x[i]});
  }
  for (const auto& g : inequalities) m = std::min(m, g.evaluate(x));
  return m;
}

SemiAlgSet make_ball_set(const std::vector<std::string>& vars, std::vector<double> center, double radius) {
  if (center.size() != vars.size()) throw PolyError("ball center dimension mismatch");
  if (!(radius > 0.0)) throw PolyError("ball radius must be positive");
  Poly g = Poly::constant(vars, radius * radius);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Poly d = Poly::variable(vars, i) - center[i];
    g -= d * d;
  }
  SemiAlgSet s;
  s.inequalities.push_back(std::move(g));
  s.ball = Ball{std::move(center), radius};
  return s;
}

void TrigOde::eval(std::span<const double> x, std::span<double> dx) const {
  std::vector<double> ext(x.begin(), x.end());
  for (const auto& a : angles) {
    auto it = std::find(states.begin(), states.end(), a);
    double th = x[static_cast<std::size_t>(it - states.begin())];
    ext.push_back(std::sin(th));
    ext.push_back(std::cos(th));
  }
  for (std::size_t i = 0; i < rhs.size(); ++i) dx[i] = rhs[i].evaluate(ext);
}

std::vector<double> TrigMap::to_recast(std::span<const double> original_state) const {
  std::size_t n = passthrough_recast.size() + 2 * pairs.size();
  std::vector<double> r(n, 0.0);
  for (const auto& p : pairs) {
    double th = original_state[p.original_index];
    r[p.sin_index] = std::sin(th);
    r[p.cos_index] = 1.0 - std::cos(th);
  }
  for (std::size_t k = 0; k < passthrough_recast.size(); ++k) {
    r[passthrough_recast[k]] = original_state[passthrough_original[k]];
  }
  return r;
}

std::vector<double> TrigMap::to_original(std::span<const double> recast_state) const {
  std::vector<double> o(original.states.size(), 0.0);
  for (const auto& p : pairs) {
    o[p.original_index] = std::atan2(recast_state[p.sin_index], 1.0 - recast_state[p.cos_index]);
  }
  for (std::size_t k = 0; k < passthrough_recast.size(); ++k) {
    o[passthrough_original[k]] = recast_state[passthrough_recast[k]];
  }
  return o;
}

int DynSystem::field_degree() const {
  int d = 0;
  for (const auto& fi : f) {
    Degree deg = fi.degree();
    if (!deg.is_minus_infinity()) d = std::max(d, deg.value());
  }
  return d;
}

void DynSystem::validate() const {
  if (f.size() != vars.size()) throw PolyError("vector field length differs from state dimension");
  for (const auto& fi : f) {
    if (fi.vars() != vars) throw PolyError("vector field component over the wrong variables");
  }
  if (X.box.size() != vars.size()) throw PolyError("state box must give an interval per variable");
  for (const auto& iv : X.box) {
    if (!(iv.lo < iv.hi)) throw PolyError("state box is degenerate");
  }
  if (!target.box.empty() && target.box.size() != vars.size()) {
    throw PolyError("target box dimension mismatch");
  }
  for (const auto* set : {&X, &target}) {
    for (const auto& g : set->inequalities) {
      if (g.vars() != vars) throw PolyError("constraint polynomial over the wrong variables");
    }
    for (const auto& g : set->equalities) {
      if (g.vars() != vars) throw PolyError("constraint polynomial over the wrong variables");
    }
  }
  if (!(horizon > 0.0)) throw PolyError("horizon must be positive");
}

DynSystem recast_trig(const TrigOde& ode) {
  const std::size_t n = ode.states.size();
  if (ode.rhs.size() != n) throw PolyError("recast_trig: one right-hand side per state required");
  const auto ext = ode.extended_vars();
  for (const auto& r : ode.rhs) {
    if (r.vars() != ext) throw PolyError("recast_trig: right-hand side over the wrong variables");
  }

  auto state_index = [&](const std::string& name) {
    auto it = std::find(ode.states.begin(), ode.states.end(), name);
    if (it == ode.states.end()) throw PolyError("recast_trig: unknown angle '" + name + "'");
    return static_cast<std::size_t>(it - ode.states.begin());
  };

  // Which angles occur inside sin/cos at all.
  std::vector<bool> recast(ode.angles.size(), false);
  for (std::size_t a = 0; a < ode.angles.size(); ++a) {
    std::size_t si = n + 2 * a;
    for (const auto& r : ode.rhs) {
      for (const auto& [m, c] : r.terms()) {
        if (m[si] > 0 || m[si + 1] > 0) recast[a] = true;
      }
    }
  }

  // Angle state index -> position in ode.angles (for recast angles only).
  std::vector<int> angle_of_state(n, -1);
  for (std::size_t a = 0; a < ode.angles.size(); ++a) {
    if (recast[a]) angle_of_state[state_index(ode.angles[a])] = static_cast<int>(a);
  }

  // Recast angles must not appear bare, and their rate must be a plain state.
  std::vector<std::size_t> velocity(ode.angles.size(), 0);
  for (std::size_t a = 0; a < ode.angles.size(); ++a) {
    if (!recast[a]) continue;
    std::size_t ai = state_index(ode.angles[a]);
    for (const auto& r : ode.rhs) {
      for (const auto& [m, c] : r.terms()) {
        if (m[ai] > 0) {
          throw PolyError("recast_trig: angle '" + ode.angles[a] + "' appears outside sin/cos");
        }
      }
    }
    const Poly& rate = ode.rhs[ai];
    bool ok = rate.num_terms() == 1 && rate.terms().begin()->second == 1.0 &&
              rate.terms().begin()->first.degree() == 1;
    if (ok) {
      const auto& m = rate.terms().begin()->first;
      auto idx = static_cast<std::size_t>(std::find(m.exponents().begin(), m.exponents().end(), 1) -
                                          m.exponents().begin());
      ok = idx < n && angle_of_state[idx] < 0;
      velocity[a] = idx;
    }
    if (!ok) {
      throw PolyError("recast_trig: angle '" + ode.angles[a] +
                      "' has no paired angular-velocity state (its rate must be a single state)");
    }
  }

  auto sin_name = [&](std::size_t a) {
    return a < ode.sin_names.size() ? ode.sin_names[a] : "s_" + ode.angles[a];
  };
  auto cos_name = [&](std::size_t a) {
    return a < ode.cos_names.size() ? ode.cos_names[a] : "c_" + ode.angles[a];
  };

  DynSystem sys;
  TrigMap map;
  map.original = ode;
  std::vector<std::size_t> new_index(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int a = angle_of_state[i];
    if (a >= 0) {
      TrigPair pair;
      pair.angle = ode.angles[static_cast<std::size_t>(a)];
      pair.original_index = i;
      pair.sin_index = sys.vars.size();
      sys.vars.push_back(sin_name(static_cast<std::size_t>(a)));
      pair.cos_index = sys.vars.size();
      sys.vars.push_back(cos_name(static_cast<std::size_t>(a)));
      map.pairs.push_back(pair);
    } else {
      new_index[i] = sys.vars.size();
      map.passthrough_original.push_back(i);
      map.passthrough_recast.push_back(sys.vars.size());
      sys.vars.push_back(ode.states[i]);
    }
  }
  map.angle_offset.assign(map.pairs.size(), 0.0);

  const auto& v = sys.vars;
  std::map<std::string, Poly> assign;
  for (std::size_t i = 0; i < n; ++i) {
    if (angle_of_state[i] < 0) {
      assign.emplace(ode.states[i], Poly::variable(v, new_index[i]));
    } else {
      assign.emplace(ode.states[i], Poly(v));
    }
  }
  for (std::size_t a = 0; a < ode.angles.size(); ++a) {
    const std::string sname = "sin(" + ode.angles[a] + ")";
    const std::string cname = "cos(" + ode.angles[a] + ")";
    if (recast[a]) {
      assign.emplace(sname, Poly::variable(v, sin_name(a)));
      assign.emplace(cname, Poly::constant(v, 1.0) - Poly::variable(v, cos_name(a)));
    } else {
      assign.emplace(sname, Poly(v));
      assign.emplace(cname, Poly(v));
    }
  }

  sys.f.assign(v.size(), Poly(v));
  for (std::size_t i = 0; i < n; ++i) {
    int a = angle_of_state[i];
    if (a < 0) {
      sys.f[new_index[i]] = substitute(ode.rhs[i], assign);
      continue;
    }
    const auto& pair = *std::find_if(map.pairs.begin(), map.pairs.end(),
                                     [&](const TrigPair& p) { return p.original_index == i; });
    Poly w = Poly::variable(v, new_index[velocity[static_cast<std::size_t>(a)]]);
    Poly s = Poly::variable(v, pair.sin_index);
    Poly c = Poly::variable(v, pair.cos_index);
    sys.f[pair.sin_index] = (Poly::constant(v, 1.0) - c) * w;
    sys.f[pair.cos_index] = s * w;
    sys.X.equalities.push_back(s * s + c * c - 2.0 * c);
  }
  if (!map.pairs.empty()) sys.trig_map = std::move(map);
  return sys;
}

std::vector<Interval> recast_box(const DynSystem& sys, const std::map<std::string, Interval>& others) {
  std::vector<Interval> box(sys.n());
  std::vector<bool> done(sys.n(), false);
  if (sys.trig_map) {
    for (const auto& p : sys.trig_map->pairs) {
      box[p.sin_index] = {-1.0, 1.0};
      box[p.cos_index] = {0.0, 2.0};
      done[p.sin_index] = done[p.cos_index] = true;
    }
  }
  for (std::size_t i = 0; i < sys.n(); ++i) {
    if (done[i]) continue;
    auto it = others.find(sys.vars[i]);
    if (it == others.end()) throw PolyError("no box interval given for '" + sys.vars[i] + "'");
    box[i] = it->second;
  }
  return box;
}

std::vector<Poly> check_tangency(const DynSystem& sys) {
  std::vector<Poly> out;
  for (const auto& g : sys.X.equalities) {
    Poly r(sys.vars);
    for (std::size_t i = 0; i < sys.n(); ++i) {
      Poly dg = differentiate(g, i);
      if (!dg.is_zero()) r += dg * sys.f[i];
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool tangency_certified(const std::vector<Poly>& residuals, double tol) {
  for (const auto& r : residuals) {
    if (r.max_abs_coefficient() > tol) return false;
  }
  return true;
}

DynSystem shift_to_origin(const DynSystem& sys, const std::vector<double>& x_eq) {
  if (x_eq.size() != sys.n()) throw PolyError("shift_to_origin: equilibrium dimension mismatch");
  for (const auto& fi : sys.f) {
    if (std::abs(fi.evaluate(x_eq)) > 1e-8) {
      throw PolyError("shift_to_origin: point is not an equilibrium (|f| > 1e-8)");
    }
  }
  bool nonzero = std::any_of(x_eq.begin(), x_eq.end(), [](double v) { return v != 0.0; });
  if (sys.trig_map && nonzero) {
    throw PolyError("shift_to_origin: shift recast systems in angle coordinates before recasting");
  }
  std::map<std::string, Poly> assign;
  for (std::size_t i = 0; i < sys.n(); ++i) {
    assign.emplace(sys.vars[i], Poly::variable(sys.vars, i) + x_eq[i]);
  }
  auto shift_set = [&](const SemiAlgSet& s) {
    SemiAlgSet r;
    for (std::size_t i = 0; i < s.box.size(); ++i) {
      r.box.push_back({s.box[i].lo - x_eq[i], s.box[i].hi - x_eq[i]});
    }
    for (const auto& g : s.inequalities) r.inequalities.push_back(substitute(g, assign));
    for (const auto& g : s.equalities) r.equalities.push_back(substitute(g, assign));
    if (s.ball) {
      Ball b = *s.ball;
      for (std::size_t i = 0; i < b.center.size(); ++i) b.center[i] -= x_eq[i];
      r.ball = b;
    }
    return r;
  };
  DynSystem out = sys;
  for (auto& fi : out.f) fi = substitute(fi, assign);
  out.X = shift_set(sys.X);
  out.target = shift_set(sys.target);
  return out;
}

}  // namespace roa
