#pragma once

#include "roa/dynamics.hpp"

namespace roa::test {

/// x' = -x on X = [-1, 1], target |x| <= eps, horizon T.
inline DynSystem decay_system(double T = 8.0, double eps = 0.1) {
  DynSystem s;
  s.vars = {"x"};
  s.f = {-Poly::variable(s.vars, 0)};
  s.X.box = {{-1.0, 1.0}};
  s.target = make_ball_set(s.vars, {0.0}, eps);
  s.horizon = T;
  return s;
}

/// theta' = w, w' = -sin(theta) - 0.5 w.
inline TrigOde pendulum_ode() {
  TrigOde ode;
  ode.states = {"theta", "w"};
  ode.angles = {"theta"};
  ode.rhs = {parse_trig_poly("w", ode.states, ode.angles),
             parse_trig_poly("-sin(theta) - 0.5*w", ode.states, ode.angles)};
  return ode;
}

/// Recast pendulum on s in [-1,1], c in [0,2], w in [-wmax, wmax].
inline DynSystem pendulum_system(double wmax = 2.0, double T = 8.0, double eps = 0.1) {
  DynSystem s = recast_trig(pendulum_ode());
  s.X.box = recast_box(s, {{"w", Interval{-wmax, wmax}}});
  s.target = make_ball_set(s.vars, std::vector<double>(s.n(), 0.0), eps);
  s.horizon = T;
  return s;
}

}  // namespace roa::test
