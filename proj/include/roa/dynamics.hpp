#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roa/polynomial.hpp"

namespace roa {

/// Autonomous or time-dependent vector field dx = F(t, x).
using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

VectorField polynomial_field(const std::vector<Poly>& f);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

/// Euclidean ball {x : radius^2 - |x - center|^2 >= 0}.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// Basic semialgebraic set: optional box, polynomial inequalities g >= 0,
/// and polynomial equalities g = 0. When `ball` is set, its defining
/// polynomial is also present in `inequalities`; the field only records the
/// shape so that the set can be sampled directly.
struct SemiAlgSet {
  std::vector<Interval> box;
  std::vector<Poly> inequalities;
  std::vector<Poly> equalities;
  std::optional<Ball> ball;

  /// Box faces (x_i - a_i)(b_i - x_i) followed by `inequalities`.
  std::vector<Poly> constraint_polys(const std::vector<std::string>& vars) const;
  /// Smallest constraint value at x (box margins and inequalities); >= 0 inside.
  double margin(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = 0.0) const { return margin(x) >= -tol; }
};

SemiAlgSet make_ball_set(const std::vector<std::string>& vars, std::vector<double> center, double radius);

/// Box face polynomial (x_i - lo)(hi - x_i).
Poly box_face(const std::vector<std::string>& vars, std::size_t i, const Interval& iv);

/// Trigonometric ODE: right-hand sides polynomial in the states and in
/// sin/cos of the angle states. `rhs[i]` lives over
/// trig_placeholder_vars(states, angles).
struct TrigOde {
  std::vector<std::string> states;
  std::vector<std::string> angles;
  std::vector<Poly> rhs;
  /// Names for the recast pair of each angle; defaults to s_<a>, c_<a>.
  std::vector<std::string> sin_names;
  std::vector<std::string> cos_names;

  std::vector<std::string> extended_vars() const { return trig_placeholder_vars(states, angles); }
  /// Evaluates the right-hand side at a state vector (angles in radians).
  void eval(std::span<const double> x, std::span<double> dx) const;
};

/// One recast angle: the indices of its (s, c) pair in the recast state and
/// of the angle in the original ODE.
struct TrigPair {
  std::string angle;
  std::size_t sin_index = 0;
  std::size_t cos_index = 0;
  std::size_t original_index = 0;
};

struct TrigMap {
  std::vector<TrigPair> pairs;
  /// Physical angle = ODE angle + offset (nonzero after an equilibrium shift).
  std::vector<double> angle_offset;
  TrigOde original;
  /// recast state index of every non-angle original state, in original order.
  std::vector<std::size_t> passthrough_recast;
  std::vector<std::size_t> passthrough_original;

  /// Original state (ODE coordinates) -> recast state.
  std::vector<double> to_recast(std::span<const double> original_state) const;
  /// Recast state -> original state via atan2; valid on the manifold.
  std::vector<double> to_original(std::span<const double> recast_state) const;
};

struct DynSystem {
  std::vector<std::string> vars;
  std::vector<Poly> f;
  SemiAlgSet X;
  SemiAlgSet target;
  double horizon = 1.0;
  std::optional<TrigMap> trig_map;

  std::size_t n() const { return vars.size(); }
  /// Polynomial degree of the vector field (max over components).
  int field_degree() const;
  /// Throws if f, X and target are inconsistent with `vars`.
  void validate() const;
};

/// Replaces each angle a appearing inside sin/cos by s = sin(a), c = 1 - cos(a)
/// with s' = (1 - c) w, c' = s w (w the state driving a), and appends the
/// equality s^2 + c^2 - 2c = 0. Angles without trigonometric occurrences are
/// left untouched. The returned system has an empty box and target; callers
/// fill them in.
DynSystem recast_trig(const TrigOde& ode);

/// Box with s in [-1, 1] and c in [0, 2] for recast pairs (the exact range
/// of the recasting map); every other variable is looked up in `others`.
std::vector<Interval> recast_box(const DynSystem& sys, const std::map<std::string, Interval>& others);

/// (grad g) . f for every equality g of sys.X.
std::vector<Poly> check_tangency(const DynSystem& sys);
bool tangency_certified(const std::vector<Poly>& residuals, double tol = 1e-12);

/// y = x - x_eq. Requires |f_i(x_eq)| <= 1e-8.
DynSystem shift_to_origin(const DynSystem& sys, const std::vector<double>& x_eq);

}  // namespace roa
