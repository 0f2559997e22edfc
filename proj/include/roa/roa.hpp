#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/hierarchy.hpp"

namespace roa {

/// Level-set approximation of the ROA: outer = {v0 >= 0}, inner = {v0 < 0}.
struct ROAApprox {
  Mode mode = Mode::outer;
  std::vector<std::string> vars;
  Poly v0;
  std::vector<Poly> manifold;
  std::optional<TrigMap> trig_map;
  std::vector<Interval> box;
};

ROAApprox make_approx(const DynSystem& sys, const Certificate& cert);

enum class Membership { inside, outside, boundary };
std::string to_string(Membership m);

class MembershipError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sign rule with margin tau; boundary when |v0(x)| <= tau. Throws
/// MembershipError when x is outside the box or off the manifold (> 1e-8).
Membership membership(const ROAApprox& a, std::span<const double> x, double tau = 1e-9);

/// Physical angles theta (one per recast pair, before the equilibrium shift)
/// and the remaining states omega, mapped through (sin, 1 - cos).
Membership membership_original(const ROAApprox& a, std::span<const double> theta, std::span<const double> omega,
                               double tau = 1e-9);

/// State of the approximation's coordinates for physical (theta, omega).
std::vector<double> recast_point(const ROAApprox& a, std::span<const double> theta, std::span<const double> omega);

/// Membership counted as "in the set": outer includes the boundary band,
/// inner excludes it.
bool is_member(const ROAApprox& a, Membership m);

struct VolumeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo volume. Without a manifold the box is sampled; with a trig
/// map the angles are sampled on [-pi, pi) and the result is a volume in
/// (theta, omega) coordinates.
VolumeEstimate estimate_volume(const ROAApprox& a, std::size_t n_samples, std::uint64_t seed);

/// A 2-D slice. In original coordinates indices refer to (theta..., omega...)
/// with theta over [-pi, pi]; otherwise to the approximation's variables.
struct Plane {
  std::size_t u_index = 0;
  std::size_t v_index = 1;
  std::map<std::size_t, double> fixed;  ///< unlisted coordinates are 0
  bool original = false;
  double tau = 1e-9;  ///< boundary margin of the sign rule
};

struct GridRow {
  double u = 0.0;
  double v = 0.0;
  double value = 0.0;
  bool member = false;
};

/// Row-major raster: v is the slow axis, u the fast one.
std::vector<GridRow> grid_eval(const ROAApprox& a, const Plane& plane, std::size_t resolution);

}  // namespace roa
