#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/roa.hpp"

namespace roa {

enum class ExitReason { completed, left_X, step_failure };
std::string to_string(ExitReason r);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  ExitReason exit_reason = ExitReason::completed;
};

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Optional state constraint, >= 0 inside; integration stops at the first
  /// crossing below zero (located to `crossing_tol` in time).
  std::function<double(std::span<const double>)> margin;
  double crossing_tol = 1e-9;
  std::size_t max_steps = 1000000;
};

/// Dormand-Prince 5(4) with PI step-size control and cubic Hermite dense
/// output for locating constraint crossings.
Trajectory integrate(const VectorField& f, std::span<const double> x0, double T, const IntegrateOptions& opts = {});

enum class OracleReason { none, left_X, missed_target, step_failure };
std::string to_string(OracleReason r);

struct OracleResult {
  bool in_roa = false;
  OracleReason reason = OracleReason::none;
  double end_time = 0.0;
  double terminal_margin = 0.0;
};

/// Simulation ground truth for a point in the system's coordinates. For
/// recast systems the original trigonometric ODE is integrated from the
/// angles recovered via atan2.
OracleResult roa_oracle(const DynSystem& sys, std::span<const double> x0, double T, double rtol = 1e-9);

/// Same, starting from an original-ODE state (angles in ODE coordinates).
OracleResult roa_oracle_original(const DynSystem& sys, std::span<const double> ode_state, double T,
                                 double rtol = 1e-9);

struct Violation {
  std::string kind;  ///< "outer" (oracle in, outer out) or "inner" (inner in, oracle out)
  std::vector<double> point;  ///< sampled coordinates (theta..., omega... for recast systems)
  double v0_outer = 0.0;
  double v0_inner = 0.0;
  std::string oracle;
};

struct CrossReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double band = 1e-3;
  std::size_t oracle_in = 0;
  std::size_t step_failures = 0;
  std::size_t outer_checked = 0;
  std::size_t inner_checked = 0;
  std::size_t outer_violations = 0;
  std::size_t inner_violations = 0;
  std::size_t outer_members = 0;
  std::size_t inner_members = 0;
  std::vector<Violation> witnesses;
  double outer_violation_rate() const;
  double inner_violation_rate() const;
};

/// Samples uniformly (angles on [-pi, pi) for recast systems, the box
/// otherwise) and counts certificate/oracle disagreements outside the band
/// |v0| <= band.
CrossReport cross_validate(const ROAApprox& outer, const std::optional<ROAApprox>& inner, const DynSystem& sys,
                           std::size_t n_samples, std::uint64_t seed, double band = 1e-3);

}  // namespace roa
