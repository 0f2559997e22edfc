#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "roa/dynamics.hpp"

namespace roa {

struct Bus {
  std::string id;
  double inertia = 1.0;            // M_k
  double damping = 0.0;            // lambda_k, 1/s
  double mech_power = 0.0;         // P_k^mec, pu
  double voltage = 1.0;            // |V_k|, pu
  double shunt_conductance = 0.0;  // G_kk, pu
};

struct Line {
  std::string from;
  std::string to;
  double conductance = 0.0;  // G_kl
  double susceptance = 0.0;  // B_kl
};

/// Reduced machine network. The reference bus has its phase fixed to zero and
/// its dynamics eliminated; every other bus carries a machine with state
/// (theta_k, omega_k) measured relative to the reference.
struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::string ref_bus;

  /// Throws std::invalid_argument on a malformed network.
  void validate() const;
  std::size_t bus_index(const std::string& id) const;
  std::size_t ref_index() const { return bus_index(ref_bus); }
  /// Bus indices of the non-reference machines, in bus order.
  std::vector<std::size_t> machines() const;
  double susceptance(std::size_t k, std::size_t l) const;
  double conductance(std::size_t k, std::size_t l) const;
};

struct SwingRates {
  std::vector<double> theta_dot;
  std::vector<double> omega_dot;
};

/// Electrical power P_k^elec for every bus, given machine angles (reference
/// angle is 0).
std::vector<double> electrical_power(const PowerNetwork& net, std::span<const double> theta);

SwingRates swing_rhs(const PowerNetwork& net, std::span<const double> theta, std::span<const double> omega);

/// Closed-form swing field over the state (theta_1..theta_m, omega_1..omega_m).
VectorField swing_field(const PowerNetwork& net);

/// sum M w^2/2 - sum P theta - sum_{k<l} |V_k||V_l| B_kl cos(theta_k - theta_l);
/// conserved when damping and conductances vanish.
double swing_energy(const PowerNetwork& net, std::span<const double> theta, std::span<const double> omega);

class SingularJacobianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EquilibriumOptions {
  int max_iter = 50;
  double tol = 1e-10;
  int max_halvings = 10;
};

/// Newton's method on P^mec - P^elec(theta) = 0 with step halving.
std::vector<double> solve_equilibrium(const PowerNetwork& net, std::vector<double> guess,
                                      const EquilibriumOptions& opts = {});

/// Trigonometric swing ODE in coordinates shifted by `theta_offset`
/// (theta_physical = theta + offset). States are theta<id>, w<id> per machine.
TrigOde swing_trig_ode(const PowerNetwork& net, const std::vector<double>& theta_offset);

/// Equilibrium -> shift -> recast. Box: s in [-1,1], c in [0,2],
/// omega in [-omega_max, omega_max]; target: eps-ball at the origin.
/// Throws if the equilibrium solve fails or tangency cannot be certified.
DynSystem build_recast_system(const PowerNetwork& net, double omega_max, double horizon, double eps);

/// Three-machine benchmark (bus 3 is the reference):
///   w1' = -sin t1 - 0.5 sin(t1 - t2) - 0.4 w1
///   w2' = -0.5 sin t2 - 0.5 sin(t2 - t1) - 0.5 w2 + 0.05
PowerNetwork chiang3bus();
DynSystem chiang3bus_system(double omega_max, double horizon = 8.0, double eps = 0.1);

}  // namespace roa
