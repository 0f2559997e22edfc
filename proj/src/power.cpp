#include "roa/power.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace roa {

std::size_t PowerNetwork::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw std::invalid_argument("unknown bus '" + id + "'");
}

void PowerNetwork::validate() const {
  if (buses.empty()) throw std::invalid_argument("network has no buses");
  std::set<std::string> ids;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) throw std::invalid_argument("duplicate bus id '" + b.id + "'");
    if (!(b.voltage > 0.0)) throw std::invalid_argument("bus '" + b.id + "' needs |V| > 0");
    if (b.id != ref_bus && !(b.inertia > 0.0)) {
      throw std::invalid_argument("machine '" + b.id + "' needs inertia M > 0");
    }
  }
  const std::size_t ref = bus_index(ref_bus);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::vector<std::size_t>> adj(buses.size());
  for (const auto& l : lines) {
    std::size_t a = bus_index(l.from);
    std::size_t b = bus_index(l.to);
    if (a == b) throw std::invalid_argument("self-line at bus '" + l.from + "'");
    if (!pairs.insert({std::min(a, b), std::max(a, b)}).second) {
      throw std::invalid_argument("more than one line between '" + l.from + "' and '" + l.to + "'");
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(buses.size(), false);
  std::vector<std::size_t> stack{ref};
  seen[ref] = true;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::invalid_argument("network is not connected");
  }
}

std::vector<std::size_t> PowerNetwork::machines() const {
  std::vector<std::size_t> out;
  const std::size_t ref = ref_index();
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (i != ref) out.push_back(i);
  }
  return out;
}

double PowerNetwork::susceptance(std::size_t k, std::size_t l) const {
  for (const auto& line : lines) {
    std::size_t a = bus_index(line.from);
    std::size_t b = bus_index(line.to);
    if ((a == k && b == l) || (a == l && b == k)) return line.susceptance;
  }
  return 0.0;
}

double PowerNetwork::conductance(std::size_t k, std::size_t l) const {
  for (const auto& line : lines) {
    std::size_t a = bus_index(line.from);
    std::size_t b = bus_index(line.to);
    if ((a == k && b == l) || (a == l && b == k)) return line.conductance;
  }
  return 0.0;
}

namespace {

std::vector<double> full_angles(const PowerNetwork& net, std::span<const double> theta) {
  auto m = net.machines();
  if (theta.size() != m.size()) throw std::invalid_argument("angle vector has wrong dimension");
  std::vector<double> full(net.buses.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) full[m[i]] = theta[i];
  return full;
}

}  // namespace

std::vector<double> electrical_power(const PowerNetwork& net, std::span<const double> theta) {
  auto th = full_angles(net, theta);
  std::vector<double> p(net.buses.size(), 0.0);
  for (std::size_t k = 0; k < net.buses.size(); ++k) {
    const double vk = net.buses[k].voltage;
    p[k] = net.buses[k].shunt_conductance * vk * vk;
  }
  for (const auto& line : net.lines) {
    std::size_t a = net.bus_index(line.from);
    std::size_t b = net.bus_index(line.to);
    const double vv = net.buses[a].voltage * net.buses[b].voltage;
    const double d = th[a] - th[b];
    p[a] += vv * (line.susceptance * std::sin(d) + line.conductance * std::cos(d));
    p[b] += vv * (line.susceptance * std::sin(-d) + line.conductance * std::cos(d));
  }
  return p;
}

SwingRates swing_rhs(const PowerNetwork& net, std::span<const double> theta, std::span<const double> omega) {
  auto m = net.machines();
  if (omega.size() != m.size()) throw std::invalid_argument("speed vector has wrong dimension");
  auto pe = electrical_power(net, theta);
  SwingRates r;
  r.theta_dot.assign(omega.begin(), omega.end());
  r.omega_dot.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Bus& b = net.buses[m[i]];
    r.omega_dot[i] = -b.damping * omega[i] + (b.mech_power - pe[m[i]]) / b.inertia;
  }
  return r;
}

VectorField swing_field(const PowerNetwork& net) {
  return [net](double, std::span<const double> x, std::span<double> dx) {
    const std::size_t m = x.size() / 2;
    auto r = swing_rhs(net, x.subspan(0, m), x.subspan(m, m));
    std::copy(r.theta_dot.begin(), r.theta_dot.end(), dx.begin());
    std::copy(r.omega_dot.begin(), r.omega_dot.end(), dx.begin() + static_cast<std::ptrdiff_t>(m));
  };
}

double swing_energy(const PowerNetwork& net, std::span<const double> theta, std::span<const double> omega) {
  auto m = net.machines();
  auto th = full_angles(net, theta);
  double e = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Bus& b = net.buses[m[i]];
    e += 0.5 * b.inertia * omega[i] * omega[i] - b.mech_power * theta[i];
  }
  for (const auto& line : net.lines) {
    std::size_t a = net.bus_index(line.from);
    std::size_t b = net.bus_index(line.to);
    e -= net.buses[a].voltage * net.buses[b].voltage * line.susceptance * std::cos(th[a] - th[b]);
  }
  return e;
}

std::vector<double> solve_equilibrium(const PowerNetwork& net, std::vector<double> guess,
                                      const EquilibriumOptions& opts) {
  net.validate();
  auto m = net.machines();
  const std::size_t n = m.size();
  if (guess.size() != n) throw std::invalid_argument("equilibrium guess has wrong dimension");

  auto residual = [&](const std::vector<double>& th) {
    auto pe = electrical_power(net, th);
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) r(static_cast<Eigen::Index>(i)) = net.buses[m[i]].mech_power - pe[m[i]];
    return r;
  };
  // d(P^mec - P^elec)/d theta.
  auto jacobian = [&](const std::vector<double>& th) {
    auto full = full_angles(net, th);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = m[i];
      for (std::size_t l = 0; l < net.buses.size(); ++l) {
        if (l == k) continue;
        const double vv = net.buses[k].voltage * net.buses[l].voltage;
        const double d = full[k] - full[l];
        const double dp = vv * (net.susceptance(k, l) * std::cos(d) - net.conductance(k, l) * std::sin(d));
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= dp;
        auto it = std::find(m.begin(), m.end(), l);
        if (it != m.end()) J(static_cast<Eigen::Index>(i), it - m.begin()) += dp;
      }
    }
    return J;
  };

  // Once within tolerance, a few more full steps take the residual to
  // rounding level so the shifted field has no spurious constant terms.
  auto polish = [&](std::vector<double> th) {
    Eigen::VectorXd r = residual(th);
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXd step = jacobian(th).fullPivLu().solve(-r);
      std::vector<double> trial(n);
      for (std::size_t j = 0; j < n; ++j) trial[j] = th[j] + step(static_cast<Eigen::Index>(j));
      const Eigen::VectorXd rt = residual(trial);
      if (!(rt.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>())) break;
      th = std::move(trial);
      r = rt;
    }
    return th;
  };

  std::vector<double> th = std::move(guess);
  Eigen::VectorXd r = residual(th);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() <= opts.tol) return polish(std::move(th));
    Eigen::MatrixXd J = jacobian(th);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    lu.setThreshold(1e-12);
    if (lu.rank() < static_cast<Eigen::Index>(n)) {
      throw SingularJacobianError("equilibrium Newton step: singular Jacobian");
    }
    Eigen::VectorXd step = lu.solve(-r);
    double t = 1.0;
    const double r0 = r.norm();
    std::vector<double> trial(n);
    Eigen::VectorXd rt;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = th[i] + t * step(static_cast<Eigen::Index>(i));
      rt = residual(trial);
      if (rt.norm() < r0 || h == opts.max_halvings) break;
      t *= 0.5;
    }
    th = trial;
    r = rt;
  }
  if (r.lpNorm<Eigen::Infinity>() <= opts.tol) return polish(std::move(th));
  throw NoConvergenceError("equilibrium Newton iteration did not converge in " +
                           std::to_string(opts.max_iter) + " iterations");
}

TrigOde swing_trig_ode(const PowerNetwork& net, const std::vector<double>& theta_offset) {
  net.validate();
  auto m = net.machines();
  if (theta_offset.size() != m.size()) throw std::invalid_argument("offset has wrong dimension");
  TrigOde ode;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::string& id = net.buses[m[i]].id;
    ode.states.push_back("theta" + id);
    ode.states.push_back("w" + id);
    ode.angles.push_back("theta" + id);
    ode.sin_names.push_back("s" + id);
    ode.cos_names.push_back("c" + id);
  }
  const auto ext = ode.extended_vars();
  const std::size_t ns = ode.states.size();
  auto sin_of = [&](std::size_t i) { return Poly::variable(ext, ns + 2 * i); };
  auto cos_of = [&](std::size_t i) { return Poly::variable(ext, ns + 2 * i + 1); };
  auto machine_of = [&](std::size_t bus) -> int {
    auto it = std::find(m.begin(), m.end(), bus);
    return it == m.end() ? -1 : static_cast<int>(it - m.begin());
  };
  // sin and cos of (x_k - x_l + delta) as polynomials in the placeholders,
  // where x is the shifted angle (0 for the reference bus).
  auto sin_cos_diff = [&](std::size_t k, std::size_t l, double delta) {
    int ik = machine_of(k);
    int il = machine_of(l);
    Poly sk = ik >= 0 ? sin_of(static_cast<std::size_t>(ik)) : Poly(ext);
    Poly ck = ik >= 0 ? cos_of(static_cast<std::size_t>(ik)) : Poly::constant(ext, 1.0);
    Poly sl = il >= 0 ? sin_of(static_cast<std::size_t>(il)) : Poly(ext);
    Poly cl = il >= 0 ? cos_of(static_cast<std::size_t>(il)) : Poly::constant(ext, 1.0);
    Poly sin_a = sk * cl - ck * sl;
    Poly cos_a = ck * cl + sk * sl;
    Poly s = sin_a * std::cos(delta) + cos_a * std::sin(delta);
    Poly c = cos_a * std::cos(delta) - sin_a * std::sin(delta);
    return std::pair{s, c};
  };
  auto offset_of = [&](std::size_t bus) {
    int i = machine_of(bus);
    return i >= 0 ? theta_offset[static_cast<std::size_t>(i)] : 0.0;
  };

  ode.rhs.assign(ns, Poly(ext));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t k = m[i];
    const Bus& b = net.buses[k];
    ode.rhs[2 * i] = Poly::variable(ext, 2 * i + 1);
    Poly pe = Poly::constant(ext, b.shunt_conductance * b.voltage * b.voltage);
    for (std::size_t l = 0; l < net.buses.size(); ++l) {
      if (l == k) continue;
      const double bkl = net.susceptance(k, l);
      const double gkl = net.conductance(k, l);
      if (bkl == 0.0 && gkl == 0.0) continue;
      auto [s, c] = sin_cos_diff(k, l, offset_of(k) - offset_of(l));
      const double vv = b.voltage * net.buses[l].voltage;
      pe += vv * (bkl * s + gkl * c);
    }
    Poly w = Poly::variable(ext, 2 * i + 1);
    ode.rhs[2 * i + 1] = -b.damping * w + (1.0 / b.inertia) * (Poly::constant(ext, b.mech_power) - pe);
  }
  return ode;
}

DynSystem build_recast_system(const PowerNetwork& net, double omega_max, double horizon, double eps) {
  if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be positive");
  auto m = net.machines();
  auto theta_eq = solve_equilibrium(net, std::vector<double>(m.size(), 0.0));
  TrigOde ode = swing_trig_ode(net, theta_eq);
  DynSystem sys = recast_trig(ode);
  if (sys.trig_map) sys.trig_map->angle_offset = theta_eq;
  // Terms left over from rounding in the equilibrium shift (e.g. a 1e-18
  // constant) are dropped relative to the row's largest coefficient.
  for (auto& f : sys.f) {
    const double cut = 1e-13 * f.max_abs_coefficient();
    Poly kept(f.vars());
    for (const auto& [mono, c] : f.terms()) {
      if (std::abs(c) > cut) kept.add_term(mono, c);
    }
    f = kept;
  }
  std::map<std::string, Interval> others;
  for (std::size_t i = 0; i < m.size(); ++i) others["w" + net.buses[m[i]].id] = {-omega_max, omega_max};
  for (const auto& v : sys.vars) {
    if (!others.count(v) && v.rfind("theta", 0) == 0) others[v] = {-M_PI, M_PI};
  }
  sys.X.box = recast_box(sys, others);
  sys.target = make_ball_set(sys.vars, std::vector<double>(sys.n(), 0.0), eps);
  sys.horizon = horizon;
  sys.validate();
  auto residuals = check_tangency(sys);
  if (!tangency_certified(residuals)) {
    throw std::runtime_error("recast power system failed the tangency check");
  }
  return sys;
}

PowerNetwork chiang3bus() {
  PowerNetwork net;
  net.buses = {
      {"1", 1.0, 0.4, 0.0, 1.0, 0.0},
      {"2", 1.0, 0.5, 0.05, 1.0, 0.0},
      {"3", 1.0, 0.0, 0.0, 1.0, 0.0},
  };
  net.lines = {
      {"1", "2", 0.0, 0.5},
      {"1", "3", 0.0, 1.0},
      {"2", "3", 0.0, 0.5},
  };
  net.ref_bus = "3";
  return net;
}

DynSystem chiang3bus_system(double omega_max, double horizon, double eps) {
  return build_recast_system(chiang3bus(), omega_max, horizon, eps);
}

}  // namespace roa
