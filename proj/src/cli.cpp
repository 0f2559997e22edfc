#include "roa/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "roa/sdp.hpp"
#include "roa/verify.hpp"

namespace roa::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const std::string& key, const std::string& where) {
  const json& a = j.at(key);
  if (!a.is_array()) throw ConfigError(where + "." + key + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : a) {
    if (!e.is_string()) throw ConfigError(where + "." + key + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

bool non_negative_int(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

Interval get_interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + ": expected [lo, hi]");
  }
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.hi > iv.lo)) throw ConfigError(where + ": empty interval");
  return iv;
}

PowerNetwork parse_network(const json& s) {
  reject_unknown(s, {"type", "buses", "lines", "ref_bus"}, "system");
  PowerNetwork net;
  if (!s.contains("buses") || !s.at("buses").is_array()) throw ConfigError("system.buses: expected an array");
  for (const auto& b : s.at("buses")) {
    reject_unknown(b, {"id", "inertia", "damping", "mech_power", "voltage", "shunt_conductance"}, "system.buses[]");
    if (!b.contains("id")) throw ConfigError("system.buses[]: missing 'id'");
    Bus bus;
    bus.id = get_string(b, "id", "system.buses[]");
    if (b.contains("inertia")) bus.inertia = get_number(b, "inertia", "system.buses[]");
    if (b.contains("damping")) bus.damping = get_number(b, "damping", "system.buses[]");
    if (b.contains("mech_power")) bus.mech_power = get_number(b, "mech_power", "system.buses[]");
    if (b.contains("voltage")) bus.voltage = get_number(b, "voltage", "system.buses[]");
    if (b.contains("shunt_conductance")) {
      bus.shunt_conductance = get_number(b, "shunt_conductance", "system.buses[]");
    }
    net.buses.push_back(bus);
  }
  if (!s.contains("lines") || !s.at("lines").is_array()) throw ConfigError("system.lines: expected an array");
  for (const auto& l : s.at("lines")) {
    reject_unknown(l, {"from", "to", "conductance", "susceptance"}, "system.lines[]");
    if (!l.contains("from") || !l.contains("to")) throw ConfigError("system.lines[]: 'from' and 'to' are required");
    Line line;
    line.from = get_string(l, "from", "system.lines[]");
    line.to = get_string(l, "to", "system.lines[]");
    if (l.contains("conductance")) line.conductance = get_number(l, "conductance", "system.lines[]");
    if (l.contains("susceptance")) line.susceptance = get_number(l, "susceptance", "system.lines[]");
    net.lines.push_back(line);
  }
  if (!s.contains("ref_bus")) throw ConfigError("system.ref_bus: required");
  net.ref_bus = get_string(s, "ref_bus", "system");
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  return net;
}

PolynomialSystem parse_polynomial(const json& s) {
  reject_unknown(s, {"type", "vars", "f", "trig_angles", "equalities", "target_center"}, "system");
  PolynomialSystem p;
  if (!s.contains("vars") || !s.contains("f")) throw ConfigError("system: 'vars' and 'f' are required");
  p.vars = get_strings(s, "vars", "system");
  p.f = get_strings(s, "f", "system");
  if (p.vars.empty()) throw ConfigError("system.vars: at least one variable required");
  if (p.f.size() != p.vars.size()) throw ConfigError("system.f: one expression per variable required");
  if (s.contains("trig_angles")) p.trig_angles = get_strings(s, "trig_angles", "system");
  if (s.contains("equalities")) p.equalities = get_strings(s, "equalities", "system");
  if (!p.trig_angles.empty() && !p.equalities.empty()) {
    throw ConfigError("system: explicit equalities cannot be combined with trig_angles");
  }
  if (s.contains("target_center")) {
    const json& c = s.at("target_center");
    if (!c.is_array() || c.size() != p.vars.size()) {
      throw ConfigError("system.target_center: expected one number per variable");
    }
    std::vector<double> v;
    for (const auto& e : c) {
      if (!e.is_number()) throw ConfigError("system.target_center: expected numbers");
      v.push_back(e.get<double>());
    }
    if (!p.trig_angles.empty()) throw ConfigError("system.target_center: not supported with trig_angles");
    p.target_center = v;
  }
  return p;
}

}  // namespace

RunConfig parse_config(const json& j) {
  reject_unknown(j, {"system", "box", "omega_max", "T", "eps", "order", "mode", "solver", "seed", "samples", "band",
                     "normalize_time", "max_iter"},
                 "config");
  RunConfig cfg;
  if (!j.contains("system")) throw ConfigError("config: 'system' is required");
  const json& s = j.at("system");
  if (!s.is_object() || !s.contains("type")) throw ConfigError("system: 'type' is required");
  cfg.system_type = get_string(s, "type", "system");
  if (cfg.system_type == "power_network") {
    cfg.network = parse_network(s);
  } else if (cfg.system_type == "polynomial") {
    cfg.polynomial = parse_polynomial(s);
  } else {
    throw ConfigError("system.type: expected 'power_network' or 'polynomial'");
  }

  if (j.contains("box")) {
    const json& b = j.at("box");
    if (!b.is_object()) throw ConfigError("box: expected an object of intervals");
    for (const auto& [name, iv] : b.items()) cfg.box[name] = get_interval(iv, "box." + name);
  }
  if (j.contains("omega_max")) {
    cfg.omega_max = get_number(j, "omega_max", "config");
    if (!(*cfg.omega_max > 0.0)) throw ConfigError("config.omega_max: must be positive");
  }
  if (j.contains("T")) cfg.T = get_number(j, "T", "config");
  if (!(cfg.T > 0.0)) throw ConfigError("config.T: must be positive");
  if (j.contains("eps")) cfg.eps = get_number(j, "eps", "config");
  if (!(cfg.eps > 0.0)) throw ConfigError("config.eps: must be positive");
  if (j.contains("order")) {
    if (!j.at("order").is_number_integer()) throw ConfigError("config.order: expected an integer");
    cfg.order = j.at("order").get<int>();
  }
  if (cfg.order < 1) throw ConfigError("config.order: must be at least 1");
  if (j.contains("mode")) cfg.mode = get_string(j, "mode", "config");
  if (cfg.mode != "outer" && cfg.mode != "inner" && cfg.mode != "both") {
    throw ConfigError("config.mode: expected outer, inner or both");
  }
  if (j.contains("solver")) {
    const std::string sv = get_string(j, "solver", "config");
    if (sv == "embedded") {
      cfg.solver = SolverKind::embedded;
    } else if (sv == "export") {
      cfg.solver = SolverKind::exported;
    } else {
      throw ConfigError("config.solver: expected 'embedded' or 'export'");
    }
  }
  if (j.contains("seed")) {
    if (!non_negative_int(j.at("seed"))) throw ConfigError("config.seed: expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("samples")) {
    if (!non_negative_int(j.at("samples"))) throw ConfigError("config.samples: expected a positive integer");
    cfg.samples = j.at("samples").get<std::size_t>();
  }
  if (cfg.samples < 100) throw ConfigError("config.samples: at least 100 required");
  if (j.contains("band")) cfg.band = get_number(j, "band", "config");
  if (!(cfg.band >= 0.0)) throw ConfigError("config.band: must be non-negative");
  if (j.contains("normalize_time")) {
    if (!j.at("normalize_time").is_boolean()) throw ConfigError("config.normalize_time: expected a boolean");
    cfg.normalize_time = j.at("normalize_time").get<bool>();
  }
  if (j.contains("max_iter")) {
    if (!non_negative_int(j.at("max_iter"))) throw ConfigError("config.max_iter: expected a positive integer");
    cfg.max_iter = j.at("max_iter").get<int>();
  }

  if (cfg.system_type == "power_network") {
    if (!cfg.omega_max) throw ConfigError("config.omega_max: required for power networks");
    if (!cfg.box.empty()) throw ConfigError("config.box: power networks take their box from omega_max");
  } else {
    const auto& p = cfg.polynomial;
    for (const auto& [name, iv] : cfg.box) {
      if (std::find(p.vars.begin(), p.vars.end(), name) == p.vars.end()) {
        throw ConfigError("box." + name + ": not a system variable");
      }
    }
    for (const auto& v : p.vars) {
      const bool angle = std::find(p.trig_angles.begin(), p.trig_angles.end(), v) != p.trig_angles.end();
      if (!angle && !cfg.box.count(v)) throw ConfigError("box: missing interval for '" + v + "'");
    }
  }
  cfg.canonical = j.dump();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : cfg.canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DynSystem build_system(const RunConfig& cfg) {
  if (cfg.system_type == "power_network") return build_recast_system(cfg.network, *cfg.omega_max, cfg.T, cfg.eps);

  const auto& p = cfg.polynomial;
  DynSystem sys;
  if (!p.trig_angles.empty()) {
    TrigOde ode;
    ode.states = p.vars;
    ode.angles = p.trig_angles;
    for (const auto& e : p.f) ode.rhs.push_back(parse_trig_poly(e, p.vars, p.trig_angles));
    sys = recast_trig(ode);
    sys.X.box = recast_box(sys, cfg.box);
  } else {
    sys.vars = p.vars;
    for (const auto& e : p.f) sys.f.push_back(parse_poly(e, p.vars));
    for (const auto& v : p.vars) sys.X.box.push_back(cfg.box.at(v));
    for (const auto& e : p.equalities) sys.X.equalities.push_back(parse_poly(e, p.vars));
  }
  const std::vector<double> center = p.target_center.value_or(std::vector<double>(sys.n(), 0.0));
  sys.target = make_ball_set(sys.vars, center, cfg.eps);
  sys.horizon = cfg.T;
  sys.validate();
  return sys;
}

HierarchyOptions hierarchy_options(const RunConfig& cfg) {
  HierarchyOptions o;
  o.normalize_time = cfg.normalize_time;
  return o;
}

json poly_to_json(const Poly& p) {
  json exps = json::array(), coeffs = json::array();
  for (const auto& [m, c] : p.terms()) {
    exps.push_back(m.exponents());
    coeffs.push_back(c);
  }
  return json{{"vars", p.vars()}, {"exponents", exps}, {"coefficients", coeffs}};
}

Poly poly_from_json(const json& j) {
  try {
    Poly p(j.at("vars").get<std::vector<std::string>>());
    const json& exps = j.at("exponents");
    const json& coeffs = j.at("coefficients");
    if (!exps.is_array() || !coeffs.is_array() || exps.size() != coeffs.size()) {
      throw ConfigError("polynomial: exponents and coefficients differ in length");
    }
    for (std::size_t i = 0; i < exps.size(); ++i) {
      auto e = exps[i].get<std::vector<int>>();
      if (e.size() != p.num_vars()) throw ConfigError("polynomial: exponent length does not match vars");
      p.add_term(Monomial(std::move(e)), coeffs[i].get<double>());
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("polynomial: ") + e.what());
  }
}

json certificate_to_json(const Certificate& cert, const std::string& hash) {
  return json{{"mode", to_string(cert.mode)},
              {"k", cert.order},
              {"side", to_string(cert.side)},
              {"objective", cert.objective},
              {"primal_objective", cert.primal_obj},
              {"dual_objective", cert.dual_obj},
              {"status", cert.status},
              {"config_hash", hash},
              {"v", poly_to_json(cert.v)},
              {"w", poly_to_json(cert.w)}};
}

Certificate certificate_from_json(const json& j) {
  try {
    Certificate c;
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.order = j.at("k").get<int>();
    c.side = j.at("side").get<std::string>() == "moment" ? Side::moment : Side::sos;
    c.objective = j.at("objective").get<double>();
    c.primal_obj = j.value("primal_objective", c.objective);
    c.dual_obj = j.value("dual_objective", c.objective);
    c.status = j.at("status").get<std::string>();
    c.optimal = c.status == "optimal";
    c.v = poly_from_json(j.at("v"));
    c.w = poly_from_json(j.at("w"));
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("certificate: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("certificate: ") + e.what());
  }
}

namespace {

std::vector<Mode> modes_of(const std::string& m) {
  if (m == "both") return {Mode::outer, Mode::inner};
  return {parse_mode(m)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::filesystem::path out_dir(const CommandOptions& opts) {
  std::filesystem::path dir = opts.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(opts.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

Certificate load_certificate(const std::string& path, const RunConfig& cfg) {
  const json j = load_json(path);
  Certificate c = certificate_from_json(j);
  if (j.value("config_hash", std::string()) != config_hash(cfg)) {
    throw ConfigError("certificate '" + path + "' was produced from a different config");
  }
  return c;
}

/// Check tolerance relative to the certificate's scale.
double check_tolerance(const Certificate& c) {
  return 1e-4 * (1.0 + std::max(c.v.max_abs_coefficient(), c.w.max_abs_coefficient()));
}

json check_to_json(const CertificateCheck& ch, double tau) {
  json j{{"samples", ch.samples},   {"max_Lv", ch.max_Lv}, {"min_vT", ch.min_vT}, {"min_w_gap", ch.min_w_gap},
         {"min_w", ch.min_w},       {"tolerance", tau},    {"passed", ch.passed(tau)}};
  if (std::isfinite(ch.min_v_face)) j["min_v_face"] = ch.min_v_face;
  return j;
}

}  // namespace

int cmd_recast(const RunConfig& cfg, const CommandOptions&, std::ostream& out) {
  const DynSystem sys = build_system(cfg);
  out << "variables:";
  for (const auto& v : sys.vars) out << ' ' << v;
  out << '\n';
  for (std::size_t i = 0; i < sys.n(); ++i) out << "d" << sys.vars[i] << "/dt = " << sys.f[i].to_string(6) << '\n';
  if (sys.X.equalities.empty()) {
    out << "no equality constraints\n";
    return kExitOk;
  }
  const auto residuals = check_tangency(sys);
  bool ok = true;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    out << "equality " << sys.X.equalities[i].to_string(6) << " = 0\n";
    out << "  tangency residual: " << (residuals[i].is_zero() ? std::string("0") : residuals[i].to_string(6))
        << '\n';
    ok = ok && tangency_certified({residuals[i]});
  }
  out << (ok ? "tangency certified\n" : "tangency FAILED\n");
  return ok ? kExitOk : kExitValidation;
}

int cmd_certify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  using clock = std::chrono::steady_clock;
  const DynSystem sys = build_system(cfg);
  const HierarchyOptions ho = hierarchy_options(cfg);
  const int k = opts.order.value_or(cfg.order);
  const std::string mode = opts.mode.value_or(cfg.mode);
  const auto dir = out_dir(opts);
  const std::string hash = config_hash(cfg);

  json summary{{"config_hash", hash}, {"k", k}, {"mode", mode}, {"results", json::object()}};
  json timings = json::object();
  int code = kExitOk;
  for (Mode m : modes_of(mode)) {
    const std::string name = to_string(m);
    const auto t0 = clock::now();
    const Assembly a = m == Mode::outer ? build_outer_sos(sys, k, ho) : build_inner_sos(sys, k, ho);
    const double t_build = std::chrono::duration<double>(clock::now() - t0).count();
    json r{{"constraints", a.problem.num_constraints()}, {"blocks", a.problem.block_dims.size()},
           {"free_variables", a.problem.free_vars.size()}};
    if (cfg.solver == SolverKind::exported) {
      const std::string file = name + "_k" + std::to_string(k) + ".dat-s";
      write_text(dir / file, sdp::export_sdpa(a.problem));
      r["sdpa"] = file;
      summary["results"][name] = r;
      timings[name] = {{"assemble_s", t_build}};
      out << name << ": wrote " << (dir / file).string() << '\n';
      continue;
    }
    sdp::Options so;
    so.max_iter = cfg.max_iter;
    const auto t1 = clock::now();
    const sdp::Solution sol = sdp::solve(a.problem, so);
    const double t_solve = std::chrono::duration<double>(clock::now() - t1).count();
    r["status"] = sdp::to_string(sol.status);
    r["iterations"] = sol.iterations;
    r["primal_objective"] = sol.primal_obj;
    r["dual_objective"] = sol.dual_obj;
    r["primal_infeasibility"] = sol.primal_infeasibility;
    r["dual_infeasibility"] = sol.dual_infeasibility;
    r["relative_gap"] = sol.relative_gap;
    timings[name] = {{"assemble_s", t_build}, {"solve_s", t_solve}};
    Certificate cert;
    try {
      cert = extract_certificate(sol, a.layout, true);
    } catch (const CertificateError& e) {
      r["error"] = e.what();
      summary["results"][name] = r;
      out << name << ": " << e.what() << '\n';
      code = kExitSolver;
      continue;
    }
    const std::string file = "certificate_" + name + ".json";
    write_text(dir / file, certificate_to_json(cert, hash).dump(2) + "\n");
    const CertificateCheck ch = check_certificate(sys, cert, 10000, cfg.seed, ho);
    const double tau = check_tolerance(cert);
    const ROAApprox approx = make_approx(sys, cert);
    const VolumeEstimate vol = estimate_volume(approx, std::max<std::size_t>(cfg.samples, 100), cfg.seed);
    r["objective"] = cert.objective;
    r["certificate"] = file;
    r["check"] = check_to_json(ch, tau);
    r["volume"] = {{"estimate", vol.estimate}, {"std_error", vol.std_error}, {"samples", vol.samples}};
    summary["results"][name] = r;
    out << name << ": " << r["status"].get<std::string>() << ", objective " << cert.objective << ", volume "
        << vol.estimate << " +- " << vol.std_error << ", check " << (ch.passed(tau) ? "passed" : "FAILED") << '\n';
    if (!ch.passed(tau) && code == kExitOk) code = kExitValidation;
  }
  summary["timings"] = timings;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return code;
}

int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (opts.certificates.empty()) throw ConfigError("verify: at least one --certificate is required");
  const DynSystem sys = build_system(cfg);
  std::optional<ROAApprox> outer, inner;
  for (const auto& path : opts.certificates) {
    const Certificate c = load_certificate(path, cfg);
    auto& slot = c.mode == Mode::outer ? outer : inner;
    if (slot) throw ConfigError("verify: two certificates of mode " + to_string(c.mode));
    slot = make_approx(sys, c);
  }
  CrossReport rep;
  if (outer) {
    rep = cross_validate(*outer, inner, sys, cfg.samples, cfg.seed, cfg.band);
  } else {
    // Inner only: the inner set also plays the outer role with no checks counted.
    ROAApprox trivial = *inner;
    trivial.mode = Mode::outer;
    trivial.v0 = Poly::constant(sys.vars, 1.0);
    rep = cross_validate(trivial, inner, sys, cfg.samples, cfg.seed, cfg.band);
    rep.outer_checked = rep.outer_violations = rep.outer_members = 0;
  }
  const auto dir = out_dir(opts);
  json j{{"config_hash", config_hash(cfg)},
         {"seed", rep.seed},
         {"samples", rep.samples},
         {"band", rep.band},
         {"oracle_in_roa", rep.oracle_in},
         {"step_failures", rep.step_failures},
         {"outer", outer ? json{{"checked", rep.outer_checked},
                                {"violations", rep.outer_violations},
                                {"members", rep.outer_members},
                                {"violation_rate", rep.outer_violation_rate()}}
                         : json(nullptr)},
         {"inner", inner ? json{{"checked", rep.inner_checked},
                                {"violations", rep.inner_violations},
                                {"members", rep.inner_members},
                                {"violation_rate", rep.inner_violation_rate()}}
                         : json(nullptr)}};
  write_text(dir / "verify.json", j.dump(2) + "\n");
  std::ostringstream csv;
  csv << "kind,point,v0_outer,v0_inner,oracle\n";
  csv.precision(17);
  for (const auto& w : rep.witnesses) {
    csv << w.kind << ",\"";
    for (std::size_t i = 0; i < w.point.size(); ++i) csv << (i ? " " : "") << w.point[i];
    csv << "\"," << w.v0_outer << ',' << w.v0_inner << ',' << w.oracle << '\n';
  }
  write_text(dir / "violations.csv", csv.str());
  const std::size_t bad = rep.outer_violations + rep.inner_violations;
  out << "outer violations " << rep.outer_violations << "/" << rep.outer_checked << ", inner violations "
      << rep.inner_violations << "/" << rep.inner_checked << '\n';
  return bad == 0 ? kExitOk : kExitValidation;
}

int cmd_grid(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (opts.certificates.size() != 1) throw ConfigError("grid: exactly one --certificate is required");
  const DynSystem sys = build_system(cfg);
  const Certificate cert = load_certificate(opts.certificates.front(), cfg);
  const ROAApprox a = make_approx(sys, cert);

  std::vector<std::string> names;
  if (opts.original) {
    if (!sys.trig_map) throw ConfigError("grid: --original needs a system with angles");
    for (const auto& p : sys.trig_map->pairs) names.push_back(p.angle);
    for (auto r : sys.trig_map->passthrough_recast) names.push_back(sys.vars[r]);
  } else {
    names = sys.vars;
  }
  auto index_of = [&](const std::string& n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) throw ConfigError("grid: unknown coordinate '" + n + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  const auto comma = opts.plane.find(',');
  if (comma == std::string::npos) throw ConfigError("grid: --plane expects 'u,v'");
  Plane plane;
  plane.original = opts.original;
  plane.tau = cfg.band;
  plane.u_index = index_of(opts.plane.substr(0, comma));
  plane.v_index = index_of(opts.plane.substr(comma + 1));
  for (const auto& f : opts.fix) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw ConfigError("grid: --fix expects 'name=value'");
    try {
      plane.fixed[index_of(f.substr(0, eq))] = std::stod(f.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("grid: bad value in --fix '" + f + "'");
    }
  }
  std::vector<GridRow> rows;
  try {
    rows = grid_eval(a, plane, opts.resolution);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  std::ostringstream csv;
  csv << "u,v,value,member\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%d\n", r.u, r.v, r.value, r.member ? 1 : 0);
    csv << buf;
  }
  if (opts.out_dir.empty()) {
    out << csv.str();
  } else {
    const auto file = out_dir(opts) / ("grid_" + to_string(cert.mode) + ".csv");
    write_text(file, csv.str());
    out << "wrote " << file.string() << '\n';
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Region-of-attraction certificates from the occupation-measure hierarchy"};
  app.require_subcommand(1);
  CommandOptions opts;
  int order = 0;
  std::string mode;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory");
  };
  CLI::App* recast = app.add_subcommand("recast", "print the (recast) system and its tangency residuals");
  common(recast);
  CLI::App* certify = app.add_subcommand("certify", "solve the SOS programs and write certificates");
  common(certify);
  certify->add_option("--order", order, "relaxation order k")->check(CLI::PositiveNumber);
  certify->add_option("--mode", mode, "outer, inner or both")->check(CLI::IsMember({"outer", "inner", "both"}));
  CLI::App* verify = app.add_subcommand("verify", "cross-check certificates against simulation");
  common(verify);
  verify->add_option("--certificate", opts.certificates, "certificate JSON (repeatable)")->required();
  CLI::App* grid = app.add_subcommand("grid", "evaluate a certificate on a 2-D slice");
  common(grid);
  grid->add_option("--certificate", opts.certificates, "certificate JSON")->required();
  grid->add_option("--plane", opts.plane, "axes as 'u,v'")->required();
  grid->add_option("--fix", opts.fix, "fixed coordinate 'name=value' (repeatable, default 0)");
  grid->add_option("--resolution", opts.resolution, "points per axis")->check(CLI::Range(2, 100000));
  grid->add_flag("--original", opts.original, "axes in angle coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }
  if (order > 0) opts.order = order;
  if (!mode.empty()) opts.mode = mode;

  try {
    const RunConfig cfg = load_config(opts.config_path);
    if (*recast) return cmd_recast(cfg, opts, std::cout);
    if (*certify) return cmd_certify(cfg, opts, std::cout);
    if (*verify) return cmd_verify(cfg, opts, std::cout);
    return cmd_grid(cfg, opts, std::cout);
  } catch (const CertificateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace roa::cli
