#include "roa/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace roa {

// ---------------------------------------------------------------------------
// Moment bookkeeping

MomentIndex::MomentIndex(std::size_t nvars, int max_degree)
    : nvars_(nvars), max_degree_(max_degree), monomials_(monomials_up_to(nvars, max_degree)) {
  lookup_.reserve(monomials_.size());
  for (std::size_t i = 0; i < monomials_.size(); ++i) lookup_.emplace(monomials_[i], i);
}

std::size_t MomentIndex::index(const Monomial& m) const {
  auto it = lookup_.find(m);
  if (it == lookup_.end()) throw std::out_of_range("monomial outside the moment index");
  return it->second;
}

std::vector<double> lebesgue_box_moments(const std::vector<Interval>& box, int max_deg) {
  for (const auto& iv : box) {
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("degenerate box");
  }
  // 1-D moments per coordinate, then products.
  std::vector<std::vector<double>> one_d(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    for (int a = 0; a <= max_deg; ++a) {
      one_d[i].push_back((std::pow(box[i].hi, a + 1) - std::pow(box[i].lo, a + 1)) / (a + 1));
    }
  }
  std::vector<double> h;
  for (const auto& m : monomials_up_to(box.size(), max_deg)) {
    double v = 1.0;
    for (std::size_t i = 0; i < box.size(); ++i) v *= one_d[i][static_cast<std::size_t>(m[i])];
    h.push_back(v);
  }
  return h;
}

std::string to_string(Mode m) { return m == Mode::outer ? "outer" : "inner"; }
std::string to_string(Side s) { return s == Side::moment ? "moment" : "sos"; }

Mode parse_mode(const std::string& s) {
  if (s == "outer") return Mode::outer;
  if (s == "inner") return Mode::inner;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Scaling

ScaledSystem scale_system(const DynSystem& sys, const HierarchyOptions& opts) {
  sys.validate();
  const std::size_t n = sys.n();
  if (sys.X.box.size() != n) throw std::invalid_argument("the state set needs a box for every variable");
  for (const auto& v : sys.vars) {
    if (v == "t") throw std::invalid_argument("state variable name 't' is reserved for time");
  }
  if (!sys.X.equalities.empty() && !tangency_certified(check_tangency(sys))) {
    throw std::invalid_argument("equality constraints are not invariant under the dynamics");
  }
  if (!(sys.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

  ScaledSystem s;
  s.vars = sys.vars;
  s.jacobian = 1.0;
  std::map<std::string, Poly> to_z;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& iv = sys.X.box[i];
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("degenerate box for '" + sys.vars[i] + "'");
    s.center.push_back(iv.center());
    s.half_width.push_back(0.5 * iv.width());
    s.jacobian *= s.half_width.back();
    to_z.emplace(sys.vars[i], Poly::constant(s.vars, s.center[i]) + s.half_width[i] * Poly::variable(s.vars, i));
  }
  s.time_scale = opts.normalize_time ? sys.horizon : 1.0;
  s.horizon = sys.horizon / s.time_scale;
  for (std::size_t i = 0; i < n; ++i) {
    s.f.push_back(substitute(sys.f[i], to_z) * (s.time_scale / s.half_width[i]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Poly z = Poly::variable(s.vars, i);
    s.X_ineqs.push_back(Poly::constant(s.vars, 1.0) - z * z);
  }
  for (const auto& g : sys.X.inequalities) s.X_ineqs.push_back(substitute(g, to_z));
  // A ball constraint is divided by radius^2 so it peaks at 1; otherwise its
  // multipliers must be O(1 / radius^2) and the SDP becomes badly scaled.
  const double target_scale =
      sys.target.ball ? 1.0 / (sys.target.ball->radius * sys.target.ball->radius) : 1.0;
  for (const auto& g : sys.target.constraint_polys(sys.vars)) {
    s.target_ineqs.push_back(substitute(g, to_z) * target_scale);
  }
  if (s.target_ineqs.empty()) throw std::invalid_argument("target set has no constraints");
  s.target_center.assign(n, 0.0);
  s.target_radius.assign(n, 1.0);
  if (sys.target.ball) {
    for (std::size_t i = 0; i < n; ++i) {
      s.target_center[i] = (sys.target.ball->center[i] - s.center[i]) / s.half_width[i];
      s.target_radius[i] = std::min(1.0, sys.target.ball->radius / s.half_width[i]);
    }
  }

  if (opts.boundary_vars) {
    for (auto i : *opts.boundary_vars) {
      if (i >= n) throw std::invalid_argument("boundary variable index out of range");
    }
    s.boundary_vars = *opts.boundary_vars;
  } else {
    std::vector<bool> recast(n, false);
    if (sys.trig_map) {
      for (const auto& p : sys.trig_map->pairs) recast[p.sin_index] = recast[p.cos_index] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!recast[i]) s.boundary_vars.push_back(i);
    }
  }
  return s;
}

namespace {

int poly_degree(const Poly& p) { return p.is_zero() ? 0 : p.degree().value(); }

int field_degree(const ScaledSystem& s) {
  int d = 0;
  for (const auto& f : s.f) d = std::max(d, poly_degree(f));
  return d;
}

std::vector<std::string> time_vars(const ScaledSystem& s) {
  std::vector<std::string> v{"t"};
  v.insert(v.end(), s.vars.begin(), s.vars.end());
  return v;
}

void check_order(const ScaledSystem& s, int k) {
  if (k < 1) throw std::invalid_argument("relaxation order must be at least 1");
  const int df = field_degree(s);
  if (2 * k < df + 1) {
    throw std::invalid_argument("relaxation order " + std::to_string(k) + " too small for a degree-" +
                                std::to_string(df) + " vector field (need 2k >= deg f + 1)");
  }
  int dg = 2;  // time localizer t(T - t)
  for (const auto& g : s.X_ineqs) dg = std::max(dg, poly_degree(g));
  for (const auto& g : s.target_ineqs) dg = std::max(dg, poly_degree(g));
  if (k < (dg + 1) / 2) {
    throw std::invalid_argument("relaxation order " + std::to_string(k) + " too small for degree-" +
                                std::to_string(dg) + " constraints");
  }
}

/// Degree of v: the largest degree keeping Lv within 2k.
int v_degree(const ScaledSystem& s, int k) { return std::min(2 * k, 2 * k + 1 - std::max(1, field_degree(s))); }

/// Half-degree of the Gram basis for a multiplier of g in a degree-2k identity.
int gram_degree(int k, const Poly& g) { return (2 * k - poly_degree(g)) / 2; }

/// One family of coefficient-matching rows (one polynomial identity).
struct RowSet {
  const MomentIndex* idx = nullptr;
  int offset = 0;
  int row(const Monomial& m) const { return offset + static_cast<int>(idx->index(m)); }
};

RowSet add_rows(sdp::Problem& p, const MomentIndex& idx, double constant_rhs = 0.0) {
  RowSet r{&idx, p.num_constraints()};
  for (std::size_t i = 0; i < idx.size(); ++i) p.add_constraint(i == 0 ? constant_rhs : 0.0);
  return r;
}

/// Adds sign * (b^T G b) g to the rows; G is a new PSD block.
int add_gram(sdp::Problem& p, const RowSet& rows, const std::vector<Monomial>& basis, const Poly& g, double sign) {
  const int blk = p.add_block(static_cast<int>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a; b < basis.size(); ++b) {
      const Monomial ab = basis[a] * basis[b];
      for (const auto& [gm, c] : g.terms()) {
        p.constraints[static_cast<std::size_t>(rows.row(ab * gm))].push_back(
            {blk, static_cast<int>(a), static_cast<int>(b), sign * c});
      }
    }
  }
  return blk;
}

void add_gram_objective(sdp::Problem& p, int blk, const std::vector<Monomial>& basis, const Poly& g,
                        const MomentIndex& zidx, const std::vector<double>& h) {
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a; b < basis.size(); ++b) {
      const Monomial ab = basis[a] * basis[b];
      double c = 0.0;
      for (const auto& [gm, gc] : g.terms()) c += gc * h[zidx.index(ab * gm)];
      if (c != 0.0) p.objective.push_back({blk, static_cast<int>(a), static_cast<int>(b), c});
    }
  }
}

/// Splits a (t, z) monomial into its time exponent and state part.
std::pair<int, Monomial> split_time(const Monomial& m) {
  std::vector<int> e(m.exponents().begin() + 1, m.exponents().end());
  return {m[0], Monomial(std::move(e))};
}

Poly time_localizer(const std::vector<std::string>& tv, double T) {
  Poly t = Poly::variable(tv, 0);
  return t * (Poly::constant(tv, T) - t);
}

struct Common {
  ScaledSystem s;
  int k = 0;
  int dv = 0;
  std::vector<std::string> tv;
  MomentIndex tz;  // (t, z), degree 2k
  MomentIndex z;   // z, degree 2k
  std::vector<double> h;
  Poly tloc;
  std::vector<Poly> X_lift;  // X inequalities over (t, z)
  std::map<std::string, Poly> frame;  // z_i -> target_center_i + target_radius_i zeta_i
  std::vector<Poly> target_local;     // target inequalities over zeta

  /// A state monomial rewritten in the target frame.
  Poly local(const Monomial& zm) const { return substitute(Poly::monomial(s.vars, zm), frame); }

  Common(const DynSystem& sys, int order, const HierarchyOptions& opts)
      : s(scale_system(sys, opts)),
        k(order),
        tv(time_vars(s)),
        tz(s.vars.size() + 1, 2 * order),
        z(s.vars.size(), 2 * order) {
    check_order(s, k);
    dv = v_degree(s, k);
    std::vector<Interval> unit(s.vars.size(), Interval{-1.0, 1.0});
    h = lebesgue_box_moments(unit, 2 * k);
    for (auto& x : h) x *= s.jacobian;
    tloc = time_localizer(tv, s.horizon);
    for (const auto& g : s.X_ineqs) X_lift.push_back(embed(g, tv));
    for (std::size_t i = 0; i < s.vars.size(); ++i) {
      frame.emplace(s.vars[i], Poly::constant(s.vars, s.target_center[i]) +
                                   s.target_radius[i] * Poly::variable(s.vars, i));
    }
    for (const auto& g : s.target_ineqs) target_local.push_back(substitute(g, frame));
  }
};

/// Free variables for v and their coefficients in the (-Lv), v(0), v(T)
/// and optional v(t, .) rows. Each row family adds `sign * image`.
struct VRows {
  const RowSet* lie = nullptr;  // + Lv
  const RowSet* at0 = nullptr;  // - v(0, .)
  const RowSet* atT = nullptr;  // - v(T, .)
  bool atT_local = false;       // atT rows are in the target frame
  std::vector<const RowSet*> full;  // - v
};

void add_v(sdp::Problem& p, const Common& c, const VRows& rows, Layout& layout) {
  for (const auto& m : monomials_up_to(c.tv.size(), c.dv)) {
    const int u = p.add_free(0.0);
    auto& coeffs = p.free_vars[static_cast<std::size_t>(u)].coeffs;
    const Poly lm_poly = lie_derivative(Poly::monomial(c.tv, m), c.s.f);
    for (const auto& [lm, lc] : lm_poly.terms()) coeffs.emplace_back(rows.lie->row(lm), lc);
    auto [te, zm] = split_time(m);
    if (rows.at0 && te == 0) coeffs.emplace_back(rows.at0->row(zm), -1.0);
    if (rows.atT) {
      const double tT = std::pow(c.s.horizon, te);
      const Poly zl = rows.atT_local ? c.local(zm) : Poly::monomial(c.s.vars, zm);
      for (const auto& [lm, lc] : zl.terms()) coeffs.emplace_back(rows.atT->row(lm), -tT * lc);
    }
    for (const auto* r : rows.full) coeffs.emplace_back(r->row(m), -1.0);
    layout.v_basis.push_back(m);
    layout.v_free.push_back(u);
  }
}

Layout base_layout(const Common& c, Mode mode, Side side) {
  Layout l;
  l.mode = mode;
  l.side = side;
  l.order = c.k;
  l.v_degree = c.dv;
  l.scaled = c.s;
  return l;
}

/// Rows shared by both SOS programs: -Lv = p + q0 t(T-t) + sum q_i g_i and
/// s0 + sum s0i g_i - v(0) - 1 = p0 + sum q0i g_i, with w = s0 + sum s0i g_i.
void add_sos_common(sdp::Problem& p, Common& c, RowSet& lie, RowSet& init, Layout& layout) {
  lie = add_rows(p, c.tz);
  const Poly one_tz = Poly::constant(c.tv, 1.0);
  add_gram(p, lie, monomials_up_to(c.tv.size(), c.k), one_tz, 1.0);
  add_gram(p, lie, monomials_up_to(c.tv.size(), gram_degree(c.k, c.tloc)), c.tloc, 1.0);
  for (const auto& g : c.X_lift) add_gram(p, lie, monomials_up_to(c.tv.size(), gram_degree(c.k, g)), g, 1.0);

  init = add_rows(p, c.z, 1.0);
  const std::size_t n = c.s.vars.size();
  const Poly one_z = Poly::constant(c.s.vars, 1.0);
  std::vector<Poly> w_mults{one_z};
  w_mults.insert(w_mults.end(), c.s.X_ineqs.begin(), c.s.X_ineqs.end());
  for (const auto& g : w_mults) {
    auto basis = monomials_up_to(n, gram_degree(c.k, g));
    const int blk = add_gram(p, init, basis, g, 1.0);
    add_gram_objective(p, blk, basis, g, c.z, c.h);
    layout.w_grams.push_back({blk, basis, g});
  }
  for (const auto& g : w_mults) add_gram(p, init, monomials_up_to(n, gram_degree(c.k, g)), g, -1.0);
}

}  // namespace

Assembly build_outer_sos(const DynSystem& sys, int k, const HierarchyOptions& opts) {
  Common c(sys, k, opts);
  Assembly a;
  a.layout = base_layout(c, Mode::outer, Side::sos);
  sdp::Problem& p = a.problem;
  RowSet lie, init;
  add_sos_common(p, c, lie, init, a.layout);

  // v(T, .) = pT + sum qTi gTi, matched in the target frame
  RowSet term = add_rows(p, c.z);
  const std::size_t n = c.s.vars.size();
  add_gram(p, term, monomials_up_to(n, c.k), Poly::constant(c.s.vars, 1.0), 1.0);
  for (const auto& g : c.target_local) add_gram(p, term, monomials_up_to(n, gram_degree(c.k, g)), g, 1.0);

  VRows vr;
  vr.lie = &lie;
  vr.at0 = &init;
  vr.atT = &term;
  vr.atT_local = true;
  add_v(p, c, vr, a.layout);
  p.canonicalize();
  return a;
}

Assembly build_inner_sos(const DynSystem& sys, int k, const HierarchyOptions& opts) {
  if (sys.target.inequalities.size() != 1 || !sys.target.box.empty()) {
    throw std::invalid_argument("inner mode needs a target described by a single inequality");
  }
  Common c(sys, k, opts);
  Assembly a;
  a.layout = base_layout(c, Mode::inner, Side::sos);
  sdp::Problem& p = a.problem;
  RowSet lie, init;
  add_sos_common(p, c, lie, init, a.layout);
  const std::size_t n = c.s.vars.size();

  // v(T, .) >= 0 on X minus the target interior.
  RowSet term = add_rows(p, c.z);
  add_gram(p, term, monomials_up_to(n, c.k), Poly::constant(c.s.vars, 1.0), 1.0);
  const Poly outside = -c.s.target_ineqs.front();
  add_gram(p, term, monomials_up_to(n, gram_degree(c.k, outside)), outside, 1.0);
  for (const auto& g : c.s.X_ineqs) add_gram(p, term, monomials_up_to(n, gram_degree(c.k, g)), g, 1.0);

  // v >= 0 on [0,T] x {z_i = +-1}: v = sigma + sigma0 t(T-t) + sum_{j != i} sigma_j g_j + r_i g_i.
  std::vector<RowSet> faces;
  faces.reserve(c.s.boundary_vars.size());
  for (auto i : c.s.boundary_vars) {
    RowSet rows = add_rows(p, c.tz);
    add_gram(p, rows, monomials_up_to(c.tv.size(), c.k), Poly::constant(c.tv, 1.0), 1.0);
    add_gram(p, rows, monomials_up_to(c.tv.size(), gram_degree(c.k, c.tloc)), c.tloc, 1.0);
    for (std::size_t j = 0; j < c.X_lift.size(); ++j) {
      if (j == i) continue;
      add_gram(p, rows, monomials_up_to(c.tv.size(), gram_degree(c.k, c.X_lift[j])), c.X_lift[j], 1.0);
    }
    const Poly& gi = c.X_lift[i];
    for (const auto& m : monomials_up_to(c.tv.size(), 2 * c.k - poly_degree(gi))) {
      const int u = p.add_free(0.0);
      auto& coeffs = p.free_vars[static_cast<std::size_t>(u)].coeffs;
      for (const auto& [gm, gc] : gi.terms()) coeffs.emplace_back(rows.row(m * gm), gc);
    }
    faces.push_back(rows);
  }

  VRows vr;
  vr.lie = &lie;
  vr.at0 = &init;
  vr.atT = &term;
  for (const auto& f : faces) vr.full.push_back(&f);
  add_v(p, c, vr, a.layout);
  p.canonicalize();
  return a;
}

// The moment relaxation in the dual form of the standard SDP: the moment
// vectors are the dual variables y, every moment or localizing matrix is a
// slack block S = sum_j y_j B_j, and the linear measure constraints are the
// free-variable columns.
Assembly build_outer_moment(const DynSystem& sys, int k, const HierarchyOptions& opts) {
  Common c(sys, k, opts);
  Assembly a;
  a.layout = base_layout(c, Mode::outer, Side::moment);
  sdp::Problem& p = a.problem;
  const std::size_t n = c.s.vars.size();

  // y = [y_mu (t,z), y_0 (z), y_hat (z), y_T (z)]
  const int off_mu = 0;
  const int off_0 = off_mu + static_cast<int>(c.tz.size());
  const int off_hat = off_0 + static_cast<int>(c.z.size());
  const int off_T = off_hat + static_cast<int>(c.z.size());
  const int total = off_T + static_cast<int>(c.z.size());
  for (int j = 0; j < total; ++j) p.add_constraint(j == off_0 ? 1.0 : 0.0);

  // Localizing matrix of g for the measure whose moments start at `off`:
  // L(y)_ab = sum_gamma g_gamma y_{a+b+gamma}; stored as A_j = -B_j.
  auto localize = [&](const MomentIndex& idx, int off, const std::vector<Monomial>& basis, const Poly& g) {
    const int blk = p.add_block(static_cast<int>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = i; j < basis.size(); ++j) {
        for (const auto& [gm, gc] : g.terms()) {
          const Monomial mom = basis[i] * basis[j] * gm;
          const int yj = off + static_cast<int>(idx.index(mom));
          p.constraints[static_cast<std::size_t>(yj)].push_back(
              {blk, static_cast<int>(i), static_cast<int>(j), -gc});
        }
      }
    }
  };

  // mu on [0,T] x X
  localize(c.tz, off_mu, monomials_up_to(c.tv.size(), c.k), Poly::constant(c.tv, 1.0));
  localize(c.tz, off_mu, monomials_up_to(c.tv.size(), gram_degree(c.k, c.tloc)), c.tloc);
  for (const auto& g : c.X_lift) localize(c.tz, off_mu, monomials_up_to(c.tv.size(), gram_degree(c.k, g)), g);
  // mu_0 and its complement mu_hat on X
  const Poly one_z = Poly::constant(c.s.vars, 1.0);
  for (int off : {off_0, off_hat}) {
    localize(c.z, off, monomials_up_to(n, c.k), one_z);
    for (const auto& g : c.s.X_ineqs) localize(c.z, off, monomials_up_to(n, gram_degree(c.k, g)), g);
  }
  // mu_T on X_T, with moments taken in the target frame
  localize(c.z, off_T, monomials_up_to(n, c.k), one_z);
  for (const auto& g : c.target_local) localize(c.z, off_T, monomials_up_to(n, gram_degree(c.k, g)), g);

  // Liouville: int v(T) dmu_T - int v(0) dmu_0 - int Lv dmu = 0 for every
  // test monomial of degree <= deg v.
  for (const auto& m : monomials_up_to(c.tv.size(), c.dv)) {
    const int u = p.add_free(0.0);
    auto& coeffs = p.free_vars[static_cast<std::size_t>(u)].coeffs;
    auto [te, zm] = split_time(m);
    const double tT = std::pow(c.s.horizon, te);
    const Poly zl = c.local(zm);
    for (const auto& [lm, lc] : zl.terms()) coeffs.emplace_back(off_T + static_cast<int>(c.z.index(lm)), tT * lc);
    if (te == 0) coeffs.emplace_back(off_0 + static_cast<int>(c.z.index(zm)), -1.0);
    const Poly lm_poly = lie_derivative(Poly::monomial(c.tv, m), c.s.f);
    for (const auto& [lm, lc] : lm_poly.terms()) {
      coeffs.emplace_back(off_mu + static_cast<int>(c.tz.index(lm)), -lc);
    }
    a.layout.v_basis.push_back(m);
    a.layout.v_free.push_back(u);
  }
  // mu_0 + mu_hat = Lebesgue on X, moment by moment.
  for (std::size_t i = 0; i < c.z.size(); ++i) {
    const int u = p.add_free(c.h[i]);
    p.free_vars[static_cast<std::size_t>(u)].coeffs = {{off_0 + static_cast<int>(i), 1.0},
                                                       {off_hat + static_cast<int>(i), 1.0}};
    a.layout.w_basis.push_back(c.z.at(i));
    a.layout.w_free.push_back(u);
  }
  p.canonicalize();
  return a;
}

// ---------------------------------------------------------------------------
// Certificates

Poly restrict_first(const Poly& p, double value) {
  if (p.num_vars() == 0) throw PolyError("cannot restrict a polynomial without variables");
  std::vector<std::string> rest(p.vars().begin() + 1, p.vars().end());
  Poly out(rest);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e(m.exponents().begin() + 1, m.exponents().end());
    out.add_term(Monomial(std::move(e)), c * std::pow(value, m[0]));
  }
  return out;
}

Poly Certificate::v0() const { return restrict_first(v, 0.0); }

Certificate extract_certificate(const sdp::Solution& sol, const Layout& layout, bool allow_suboptimal) {
  using sdp::Status;
  const bool good = sol.status == Status::optimal || sol.status == Status::near_optimal;
  if (!good) {
    const bool usable = allow_suboptimal && (sol.status == Status::max_iter || sol.status == Status::numerical_failure) &&
                        sol.primal_infeasibility <= 1e-4;
    if (!usable) throw CertificateError("no certificate: solver status " + sdp::to_string(sol.status));
  }
  const ScaledSystem& s = layout.scaled;
  std::vector<std::string> tv{"t"};
  tv.insert(tv.end(), s.vars.begin(), s.vars.end());

  Poly v_scaled(tv);
  for (std::size_t i = 0; i < layout.v_basis.size(); ++i) {
    v_scaled.add_term(layout.v_basis[i], sol.u(layout.v_free[i]));
  }
  Poly w_scaled(s.vars);
  if (layout.side == Side::moment) {
    for (std::size_t i = 0; i < layout.w_basis.size(); ++i) {
      w_scaled.add_term(layout.w_basis[i], sol.u(layout.w_free[i]));
    }
  } else {
    for (const auto& g : layout.w_grams) {
      const auto& X = sol.X[static_cast<std::size_t>(g.block)];
      Poly gram(s.vars);
      for (std::size_t a = 0; a < g.basis.size(); ++a) {
        for (std::size_t b = 0; b < g.basis.size(); ++b) {
          gram.add_term(g.basis[a] * g.basis[b], X(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        }
      }
      w_scaled += gram * g.multiplier;
    }
  }

  // Back to original coordinates: z = (x - c) / h, scaled t = t / time_scale.
  std::map<std::string, Poly> tz_map, z_map;
  tz_map.emplace("t", Poly::variable(tv, 0) * (1.0 / s.time_scale));
  for (std::size_t i = 0; i < s.vars.size(); ++i) {
    tz_map.emplace(s.vars[i], (Poly::variable(tv, i + 1) - s.center[i]) * (1.0 / s.half_width[i]));
    z_map.emplace(s.vars[i], (Poly::variable(s.vars, i) - s.center[i]) * (1.0 / s.half_width[i]));
  }

  Certificate cert;
  cert.order = layout.order;
  cert.mode = layout.mode;
  cert.side = layout.side;
  cert.v = substitute(v_scaled, tz_map);
  cert.w = substitute(w_scaled, z_map);
  cert.primal_obj = sol.primal_obj;
  cert.dual_obj = sol.dual_obj;
  cert.objective = layout.side == Side::moment ? sol.dual_obj : sol.primal_obj;
  cert.optimal = sol.status == Status::optimal;
  cert.status = sdp::to_string(sol.status);
  return cert;
}

bool CertificateCheck::passed(double tau) const {
  return max_Lv <= tau && min_vT >= -tau && min_w_gap >= -tau && min_w >= -tau && min_v_face >= -tau;
}

CertificateCheck check_certificate(const DynSystem& sys, const Certificate& cert, std::size_t n, std::uint64_t seed,
                                   const HierarchyOptions& opts) {
  const std::size_t dim = sys.n();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  auto sample_box = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < dim; ++i) x[i] = sys.X.box[i].lo + unif(rng) * sys.X.box[i].width();
  };

  const Poly Lv = lie_derivative(cert.v, sys.f);
  const Poly v0 = cert.v0();
  const Poly vT = restrict_first(cert.v, sys.horizon);
  CertificateCheck out;
  out.samples = n;
  out.max_Lv = -std::numeric_limits<double>::infinity();
  out.min_vT = out.min_w_gap = out.min_w = out.min_v_face = std::numeric_limits<double>::infinity();

  std::vector<double> x(dim), tx(dim + 1);
  for (std::size_t s = 0; s < n; ++s) {
    sample_box(x);
    tx[0] = unif(rng) * sys.horizon;
    std::copy(x.begin(), x.end(), tx.begin() + 1);
    out.max_Lv = std::max(out.max_Lv, Lv.evaluate(tx));
    const double w = cert.w.evaluate(x);
    out.min_w = std::min(out.min_w, w);
    out.min_w_gap = std::min(out.min_w_gap, w - v0.evaluate(x) - 1.0);
  }

  if (cert.mode == Mode::outer) {
    std::size_t got = 0;
    for (std::size_t attempt = 0; got < n && attempt < 100 * n; ++attempt) {
      if (sys.target.ball) {
        const auto& b = *sys.target.ball;
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          x[i] = normal(rng);
          norm += x[i] * x[i];
        }
        const double r = b.radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim)) / std::sqrt(norm);
        for (std::size_t i = 0; i < dim; ++i) x[i] = b.center[i] + r * x[i];
      } else {
        sample_box(x);
      }
      if (!sys.target.contains(x) || !sys.X.contains(x)) continue;
      ++got;
      out.min_vT = std::min(out.min_vT, vT.evaluate(x));
    }
  } else {
    std::size_t got = 0;
    for (std::size_t attempt = 0; got < n && attempt < 100 * n; ++attempt) {
      sample_box(x);
      if (sys.target.margin(x) > 0.0) continue;
      ++got;
      out.min_vT = std::min(out.min_vT, vT.evaluate(x));
    }
    const ScaledSystem sc = scale_system(sys, opts);
    for (std::size_t s = 0; s < n && !sc.boundary_vars.empty(); ++s) {
      sample_box(x);
      const std::size_t i = sc.boundary_vars[s % sc.boundary_vars.size()];
      x[i] = (s / sc.boundary_vars.size()) % 2 == 0 ? sys.X.box[i].lo : sys.X.box[i].hi;
      tx[0] = unif(rng) * sys.horizon;
      std::copy(x.begin(), x.end(), tx.begin() + 1);
      out.min_v_face = std::min(out.min_v_face, cert.v.evaluate(tx));
    }
  }
  return out;
}

}  // namespace roa
