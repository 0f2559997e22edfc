#include "roa/roa.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace roa {

ROAApprox make_approx(const DynSystem& sys, const Certificate& cert) {
  ROAApprox a;
  a.mode = cert.mode;
  a.vars = sys.vars;
  a.v0 = cert.v0();
  if (a.v0.vars() != sys.vars) throw std::invalid_argument("certificate variables do not match the system");
  a.manifold = sys.X.equalities;
  a.trig_map = sys.trig_map;
  a.box = sys.X.box;
  return a;
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::outside: return "outside";
    case Membership::boundary: return "boundary";
  }
  return "unknown";
}

bool is_member(const ROAApprox& a, Membership m) {
  return m == Membership::inside || (a.mode == Mode::outer && m == Membership::boundary);
}

namespace {

Membership sign_rule(Mode mode, double value, double tau) {
  if (std::abs(value) <= tau) return Membership::boundary;
  const bool in = mode == Mode::outer ? value > 0.0 : value < 0.0;
  return in ? Membership::inside : Membership::outside;
}

}  // namespace

Membership membership(const ROAApprox& a, std::span<const double> x, double tau) {
  if (x.size() != a.vars.size()) throw MembershipError("state dimension mismatch");
  for (std::size_t i = 0; i < a.box.size(); ++i) {
    if (!(x[i] >= a.box[i].lo && x[i] <= a.box[i].hi)) {
      throw MembershipError("point outside the box in '" + a.vars[i] + "'");
    }
  }
  for (const auto& g : a.manifold) {
    if (std::abs(g.evaluate(x)) > 1e-8) throw MembershipError("point off the equality manifold");
  }
  return sign_rule(a.mode, a.v0.evaluate(x), tau);
}

std::vector<double> recast_point(const ROAApprox& a, std::span<const double> theta, std::span<const double> omega) {
  if (!a.trig_map) throw MembershipError("approximation has no trigonometric map");
  const TrigMap& tm = *a.trig_map;
  if (theta.size() != tm.pairs.size()) throw MembershipError("expected one angle per recast pair");
  if (omega.size() != tm.passthrough_original.size()) throw MembershipError("wrong number of non-angle states");
  std::vector<double> orig(tm.original.states.size(), 0.0);
  for (std::size_t p = 0; p < tm.pairs.size(); ++p) {
    const double off = p < tm.angle_offset.size() ? tm.angle_offset[p] : 0.0;
    orig[tm.pairs[p].original_index] = theta[p] - off;
  }
  for (std::size_t k = 0; k < omega.size(); ++k) orig[tm.passthrough_original[k]] = omega[k];
  return tm.to_recast(orig);
}

Membership membership_original(const ROAApprox& a, std::span<const double> theta, std::span<const double> omega,
                               double tau) {
  return membership(a, recast_point(a, theta, omega), tau);
}

VolumeEstimate estimate_volume(const ROAApprox& a, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("volume estimation needs at least 100 samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t hits = 0;
  double vol = 1.0;

  if (a.trig_map) {
    const TrigMap& tm = *a.trig_map;
    const std::size_t m = tm.pairs.size();
    std::vector<Interval> wbox;
    for (auto r : tm.passthrough_recast) wbox.push_back(a.box[r]);
    vol = std::pow(2.0 * std::numbers::pi, static_cast<double>(m));
    for (const auto& iv : wbox) vol *= iv.width();
    std::vector<double> th(m), om(wbox.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (auto& t : th) t = -std::numbers::pi + 2.0 * std::numbers::pi * unif(rng);
      for (std::size_t k = 0; k < wbox.size(); ++k) om[k] = wbox[k].lo + wbox[k].width() * unif(rng);
      if (is_member(a, membership_original(a, th, om))) ++hits;
    }
  } else {
    if (!a.manifold.empty()) throw std::invalid_argument("volume on a manifold needs a trigonometric map");
    for (const auto& iv : a.box) vol *= iv.width();
    std::vector<double> x(a.box.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = a.box[i].lo + a.box[i].width() * unif(rng);
      if (is_member(a, membership(a, x))) ++hits;
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  VolumeEstimate e;
  e.samples = n_samples;
  e.estimate = p * vol;
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples)) * vol;
  return e;
}

std::vector<GridRow> grid_eval(const ROAApprox& a, const Plane& plane, std::size_t resolution) {
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  if (plane.u_index == plane.v_index) throw std::invalid_argument("grid axes must differ");
  if (plane.fixed.count(plane.u_index) || plane.fixed.count(plane.v_index)) {
    throw std::invalid_argument("a grid axis is also listed as fixed");
  }

  std::size_t dim = a.vars.size();
  std::vector<Interval> ranges;
  std::size_t n_angles = 0;
  if (plane.original) {
    if (!a.trig_map) throw std::invalid_argument("original coordinates need a trigonometric map");
    n_angles = a.trig_map->pairs.size();
    dim = n_angles + a.trig_map->passthrough_recast.size();
    for (std::size_t p = 0; p < n_angles; ++p) ranges.push_back({-std::numbers::pi, std::numbers::pi});
    for (auto r : a.trig_map->passthrough_recast) ranges.push_back(a.box[r]);
  } else {
    ranges = a.box;
  }
  if (plane.u_index >= dim || plane.v_index >= dim) throw std::invalid_argument("grid axis index out of range");
  std::vector<double> point(dim, 0.0);
  for (const auto& [i, val] : plane.fixed) {
    if (i >= dim) throw std::invalid_argument("fixed index out of range");
    point[i] = val;
  }

  std::vector<GridRow> rows;
  rows.reserve(resolution * resolution);
  const auto& ru = ranges[plane.u_index];
  const auto& rv = ranges[plane.v_index];
  const double denom = static_cast<double>(resolution - 1);
  for (std::size_t j = 0; j < resolution; ++j) {
    for (std::size_t i = 0; i < resolution; ++i) {
      GridRow row;
      row.u = ru.lo + ru.width() * static_cast<double>(i) / denom;
      row.v = rv.lo + rv.width() * static_cast<double>(j) / denom;
      point[plane.u_index] = row.u;
      point[plane.v_index] = row.v;
      std::vector<double> x;
      if (plane.original) {
        std::span<const double> all(point);
        x = recast_point(a, all.first(n_angles), all.subspan(n_angles));
      } else {
        x = point;
      }
      row.value = a.v0.evaluate(x);
      row.member = is_member(a, sign_rule(a.mode, row.value, plane.tau));
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace roa
