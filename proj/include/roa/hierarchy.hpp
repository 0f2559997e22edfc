#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/polynomial.hpp"
#include "roa/sdp.hpp"

namespace roa {

/// Graded-lex enumeration of all monomials of degree <= max_degree.
class MomentIndex {
 public:
  MomentIndex(std::size_t nvars, int max_degree);

  std::size_t size() const { return monomials_.size(); }
  std::size_t nvars() const { return nvars_; }
  int max_degree() const { return max_degree_; }
  const Monomial& at(std::size_t i) const { return monomials_[i]; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  /// Throws std::out_of_range for monomials outside the index.
  std::size_t index(const Monomial& m) const;
  bool contains(const Monomial& m) const { return lookup_.count(m) != 0; }

 private:
  std::size_t nvars_;
  int max_degree_;
  std::vector<Monomial> monomials_;
  std::unordered_map<Monomial, std::size_t, MonomialHash> lookup_;
};

/// Moments of the Lebesgue measure on a box, indexed by MomentIndex(n, max_deg).
std::vector<double> lebesgue_box_moments(const std::vector<Interval>& box, int max_deg);

enum class Mode { outer, inner };
enum class Side { moment, sos };

std::string to_string(Mode m);
std::string to_string(Side s);
Mode parse_mode(const std::string& s);

struct HierarchyOptions {
  /// Rescale time to [0, 1] (f -> T f) before assembly. Without it the
  /// powers of t up to T^{2k} make the coefficient-matching rows badly
  /// scaled and the interior-point iteration stalls already at k = 3, T = 8.
  bool normalize_time = true;
  /// Inner mode: variables whose box faces are exit boundaries. Defaults to
  /// every variable that is not part of a recast (s, c) pair; those pairs
  /// live on the manifold and never reach their range bounds transversally.
  std::optional<std::vector<std::size_t>> boundary_vars;
};

/// The system after the affine map x = center + half_width * z (box ->
/// [-1, 1]^n) and optional time normalization.
struct ScaledSystem {
  std::vector<std::string> vars;
  std::vector<Poly> f;
  std::vector<Poly> X_ineqs;       ///< box faces 1 - z_i^2, then extra inequalities
  std::vector<Poly> target_ineqs;
  /// Local frame z = target_center + target_radius * zeta of the target. The
  /// terminal conditions are matched in zeta, which keeps a small target
  /// from making the multipliers and the moments of mu_T badly scaled.
  std::vector<double> target_center;
  std::vector<double> target_radius;
  std::vector<double> center;
  std::vector<double> half_width;
  double horizon = 1.0;     ///< horizon in scaled time
  double time_scale = 1.0;  ///< original t = time_scale * scaled t
  double jacobian = 1.0;    ///< product of half widths
  std::vector<std::size_t> boundary_vars;
};

ScaledSystem scale_system(const DynSystem& sys, const HierarchyOptions& opts = {});

/// Where the certificate polynomials live in an assembled problem.
struct GramRef {
  int block = 0;
  std::vector<Monomial> basis;
  Poly multiplier;  // over the scaled state variables
};

struct Layout {
  Mode mode = Mode::outer;
  Side side = Side::sos;
  int order = 0;
  int v_degree = 0;
  ScaledSystem scaled;
  std::vector<Monomial> v_basis;  // over (t, z)
  std::vector<int> v_free;        // free variable per v monomial
  std::vector<Monomial> w_basis;  // moment side: w coefficients are free variables
  std::vector<int> w_free;
  std::vector<GramRef> w_grams;   // sos side: w = sum of these Gram terms
};

struct Assembly {
  sdp::Problem problem;
  Layout layout;
};

/// Outer SOS program: min w.h s.t. -Lv, w - v(0) - 1, v(T), w nonnegative on
/// their sets via Putinar-type certificates. w is eliminated through its own
/// SOS representation.
Assembly build_outer_sos(const DynSystem& sys, int k, const HierarchyOptions& opts = {});
/// Moment relaxation of the occupation-measure LP (max mass of mu_0).
Assembly build_outer_moment(const DynSystem& sys, int k, const HierarchyOptions& opts = {});
/// Inner SOS program; the inner set is {v(0, x) < 0}.
Assembly build_inner_sos(const DynSystem& sys, int k, const HierarchyOptions& opts = {});

struct Certificate {
  int order = 0;
  Mode mode = Mode::outer;
  Side side = Side::sos;
  Poly v;  ///< over ("t", state vars), original coordinates
  Poly w;  ///< over state vars
  double objective = 0.0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  bool optimal = false;
  std::string status;

  /// v(0, .) as a polynomial over the state variables.
  Poly v0() const;
};

class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws CertificateError unless the status is optimal or near_optimal.
/// max_iter and numerical_failure iterates with primal infeasibility <= 1e-4
/// are accepted only when `allow_suboptimal` is set; check them a posteriori.
Certificate extract_certificate(const sdp::Solution& sol, const Layout& layout, bool allow_suboptimal = false);

/// p(t, x) -> p(t0, x) over the remaining variables (var 0 is dropped).
Poly restrict_first(const Poly& p, double value);

struct CertificateCheck {
  std::size_t samples = 0;
  double max_Lv = 0.0;        ///< over [0,T] x X
  double min_vT = 0.0;        ///< outer: on X_T; inner: on X minus X_T
  double min_w_gap = 0.0;     ///< min of w - v(0) - 1 over X
  double min_w = 0.0;
  double min_v_face = 0.0;    ///< inner only: v on [0,T] x boundary faces
  bool passed(double tau = 1e-6) const;
};

/// Samples the certificate inequalities in original coordinates.
CertificateCheck check_certificate(const DynSystem& sys, const Certificate& cert, std::size_t n = 10000,
                                   std::uint64_t seed = 1, const HierarchyOptions& opts = {});

}  // namespace roa
