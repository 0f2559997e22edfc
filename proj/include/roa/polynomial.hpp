#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roa {

/// Exponent vector of a monomial over a fixed, ordered variable list.
///
/// Monomials are totally ordered by graded lexicographic order: lower total
/// degree first, ties broken so that x1 precedes x2 (the exponent vector that
/// is lexicographically larger comes first). This single order fixes term
/// printing, moment indexing and SDP assembly.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);

  static Monomial one(std::size_t nvars) { return Monomial(std::vector<int>(nvars, 0)); }
  static Monomial variable(std::size_t nvars, std::size_t index, int power = 1);

  std::size_t size() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int degree() const { return degree_; }
  const std::vector<int>& exponents() const { return exps_; }

  Monomial operator*(const Monomial& other) const;

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps_ == b.exps_; }
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b);

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept;
};

/// All monomials in `nvars` variables of total degree <= max_degree, in
/// graded-lex order.
std::vector<Monomial> monomials_up_to(std::size_t nvars, int max_degree);

/// Polynomial degree with an explicit minus-infinity value for the zero
/// polynomial.
class Degree {
 public:
  static Degree minus_infinity() { return Degree(); }
  explicit Degree(int d) : value_(d) {}

  bool is_minus_infinity() const { return value_ == kNegInf; }
  int value() const;

  friend bool operator==(const Degree&, const Degree&) = default;
  friend auto operator<=>(const Degree&, const Degree&) = default;

 private:
  Degree() = default;
  static constexpr int kNegInf = std::numeric_limits<int>::min();
  int value_ = kNegInf;
};

class PolyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse multivariate polynomial with double coefficients over named
/// variables. Canonical: zero coefficients are never stored.
class Poly {
 public:
  using TermMap = std::map<Monomial, double>;

  Poly() = default;
  explicit Poly(std::vector<std::string> vars);
  Poly(std::vector<std::string> vars, TermMap terms);

  static Poly constant(std::vector<std::string> vars, double c);
  static Poly variable(std::vector<std::string> vars, const std::string& name);
  static Poly variable(std::vector<std::string> vars, std::size_t index);
  static Poly monomial(std::vector<std::string> vars, Monomial m, double coeff = 1.0);

  const std::vector<std::string>& vars() const { return vars_; }
  std::size_t num_vars() const { return vars_.size(); }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  Degree degree() const;
  double coefficient(const Monomial& m) const;
  /// Index of a variable by name, or throws.
  std::size_t var_index(const std::string& name) const;

  double evaluate(std::span<const double> point) const;

  /// Adds c * m in place (drops the term if it cancels to exactly zero).
  void add_term(const Monomial& m, double c);

  Poly operator-() const;
  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(double s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator+(Poly a, double c);
  friend Poly operator-(Poly a, double c) { return std::move(a) + (-c); }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

  /// Largest absolute coefficient (0 for the zero polynomial).
  double max_abs_coefficient() const;

  /// Graded-lex printer. Coefficients use "%.<precision>g".
  std::string to_string(int precision = 12) const;

 private:
  void require_same_vars(const Poly& other) const;

  std::vector<std::string> vars_;
  TermMap terms_;
};

Poly pow(const Poly& p, int e);

/// Exact partial derivative with respect to variable `var_index`.
Poly differentiate(const Poly& p, std::size_t var_index);

/// Composition. Every replacement must share one target variable list; any
/// variable of `p` left unassigned must also appear (by name) in that list.
Poly substitute(const Poly& p, const std::map<std::string, Poly>& assignments);
/// Replaces variables by constants, keeping the variable list of `p`.
Poly substitute(const Poly& p, const std::map<std::string, double>& values);

/// Re-expresses `p` over a superset (or reordering) of its variables.
Poly embed(const Poly& p, const std::vector<std::string>& vars);

/// L v = dv/dt + grad_x v . f. The first variable of `v` is time; the rest
/// must equal the variable list of every f_i.
Poly lie_derivative(const Poly& v, const std::vector<Poly>& f);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses "+ - * ^ ( )" expressions with real literals and identifiers from
/// `vars`. Exponents must be non-negative integer literals; implicit
/// multiplication is rejected.
Poly parse_poly(const std::string& text, const std::vector<std::string>& vars);

/// Variant that also accepts sin(a) and cos(a) for bare identifiers `a` in
/// `angles`. The result lives over `vars` followed by the placeholder
/// variables "sin(a)", "cos(a)" for each angle (see trig_placeholder_vars).
Poly parse_trig_poly(const std::string& text, const std::vector<std::string>& vars,
                     const std::vector<std::string>& angles);

std::vector<std::string> trig_placeholder_vars(const std::vector<std::string>& vars,
                                               const std::vector<std::string>& angles);

}  // namespace roa
