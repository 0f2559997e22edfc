#include "roa/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace roa {

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw PolyError("negative exponent in monomial");
    degree_ += e;
  }
}

Monomial Monomial::variable(std::size_t nvars, std::size_t index, int power) {
  if (index >= nvars) throw PolyError("variable index out of range");
  std::vector<int> e(nvars, 0);
  e[index] = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.size() != size()) throw PolyError("monomial size mismatch");
  Monomial r = *this;
  for (std::size_t i = 0; i < exps_.size(); ++i) r.exps_[i] += other.exps_[i];
  r.degree_ += other.degree_;
  return r;
}

std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
  if (a.degree_ != b.degree_) return a.degree_ <=> b.degree_;
  // Same degree: larger leading exponents come first.
  return b.exps_ <=> a.exps_;
}

std::size_t MonomialHash::operator()(const Monomial& m) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int e : m.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

void enumerate_degree(std::size_t nvars, int degree, std::size_t pos, std::vector<int>& cur,
                      std::vector<Monomial>& out) {
  if (pos + 1 == nvars) {
    cur[pos] = degree;
    out.emplace_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[pos] = e;
    enumerate_degree(nvars, degree - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<Monomial> monomials_up_to(std::size_t nvars, int max_degree) {
  std::vector<Monomial> out;
  if (max_degree < 0) return out;
  if (nvars == 0) {
    out.emplace_back(std::vector<int>{});
    return out;
  }
  std::vector<int> cur(nvars, 0);
  for (int d = 0; d <= max_degree; ++d) enumerate_degree(nvars, d, 0, cur, out);
  return out;
}

int Degree::value() const {
  if (is_minus_infinity()) throw PolyError("degree of the zero polynomial is -infinity");
  return value_;
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(std::vector<std::string> vars) : vars_(std::move(vars)) {}

Poly::Poly(std::vector<std::string> vars, TermMap terms) : vars_(std::move(vars)) {
  for (auto& [m, c] : terms) {
    if (m.size() != vars_.size()) throw PolyError("monomial size does not match variable count");
    if (c != 0.0) terms_.emplace(m, c);
  }
}

Poly Poly::constant(std::vector<std::string> vars, double c) {
  Poly p(std::move(vars));
  p.add_term(Monomial::one(p.num_vars()), c);
  return p;
}

Poly Poly::variable(std::vector<std::string> vars, const std::string& name) {
  Poly p(std::move(vars));
  p.add_term(Monomial::variable(p.num_vars(), p.var_index(name)), 1.0);
  return p;
}

Poly Poly::variable(std::vector<std::string> vars, std::size_t index) {
  Poly p(std::move(vars));
  p.add_term(Monomial::variable(p.num_vars(), index), 1.0);
  return p;
}

Poly Poly::monomial(std::vector<std::string> vars, Monomial m, double coeff) {
  Poly p(std::move(vars));
  if (m.size() != p.num_vars()) throw PolyError("monomial size does not match variable count");
  p.add_term(m, coeff);
  return p;
}

Degree Poly::degree() const {
  if (terms_.empty()) return Degree::minus_infinity();
  // Graded order: the last term has maximal degree.
  return Degree(terms_.rbegin()->first.degree());
}

double Poly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

std::size_t Poly::var_index(const std::string& name) const {
  auto it = std::find(vars_.begin(), vars_.end(), name);
  if (it == vars_.end()) throw PolyError("unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - vars_.begin());
}

double Poly::evaluate(std::span<const double> point) const {
  if (point.size() != vars_.size()) throw PolyError("evaluation point has wrong dimension");
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (int e = 0; e < m[i]; ++e) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

void Poly::add_term(const Monomial& m, double c) {
  if (c == 0.0) return;
  if (m.size() != vars_.size()) throw PolyError("monomial size does not match variable count");
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Poly::require_same_vars(const Poly& other) const {
  if (vars_ != other.vars_) throw PolyError("polynomials are over different variable sets");
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Poly& Poly::operator+=(const Poly& other) {
  require_same_vars(other);
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  require_same_vars(other);
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Poly& Poly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (it->second == 0.0) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  a.require_same_vars(b);
  Poly r(a.vars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
  }
  return r;
}

Poly operator+(Poly a, double c) {
  a.add_term(Monomial::one(a.num_vars()), c);
  return a;
}

double Poly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string Poly::to_string(int precision) const {
  if (terms_.empty()) return "0";
  std::string out;
  char buf[64];
  bool first = true;
  for (const auto& [m, c] : terms_) {
    double mag = std::abs(c);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    bool unit = mag == 1.0 && m.degree() > 0;
    if (!unit) {
      std::snprintf(buf, sizeof(buf), "%.*g", precision, mag);
      out += buf;
    }
    bool need_star = !unit;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (need_star) out += "*";
      out += vars_[i];
      if (m[i] > 1) out += "^" + std::to_string(m[i]);
      need_star = true;
    }
  }
  return out;
}

Poly pow(const Poly& p, int e) {
  if (e < 0) throw PolyError("negative power");
  Poly result = Poly::constant(p.vars(), 1.0);
  Poly base = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

Poly differentiate(const Poly& p, std::size_t var_index) {
  if (var_index >= p.num_vars()) throw PolyError("differentiation index out of range");
  Poly r(p.vars());
  for (const auto& [m, c] : p.terms()) {
    int e = m[var_index];
    if (e == 0) continue;
    std::vector<int> ex = m.exponents();
    ex[var_index] = e - 1;
    r.add_term(Monomial(std::move(ex)), c * e);
  }
  return r;
}

Poly substitute(const Poly& p, const std::map<std::string, Poly>& assignments) {
  if (assignments.empty()) return p;
  const std::vector<std::string>& target = assignments.begin()->second.vars();
  for (const auto& [name, q] : assignments) {
    if (std::find(p.vars().begin(), p.vars().end(), name) == p.vars().end()) {
      throw PolyError("substitution for unknown variable '" + name + "'");
    }
    if (q.vars() != target) throw PolyError("replacement polynomials use different variable sets");
  }
  // Image of every variable of p as a polynomial over the target variables.
  std::vector<Poly> image;
  image.reserve(p.num_vars());
  for (const auto& name : p.vars()) {
    auto it = assignments.find(name);
    if (it != assignments.end()) {
      image.push_back(it->second);
    } else {
      auto pos = std::find(target.begin(), target.end(), name);
      if (pos == target.end()) {
        throw PolyError("variable '" + name + "' is neither assigned nor in the target variables");
      }
      image.push_back(Poly::variable(target, static_cast<std::size_t>(pos - target.begin())));
    }
  }
  // Cache of powers image[i]^e.
  std::vector<std::vector<Poly>> powers(p.num_vars());
  auto power_of = [&](std::size_t i, int e) -> const Poly& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(Poly::constant(target, 1.0));
    while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * image[i]);
    return cache[static_cast<std::size_t>(e)];
  };
  Poly result(target);
  for (const auto& [m, c] : p.terms()) {
    Poly term = Poly::constant(target, c);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] > 0) term = term * power_of(i, m[i]);
    }
    result += term;
  }
  return result;
}

Poly substitute(const Poly& p, const std::map<std::string, double>& values) {
  std::map<std::string, Poly> assignments;
  for (const auto& [name, v] : values) assignments.emplace(name, Poly::constant(p.vars(), v));
  return substitute(p, assignments);
}

Poly embed(const Poly& p, const std::vector<std::string>& vars) {
  std::vector<std::size_t> where(p.num_vars());
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    auto it = std::find(vars.begin(), vars.end(), p.vars()[i]);
    if (it == vars.end()) throw PolyError("cannot embed: variable '" + p.vars()[i] + "' missing");
    where[i] = static_cast<std::size_t>(it - vars.begin());
  }
  Poly r(vars);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> ex(vars.size(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) ex[where[i]] += m[i];
    r.add_term(Monomial(std::move(ex)), c);
  }
  return r;
}

Poly lie_derivative(const Poly& v, const std::vector<Poly>& f) {
  if (v.num_vars() != f.size() + 1) {
    throw PolyError("lie_derivative: vector field length does not match the state block of v");
  }
  std::vector<std::string> state(v.vars().begin() + 1, v.vars().end());
  Poly result = differentiate(v, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].vars() != state) throw PolyError("lie_derivative: f must be over the state variables of v");
    Poly dv = differentiate(v, i + 1);
    if (dv.is_zero()) continue;
    result += dv * embed(f[i], v.vars());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}

std::vector<std::string> trig_placeholder_vars(const std::vector<std::string>& vars,
                                               const std::vector<std::string>& angles) {
  std::vector<std::string> out = vars;
  for (const auto& a : angles) {
    out.push_back("sin(" + a + ")");
    out.push_back("cos(" + a + ")");
  }
  return out;
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, std::vector<std::string> vars, const std::vector<std::string>* angles)
      : text_(text), vars_(std::move(vars)), angles_(angles) {}

  Poly parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    Poly p = expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return p;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  Poly expr() {
    Poly acc = term();
    for (;;) {
      if (peek('+')) {
        ++pos_;
        acc += term();
      } else if (peek('-')) {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = unary();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        acc = acc * unary();
      } else {
        skip_ws();
        if (pos_ < text_.size()) {
          char c = text_[pos_];
          if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == '.') {
            throw ParseError("implicit multiplication is not allowed", pos_);
          }
        }
        return acc;
      }
    }
  }

  Poly unary() {
    if (peek('-')) {
      ++pos_;
      return -unary();
    }
    if (peek('+')) {
      ++pos_;
      return unary();
    }
    return power();
  }

  Poly power() {
    Poly base = atom();
    if (peek('^')) {
      ++pos_;
      skip_ws();
      std::size_t at = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        throw ParseError("exponent must be a non-negative integer", at);
      }
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError("exponent must be a non-negative integer literal", at);
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
        throw ParseError("fractional exponent", at);
      }
      int e = std::stoi(text_.substr(start, pos_ - start));
      return pow(base, e);
    }
    return base;
  }

  Poly atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Poly number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string lit = text_.substr(start, pos_ - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(lit, &used);
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + lit + "'", start);
    }
    if (used != lit.size()) throw ParseError("malformed number '" + lit + "'", start);
    return Poly::constant(vars_, v);
  }

  std::string read_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Poly identifier() {
    std::size_t start = pos_;
    std::string name = read_ident();
    if (angles_ && (name == "sin" || name == "cos") && peek('(')) {
      ++pos_;
      skip_ws();
      std::size_t arg_at = pos_;
      std::string arg = pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')
                            ? read_ident()
                            : std::string();
      if (arg.empty() || !peek(')')) {
        throw ParseError("trigonometric argument must be a bare angle variable", arg_at);
      }
      ++pos_;
      if (std::find(angles_->begin(), angles_->end(), arg) == angles_->end()) {
        throw ParseError("'" + arg + "' is not a declared angle variable", arg_at);
      }
      return Poly::variable(vars_, name + "(" + arg + ")");
    }
    auto it = std::find(vars_.begin(), vars_.end(), name);
    bool placeholder = name.find('(') != std::string::npos;
    if (it == vars_.end() || placeholder) throw ParseError("unknown identifier '" + name + "'", start);
    return Poly::variable(vars_, static_cast<std::size_t>(it - vars_.begin()));
  }

  const std::string& text_;
  std::vector<std::string> vars_;
  const std::vector<std::string>* angles_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly parse_poly(const std::string& text, const std::vector<std::string>& vars) {
  return Parser(text, vars, nullptr).parse();
}

Poly parse_trig_poly(const std::string& text, const std::vector<std::string>& vars,
                     const std::vector<std::string>& angles) {
  for (const auto& a : angles) {
    if (std::find(vars.begin(), vars.end(), a) == vars.end()) {
      throw PolyError("angle '" + a + "' is not a variable");
    }
  }
  return Parser(text, trig_placeholder_vars(vars, angles), &angles).parse();
}

}  // namespace roa
