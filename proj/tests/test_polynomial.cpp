#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "roa/polynomial.hpp"

using namespace roa;

namespace {

const std::vector<std::string> XY{"x", "y"};

Poly random_poly(std::mt19937_64& rng, const std::vector<std::string>& vars, int deg, int terms) {
  std::uniform_int_distribution<int> e(0, deg);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Poly p(vars);
  for (int i = 0; i < terms; ++i) {
    std::vector<int> ex(vars.size());
    for (auto& v : ex) v = e(rng);
    p.add_term(Monomial(ex), c(rng));
  }
  return p;
}

}  // namespace

TEST(Monomial, GradedLexOrder) {
  const auto ms = monomials_up_to(2, 2);
  ASSERT_EQ(ms.size(), 6u);
  EXPECT_EQ(ms[0], Monomial({0, 0}));
  EXPECT_EQ(ms[1], Monomial({1, 0}));
  EXPECT_EQ(ms[2], Monomial({0, 1}));
  EXPECT_EQ(ms[3], Monomial({2, 0}));
  EXPECT_EQ(ms[4], Monomial({1, 1}));
  EXPECT_EQ(ms[5], Monomial({0, 2}));
  for (std::size_t i = 1; i < ms.size(); ++i) EXPECT_LT(ms[i - 1], ms[i]);
}

TEST(Monomial, CountMatchesBinomial) {
  // C(n + d, d) monomials of degree <= d in n variables.
  EXPECT_EQ(monomials_up_to(3, 4).size(), 35u);
  EXPECT_EQ(monomials_up_to(7, 6).size(), 1716u);
  EXPECT_EQ(monomials_up_to(1, 0).size(), 1u);
}

TEST(Monomial, ProductAddsExponents) {
  const Monomial a({1, 2}), b({3, 0});
  EXPECT_EQ(a * b, Monomial({4, 2}));
  EXPECT_EQ((a * b).degree(), 6);
}

TEST(Poly, ZeroHasMinusInfinityDegree) {
  Poly z(XY);
  EXPECT_TRUE(z.is_zero());
  EXPECT_TRUE(z.degree().is_minus_infinity());
  EXPECT_EQ(Poly::constant(XY, 3.0).degree().value(), 0);
}

TEST(Poly, BinomialSquare) {
  const Poly x = Poly::variable(XY, "x"), y = Poly::variable(XY, "y");
  const Poly p = (x + y) * (x + y);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial({2, 0})), 1.0);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial({1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial({0, 2})), 1.0);
  EXPECT_EQ(p.num_terms(), 3u);
}

TEST(Poly, CancellationDropsTerms) {
  const Poly x = Poly::variable(XY, "x");
  EXPECT_TRUE((x - x).is_zero());
}

TEST(Poly, MismatchedVariablesThrow) {
  const Poly x = Poly::variable(XY, "x");
  const Poly z = Poly::variable({"z"}, "z");
  EXPECT_THROW(x + z, PolyError);
}

TEST(PolyProperty, EvaluationIsARingHomomorphism) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Poly p = random_poly(rng, XY, 3, 5), q = random_poly(rng, XY, 3, 5);
    const std::vector<double> pt{u(rng), u(rng)};
    const double pv = p.evaluate(pt), qv = q.evaluate(pt);
    EXPECT_NEAR((p + q).evaluate(pt), pv + qv, 1e-10);
    EXPECT_NEAR((p - q).evaluate(pt), pv - qv, 1e-10);
    EXPECT_NEAR((p * q).evaluate(pt), pv * qv, 1e-9 * (1 + std::abs(pv * qv)));
    EXPECT_NEAR(pow(p, 2).evaluate(pt), pv * pv, 1e-9 * (1 + pv * pv));
  }
}

TEST(PolyProperty, DerivativeMatchesCentralDifference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Poly p = random_poly(rng, XY, 4, 6);
    std::vector<double> pt{u(rng), u(rng)};
    for (std::size_t i = 0; i < 2; ++i) {
      const double h = 1e-5;
      auto a = pt, b = pt;
      a[i] += h;
      b[i] -= h;
      const double fd = (p.evaluate(a) - p.evaluate(b)) / (2 * h);
      EXPECT_NEAR(differentiate(p, i).evaluate(pt), fd, 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST(PolyProperty, SubstitutionIsComposition) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Poly p = random_poly(rng, XY, 3, 6);
  const std::vector<std::string> uv{"u", "v"};
  const Poly gx = Poly::variable(uv, "u") * Poly::variable(uv, "v") + 0.5;
  const Poly gy = Poly::variable(uv, "u") - 2.0 * Poly::variable(uv, "v");
  const Poly c = substitute(p, {{"x", gx}, {"y", gy}});
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> q{u(rng), u(rng)};
    const std::vector<double> xy{gx.evaluate(q), gy.evaluate(q)};
    EXPECT_NEAR(c.evaluate(q), p.evaluate(xy), 1e-10);
  }
}

TEST(Poly, LieDerivativeOfLinearDecay) {
  // v = t x, f = -x: L v = x - t x.
  const std::vector<std::string> tx{"t", "x"};
  const Poly v = Poly::variable(tx, "t") * Poly::variable(tx, "x");
  const Poly f = -Poly::variable({"x"}, "x");
  const Poly lv = lie_derivative(v, {f});
  EXPECT_DOUBLE_EQ(lv.coefficient(Monomial({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(lv.coefficient(Monomial({1, 1})), -1.0);
  EXPECT_EQ(lv.num_terms(), 2u);
}

TEST(Parse, ArithmeticAndPowers) {
  const Poly p = parse_poly("3*x^2 - 2*x*y + (y - 1)^2", XY);
  const std::vector<double> pt{0.3, -0.7};
  EXPECT_NEAR(p.evaluate(pt), 3 * 0.09 - 2 * 0.3 * -0.7 + (-1.7) * (-1.7), 1e-14);
}

TEST(Parse, RejectsImplicitMultiplicationAndUnknownNames) {
  EXPECT_THROW(parse_poly("2x", XY), ParseError);
  EXPECT_THROW(parse_poly("x*z", XY), ParseError);
  EXPECT_THROW(parse_poly("x^-1", XY), ParseError);
  EXPECT_THROW(parse_poly("(x + 1", XY), ParseError);
}

TEST(Parse, TrigPlaceholders) {
  const Poly p = parse_trig_poly("w - sin(a)*cos(a)", {"a", "w"}, {"a"});
  const auto vars = trig_placeholder_vars({"a", "w"}, {"a"});
  EXPECT_EQ(p.vars(), vars);
  EXPECT_EQ(p.num_terms(), 2u);
}

TEST(Poly, PrintRoundTrip) {
  std::mt19937_64 rng(5);
  const Poly p = random_poly(rng, XY, 3, 6);
  const Poly q = parse_poly(p.to_string(17), XY);
  for (const auto& [m, c] : p.terms()) EXPECT_NEAR(q.coefficient(m), c, 1e-15 * (1 + std::abs(c)));
}
