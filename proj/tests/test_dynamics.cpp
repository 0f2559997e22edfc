#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "roa/verify.hpp"

using namespace roa;

TEST(Recast, PendulumFieldAndManifold) {
  const DynSystem s = test::pendulum_system();
  ASSERT_EQ(s.vars, (std::vector<std::string>{"s_theta", "c_theta", "w"}));
  const auto& v = s.vars;
  const Poly S = Poly::variable(v, 0), C = Poly::variable(v, 1), W = Poly::variable(v, 2);
  EXPECT_EQ(s.f[0], W - C * W);
  EXPECT_EQ(s.f[1], S * W);
  EXPECT_EQ(s.f[2], -S - 0.5 * W);
  ASSERT_EQ(s.X.equalities.size(), 1u);
  EXPECT_EQ(s.X.equalities[0], S * S + C * C - 2.0 * C);
}

TEST(Recast, BoxCoversTheRecastRange) {
  const DynSystem s = test::pendulum_system(3.0);
  EXPECT_EQ(s.X.box[0].lo, -1.0);
  EXPECT_EQ(s.X.box[0].hi, 1.0);
  EXPECT_EQ(s.X.box[1].lo, 0.0);
  EXPECT_EQ(s.X.box[1].hi, 2.0);
  EXPECT_EQ(s.X.box[2].hi, 3.0);
}

TEST(Recast, FieldAgreesWithTheOriginalOde) {
  const DynSystem s = test::pendulum_system();
  const TrigMap& tm = *s.trig_map;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> o{u(rng), u(rng)};
    std::vector<double> d(2);
    tm.original.eval(o, d);
    const auto r = tm.to_recast(o);
    // chain rule: s' = cos(theta) theta', c' = sin(theta) theta'
    EXPECT_NEAR(s.f[0].evaluate(r), std::cos(o[0]) * d[0], 1e-12);
    EXPECT_NEAR(s.f[1].evaluate(r), std::sin(o[0]) * d[0], 1e-12);
    EXPECT_NEAR(s.f[2].evaluate(r), d[1], 1e-12);
  }
}

TEST(Recast, MapRoundTrip) {
  const DynSystem s = test::pendulum_system();
  const TrigMap& tm = *s.trig_map;
  for (double th : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    const std::vector<double> o{th, 0.7};
    const auto back = tm.to_original(tm.to_recast(o));
    EXPECT_NEAR(back[0], th, 1e-14);
    EXPECT_DOUBLE_EQ(back[1], 0.7);
    EXPECT_NEAR(s.X.equalities[0].evaluate(tm.to_recast(o)), 0.0, 1e-15);
  }
}

TEST(Recast, AngleOutsideSinCosRejected) {
  TrigOde ode;
  ode.states = {"a", "w"};
  ode.angles = {"a"};
  ode.rhs = {parse_trig_poly("w", ode.states, ode.angles), parse_trig_poly("-a - sin(a)", ode.states, ode.angles)};
  EXPECT_THROW(recast_trig(ode), PolyError);
}

TEST(Tangency, RecastEqualityIsInvariant) {
  const auto res = check_tangency(test::pendulum_system());
  ASSERT_EQ(res.size(), 1u);
  EXPECT_TRUE(res[0].is_zero() || res[0].max_abs_coefficient() <= 1e-12);
  EXPECT_TRUE(tangency_certified(res));
}

TEST(Tangency, BrokenEqualityDetected) {
  // x' = -x, y' = y does not preserve the circle.
  DynSystem s;
  s.vars = {"x", "y"};
  const Poly x = Poly::variable(s.vars, 0), y = Poly::variable(s.vars, 1);
  s.f = {-x, y};
  s.X.equalities = {x * x + y * y - 1.0};
  const auto res = check_tangency(s);
  EXPECT_FALSE(tangency_certified(res));
  EXPECT_DOUBLE_EQ(res[0].coefficient(Monomial({2, 0})), -2.0);
  EXPECT_DOUBLE_EQ(res[0].coefficient(Monomial({0, 2})), 2.0);
}

TEST(Tangency, RotationPreservesTheCircle) {
  DynSystem s;
  s.vars = {"x", "y"};
  const Poly x = Poly::variable(s.vars, 0), y = Poly::variable(s.vars, 1);
  s.f = {-y, x};
  s.X.equalities = {x * x + y * y - 1.0};
  EXPECT_TRUE(tangency_certified(check_tangency(s)));
}

TEST(Tangency, TrajectoriesStayOnTheManifold) {
  const DynSystem s = test::pendulum_system();
  const TrigMap& tm = *s.trig_map;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi), w(-1.5, 1.5);
  IntegrateOptions io;
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> o{th(rng), w(rng)};
    const Trajectory tr = integrate(polynomial_field(s.f), tm.to_recast(o), 8.0, io);
    for (const auto& x : tr.states) EXPECT_LE(std::abs(s.X.equalities[0].evaluate(x)), 1e-8);
  }
}

TEST(Sets, BallAndBoxMargins) {
  const SemiAlgSet b = make_ball_set({"x", "y"}, {1.0, 0.0}, 0.5);
  const std::vector<double> in{1.1, 0.1}, out{2.0, 0.0};
  EXPECT_TRUE(b.contains(in));
  EXPECT_FALSE(b.contains(out));
  EXPECT_NEAR(b.margin(in), 0.25 - 0.02, 1e-15);
  EXPECT_THROW(make_ball_set({"x"}, {0.0}, 0.0), PolyError);
}

TEST(Shift, EquilibriumMovesToTheOrigin) {
  DynSystem s;
  s.vars = {"x"};
  const Poly x = Poly::variable(s.vars, 0);
  s.f = {(x - 0.5) * (x + 1.0) * -1.0};
  s.X.box = {{-0.5, 1.5}};
  s.target = make_ball_set(s.vars, {0.5}, 0.1);
  s.horizon = 1.0;
  const DynSystem t = shift_to_origin(s, {0.5});
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(t.f[0].evaluate(zero), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(t.X.box[0].lo, -1.0);
  EXPECT_DOUBLE_EQ(t.target.ball->center[0], 0.0);
  EXPECT_THROW(shift_to_origin(s, {0.2}), PolyError);
}

TEST(Validate, RejectsInconsistentSystems) {
  DynSystem s = test::decay_system();
  EXPECT_NO_THROW(s.validate());
  s.X.box.clear();
  EXPECT_THROW(s.validate(), PolyError);
}
