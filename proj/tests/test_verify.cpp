#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "roa/verify.hpp"

using namespace roa;

namespace {

ROAApprox constant_approx(const DynSystem& s, Mode mode, double value) {
  Certificate c;
  c.mode = mode;
  std::vector<std::string> tv{"t"};
  tv.insert(tv.end(), s.vars.begin(), s.vars.end());
  c.v = Poly::constant(tv, value);
  c.w = Poly::constant(s.vars, 1.0);
  return make_approx(s, c);
}

}  // namespace

TEST(Integrator, ExponentialDecayToTolerance) {
  const VectorField f = polynomial_field({-Poly::variable({"x"}, 0)});
  const std::vector<double> x0{1.0};
  const Trajectory tr = integrate(f, x0, 5.0);
  ASSERT_EQ(tr.exit_reason, ExitReason::completed);
  EXPECT_DOUBLE_EQ(tr.times.back(), 5.0);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    EXPECT_NEAR(tr.states[i][0], std::exp(-tr.times[i]), 1e-8);
  }
}

TEST(Integrator, HarmonicOscillatorKeepsItsRadius) {
  const std::vector<std::string> v{"x", "y"};
  const VectorField f = polynomial_field({-Poly::variable(v, 1), Poly::variable(v, 0)});
  const std::vector<double> x0{1.0, 0.0};
  const Trajectory tr = integrate(f, x0, 20.0);
  const auto& xe = tr.states.back();
  EXPECT_NEAR(xe[0], std::cos(20.0), 1e-7);
  EXPECT_NEAR(xe[1], std::sin(20.0), 1e-7);
}

TEST(Integrator, StopsAtTheConstraintCrossing) {
  // x' = 1 from 0 leaves {x <= 0.5} at t = 0.5.
  const VectorField f = polynomial_field({Poly::constant({"x"}, 1.0)});
  IntegrateOptions io;
  io.margin = [](std::span<const double> x) { return 0.5 - x[0]; };
  const std::vector<double> x0{0.0};
  const Trajectory tr = integrate(f, x0, 3.0, io);
  EXPECT_EQ(tr.exit_reason, ExitReason::left_X);
  EXPECT_NEAR(tr.times.back(), 0.5, 1e-8);
}

TEST(Oracle, DecayReachesTheTarget) {
  const DynSystem s = test::decay_system(2.0, 0.1);
  const std::vector<double> in{0.7}, out{0.8};
  EXPECT_TRUE(roa_oracle(s, in, 2.0).in_roa);
  const OracleResult r = roa_oracle(s, out, 2.0);
  EXPECT_FALSE(r.in_roa);
  EXPECT_EQ(r.reason, OracleReason::missed_target);
}

TEST(Oracle, LeavingTheBoxIsReported) {
  DynSystem s = test::decay_system();
  s.f = {Poly::variable(s.vars, 0)};
  const std::vector<double> x0{0.5};
  const OracleResult r = roa_oracle(s, x0, 8.0);
  EXPECT_FALSE(r.in_roa);
  EXPECT_EQ(r.reason, OracleReason::left_X);
  EXPECT_NEAR(r.end_time, std::log(2.0), 1e-6);
}

TEST(Oracle, PendulumUsesTheOriginalDynamics) {
  const DynSystem s = test::pendulum_system();
  const TrigMap& tm = *s.trig_map;
  const std::vector<double> calm{0.3, 0.0}, wild{3.0, 2.0};
  EXPECT_TRUE(roa_oracle(s, tm.to_recast(calm), 8.0).in_roa);
  EXPECT_FALSE(roa_oracle(s, tm.to_recast(wild), 8.0).in_roa);
  const std::vector<double> off{0.5, 0.5, 0.0};
  EXPECT_THROW(roa_oracle(s, off, 8.0), std::invalid_argument);
}

TEST(CrossValidate, TrivialOuterHasNoViolations) {
  const DynSystem s = test::decay_system(2.0, 0.1);
  const CrossReport r = cross_validate(constant_approx(s, Mode::outer, 1.0), std::nullopt, s, 200, 1);
  EXPECT_EQ(r.outer_violations, 0u);
  EXPECT_EQ(r.outer_checked, 200u);
  EXPECT_EQ(r.outer_members, 200u);
  EXPECT_GT(r.oracle_in, 0u);
}

TEST(CrossValidate, WrongSetsAreCaught) {
  const DynSystem s = test::decay_system(2.0, 0.1);
  const ROAApprox empty_outer = constant_approx(s, Mode::outer, -1.0);
  const ROAApprox full_inner = constant_approx(s, Mode::inner, -1.0);
  const CrossReport r = cross_validate(empty_outer, full_inner, s, 200, 2);
  EXPECT_EQ(r.outer_violations, r.oracle_in);
  EXPECT_EQ(r.inner_violations, r.samples - r.oracle_in);
  EXPECT_EQ(r.witnesses.size(), r.samples);
  EXPECT_NEAR(r.outer_violation_rate() + r.inner_violation_rate(), 1.0, 1e-12);
}

TEST(CrossValidate, BandExcludesUndecidedSamples) {
  const DynSystem s = test::decay_system(2.0, 0.1);
  const ROAApprox zero_outer = constant_approx(s, Mode::outer, 1e-4);
  EXPECT_THROW(cross_validate(zero_outer, std::nullopt, s, 50, 1, 1e-3), std::runtime_error);
}

TEST(CrossValidate, Reproducible) {
  const DynSystem s = test::pendulum_system();
  const ROAApprox o = constant_approx(s, Mode::outer, 1.0);
  const CrossReport a = cross_validate(o, std::nullopt, s, 50, 4), b = cross_validate(o, std::nullopt, s, 50, 4);
  EXPECT_EQ(a.oracle_in, b.oracle_in);
}
