#include <cmath>

#include "support.hpp"
#include "vartherm/integrators.hpp"

using namespace vartherm;
using namespace vartherm::testing;

namespace {

OdeSystem decay(double k) {
  OdeSystem s;
  s.f = [k](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return -k * y; };
  return s;
}

OdeSystem oscillator(double omega) {
  OdeSystem s;
  s.f = [omega](double, const Eigen::VectorXd& y) { return vec({y[1], -omega * omega * y[0]}); };
  return s;
}

IntegratorConfig fixed(Method m, double dt) {
  IntegratorConfig c;
  c.method = m;
  c.dt = dt;
  c.newton_tol = 1e-15;
  return c;
}

double final_error(Method m, double dt) {
  const auto r = integrate(decay(1.0), 0.0, vec({1.0}), 1.0, 1.0, fixed(m, dt));
  return std::abs(r.states.back()[0] - std::exp(-1.0));
}

}  // namespace

TEST(Integrators, ZeroFieldLeavesStateUnchanged) {
  OdeSystem zero;
  zero.f = [](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(y.size()); };
  const Eigen::VectorXd y0 = vec({1.5, -2.0, 3.25});
  for (Method m : {Method::rk4, Method::dopri45, Method::implicit_midpoint}) {
    const auto r = integrate(zero, 0.0, y0, 2.0, 0.5, fixed(m, 0.1));
    ASSERT_EQ(r.states.size(), 5u) << to_string(m);
    for (const auto& y : r.states) EXPECT_EQ(y, y0) << to_string(m);
  }
}

TEST(Integrators, Rk4LocalErrorIsFifthOrder) {
  const Eigen::VectorXd y0 = vec({1.0});
  const double e1 = std::abs(step_rk4(decay(1.0), 0.0, y0, 0.1)[0] - std::exp(-0.1));
  const double e2 = std::abs(step_rk4(decay(1.0), 0.0, y0, 0.05)[0] - std::exp(-0.05));
  EXPECT_NEAR(std::log2(e1 / e2), 5.0, 0.1);
  // Leading term dt^5 / 120 for y' = -y.
  EXPECT_NEAR(e1, std::pow(0.1, 5) / 120.0, 0.1 * std::pow(0.1, 5) / 120.0);
}

TEST(Integrators, GlobalOrders) {
  const double rk4 = std::log2(final_error(Method::rk4, 0.02) / final_error(Method::rk4, 0.01));
  EXPECT_NEAR(rk4, 4.0, 0.2);
  EXPECT_NEAR(final_error(Method::rk4, 0.02) / final_error(Method::rk4, 0.01), 16.0, 1.0);
  const double mid =
      std::log2(final_error(Method::implicit_midpoint, 0.02) / final_error(Method::implicit_midpoint, 0.01));
  EXPECT_GE(mid, 1.9);
  EXPECT_LE(mid, 2.1);
}

TEST(Integrators, LinearSystemAgainstExactSolution) {
  // y' = A y with A = [[0, 1], [-2, -3]]: eigenvalues -1 and -2.
  OdeSystem s;
  s.f = [](double, const Eigen::VectorXd& y) { return vec({y[1], -2.0 * y[0] - 3.0 * y[1]}); };
  const double t = 1.5;
  // y(0) = (1, 0): y = 2 e^-t - e^-2t.
  const double exact = 2.0 * std::exp(-t) - std::exp(-2.0 * t);
  IntegratorConfig c;
  c.rel_tol = 1e-11;
  c.abs_tol = 1e-13;
  const auto r = integrate(s, 0.0, vec({1.0, 0.0}), t, t, c);
  EXPECT_NEAR(r.states.back()[0], exact, 1e-9);
  const auto q = integrate(s, 0.0, vec({1.0, 0.0}), t, t, fixed(Method::rk4, 1e-3));
  EXPECT_NEAR(q.states.back()[0], exact, 1e-11);
}

TEST(Integrators, ImplicitMidpointKeepsOscillatorEnergyBounded) {
  const double omega = 2.0, dt = 0.05;
  const auto r = integrate(oscillator(omega), 0.0, vec({1.0, 0.0}), 1e4 * dt, 0.0, fixed(Method::implicit_midpoint, dt));
  ASSERT_EQ(r.steps, 10000);
  double worst = 0.0;
  for (const auto& y : r.states) {
    const double e = 0.5 * y[1] * y[1] + 0.5 * omega * omega * y[0] * y[0];
    worst = std::max(worst, std::abs(e - 2.0));
  }
  // Quadratic invariants are preserved up to the Newton tolerance.
  EXPECT_LT(worst, 1e-9);
}

TEST(Integrators, Rk4OscillatorEnergyDrifts) {
  // Contrast: RK4 is not symplectic and loses energy monotonically at large steps.
  const double omega = 2.0, dt = 0.2;
  const auto r = integrate(oscillator(omega), 0.0, vec({1.0, 0.0}), 2000 * dt, 0.0, fixed(Method::rk4, dt));
  const auto& y = r.states.back();
  EXPECT_LT(0.5 * y[1] * y[1] + 0.5 * omega * omega * y[0] * y[0], 2.0 * 0.99);
}

TEST(Integrators, AdaptiveErrorScalesWithTolerance) {
  auto run = [](double tol) {
    IntegratorConfig c;
    c.rel_tol = tol;
    c.abs_tol = tol * 1e-3;
    c.dt = 0.01;
    const auto r = integrate(oscillator(3.0), 0.0, vec({1.0, 0.0}), 5.0, 5.0, c);
    return std::abs(r.states.back()[0] - std::cos(15.0));
  };
  const double coarse = run(1e-6), fine = run(1e-9);
  EXPECT_LT(fine, coarse);
  EXPECT_LT(coarse, 1e-4);
  EXPECT_LT(fine, 1e-7);
  // Error shrinks roughly in proportion: three decades of tolerance, at least two of error.
  EXPECT_GT(coarse / fine, 100.0);
}

TEST(Integrators, SamplesLandOnRequestedTimes) {
  IntegratorConfig c;
  const auto r = integrate(decay(2.0), 0.0, vec({1.0}), 1.0, 0.3, c);
  ASSERT_EQ(r.times.size(), 5u);
  EXPECT_DOUBLE_EQ(r.times[1], 0.3);
  EXPECT_DOUBLE_EQ(r.times.back(), 1.0);
  for (std::size_t i = 0; i < r.times.size(); ++i) EXPECT_NEAR(r.states[i][0], std::exp(-2.0 * r.times[i]), 1e-9);
}

TEST(Integrators, HermiteInterpolatesCubicsExactly) {
  auto p = [](double t) { return t * t * t - 2 * t + 1; };
  auto dp = [](double t) { return 3 * t * t - 2; };
  const Eigen::VectorXd v = hermite(0.0, vec({p(0)}), vec({dp(0)}), 2.0, vec({p(2)}), vec({dp(2)}), 0.7);
  EXPECT_NEAR(v[0], p(0.7), 1e-14);
}

TEST(Integrators, StiffnessIsReported) {
  // A blow-up in finite time forces the step below the floor.
  OdeSystem s;
  s.f = [](double, const Eigen::VectorXd& y) { return vec({y[0] * y[0]}); };
  IntegratorConfig c;
  expect_error(ErrorKind::stiffness, [&] { integrate(s, 0.0, vec({1.0}), 2.0, 0.1, c); });
}

TEST(Integrators, RecoverableRhsFailureRejectsTheStep) {
  // The RHS refuses y < 0.5; the adaptive stepper must back off and still reach t_end.
  OdeSystem s;
  s.f = [](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    if (y[0] < 0.5) throw Error(ErrorKind::domain, "below floor");
    return -0.1 * y;
  };
  IntegratorConfig c;
  c.dt = 100.0;
  const auto r = integrate(s, 0.0, vec({1.0}), 1.0, 1.0, c);
  EXPECT_NEAR(r.states.back()[0], std::exp(-0.1), 1e-9);
  EXPECT_GT(r.rejected, 0);
}

TEST(Integrators, ConfigValidation) {
  IntegratorConfig c;
  c.dt = -1.0;
  expect_error(ErrorKind::config, [&] { c.validate(); });
  expect_error(ErrorKind::config, [] { method_from_string("euler"); });
  EXPECT_EQ(method_from_string("rk4"), Method::rk4);
  EXPECT_EQ(method_from_string("implicit_midpoint"), Method::implicit_midpoint);
}
