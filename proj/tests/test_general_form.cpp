#include <cmath>

#include "support.hpp"
#include "vartherm/general_form.hpp"
#include "vartherm/thermo.hpp"

using namespace vartherm;
using namespace vartherm::testing;

namespace {

Scenario short_run(Scenario sc, double t_end) {
  sc.t_end = t_end;
  sc.sample_every = t_end / 20.0;
  return sc;
}

}  // namespace

TEST(GeneralForm, ConstraintVanishesAtRest) {
  const Scenario sc = make_piston();
  const EmbeddedSystem sys(sc);
  const Eigen::VectorXd X = sys.position(sc.initial);
  const Eigen::VectorXd Xdot = Eigen::VectorXd::Zero(sys.dim());
  const ResidualReport r = constraint_residual(sys.constraints(), 0.0, X, Xdot);
  ASSERT_EQ(r.residual.size(), 1);
  EXPECT_EQ(r.residual[0], 0.0);
}

TEST(GeneralForm, EntropyRateEntersThroughTemperature) {
  PistonParams p;
  p.v0 = 0.7;
  const Scenario sc = make_piston(p);
  const EmbeddedSystem sys(sc);
  const Eigen::VectorXd X = sys.position(sc.initial);
  const Evaluation e = sc.evaluate(sc.initial);
  Eigen::VectorXd Xdot = sys.velocity(e.rate);
  const double base = constraint_residual(sys.constraints(), 0.0, X, Xdot).residual[0];
  EXPECT_NEAR(base, 0.0, 1e-12);
  const double delta = 1e-3;
  Xdot[sys.off_S] += delta;
  const double moved = constraint_residual(sys.constraints(), 0.0, X, Xdot).residual[0];
  const double dL_dS = sc.lagrangian.d_S(sc.initial)[0];
  EXPECT_NEAR(moved - base, dL_dS * delta, 1e-9 * std::abs(dL_dS * delta));
}

TEST(GeneralForm, PositionRoundTrip) {
  const Scenario sc = make_membrane();
  const EmbeddedSystem sys(sc);
  const Evaluation e = sc.evaluate(sc.initial);
  const ThermoState y = sys.state(0.0, sys.position(sc.initial), sys.velocity(e.rate));
  EXPECT_EQ(y.S, sc.initial.S);
  EXPECT_EQ(y.N, sc.initial.N);
  // Diffusion carries only the chemical displacement term.
  EXPECT_NEAR(sys.extended_lagrangian(0.0, sys.position(sc.initial), sys.velocity(e.rate)) -
                  sc.lagrangian.value(sc.initial),
              e.rate.dW.dot(sc.initial.N), 1e-9 * std::abs(sc.lagrangian.value(sc.initial)));
}

TEST(GeneralForm, PistonMultiplierIsMinusOne) {
  const Scenario sc = short_run(make_piston(), 2.0);
  const Trajectory tr = simulate(sc);
  const OracleSummary o = check_trajectory(sc, tr);
  EXPECT_GT(o.points, 10);
  EXPECT_EQ(o.rank_deficient_points, 0);
  EXPECT_LT(o.max_lambda_deviation, 1e-4);
  EXPECT_LT(o.max_constraint_residual, 1e-9);
  EXPECT_LT(o.max_multiplier_residual, 1e-6);
  const EmbeddedSystem sys(sc);
  EXPECT_EQ(sys.expected_multipliers(tr.samples[0]), vec({-1.0}));
}

TEST(GeneralForm, FrictionlessPistonStillDetermined) {
  PistonParams p;
  p.friction = 0.0;
  p.v0 = 1.0;
  const Scenario sc = short_run(make_piston(p), 1.0);
  const OracleSummary o = check_trajectory(sc, simulate(sc));
  EXPECT_EQ(o.rank_deficient_points, 0);
  EXPECT_LT(o.max_lambda_deviation, 1e-6);
  EXPECT_LT(o.max_energy_balance, 1e-9);
}

TEST(GeneralForm, OpenPistonEnergyBalance) {
  const Scenario sc = short_run(make_open_piston(), 2.0);
  const OracleSummary o = check_trajectory(sc, simulate(sc));
  EXPECT_LT(o.max_constraint_residual, 1e-9);
  EXPECT_LT(o.max_multiplier_residual, 1e-6);
  EXPECT_LT(o.max_energy_balance, 1e-8);
}

TEST(GeneralForm, EveryFamilyAgreesWithItsEvolution) {
  for (const auto& name : scenario_names()) {
    const Scenario base = make_default_scenario(name);
    const Scenario sc = short_run(base, std::min(base.t_end, 5.0));
    const OracleSummary o = check_trajectory(sc, simulate(sc));
    EXPECT_LT(o.max_constraint_residual, 1e-9) << name;
    EXPECT_LT(o.max_multiplier_residual, 1e-6) << name;
  }
}

TEST(GeneralForm, WrongRateIsDetected) {
  // Doubling the entropy rate breaks the thermodynamic constraint.
  PistonParams p;
  p.v0 = 2.0;
  const Scenario sc = make_piston(p);
  const EmbeddedSystem sys(sc);
  Evaluation e = sc.evaluate(sc.initial);
  e.rate.dS *= 2.0;
  e.rate.dSigma *= 2.0;
  const ResidualReport r = constraint_residual(sys.constraints(), 0.0, sys.position(sc.initial), sys.velocity(e.rate));
  EXPECT_GT(r.max_relative, 0.1);
}

TEST(GeneralForm, FourthOrderCentralDerivative) {
  std::vector<Eigen::VectorXd> f;
  const double h = 0.1;
  for (int i = 0; i < 5; ++i) f.push_back(vec({std::sin(i * h)}));
  EXPECT_NEAR(central_derivative4(f, 2, h)[0], std::cos(2 * h), 1e-5);
}
