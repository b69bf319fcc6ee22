#include <cmath>

#include "support.hpp"
#include "vartherm/diagnostics.hpp"
#include "vartherm/thermo.hpp"

using namespace vartherm;
using namespace vartherm::testing;

namespace {

// Two subsystems at constant temperatures 300 K and 350 K, kappa = 2 W/K.
Scenario two_reservoirs(double kappa) {
  Scenario sc;
  sc.name = "reservoirs";
  sc.family = Family::heat;
  sc.topology = topology(1, 2, 0);
  sc.lagrangian = linear_model(1.0, vec({300.0, 350.0}));
  const Eigen::MatrixXd M = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sc.subsystem_lagrangians.push_back(LagrangianModel::kinetic_minus_internal(
      M, [](const ThermoState& x) { return 300.0 * x.S[0]; },
      [](const ThermoState&) -> Eigen::VectorXd { return vec({0.0}); },
      [](const ThermoState&) -> Eigen::VectorXd { return vec({300.0, 0.0}); },
      [](const ThermoState&) -> Eigen::VectorXd { return Eigen::VectorXd(); }));
  sc.subsystem_lagrangians.push_back(LagrangianModel::kinetic_minus_internal(
      Eigen::MatrixXd::Zero(1, 1), [](const ThermoState& x) { return 350.0 * x.S[1]; },
      [](const ThermoState&) -> Eigen::VectorXd { return vec({0.0}); },
      [](const ThermoState&) -> Eigen::VectorXd { return vec({0.0, 350.0}); },
      [](const ThermoState&) -> Eigen::VectorXd { return Eigen::VectorXd(); }));
  sc.phenomenology.friction = constant_friction({Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)});
  sc.phenomenology.conduction = constant_matrix(Eigen::MatrixXd{{0.0, kappa}, {kappa, 0.0}});
  sc.initial = ThermoState::zeros(sc.topology);
  sc.initial.S << 1.0, 1.0;
  return sc;
}

Sample sample_at(const Scenario& sc, const ThermoState& x) {
  const Evaluation e = sc.evaluate(x);
  return Sample{x, e.rate, e.fluxes};
}

Scenario shortened(Scenario sc, double t_end) {
  sc.t_end = t_end;
  sc.sample_every = t_end / 50.0;
  return sc;
}

}  // namespace

TEST(Production, HeatConductionBetweenReservoirs) {
  const Scenario sc = two_reservoirs(2.0);
  const ProductionRate pr = entropy_production_at(sc, sample_at(sc, sc.initial));
  // kappa (T2 - T1)^2 / (T1 T2) = 2 * 2500 / 105000 = 1/21.
  EXPECT_NEAR(pr.total, 1.0 / 21.0, 1e-15);
  EXPECT_NEAR(pr.total, 0.047619, 1e-6);
  EXPECT_NEAR(pr.by_process[static_cast<std::size_t>(Process::heat_conduction)], 1.0 / 21.0, 1e-15);
  EXPECT_EQ(pr.by_process[static_cast<std::size_t>(Process::friction)], 0.0);
}

TEST(Production, FrictionBucket) {
  PistonParams p;
  p.v0 = 2.0;
  const Scenario sc = make_piston(p);
  const ProductionRate pr = entropy_production_at(sc, sample_at(sc, sc.initial));
  const double T = temperature(sc.lagrangian, sc.initial, 0);
  EXPECT_NEAR(pr.by_process[static_cast<std::size_t>(Process::friction)], p.friction * 4.0 / T, 1e-14);
  EXPECT_NEAR(pr.total, p.friction * 4.0 / T, 1e-14);
}

TEST(DetailedBalance, HeatPowerIsAntisymmetric) {
  const Scenario sc = two_reservoirs(2.0);
  const Trajectory tr = make_trajectory(sc, {sc.initial});
  const auto p0 = detailed_energy_balance(sc, tr, 0);
  const auto p1 = detailed_energy_balance(sc, tr, 1);
  ASSERT_EQ(p0.size(), 1u);
  EXPECT_NEAR(p0[0].heat_in[1], 100.0, 1e-12);
  EXPECT_NEAR(p1[0].heat_in[0], -100.0, 1e-12);
  EXPECT_NEAR(p0[0].energy_rate, 100.0, 1e-12);
  EXPECT_NEAR(p1[0].energy_rate, -100.0, 1e-12);
  const DetailedBalanceCheck c = check_detailed_balance(sc, tr);
  EXPECT_LT(c.closure, 1e-14);
  EXPECT_LT(c.heat_antisymmetry, 1e-14);
}

TEST(DetailedBalance, AdiabaticPistonSubsystemsClose) {
  const Scenario sc = shortened(make_adiabatic_piston(), 5.0);
  const DetailedBalanceCheck c = check_detailed_balance(sc, simulate(sc));
  EXPECT_LT(c.closure, 1e-10);
  EXPECT_LT(c.internal_work, 1e-10);
  EXPECT_LT(c.heat_antisymmetry, 1e-12);
}

TEST(SecondLaw, NegativeConductionIsFlaggedAtTheStart) {
  AdiabaticPistonParams p;
  p.kappa = -0.5;
  Scenario sc = make_adiabatic_piston(p);
  sc.check_phenomenology = false;
  sc.t_end = 2.0;
  const DiagnosticsReport d = diagnose(sc, simulate(sc));
  EXPECT_FALSE(d.ok());
  EXPECT_FALSE(d.second_law_ok);
  ASSERT_TRUE(d.second_law.violation_time.has_value());
  EXPECT_EQ(*d.second_law.violation_time, 0.0);
  EXPECT_LT(d.second_law.min_production, 0.0);
  EXPECT_FALSE(d.violations.empty());
  // The first law still holds: the defect is in the flux law, not the integration.
  EXPECT_TRUE(d.first_law_ok);
}

TEST(SecondLaw, ValidationRejectsTheSameModel) {
  AdiabaticPistonParams p;
  p.kappa = -0.5;
  const Scenario sc = make_adiabatic_piston(p);
  try {
    sc.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("phenomenology.kappa"), std::string::npos);
  }
}

TEST(SecondLaw, OpenOutflowMayLowerEntropy) {
  OpenPistonParams p;
  p.piston.friction = 0.0;
  p.piston.external_force = 0.0;
  PortSpec out;
  out.track_interior = true;
  out.molar_flow = -0.05;
  p.ports = {out};
  p.sources.clear();
  Scenario sc = make_open_piston(p);
  sc.t_end = 2.0;
  const Trajectory tr = simulate(sc);
  EXPECT_LT(tr.samples.back().x.S[0], tr.samples.front().x.S[0]);
  const DiagnosticsReport d = diagnose(sc, tr);
  EXPECT_TRUE(d.second_law_ok) << d.second_law.reason;
  EXPECT_TRUE(d.ok());
}

TEST(FirstLaw, PowersMatchBoundaryData) {
  const Scenario sc = make_open_piston();
  const ExternalPowers pw = external_powers(sc, sc.initial);
  const Evaluation e = sc.evaluate(sc.initial);
  EXPECT_NEAR(energy_rate(sc.lagrangian, sc.initial, e.rate), pw.total(), 1e-10 * std::abs(pw.total()));
  double heat = 0.0;
  for (const auto& s : e.fluxes.sources) heat += s.entropy_flow * s.temperature;
  EXPECT_NEAR(pw.heat, heat, 1e-12 * std::abs(heat));
}

TEST(FirstLaw, ResidualSmallAcrossTheZoo) {
  for (const auto& name : scenario_names()) {
    const Scenario base = make_default_scenario(name);
    const Scenario sc = shortened(base, std::min(base.t_end, 5.0));
    const FirstLawSeries fl = first_law_residual(sc, simulate(sc));
    EXPECT_LT(fl.max_relative, 1e-10) << name;
  }
}

TEST(Gauge, ShiftingDisplacementsChangesNothing) {
  const Scenario sc = shortened(make_two_compartment(), 5.0);
  const Trajectory tr = simulate(sc);
  std::vector<ThermoState> shifted;
  for (const auto& s : tr.samples) {
    ThermoState x = s.x;
    x.Gamma.array() += 1234.5;
    x.W.array() -= 77.0;
    x.Sigma.array() += 3.0;
    shifted.push_back(x);
  }
  const Trajectory moved = make_trajectory(sc, shifted);
  const DiagnosticsReport a = diagnose(sc, tr), b = diagnose(sc, moved);
  EXPECT_EQ(a.max_first_law_residual, b.max_first_law_residual);
  EXPECT_EQ(a.total_production, b.total_production);
  EXPECT_EQ(a.min_internal_production, b.min_internal_production);
  EXPECT_EQ(a.energy_final, b.energy_final);
}

TEST(Equilibrium, AdiabaticPistonSummaries) {
  const Scenario sc = make_adiabatic_piston();
  const DiagnosticsReport d = diagnose(sc, simulate(sc));
  EXPECT_TRUE(d.ok());
  EXPECT_TRUE(d.isolated);
  EXPECT_FALSE(d.open);
  EXPECT_TRUE(d.equilibrium.steady);
  EXPECT_LT(d.equilibrium.temperature_gap_relative, 1e-6);
  ASSERT_TRUE(d.equilibrium.mechanical_gap_relative.has_value());
  EXPECT_LT(*d.equilibrium.mechanical_gap_relative, 1e-6);
  EXPECT_LT(d.max_energy_drift, 1e-8);
  EXPECT_GT(d.entropy_final, d.entropy_initial);
  EXPECT_TRUE(d.detailed_balance.has_value());
}

TEST(Equilibrium, MembraneAndReaction) {
  const Scenario m = make_membrane();
  const DiagnosticsReport dm = diagnose(m, simulate(m));
  EXPECT_TRUE(dm.equilibrium.steady);
  EXPECT_LT(dm.equilibrium.chemical_potential_gap, 1e-6 * 1e3);
  const Scenario r = make_reaction_cell();
  const DiagnosticsReport dr = diagnose(r, simulate(r));
  EXPECT_TRUE(dr.ok());
  EXPECT_LT(dr.equilibrium.max_affinity, 1e-3);
}

TEST(Production, DecompositionIsComplete) {
  for (const auto& name : scenario_names()) {
    const Scenario base = make_default_scenario(name);
    const Scenario sc = shortened(base, std::min(base.t_end, 5.0));
    const ProductionSeries ps = internal_entropy_production(sc, simulate(sc));
    EXPECT_LT(ps.completeness_error, 1e-10) << name;
    double sum = 0.0;
    for (double b : ps.integrated) sum += b;
    EXPECT_NEAR(sum, ps.integrated_total, 1e-9 * std::max(1.0, std::abs(ps.integrated_total))) << name;
  }
}
