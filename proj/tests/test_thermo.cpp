#include <cmath>
#include <random>

#include "support.hpp"
#include "vartherm/ideal_gas.hpp"
#include "vartherm/models.hpp"
#include "vartherm/phenomenology.hpp"
#include "vartherm/thermo.hpp"

using namespace vartherm;
using namespace vartherm::testing;

TEST(Energy, AtRestEqualsInternalEnergy) {
  const auto topo = topology(1, 1, 0);
  auto L = linear_model(3.0, vec({250.0}), {}, 1, 4.0);
  ThermoState x = state_for(topo);
  x.q[0] = 0.5;
  x.S[0] = 2.0;
  EXPECT_DOUBLE_EQ(energy(L, x), 0.5 * 4.0 * 0.25 + 250.0 * 2.0);
}

TEST(Energy, KineticOnly) {
  const auto topo = topology(1, 1, 0);
  auto L = linear_model(2.0, vec({0.0}));
  ThermoState x = state_for(topo);
  x.v[0] = 3.0;
  EXPECT_DOUBLE_EQ(energy(L, x), 9.0);
}

TEST(Energy, PistonIsKineticPlusGasEnergy) {
  PistonParams p;
  p.v0 = 1.5;
  const Scenario sc = make_piston(p);
  const ThermoState& x = sc.initial;
  const double U = p.gas.internal_energy(x.S[0], p.area * x.q[0], p.moles);
  EXPECT_NEAR(energy(sc.lagrangian, x), 0.5 * p.mass * 1.5 * 1.5 + U, 1e-12 * U);
}

TEST(Temperature, LinearModelGivesConstant) {
  const auto topo = topology(1, 2, 0);
  auto L = linear_model(1.0, vec({300.0, 410.0}));
  ThermoState x = state_for(topo);
  x.S << 5.0, -3.0;
  EXPECT_DOUBLE_EQ(temperature(L, x, 0), 300.0);
  EXPECT_DOUBLE_EQ(temperature(L, x, 1), 410.0);
  EXPECT_EQ(temperatures(L, x), vec({300.0, 410.0}));
}

TEST(Temperature, ReferencePointOfEquationOfState) {
  IdealGasEOS g;
  EXPECT_NEAR(g.temperature(g.s_ref, g.v_ref, 1.0), g.T_ref, 1e-12 * g.T_ref);
  EXPECT_NEAR(g.temperature(3.0 * g.s_ref, 3.0 * g.v_ref, 3.0), g.T_ref, 1e-12 * g.T_ref);
}

TEST(Temperature, NonPositiveIsInadmissible) {
  const auto topo = topology(1, 1, 0);
  ThermoState x = state_for(topo);
  expect_error(ErrorKind::inadmissible_state, [&] { temperature(linear_model(1.0, vec({-5.0})), x, 0); });
  expect_error(ErrorKind::inadmissible_state, [&] { temperature(linear_model(1.0, vec({0.0})), x, 0); });
}

TEST(ChemicalPotential, LinearModel) {
  const auto topo = topology(1, 1, 2);
  auto L = linear_model(1.0, vec({300.0}), vec({-1200.0, 450.0}));
  ThermoState x = state_for(topo);
  x.N << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(chemical_potential(L, x, 0), -1200.0);
  EXPECT_DOUBLE_EQ(chemical_potential(L, x, 1), 450.0);
}

TEST(ChemicalPotential, SymmetricCompartmentsAgree) {
  MembraneParams p;
  p.V2 = p.V1;
  p.N2 = p.N1;
  p.gas2 = p.gas1;
  const Scenario sc = make_membrane(p);
  EXPECT_NEAR(chemical_potential(sc.lagrangian, sc.initial, 0), chemical_potential(sc.lagrangian, sc.initial, 2),
              1e-10 * std::abs(chemical_potential(sc.lagrangian, sc.initial, 0)));
}

TEST(ChemicalPotential, MatchesFiniteDifferenceOfEnergy) {
  IdealGasEOS g;
  const double S = 160.0, V = 0.02, N = 0.9, h = 1e-6;
  const double fd = (g.internal_energy(S, V, N + h) - g.internal_energy(S, V, N - h)) / (2 * h);
  EXPECT_NEAR(g.chemical_potential(S, V, N), fd, 1e-6 * std::abs(fd));
}

TEST(IdealGas, InternalEnergyFromIndependentInversion) {
  // Monatomic gas, 1 mol in 0.0249 m^3 at 300 K: U = 3/2 R T.
  IdealGasEOS g;
  for (double T : {300.0, 450.0, 1000.0}) {
    const double V = 0.0249, N = 1.0;
    const double S = N * (g.s_ref + 1.5 * kGasConstant * std::log(T / g.T_ref) +
                          kGasConstant * std::log(V / (N * g.v_ref)));
    EXPECT_NEAR(g.internal_energy(S, V, N), 1.5 * kGasConstant * T, 1e-9 * T);
  }
  const double V = 0.0249;
  const double S = g.s_ref + 1.5 * kGasConstant * std::log(300.0 / g.T_ref) + kGasConstant * std::log(V / g.v_ref);
  EXPECT_NEAR(g.internal_energy(S, V, 1.0), 3741.5, 0.1);
}

TEST(IdealGas, StateEquationAndEulerRelation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> T(100.0, 2000.0), V(1e-4, 1.0), N(0.01, 10.0);
  IdealGasEOS g;
  g.c_v = 2.5 * kGasConstant;
  for (int i = 0; i < 10; ++i) {
    const double v = V(rng), n = N(rng), S = g.entropy(T(rng), v, n);
    const double t = g.temperature(S, v, n), p = g.pressure(S, v, n), mu = g.chemical_potential(S, v, n);
    const double U = g.internal_energy(S, v, n);
    EXPECT_NEAR(p * v, n * g.R * t, 1e-12 * p * v);
    EXPECT_NEAR(U, t * S - p * v + mu * n, 1e-10 * std::max(std::abs(U), std::abs(t * S)));
  }
}

TEST(IdealGas, DomainErrors) {
  IdealGasEOS g;
  expect_error(ErrorKind::domain, [&] { g.temperature(100.0, 0.0, 1.0); });
  expect_error(ErrorKind::domain, [&] { g.temperature(100.0, -1.0, 1.0); });
  expect_error(ErrorKind::domain, [&] { g.pressure(100.0, 1.0, 0.0); });
  expect_error(ErrorKind::domain, [&] { g.entropy(-3.0, 1.0, 1.0); });
  IdealGasEOS bad;
  bad.c_v = -1.0;
  expect_error(ErrorKind::validation, [&] { bad.validate(); });
}

namespace {
ReactionNetwork isomerization() {
  ReactionNetwork net;
  net.nu_fwd = Eigen::MatrixXd{{1.0, 0.0}};
  net.nu_bwd = Eigen::MatrixXd{{0.0, 1.0}};
  net.molecular_mass = vec({0.03, 0.03});
  net.species = {"A", "B"};
  return net;
}
}  // namespace

TEST(Affinity, SignFollowsPotentialDrop) {
  const ReactionNetwork net = isomerization();
  EXPECT_DOUBLE_EQ(affinity(net, vec({2.0, 2.0}))[0], 0.0);
  EXPECT_DOUBLE_EQ(affinity(net, vec({3.0, 1.0}))[0], 2.0);
  EXPECT_DOUBLE_EQ(affinity(net, vec({1.0, 3.0}))[0], -2.0);
  expect_error(ErrorKind::dimension_mismatch, [&] { affinity(net, vec({1.0})); });
}

TEST(Lavoisier, MassBalance) {
  ReactionNetwork empty;
  empty.nu_fwd.resize(0, 0);
  empty.nu_bwd.resize(0, 0);
  EXPECT_TRUE(lavoisier_check(empty));

  ReactionNetwork water;  // 2 H2 + O2 -> 2 H2O
  water.nu_fwd = Eigen::MatrixXd{{2.0, 1.0, 0.0}};
  water.nu_bwd = Eigen::MatrixXd{{0.0, 0.0, 2.0}};
  water.molecular_mass = vec({2.016e-3, 31.998e-3, 18.015e-3});
  EXPECT_TRUE(lavoisier_check(water));

  ReactionNetwork bad = isomerization();
  bad.molecular_mass = vec({2.0, 3.0});
  EXPECT_FALSE(lavoisier_check(bad));
}

TEST(PortState, ReferencePointAndEnthalpy) {
  IdealGasEOS g;
  const double p_ref = g.R * g.T_ref / g.v_ref;
  const MolarPortState ref = molar_state_at_port(g, g.T_ref, p_ref);
  EXPECT_NEAR(ref.entropy, g.s_ref, 1e-12 * g.s_ref);
  EXPECT_NEAR(ref.volume, g.v_ref, 1e-15);

  const double T = 420.0, p = 3e5;
  const MolarPortState s = molar_state_at_port(g, T, p, -500.0);
  EXPECT_NEAR(s.enthalpy, s.chemical_potential + T * s.entropy, 1e-9 * std::abs(T * s.entropy));
  EXPECT_NEAR(s.internal_energy + p * s.volume, s.enthalpy, 1e-9 * std::abs(s.enthalpy));
  EXPECT_NEAR(s.volume, g.R * T / p, 1e-15);
  EXPECT_NEAR(s.internal_energy, g.c_v * T - 500.0, 1e-9);

  expect_error(ErrorKind::domain, [&] { molar_state_at_port(g, -1.0, p); });
  expect_error(ErrorKind::domain, [&] { molar_state_at_port(g, T, 0.0); });
}

TEST(Topology, Validation) {
  SystemTopology t = topology(1, 2, 2);
  EXPECT_NO_THROW(t.validate());
  t.compartment_owner = {0};
  expect_error(ErrorKind::validation, [&] { t.validate(); });
  t.compartment_owner = {0, 2};
  expect_error(ErrorKind::validation, [&] { t.validate(); });
  t = topology(1, 1, 1);
  PortSpec port;
  port.compartment = 1;
  t.ports.push_back(port);
  expect_error(ErrorKind::validation, [&] { t.validate(); });
}

TEST(State, DimensionsAndLayout) {
  const auto topo = topology(2, 2, 3);
  ThermoState x = ThermoState::zeros(topo);
  EXPECT_NO_THROW(check_dimensions(topo, x));
  x.S.resize(3);
  expect_error(ErrorKind::dimension_mismatch, [&] { check_dimensions(topo, x); });

  const StateLayout layout(topo);
  EXPECT_EQ(layout.size(), 2 * 2 + 3 * 2 + 2 * 3);
  ThermoState y = ThermoState::zeros(topo);
  y.q << 1, 2;
  y.N << 3, 4, 5;
  y.Sigma << 6, 7;
  const ThermoState z = layout.unpack(0.5, layout.pack(y));
  EXPECT_EQ(z.q, y.q);
  EXPECT_EQ(z.N, y.N);
  EXPECT_EQ(z.Sigma, y.Sigma);
  EXPECT_EQ(z.t, 0.5);
  const auto mask = layout.controlled_mask();
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 2 + 2 + 2 + 3);
}

TEST(State, MoleFloor) {
  const auto topo = topology(0, 1, 2);
  ThermoState x = ThermoState::zeros(topo);
  x.N << 1.0, -1e-12;
  EXPECT_NO_THROW(check_mole_floor(x));
  x.N << 1.0, -1e-6;
  expect_error(ErrorKind::negative_moles, [&] { check_mole_floor(x); });
}

TEST(Profile, PiecewiseLinearAndHeld) {
  const Profile c(2.5);
  EXPECT_TRUE(c.is_constant());
  EXPECT_DOUBLE_EQ(c(100.0), 2.5);
  EXPECT_TRUE(Profile(0.0).is_identically_zero());
  const Profile p({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(p(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(p(0.5), 1.0);
  EXPECT_DOUBLE_EQ(p(2.0), 1.0);
  EXPECT_DOUBLE_EQ(p(10.0), 0.0);
  expect_error(ErrorKind::validation, [] { Profile({0.0, 0.0}, {1.0, 2.0}); });
}

TEST(Phenomenology, ValidationNamesTheCoefficient) {
  const auto topo = topology(1, 2, 0);
  const ThermoState x = ThermoState::zeros(topo);
  PhenomenologyModel phen;
  phen.conduction = constant_matrix(Eigen::MatrixXd{{0.0, -0.5}, {-0.5, 0.0}});
  try {
    validate_phenomenology(phen, topo, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("phenomenology.kappa"), std::string::npos) << e.what();
  }
  phen.conduction = constant_matrix(Eigen::MatrixXd{{0.0, 1.0}, {2.0, 0.0}});
  expect_error(ErrorKind::validation, [&] { validate_phenomenology(phen, topo, x); });

  PhenomenologyModel fr;
  fr.friction = constant_friction({Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Constant(1, 1, 1.0)});
  try {
    validate_phenomenology(fr, topo, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("phenomenology.friction"), std::string::npos);
  }

  PhenomenologyModel ons;
  ons.onsager = constant_onsager((Eigen::Matrix2d() << 1.0, 2.0, 2.0, 1.0).finished());
  expect_error(ErrorKind::validation, [&] { validate_phenomenology(ons, topo, x); });
  ons.onsager = constant_onsager((Eigen::Matrix2d() << 1.0, 0.5, 0.5, 1.0).finished());
  EXPECT_NO_THROW(validate_phenomenology(ons, topo, x));
}

TEST(Phenomenology, MinRelativeEigenvalue) {
  EXPECT_NEAR(min_relative_eigenvalue(Eigen::Matrix2d::Identity()), 1.0, 1e-15);
  EXPECT_NEAR(min_relative_eigenvalue((Eigen::Matrix2d() << 1, 0, 0, -2).finished()), -1.0, 1e-15);
  // Antisymmetric parts do not matter.
  EXPECT_NEAR(min_relative_eigenvalue((Eigen::Matrix2d() << 1, 5, -5, 1).finished()), 1.0, 1e-15);
}
