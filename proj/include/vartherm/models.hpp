#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vartherm/evolution.hpp"
#include "vartherm/ideal_gas.hpp"
#include "vartherm/integrators.hpp"
#include "vartherm/lagrangian.hpp"
#include "vartherm/phenomenology.hpp"
#include "vartherm/state.hpp"

namespace vartherm {

enum class Family { simple, diffusion, heat, heat_mass, open, reaction };

const char* to_string(Family f);

/// A runnable system: topology, models, boundary data, initial state and
/// recommended integrator settings.
struct Scenario {
  std::string name;
  std::string description;
  Family family = Family::simple;
  SystemTopology topology;
  LagrangianModel lagrangian;
  /// Optional split L = sum_A L_A used for per-subsystem energy balances.
  std::vector<LagrangianModel> subsystem_lagrangians;
  PhenomenologyModel phenomenology;
  ForceFn external_force;
  ThermoState initial;
  IntegratorConfig integrator;
  double t_end = 1.0;
  double sample_every = 0.01;
  bool check_phenomenology = true;

  /// Throws a geometry error when the mechanical configuration is impossible.
  std::function<void(const ThermoState&)> admissibility;
  /// Interior gas pressure (open systems with tracking ports).
  std::function<double(const ThermoState&)> interior_pressure;
  /// Two opposing generalized forces that balance at mechanical equilibrium.
  std::function<Eigen::Vector2d(const ThermoState&)> mechanical_balance;

  Evaluation evaluate(const ThermoState& x) const;
  /// Topology, dimensions, phenomenology admissibility, Lavoisier law,
  /// positive initial temperatures and integrator settings.
  void validate() const;
};

// Parameter sets. Defaults are SI values of order unity.

struct PistonParams {
  double mass = 10.0;            // kg
  double area = 0.01;            // m^2
  double moles = 1.0;            // mol
  double friction = 5.0;         // N s/m
  double external_force = -2000; // N, constant
  double q0 = 1.0;               // m
  double v0 = 0.0;               // m/s
  double T0 = 300.0;             // K
  IdealGasEOS gas{};
};

struct AdiabaticPistonParams {
  double m1 = 1.0, m2 = 1.0, m3 = 1.0;  // kg
  double area1 = 0.01, area2 = 0.01;    // m^2
  double D = 1.2;                        // m
  double ell = 0.2;                      // m
  double N1 = 1.0, N2 = 1.0;             // mol
  double friction1 = 10.0, friction2 = 10.0;  // N s/m
  double kappa = 10.0;                   // W/K
  double q0 = 0.4, v0 = 0.0;
  double T1 = 300.0, T2 = 400.0;
  IdealGasEOS gas1{}, gas2{};
};

struct MembraneParams {
  IdealGasEOS gas1{}, gas_m{}, gas2{};
  double V1 = 0.01, Vm = 0.001, V2 = 0.01;  // m^3
  double G1m = 5e-5, Gm2 = 5e-5;             // mol^2/(J s)
  double N1 = 1.0, Nm = 0.05, N2 = 0.5;      // mol
  double T0 = 300.0;
};

struct TwoCompartmentParams {
  IdealGasEOS gas1{}, gas2{};
  double V1 = 0.01, V2 = 0.01;
  /// Onsager block acting on (T^B - T^A, mu^B/T^B - mu^A/T^A).
  Eigen::Matrix2d onsager = (Eigen::Matrix2d() << 1e-4, 0.0, 0.0, 1e-2).finished();
  double N1 = 1.0, N2 = 0.5;
  double T1 = 300.0, T2 = 350.0;
};

struct OpenPistonParams {
  PistonParams piston{};
  std::vector<PortSpec> ports;
  std::vector<HeatSourceSpec> sources;
  /// Default boundary: two inflow ports and two conducting heat sources.
  static OpenPistonParams defaults();
};

struct ReactionCellParams {
  ReactionNetwork network;
  std::vector<CompositeGas::Component> species;
  double volume = 0.02;
  Eigen::VectorXd N0;
  double T0 = 300.0;
  Eigen::MatrixXd ell;  // linear law J = ell A (r x r)
  bool mass_action = false;
  Eigen::VectorXd rate_constants;  // mass-action forward constants
  /// Default: isomerization A <=> B with u0_B = -1000 J/mol.
  static ReactionCellParams defaults();
};

Scenario make_piston(const PistonParams& p = {});
Scenario make_adiabatic_piston(const AdiabaticPistonParams& p = {});
Scenario make_membrane(const MembraneParams& p = {});
Scenario make_two_compartment(const TwoCompartmentParams& p = {});
Scenario make_open_piston(const OpenPistonParams& p = OpenPistonParams::defaults());
Scenario make_reaction_cell(const ReactionCellParams& p = ReactionCellParams::defaults());

/// Names accepted by make_default_scenario.
std::vector<std::string> scenario_names();
Scenario make_default_scenario(const std::string& name);

/// Flat first-order system for the integrators.
OdeSystem ode_system(const Scenario& sc);
Eigen::VectorXd pack_rate(const StateLayout& layout, const StateRate& r);

}  // namespace vartherm
