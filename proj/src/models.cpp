#include "vartherm/models.hpp"

#include <cmath>
#include <string>

#include "vartherm/error.hpp"
#include "vartherm/thermo.hpp"
#include "vartherm/trajectory.hpp"

namespace vartherm {

const char* to_string(Family f) {
  switch (f) {
    case Family::simple: return "simple";
    case Family::diffusion: return "diffusion";
    case Family::heat: return "heat";
    case Family::heat_mass: return "heat_mass";
    case Family::open: return "open";
    case Family::reaction: return "reaction";
  }
  return "unknown";
}

Evaluation Scenario::evaluate(const ThermoState& x) const {
  if (admissibility) admissibility(x);
  switch (family) {
    case Family::simple: return rhs_simple(x, lagrangian, phenomenology, external_force);
    case Family::diffusion: return rhs_simple_diffusion(x, lagrangian, phenomenology, external_force);
    case Family::heat: return rhs_nonsimple_heat(x, lagrangian, phenomenology, external_force);
    case Family::heat_mass: return rhs_nonsimple_heat_mass(x, lagrangian, phenomenology, external_force);
    case Family::open: {
      OpenBoundary b{topology.ports, topology.heat_sources, interior_pressure};
      return rhs_open(x, lagrangian, phenomenology, b, external_force);
    }
    case Family::reaction: return rhs_reaction(x, lagrangian, *topology.reactions, phenomenology);
  }
  throw Error(ErrorKind::unsupported, "unknown evolution family");
}

void Scenario::validate() const {
  topology.validate();
  check_dimensions(topology, initial);
  if (!lagrangian.valid()) throw Error(ErrorKind::validation, "scenario: missing Lagrangian");
  if (check_phenomenology) validate_phenomenology(phenomenology, topology, initial);
  if (family == Family::reaction) {
    if (!topology.reactions) throw Error(ErrorKind::validation, "reactions: network is missing");
    if (!lavoisier_check(*topology.reactions))
      throw Error(ErrorKind::validation, "reactions: stoichiometry violates mass conservation (Lavoisier law)");
  }
  for (const auto& port : topology.ports) {
    port.eos.validate();
    for (double T : port.temperature.values())
      if (!(T > 0.0)) throw Error(ErrorKind::validation, "ports.temperature: must be positive");
    for (double p : port.pressure.values())
      if (!(p > 0.0)) throw Error(ErrorKind::validation, "ports.pressure: must be positive");
  }
  for (const auto& src : topology.heat_sources) {
    for (double T : src.temperature.values())
      if (!(T > 0.0)) throw Error(ErrorKind::validation, "sources.temperature: must be positive");
    if (src.conductance && *src.conductance < 0.0)
      throw Error(ErrorKind::validation, "sources.conductance: must be non-negative");
  }
  try {
    if (admissibility) admissibility(initial);
    temperatures(lagrangian, initial);
    check_mole_floor(initial);
  } catch (const Error& e) {
    throw Error(ErrorKind::validation, std::string("initial state: ") + e.what());
  }
  integrator.validate();
  if (!(t_end >= 0.0)) throw Error(ErrorKind::validation, "t_end must be non-negative");
  if (sample_every < 0.0) throw Error(ErrorKind::validation, "sample_every must be non-negative");
}

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

IntegratorConfig adaptive(double dt, double rel_tol = 1e-10) {
  IntegratorConfig c;
  c.method = Method::dopri45;
  c.dt = dt;
  c.rel_tol = rel_tol;
  c.abs_tol = 1e-12;
  return c;
}

void check_positive_param(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorKind::validation, std::string(name) + ": must be positive");
}

void check_nonnegative_param(double v, const char* name) {
  if (!(v >= 0.0)) throw Error(ErrorKind::validation, std::string(name) + ": must be non-negative");
}

// Piston gas with optional variable mole number (K = 0 uses the fixed N0).
struct PistonGas {
  IdealGasEOS gas;
  double area;
  double N0;
  bool open;

  double N(const ThermoState& x) const { return open ? x.N[0] : N0; }
  double V(const ThermoState& x) const { return area * x.q[0]; }
  double U(const ThermoState& x) const { return gas.internal_energy(x.S[0], V(x), N(x)); }
  double p(const ThermoState& x) const { return gas.pressure(x.S[0], V(x), N(x)); }
  double T(const ThermoState& x) const { return gas.temperature(x.S[0], V(x), N(x)); }
  double mu(const ThermoState& x) const { return gas.chemical_potential(x.S[0], V(x), N(x)); }
};

Scenario piston_common(const PistonParams& p, bool open) {
  check_positive_param(p.mass, "mass");
  check_positive_param(p.area, "area");
  check_positive_param(p.moles, "moles");
  check_nonnegative_param(p.friction, "phenomenology.friction");
  check_positive_param(p.q0, "q0");
  check_positive_param(p.T0, "T0");
  p.gas.validate();

  Scenario sc;
  sc.topology.n_mech = 1;
  sc.topology.P = 1;
  sc.topology.K = open ? 1 : 0;
  if (open) sc.topology.compartment_owner = {0};

  const PistonGas g{p.gas, p.area, p.moles, open};
  sc.lagrangian = LagrangianModel::kinetic_minus_internal(
      Eigen::MatrixXd::Constant(1, 1, p.mass), [g](const ThermoState& x) { return g.U(x); },
      [g](const ThermoState& x) { return vec1(-g.p(x) * g.area); },
      [g](const ThermoState& x) { return vec1(g.T(x)); },
      [g](const ThermoState& x) { return g.open ? vec1(g.mu(x)) : Eigen::VectorXd(); });
  sc.phenomenology.friction = constant_friction({Eigen::MatrixXd::Constant(1, 1, p.friction)});
  if (p.external_force != 0.0) {
    const double f = p.external_force;
    sc.external_force = [f](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return vec1(f); };
  }
  sc.admissibility = [](const ThermoState& x) {
    if (!(x.q[0] > 0.0))
      throw Error(ErrorKind::geometry, "piston reached the cylinder bottom (q = " + std::to_string(x.q[0]) + ")");
  };
  sc.interior_pressure = [g](const ThermoState& x) { return g.p(x); };
  const ForceFn fext = sc.external_force;
  sc.mechanical_balance = [g, fext](const ThermoState& x) {
    const double f = fext ? fext(x.t, x.q, x.v)[0] : 0.0;
    return Eigen::Vector2d(g.p(x) * g.area, -f);
  };

  sc.initial = ThermoState::zeros(sc.topology);
  sc.initial.q[0] = p.q0;
  sc.initial.v[0] = p.v0;
  sc.initial.S[0] = p.gas.entropy(p.T0, p.area * p.q0, p.moles);
  if (open) sc.initial.N[0] = p.moles;
  sc.integrator = adaptive(1e-3);
  sc.t_end = 100.0;
  sc.sample_every = 0.05;
  return sc;
}

}  // namespace

Scenario make_piston(const PistonParams& p) {
  Scenario sc = piston_common(p, false);
  sc.name = "piston";
  sc.description = "Gas-filled cylinder closed by a piston with friction; simple adiabatically closed system.";
  sc.family = Family::simple;
  return sc;
}

Scenario make_adiabatic_piston(const AdiabaticPistonParams& p) {
  for (auto [v, n] : {std::pair{p.m1, "m1"}, {p.m2, "m2"}, {p.m3, "m3"}, {p.area1, "area1"}, {p.area2, "area2"},
                      {p.D, "D"}, {p.N1, "N1"}, {p.N2, "N2"}, {p.T1, "T1"}, {p.T2, "T2"}})
    check_positive_param(v, n);
  check_nonnegative_param(p.ell, "ell");
  check_nonnegative_param(p.friction1, "phenomenology.friction1");
  check_nonnegative_param(p.friction2, "phenomenology.friction2");
  if (!(p.D > p.ell)) throw Error(ErrorKind::validation, "D: must exceed the piston length ell");
  const double span = p.D - p.ell;
  if (!(p.q0 > 0.0 && p.q0 < span)) throw Error(ErrorKind::validation, "q0: must lie in (0, D - ell)");
  p.gas1.validate();
  p.gas2.validate();

  Scenario sc;
  sc.name = "adiabatic_piston";
  sc.description = "Two cylinders joined by a rod carrying two pistons; friction in each gas and heat "
                   "conduction through the rod (kappa = 0 gives the adiabatic piston).";
  sc.family = Family::heat;
  sc.topology.n_mech = 1;
  sc.topology.P = 2;
  sc.topology.K = 0;

  const double M = p.m1 + p.m2 + p.m3;
  const auto g1 = p.gas1, g2 = p.gas2;
  const double a1 = p.area1, a2 = p.area2, N1 = p.N1, N2 = p.N2;
  auto V1 = [a1](const ThermoState& x) { return a1 * x.q[0]; };
  auto V2 = [a2, span](const ThermoState& x) { return a2 * (span - x.q[0]); };

  auto U1 = [=](const ThermoState& x) { return g1.internal_energy(x.S[0], V1(x), N1); };
  auto U2 = [=](const ThermoState& x) { return g2.internal_energy(x.S[1], V2(x), N2); };
  auto p1 = [=](const ThermoState& x) { return g1.pressure(x.S[0], V1(x), N1); };
  auto p2 = [=](const ThermoState& x) { return g2.pressure(x.S[1], V2(x), N2); };
  auto T1 = [=](const ThermoState& x) { return g1.temperature(x.S[0], V1(x), N1); };
  auto T2 = [=](const ThermoState& x) { return g2.temperature(x.S[1], V2(x), N2); };
  auto none = [](const ThermoState&) { return Eigen::VectorXd(); };

  sc.lagrangian = LagrangianModel::kinetic_minus_internal(
      Eigen::MatrixXd::Constant(1, 1, M), [=](const ThermoState& x) { return U1(x) + U2(x); },
      [=](const ThermoState& x) { return vec1(-p1(x) * a1 + p2(x) * a2); },
      [=](const ThermoState& x) { return Eigen::Vector2d(T1(x), T2(x)).eval(); }, none);
  // Subsystem A carries its piston and half of the rod.
  sc.subsystem_lagrangians = {
      LagrangianModel::kinetic_minus_internal(
          Eigen::MatrixXd::Constant(1, 1, p.m1 + 0.5 * p.m3), U1,
          [=](const ThermoState& x) { return vec1(-p1(x) * a1); },
          [=](const ThermoState& x) { return Eigen::Vector2d(T1(x), 0.0).eval(); }, none),
      LagrangianModel::kinetic_minus_internal(
          Eigen::MatrixXd::Constant(1, 1, p.m2 + 0.5 * p.m3), U2,
          [=](const ThermoState& x) { return vec1(p2(x) * a2); },
          [=](const ThermoState& x) { return Eigen::Vector2d(0.0, T2(x)).eval(); }, none)};

  sc.phenomenology.friction = constant_friction(
      {Eigen::MatrixXd::Constant(1, 1, p.friction1), Eigen::MatrixXd::Constant(1, 1, p.friction2)});
  sc.phenomenology.conduction =
      constant_matrix((Eigen::Matrix2d() << 0.0, p.kappa, p.kappa, 0.0).finished());
  sc.admissibility = [span](const ThermoState& x) {
    if (!(x.q[0] > 0.0 && x.q[0] < span))
      throw Error(ErrorKind::geometry, "piston left the cylinder: q = " + std::to_string(x.q[0]) +
                                           " outside (0, " + std::to_string(span) + ")");
  };
  sc.mechanical_balance = [=](const ThermoState& x) { return Eigen::Vector2d(p1(x) * a1, p2(x) * a2); };

  sc.initial = ThermoState::zeros(sc.topology);
  sc.initial.q[0] = p.q0;
  sc.initial.v[0] = p.v0;
  sc.initial.S[0] = g1.entropy(p.T1, a1 * p.q0, N1);
  sc.initial.S[1] = g2.entropy(p.T2, a2 * (span - p.q0), N2);
  sc.integrator = adaptive(1e-4);
  sc.t_end = 40.0;
  sc.sample_every = 0.05;
  return sc;
}

namespace {

Scenario composite_cell(const CompositeGas& gas, const Eigen::VectorXd& volumes, double T0,
                        const Eigen::VectorXd& N0, const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.topology.n_mech = 0;
  sc.topology.P = 1;
  sc.topology.K = static_cast<int>(N0.size());
  sc.topology.compartment_owner.assign(static_cast<std::size_t>(N0.size()), 0);
  sc.lagrangian = LagrangianModel::kinetic_minus_internal(
      Eigen::MatrixXd(0, 0), [gas, volumes](const ThermoState& x) { return gas.internal_energy(x.S[0], volumes, x.N); },
      [](const ThermoState&) { return Eigen::VectorXd(); },
      [gas, volumes](const ThermoState& x) { return vec1(gas.temperature(x.S[0], volumes, x.N)); },
      [gas, volumes](const ThermoState& x) { return gas.chemical_potentials(x.S[0], volumes, x.N); });
  sc.initial = ThermoState::zeros(sc.topology);
  sc.initial.N = N0;
  sc.initial.S[0] = gas.entropy(T0, volumes, N0);
  return sc;
}

}  // namespace

Scenario make_membrane(const MembraneParams& p) {
  for (auto [v, n] : {std::pair{p.V1, "V1"}, {p.Vm, "Vm"}, {p.V2, "V2"}, {p.N1, "N1"}, {p.Nm, "Nm"},
                      {p.N2, "N2"}, {p.T0, "T0"}})
    check_positive_param(v, n);
  const CompositeGas gas({{p.gas1, 0.0}, {p.gas_m, 0.0}, {p.gas2, 0.0}});
  Scenario sc = composite_cell(gas, Eigen::Vector3d(p.V1, p.Vm, p.V2), p.T0, Eigen::Vector3d(p.N1, p.Nm, p.N2),
                               "membrane");
  sc.description = "Reservoir 1 | membrane | reservoir 2 at fixed volumes sharing one entropy; diffusion "
                   "only across the two membrane faces.";
  sc.family = Family::diffusion;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  G(0, 1) = G(1, 0) = p.G1m;
  G(1, 2) = G(2, 1) = p.Gm2;
  sc.phenomenology.diffusion = constant_matrix(G);
  sc.integrator = adaptive(1e-3);
  sc.t_end = 300.0;
  sc.sample_every = 0.1;
  return sc;
}

Scenario make_two_compartment(const TwoCompartmentParams& p) {
  for (auto [v, n] : {std::pair{p.V1, "V1"}, {p.V2, "V2"}, {p.N1, "N1"}, {p.N2, "N2"}, {p.T1, "T1"}, {p.T2, "T2"}})
    check_positive_param(v, n);
  p.gas1.validate();
  p.gas2.validate();

  Scenario sc;
  sc.name = "two_compartment";
  sc.description = "Two rigid compartments exchanging heat and matter through a 2x2 Onsager block.";
  sc.family = Family::heat_mass;
  sc.topology.n_mech = 0;
  sc.topology.P = 2;
  sc.topology.K = 2;
  sc.topology.compartment_owner = {0, 1};

  const auto g1 = p.gas1, g2 = p.gas2;
  const double V1 = p.V1, V2 = p.V2;
  auto part = [](const IdealGasEOS& g, double V, double S, double N) { return g.internal_energy(S, V, N); };
  sc.lagrangian = LagrangianModel::kinetic_minus_internal(
      Eigen::MatrixXd(0, 0),
      [=](const ThermoState& x) { return part(g1, V1, x.S[0], x.N[0]) + part(g2, V2, x.S[1], x.N[1]); },
      [](const ThermoState&) { return Eigen::VectorXd(); },
      [=](const ThermoState& x) {
        return Eigen::Vector2d(g1.temperature(x.S[0], V1, x.N[0]), g2.temperature(x.S[1], V2, x.N[1])).eval();
      },
      [=](const ThermoState& x) {
        return Eigen::Vector2d(g1.chemical_potential(x.S[0], V1, x.N[0]), g2.chemical_potential(x.S[1], V2, x.N[1]))
            .eval();
      });
  // Each compartment as its own subsystem.
  for (int A = 0; A < 2; ++A) {
    const IdealGasEOS g = A == 0 ? g1 : g2;
    const double V = A == 0 ? V1 : V2;
    auto slot = [A](double value) {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(2);
      out[A] = value;
      return out;
    };
    sc.subsystem_lagrangians.push_back(LagrangianModel::kinetic_minus_internal(
        Eigen::MatrixXd(0, 0), [=](const ThermoState& x) { return g.internal_energy(x.S[A], V, x.N[A]); },
        [](const ThermoState&) { return Eigen::VectorXd(); },
        [=](const ThermoState& x) { return slot(g.temperature(x.S[A], V, x.N[A])); },
        [=](const ThermoState& x) { return slot(g.chemical_potential(x.S[A], V, x.N[A])); }));
  }
  sc.phenomenology.onsager = constant_onsager(p.onsager);

  sc.initial = ThermoState::zeros(sc.topology);
  sc.initial.N << p.N1, p.N2;
  sc.initial.S << g1.entropy(p.T1, V1, p.N1), g2.entropy(p.T2, V2, p.N2);
  sc.integrator = adaptive(1e-3);
  sc.t_end = 100.0;
  sc.sample_every = 0.05;
  return sc;
}

OpenPistonParams OpenPistonParams::defaults() {
  OpenPistonParams p;
  PortSpec a1;
  a1.temperature = 350.0;
  a1.pressure = 5.0e5;
  a1.molar_flow = 0.02;
  PortSpec a2;
  a2.temperature = 320.0;
  a2.pressure = 4.0e5;
  a2.molar_flow = 0.01;
  p.ports = {a1, a2};
  HeatSourceSpec b1;
  b1.temperature = 400.0;
  b1.conductance = 2.0;
  HeatSourceSpec b2;
  b2.temperature = 280.0;
  b2.conductance = 1.0;
  p.sources = {b1, b2};
  return p;
}

Scenario make_open_piston(const OpenPistonParams& p) {
  Scenario sc = piston_common(p.piston, true);
  sc.name = "open_piston";
  sc.description = "Piston device with matter ports and heat sources; open simple system.";
  sc.family = Family::open;
  sc.topology.ports = p.ports;
  for (auto& port : sc.topology.ports) port.eos = p.piston.gas;
  sc.topology.heat_sources = p.sources;
  sc.t_end = 10.0;
  sc.sample_every = 0.01;
  return sc;
}

ReactionCellParams ReactionCellParams::defaults() {
  ReactionCellParams p;
  p.network.nu_fwd = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
  p.network.nu_bwd = (Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished();
  p.network.molecular_mass = Eigen::Vector2d(0.028, 0.028);
  p.network.species = {"A", "B"};
  p.species = {{IdealGasEOS{}, 0.0}, {IdealGasEOS{}, -1000.0}};
  p.N0 = Eigen::Vector2d(1.0, 0.2);
  p.ell = Eigen::MatrixXd::Constant(1, 1, 1e-4);
  return p;
}

Scenario make_reaction_cell(const ReactionCellParams& p) {
  check_positive_param(p.volume, "volume");
  check_positive_param(p.T0, "T0");
  const auto R = p.network.species_count();
  const auto r = p.network.reactions();
  if (static_cast<Eigen::Index>(p.species.size()) != R || p.N0.size() != R)
    throw Error(ErrorKind::validation, "species: expected one entry per species of the network");
  const CompositeGas gas(p.species);
  const Eigen::VectorXd volumes = Eigen::VectorXd::Constant(R, p.volume);
  Scenario sc = composite_cell(gas, volumes, p.T0, p.N0, "reaction_cell");
  sc.description = "Well-stirred cell of ideal-gas species reacting at fixed volume.";
  sc.family = Family::reaction;
  sc.topology.reactions = p.network;
  sc.initial.Nu = Eigen::VectorXd::Zero(r);
  if (p.mass_action) {
    if (p.rate_constants.size() != r)
      throw Error(ErrorKind::validation, "phenomenology.rate_constants: expected one per reaction");
    sc.phenomenology.reaction_flux =
        mass_action_law(p.rate_constants, p.network.nu_fwd, p.volume,
                        [gas, volumes](const ThermoState& x) { return gas.temperature(x.S[0], volumes, x.N); });
  } else {
    if (p.ell.rows() != r || p.ell.cols() != r)
      throw Error(ErrorKind::validation, "phenomenology.ell: expected an r x r matrix");
    if (min_relative_eigenvalue(p.ell) < -1e-12)
      throw Error(ErrorKind::validation, "phenomenology.ell: symmetric part must be positive semi-definite");
    sc.phenomenology.reaction_flux = linear_reaction_law(p.ell);
  }
  sc.integrator = adaptive(1e-3);
  sc.t_end = 20.0;
  sc.sample_every = 0.05;
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"piston", "adiabatic_piston", "membrane", "two_compartment", "open_piston", "reaction_cell"};
}

Scenario make_default_scenario(const std::string& name) {
  if (name == "piston") return make_piston();
  if (name == "adiabatic_piston") return make_adiabatic_piston();
  if (name == "membrane") return make_membrane();
  if (name == "two_compartment") return make_two_compartment();
  if (name == "open_piston") return make_open_piston();
  if (name == "reaction_cell") return make_reaction_cell();
  throw Error(ErrorKind::config, "unknown scenario '" + name + "'");
}

Eigen::VectorXd pack_rate(const StateLayout& layout, const StateRate& r) {
  ThermoState d;
  d.q = r.dq;
  d.v = r.dv;
  d.S = r.dS;
  d.N = r.dN;
  d.Gamma = r.dGamma;
  d.W = r.dW;
  d.Sigma = r.dSigma;
  d.Nu = r.dNu;
  return layout.pack(d);
}

OdeSystem ode_system(const Scenario& sc) {
  const StateLayout layout(sc.topology);
  OdeSystem sys;
  sys.f = [&sc, layout](double t, const Eigen::VectorXd& y) {
    return pack_rate(layout, sc.evaluate(layout.unpack(t, y)).rate);
  };
  sys.controlled = layout.controlled_mask();
  sys.t_scale = sc.t_end > 0.0 ? sc.t_end : 1.0;
  return sys;
}

Trajectory make_trajectory(const Scenario& sc, const std::vector<ThermoState>& states) {
  Trajectory traj;
  traj.scenario = sc.name;
  traj.samples.reserve(states.size());
  for (const auto& x : states) {
    Evaluation ev = sc.evaluate(x);
    traj.samples.push_back(Sample{x, std::move(ev.rate), std::move(ev.fluxes)});
  }
  return traj;
}

Trajectory simulate(const Scenario& sc, const IntegratorConfig* cfg) {
  const StateLayout layout(sc.topology);
  const IntegrationResult res = integrate(ode_system(sc), sc.initial.t, layout.pack(sc.initial),
                                          sc.initial.t + sc.t_end, sc.sample_every, cfg ? *cfg : sc.integrator);
  std::vector<ThermoState> states;
  states.reserve(res.states.size());
  for (std::size_t i = 0; i < res.states.size(); ++i) states.push_back(layout.unpack(res.times[i], res.states[i]));
  Trajectory traj = make_trajectory(sc, states);
  traj.steps = res.steps;
  traj.rejected = res.rejected;
  traj.rhs_evaluations = res.rhs_evaluations;
  return traj;
}

}  // namespace vartherm
