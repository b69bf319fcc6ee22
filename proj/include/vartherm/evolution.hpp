#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "vartherm/lagrangian.hpp"
#include "vartherm/phenomenology.hpp"
#include "vartherm/state.hpp"

namespace vartherm {

/// F_ext(t, q, v). An empty function means no external force.
using ForceFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& v)>;

/// Time derivative of a ThermoState, block by block.
struct StateRate {
  Eigen::VectorXd dq, dv, dS, dN, dGamma, dW, dSigma, dNu;
};

struct PortFlux {
  int compartment = 0;
  double molar_flow = 0.0;    // J^a, into the system
  double entropy_flow = 0.0;  // J_S^a = J^a S^a
  double temperature = 0.0;
  double pressure = 0.0;
  double chemical_potential = 0.0;
  double molar_entropy = 0.0;
};

struct SourceFlux {
  double temperature = 0.0;
  double entropy_flow = 0.0;  // J_S^b
};

/// Fluxes behind one StateRate. Matter flows use the convention
/// matter(k, l) = J^{k->l}: first index is the source, second the target.
struct FluxSnapshot {
  Eigen::MatrixXd friction;  // P x n_mech, row A is F_fr(A)
  Eigen::MatrixXd heat;      // P x P, J_AB with J_AA = -sum_{B != A} J_AB
  Eigen::MatrixXd matter;    // K x K, antisymmetric
  std::vector<PortFlux> ports;
  std::vector<SourceFlux> sources;
  Eigen::VectorXd reactions;   // J_a
  Eigen::VectorXd affinities;  // A^a
  Eigen::VectorXd external_force;
};

struct Evaluation {
  StateRate rate;
  FluxSnapshot fluxes;
};

/// Boundary data of an open system. `interior_pressure` is required only
/// when a port tracks the interior state.
struct OpenBoundary {
  std::vector<PortSpec> ports;
  std::vector<HeatSourceSpec> sources;
  std::function<double(const ThermoState&)> interior_pressure;
};

/// Solves M dv = dL/dq + force - [(d2L/dv dq) v + (d2L/dv dS) dS + (d2L/dv dN) dN]
/// with a Cholesky factorization of the mass matrix.
Eigen::VectorXd solve_accelerations(const LagrangianModel& L, const ThermoState& x,
                                    const Eigen::VectorXd& total_force, const Eigen::VectorXd& dS,
                                    const Eigen::VectorXd& dN);

/// Simple system with friction: P = 1, K = 0.
Evaluation rhs_simple(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                      const ForceFn& F_ext);

/// Simple system with internal diffusion between K >= 2 compartments.
Evaluation rhs_simple_diffusion(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                                const ForceFn& F_ext);

/// P >= 2 subsystems exchanging heat (J_AB = -kappa_AB), each with friction.
Evaluation rhs_nonsimple_heat(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                              const ForceFn& F_ext);

/// P >= 2 single-compartment subsystems exchanging heat and matter through
/// 2x2 Onsager blocks acting on (T^B - T^A, mu^B/T^B - mu^A/T^A).
Evaluation rhs_nonsimple_heat_mass(const ThermoState& x, const LagrangianModel& L,
                                   const PhenomenologyModel& phen, const ForceFn& F_ext);

/// Open simple system (P = 1, K = 1) with matter ports and heat sources.
Evaluation rhs_open(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                    const OpenBoundary& boundary, const ForceFn& F_ext);

/// Chemical reactions among the K = R species of one compartment, P = 1.
Evaluation rhs_reaction(const ThermoState& x, const LagrangianModel& L, const ReactionNetwork& net,
                        const PhenomenologyModel& phen);

/// dE/dt by the chain rule: <d/dt(dL/dv) - dL/dq, v> - <dL/dS, dS> - <dL/dN, dN>.
double energy_rate(const LagrangianModel& L, const ThermoState& x, const StateRate& rate);

}  // namespace vartherm
