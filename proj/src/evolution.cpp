#include "vartherm/evolution.hpp"

#include <cmath>
#include <string>

#include "vartherm/error.hpp"
#include "vartherm/thermo.hpp"

namespace vartherm {

namespace {

void require_shape(bool ok, const char* family, const std::string& what) {
  if (!ok) throw Error(ErrorKind::dimension_mismatch, std::string(family) + ": " + what);
}

Eigen::VectorXd external_force(const ForceFn& F_ext, const ThermoState& x) {
  if (!F_ext) return Eigen::VectorXd::Zero(x.q.size());
  Eigen::VectorXd f = F_ext(x.t, x.q, x.v);
  if (f.size() != x.q.size()) throw Error(ErrorKind::dimension_mismatch, "external force has wrong length");
  return f;
}

// Row A holds F_fr(A) = -lambda^A v.
Eigen::MatrixXd friction_forces(const PhenomenologyModel& phen, const ThermoState& x, int P) {
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(P, x.v.size());
  if (!phen.friction || x.v.size() == 0) return F;
  for (int A = 0; A < P; ++A) F.row(A) = -(phen.friction(x, A) * x.v).transpose();
  return F;
}

StateRate empty_rate(const ThermoState& x) {
  StateRate r;
  r.dq = x.v;
  r.dv = Eigen::VectorXd::Zero(x.v.size());
  r.dS = Eigen::VectorXd::Zero(x.S.size());
  r.dN = Eigen::VectorXd::Zero(x.N.size());
  r.dGamma = Eigen::VectorXd::Zero(x.Gamma.size());
  r.dW = Eigen::VectorXd::Zero(x.W.size());
  r.dSigma = Eigen::VectorXd::Zero(x.Sigma.size());
  r.dNu = Eigen::VectorXd::Zero(x.Nu.size());
  return r;
}

FluxSnapshot empty_fluxes(const ThermoState& x) {
  FluxSnapshot f;
  f.friction = Eigen::MatrixXd::Zero(x.S.size(), x.q.size());
  f.heat = Eigen::MatrixXd::Zero(x.S.size(), x.S.size());
  f.matter = Eigen::MatrixXd::Zero(x.N.size(), x.N.size());
  f.reactions = Eigen::VectorXd::Zero(x.Nu.size());
  f.affinities = Eigen::VectorXd::Zero(x.Nu.size());
  f.external_force = Eigen::VectorXd::Zero(x.q.size());
  return f;
}

}  // namespace

Eigen::VectorXd solve_accelerations(const LagrangianModel& L, const ThermoState& x,
                                    const Eigen::VectorXd& total_force, const Eigen::VectorXd& dS,
                                    const Eigen::VectorXd& dN) {
  if (x.q.size() == 0) return Eigen::VectorXd();
  const Eigen::MatrixXd M = L.mass_matrix(x);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::singular_mass_matrix, "mass matrix is not positive definite");
  const Eigen::VectorXd rhs = L.d_q(x) + total_force - L.momentum_coupling(x, dS, dN);
  Eigen::VectorXd dv = llt.solve(rhs);
  if (!dv.allFinite()) throw Error(ErrorKind::singular_mass_matrix, "acceleration solve produced non-finite values");
  return dv;
}

Evaluation rhs_simple(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                      const ForceFn& F_ext) {
  require_shape(x.S.size() == 1 && x.N.size() == 0, "rhs_simple", "requires P = 1 and K = 0");
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const double dL_dS = L.d_S(x)[0];
  const double T = -dL_dS;
  if (!(T > 0.0)) throw Error(ErrorKind::inadmissible_state, "non-positive temperature");

  out.fluxes.friction = friction_forces(phen, x, 1);
  const Eigen::VectorXd F_fr = out.fluxes.friction.row(0).transpose();
  out.fluxes.external_force = external_force(F_ext, x);

  auto& r = out.rate;
  r.dS[0] = F_fr.dot(x.v) / dL_dS;
  r.dSigma[0] = r.dS[0];
  r.dGamma[0] = T;
  r.dv = solve_accelerations(L, x, F_fr + out.fluxes.external_force, r.dS, r.dN);
  return out;
}

Evaluation rhs_simple_diffusion(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                                const ForceFn& F_ext) {
  require_shape(x.S.size() == 1 && x.N.size() >= 2, "rhs_simple_diffusion", "requires P = 1 and K >= 2");
  check_mole_floor(x);
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const double dL_dS = L.d_S(x)[0];
  const double T = -dL_dS;
  if (!(T > 0.0)) throw Error(ErrorKind::inadmissible_state, "non-positive temperature");
  const Eigen::VectorXd dL_dN = L.d_N(x);
  const Eigen::VectorXd mu = -dL_dN;
  const Eigen::Index K = x.N.size();

  auto& J = out.fluxes.matter;
  if (phen.diffusion) {
    const Eigen::MatrixXd G = phen.diffusion(x);
    for (Eigen::Index k = 0; k < K; ++k)
      for (Eigen::Index l = k + 1; l < K; ++l) {
        J(k, l) = G(k, l) * (mu[k] - mu[l]);
        J(l, k) = -J(k, l);
      }
  }
  out.fluxes.friction = friction_forces(phen, x, 1);
  const Eigen::VectorXd F_fr = out.fluxes.friction.row(0).transpose();
  out.fluxes.external_force = external_force(F_ext, x);

  auto& r = out.rate;
  r.dN = J.colwise().sum().transpose();
  double transfer = 0.0;
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index l = k + 1; l < K; ++l) transfer += J(l, k) * (dL_dN[k] - dL_dN[l]);
  r.dS[0] = (F_fr.dot(x.v) - transfer) / dL_dS;
  r.dSigma[0] = r.dS[0];
  r.dGamma[0] = T;
  r.dW = mu;
  r.dv = solve_accelerations(L, x, F_fr + out.fluxes.external_force, r.dS, r.dN);
  return out;
}

Evaluation rhs_nonsimple_heat(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                              const ForceFn& F_ext) {
  require_shape(x.S.size() >= 2 && x.N.size() == 0, "rhs_nonsimple_heat", "requires P >= 2 and K = 0");
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const Eigen::Index P = x.S.size();
  const Eigen::VectorXd dL_dS = L.d_S(x);
  const Eigen::VectorXd T = temperatures(L, x);

  auto& J = out.fluxes.heat;
  if (phen.conduction) {
    const Eigen::MatrixXd kappa = phen.conduction(x);
    for (Eigen::Index A = 0; A < P; ++A)
      for (Eigen::Index B = 0; B < P; ++B)
        if (A != B) J(A, B) = -kappa(A, B);
    for (Eigen::Index A = 0; A < P; ++A) J(A, A) = -(J.row(A).sum() - J(A, A));
  }
  out.fluxes.friction = friction_forces(phen, x, static_cast<int>(P));
  out.fluxes.external_force = external_force(F_ext, x);

  auto& r = out.rate;
  for (Eigen::Index A = 0; A < P; ++A) {
    double exchange = 0.0;
    for (Eigen::Index B = 0; B < P; ++B)
      if (B != A) exchange += J(A, B) * (dL_dS[B] - dL_dS[A]);
    r.dS[A] = (out.fluxes.friction.row(A).dot(x.v) - exchange) / dL_dS[A];
  }
  r.dSigma = r.dS;
  r.dGamma = T;
  const Eigen::VectorXd total_force = out.fluxes.friction.colwise().sum().transpose() + out.fluxes.external_force;
  r.dv = solve_accelerations(L, x, total_force, r.dS, r.dN);
  return out;
}

Evaluation rhs_nonsimple_heat_mass(const ThermoState& x, const LagrangianModel& L,
                                   const PhenomenologyModel& phen, const ForceFn& F_ext) {
  require_shape(x.S.size() >= 2 && x.N.size() == x.S.size(), "rhs_nonsimple_heat_mass",
                "requires P >= 2 and one compartment per subsystem");
  check_mole_floor(x);
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const Eigen::Index P = x.S.size();
  const Eigen::VectorXd dL_dS = L.d_S(x);
  const Eigen::VectorXd dL_dN = L.d_N(x);
  const Eigen::VectorXd T = temperatures(L, x);
  const Eigen::VectorXd mu = -dL_dN;

  auto& J = out.fluxes.heat;
  auto& M = out.fluxes.matter;
  if (phen.onsager) {
    for (Eigen::Index A = 0; A < P; ++A)
      for (Eigen::Index B = A + 1; B < P; ++B) {
        const Eigen::Matrix2d block = phen.onsager(x, static_cast<int>(A), static_cast<int>(B));
        const Eigen::Vector2d force(T[B] - T[A], mu[B] / T[B] - mu[A] / T[A]);
        const Eigen::Vector2d flux = block * force;
        double J_AB;
        if (std::abs(T[A] - T[B]) > 1e-12 * T[A]) {
          J_AB = flux[0] * T[A] * T[B] / (T[A] - T[B]);
        } else {
          J_AB = -block(0, 0) * T[A] * T[B];  // -kappa_AB
        }
        J(A, B) = J_AB;
        J(B, A) = J_AB;
        M(B, A) = flux[1];
        M(A, B) = -flux[1];
      }
    for (Eigen::Index A = 0; A < P; ++A) J(A, A) = -(J.row(A).sum() - J(A, A));
  }
  out.fluxes.friction = friction_forces(phen, x, static_cast<int>(P));
  out.fluxes.external_force = external_force(F_ext, x);

  auto& r = out.rate;
  r.dN = M.colwise().sum().transpose();
  for (Eigen::Index A = 0; A < P; ++A) {
    double heat = 0.0;
    for (Eigen::Index B = 0; B < P; ++B)
      if (B != A) heat += J(A, B) * (dL_dS[B] - dL_dS[A]);
    const double matter = r.dN[A] * dL_dN[A];
    r.dS[A] = (out.fluxes.friction.row(A).dot(x.v) - heat - matter) / dL_dS[A];
  }
  r.dSigma = r.dS;
  r.dGamma = T;
  r.dW = mu;
  const Eigen::VectorXd total_force = out.fluxes.friction.colwise().sum().transpose() + out.fluxes.external_force;
  r.dv = solve_accelerations(L, x, total_force, r.dS, r.dN);
  return out;
}

Evaluation rhs_open(const ThermoState& x, const LagrangianModel& L, const PhenomenologyModel& phen,
                    const OpenBoundary& boundary, const ForceFn& F_ext) {
  require_shape(x.S.size() == 1 && x.N.size() == 1, "rhs_open", "requires P = 1 and K = 1");
  check_mole_floor(x);
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const double dL_dS = L.d_S(x)[0];
  const double T = -dL_dS;
  if (!(T > 0.0)) throw Error(ErrorKind::inadmissible_state, "non-positive temperature");
  const double dL_dN = L.d_N(x)[0];

  out.fluxes.friction = friction_forces(phen, x, 1);
  const Eigen::VectorXd F_fr = out.fluxes.friction.row(0).transpose();
  out.fluxes.external_force = external_force(F_ext, x);

  auto& r = out.rate;
  double boundary_terms = 0.0;
  double entropy_inflow = 0.0;
  for (const auto& port : boundary.ports) {
    PortFlux pf;
    pf.compartment = port.compartment;
    pf.molar_flow = port.molar_flow(x.t);
    if (port.track_interior) {
      if (!boundary.interior_pressure)
        throw Error(ErrorKind::unsupported, "port tracks the interior but no interior pressure is known");
      pf.temperature = T;
      pf.pressure = boundary.interior_pressure(x);
    } else {
      pf.temperature = port.temperature(x.t);
      pf.pressure = port.pressure(x.t);
    }
    const MolarPortState ms = molar_state_at_port(port.eos, pf.temperature, pf.pressure);
    pf.molar_entropy = ms.entropy;
    pf.chemical_potential = ms.chemical_potential;
    pf.entropy_flow = pf.molar_flow * ms.entropy;
    boundary_terms += pf.molar_flow * (dL_dN + pf.chemical_potential) + pf.entropy_flow * (dL_dS + pf.temperature);
    entropy_inflow += pf.entropy_flow;
    r.dN[port.compartment] += pf.molar_flow;
    out.fluxes.ports.push_back(pf);
  }
  for (const auto& source : boundary.sources) {
    SourceFlux sf;
    sf.temperature = source.temperature(x.t);
    if (!(sf.temperature > 0.0)) throw Error(ErrorKind::domain, "heat source temperature must be positive");
    sf.entropy_flow = source.conductance ? *source.conductance * (sf.temperature - T) / sf.temperature
                                         : source.entropy_flow(x.t);
    boundary_terms += sf.entropy_flow * (dL_dS + sf.temperature);
    entropy_inflow += sf.entropy_flow;
    out.fluxes.sources.push_back(sf);
  }

  r.dSigma[0] = (F_fr.dot(x.v) - boundary_terms) / dL_dS;
  r.dS[0] = r.dSigma[0] + entropy_inflow;
  r.dGamma[0] = T;
  r.dW[0] = -dL_dN;
  r.dv = solve_accelerations(L, x, F_fr + out.fluxes.external_force, r.dS, r.dN);
  return out;
}

Evaluation rhs_reaction(const ThermoState& x, const LagrangianModel& L, const ReactionNetwork& net,
                        const PhenomenologyModel& phen) {
  require_shape(x.S.size() == 1 && x.N.size() == net.species_count() && x.Nu.size() == net.reactions(),
                "rhs_reaction", "requires P = 1, K = R species and r reaction displacements");
  check_mole_floor(x);
  Evaluation out{empty_rate(x), empty_fluxes(x)};
  const double dL_dS = L.d_S(x)[0];
  const double T = -dL_dS;
  if (!(T > 0.0)) throw Error(ErrorKind::inadmissible_state, "non-positive temperature");
  const Eigen::VectorXd mu = -L.d_N(x);
  const Eigen::VectorXd A = affinity(net, mu);
  const Eigen::VectorXd J = phen.reaction_flux ? phen.reaction_flux(x, A) : Eigen::VectorXd::Zero(A.size());
  out.fluxes.affinities = A;
  out.fluxes.reactions = J;

  auto& r = out.rate;
  r.dN = net.stoichiometry().transpose() * J;
  r.dS[0] = -J.dot(A) / dL_dS;
  r.dSigma[0] = r.dS[0];
  r.dGamma[0] = T;
  r.dW = mu;
  r.dNu = -A;
  if (x.q.size() > 0) r.dv = solve_accelerations(L, x, Eigen::VectorXd::Zero(x.q.size()), r.dS, r.dN);
  return out;
}

double energy_rate(const LagrangianModel& L, const ThermoState& x, const StateRate& rate) {
  double dE = 0.0;
  if (x.q.size() > 0) {
    const Eigen::VectorXd p_dot = L.momentum_rate(x, rate.dv, rate.dS, rate.dN);
    dE += (p_dot - L.d_q(x)).dot(x.v);
  }
  if (x.S.size() > 0) dE -= L.d_S(x).dot(rate.dS);
  if (x.N.size() > 0) dE -= L.d_N(x).dot(rate.dN);
  return dE;
}

}  // namespace vartherm
