#pragma once

#include <Eigen/Dense>
#include <functional>

#include "vartherm/state.hpp"

namespace vartherm {

/// Flux laws. Any member may be left empty, meaning the process is absent.
struct PhenomenologyModel {
  /// lambda^A, n_mech x n_mech friction matrix of subsystem A; F_fr(A) = -lambda^A v.
  std::function<Eigen::MatrixXd(const ThermoState&, int A)> friction;
  /// kappa_AB, P x P heat conduction coefficients (J_AB = -kappa_AB, A != B).
  std::function<Eigen::MatrixXd(const ThermoState&)> conduction;
  /// G^{kl}, K x K diffusion coefficients (J^{k->l} = G^{kl} (mu^k - mu^l)).
  std::function<Eigen::MatrixXd(const ThermoState&)> diffusion;
  /// 2x2 Onsager block coupling heat and matter exchange between A and B.
  std::function<Eigen::Matrix2d(const ThermoState&, int A, int B)> onsager;
  /// Reaction rates J_a from affinities.
  std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd& affinities)> reaction_flux;

  static PhenomenologyModel none() { return {}; }
};

/// Constant-coefficient helpers.
std::function<Eigen::MatrixXd(const ThermoState&, int)> constant_friction(std::vector<Eigen::MatrixXd> per_subsystem);
std::function<Eigen::MatrixXd(const ThermoState&)> constant_matrix(Eigen::MatrixXd m);
std::function<Eigen::Matrix2d(const ThermoState&, int, int)> constant_onsager(Eigen::Matrix2d block);
/// J = ell * affinity.
std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd&)> linear_reaction_law(Eigen::MatrixXd ell);
/// De Donder form J_a = k_a prod_I (N_I/V)^{nu'_aI} (1 - exp(-A_a / (R T))); needs T from the caller.
std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd&)> mass_action_law(
    Eigen::VectorXd rate_constants, Eigen::MatrixXd nu_fwd, double volume,
    std::function<double(const ThermoState&)> temperature);

/// Probes every member at x and throws validation errors naming the
/// offending coefficient ("phenomenology.kappa", ...). Eigenvalue tolerance
/// is -1e-12 relative to the largest magnitude.
void validate_phenomenology(const PhenomenologyModel& phen, const SystemTopology& topo,
                            const ThermoState& x);

/// Smallest eigenvalue of the symmetric part, relative to its largest magnitude.
double min_relative_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace vartherm
