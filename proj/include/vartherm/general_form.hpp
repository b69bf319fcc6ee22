#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "vartherm/models.hpp"
#include "vartherm/trajectory.hpp"

namespace vartherm {

/// Stacked constraint rows at one point: r = A xdot + B, one row per alpha.
struct ConstraintRows {
  Eigen::MatrixXd A;  // k x dim
  Eigen::VectorXd B;  // k
};

/// Constraints A^alpha(t, x, xdot) . xdot + B^alpha(t, x, xdot) = 0 on an
/// abstract configuration. `evaluate` returns all k rows at once.
struct ConstraintSet {
  int count = 0;
  std::function<ConstraintRows(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& xdot)> evaluate;
};

/// A scenario written in the abstract constrained form. The configuration
/// is X = [q S N W Gamma Sigma Nu] with the blocks that the family does not
/// use marked inactive. The extended Lagrangian is
///   L_ext = L(q, v, S, N) + Wdot . N + Gammadot . (S - Sigma)
/// where the W and Gamma terms are present only for families that use them.
class EmbeddedSystem {
 public:
  explicit EmbeddedSystem(const Scenario& sc);
  EmbeddedSystem(const EmbeddedSystem&) = delete;
  EmbeddedSystem& operator=(const EmbeddedSystem&) = delete;

  Eigen::Index dim() const { return dim_; }
  const std::vector<bool>& active() const { return active_; }
  const ConstraintSet& constraints() const { return cs_; }
  /// Expected multipliers for the canonical normalization.
  Eigen::VectorXd expected_multipliers(const Sample& s) const;

  Eigen::VectorXd position(const ThermoState& x) const;
  Eigen::VectorXd velocity(const StateRate& r) const;
  /// Rebuilds a ThermoState (with v taken from xdot).
  ThermoState state(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const;

  double extended_lagrangian(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const;
  Eigen::VectorXd momentum(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const;
  Eigen::VectorXd gradient(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const;
  Eigen::VectorXd external_force(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const;

  /// Offsets of the blocks in X.
  Eigen::Index off_q = 0, off_S = 0, off_N = 0, off_W = 0, off_Gamma = 0, off_Sigma = 0, off_Nu = 0;

 private:
  const Scenario* sc_;
  Eigen::Index n_, P_, K_, r_, dim_;
  bool w_term_, gamma_term_;
  std::vector<bool> active_;
  ConstraintSet cs_;
};

struct ResidualReport {
  Eigen::VectorXd residual;  // r_alpha
  Eigen::VectorXd scale;     // sum of |terms| per alpha
  double max_relative = 0.0; // max |r_alpha| / scale_alpha
};

ResidualReport constraint_residual(const ConstraintSet& cs, double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xdot);

struct MultiplierFit {
  Eigen::VectorXd lambda;
  double residual_norm = 0.0;  // max-norm of the row-scaled post-fit residual
  double force_scale = 0.0;    // largest unscaled term magnitude
  double raw_residual = 0.0;   // max-norm of the unscaled post-fit residual
  int rank = 0;
  bool rank_deficient = false;
};

/// Least-squares solution of d/dt(dL_ext/dXdot) - dL_ext/dX - F_ext = lambda_alpha A^alpha.
/// pdot is a central directional difference of the momentum along (xdot, xddot).
/// Rows are weighted by `row_scale` when given, otherwise by their own term
/// magnitudes at this point. Rank is detected by SVD.
MultiplierFit multiplier_recovery(const EmbeddedSystem& sys, double t, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& xdot, const Eigen::VectorXd& xddot,
                                  const Eigen::VectorXd* row_scale = nullptr);

/// <pdot - dL_ext/dX - F_ext, xdot> + lambda . B (zero along exact solutions
/// of time-independent systems).
double abstract_energy_balance(const EmbeddedSystem& sys, double t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& xdot, const Eigen::VectorXd& xddot,
                               const Eigen::VectorXd& lambda);

/// Fourth-order central difference of equally spaced samples at index i
/// (needs two neighbours on each side).
Eigen::VectorXd central_derivative4(const std::vector<Eigen::VectorXd>& samples, std::size_t i, double h);

struct OracleSummary {
  double max_constraint_residual = 0.0;  // relative to per-term scale
  double max_multiplier_residual = 0.0;  // relative to row scale
  double max_lambda_deviation = 0.0;     // |lambda - expected|, thermodynamic slots
  double max_energy_balance = 0.0;       // relative to power scale
  int rank_deficient_points = 0;
  int points = 0;
};

/// Runs the oracle along a trajectory. Accelerations come from differencing
/// the vector field along the flow at each sample. Multiplier residuals are
/// measured against each row's largest term along the run.
OracleSummary check_trajectory(const Scenario& sc, const Trajectory& traj);

}  // namespace vartherm
