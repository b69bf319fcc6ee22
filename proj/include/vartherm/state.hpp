#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "vartherm/ideal_gas.hpp"

namespace vartherm {

/// Scalar function of time: a constant or a piecewise-linear table
/// (held constant outside the tabulated range).
class Profile {
 public:
  Profile(double value = 0.0) : times_{0.0}, values_{value} {}  // NOLINT(implicit)
  Profile(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  bool is_constant() const { return values_.size() == 1; }
  bool is_identically_zero() const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Matter port: molar flow J_a(t) (positive into the system) of a gas held
/// at (T_a(t), p_a(t)). With `track_interior` the port sits at the interior
/// temperature and pressure (reversible injection).
struct PortSpec {
  Profile temperature{300.0};
  Profile pressure{1.0e5};
  Profile molar_flow{0.0};
  int compartment = 0;
  bool track_interior = false;
  IdealGasEOS eos{};
};

/// Heat source at temperature T_b(t). The entropy flow rate into the system
/// is either prescribed, or given by a conductance law
/// J_S = conductance (T_b - T) / T_b.
struct HeatSourceSpec {
  Profile temperature{300.0};
  Profile entropy_flow{0.0};
  std::optional<double> conductance;
};

/// r reactions among R species. nu_fwd holds the left-hand (consumed)
/// coefficients, nu_bwd the right-hand (produced) ones; both r x R.
struct ReactionNetwork {
  Eigen::MatrixXd nu_fwd;
  Eigen::MatrixXd nu_bwd;
  Eigen::VectorXd molecular_mass;  // kg/mol
  std::vector<std::string> species;

  Eigen::Index reactions() const { return nu_fwd.rows(); }
  Eigen::Index species_count() const { return nu_fwd.cols(); }
  /// Net coefficients nu_bwd - nu_fwd.
  Eigen::MatrixXd stoichiometry() const { return nu_bwd - nu_fwd; }
};

struct SystemTopology {
  int n_mech = 0;
  int P = 0;  // subsystems (entropy slots)
  int K = 0;  // compartments (mole-number slots)
  std::vector<int> compartment_owner;
  std::vector<PortSpec> ports;
  std::vector<HeatSourceSpec> heat_sources;
  std::optional<ReactionNetwork> reactions;

  bool is_open() const { return !ports.empty() || !heat_sources.empty(); }
  int reaction_count() const { return reactions ? static_cast<int>(reactions->reactions()) : 0; }
  void validate() const;
};

/// Instantaneous state. Gamma, W, Sigma and Nu are gauge quantities: only
/// their rates are physical.
struct ThermoState {
  double t = 0.0;
  Eigen::VectorXd q, v;  // n_mech
  Eigen::VectorXd S;     // P, J/K
  Eigen::VectorXd N;     // K, mol
  Eigen::VectorXd Gamma; // P, thermal displacements (K s)
  Eigen::VectorXd W;     // K, chemical displacements (J s/mol)
  Eigen::VectorXd Sigma; // P, accumulated internal entropy production
  Eigen::VectorXd Nu;    // r, reaction displacements

  static ThermoState zeros(const SystemTopology& topo);
};

/// Throws dimension_mismatch unless every block has the topology's length.
void check_dimensions(const SystemTopology& topo, const ThermoState& x);

/// Throws negative_moles when some N_k < -1e-9 max(N).
void check_mole_floor(const ThermoState& x);

/// Flat-vector layout [q v S N Gamma W Sigma Nu] used by the integrators.
class StateLayout {
 public:
  explicit StateLayout(const SystemTopology& topo);

  Eigen::Index size() const { return size_; }
  Eigen::VectorXd pack(const ThermoState& x) const;
  ThermoState unpack(double t, const Eigen::VectorXd& y) const;
  /// true for q, v, S, N; false for the gauge blocks.
  std::vector<bool> controlled_mask() const;

 private:
  Eigen::Index n_, P_, K_, r_, size_;
};

}  // namespace vartherm
