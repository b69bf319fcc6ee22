#pragma once

#include <Eigen/Dense>
#include <vector>

namespace vartherm {

inline constexpr double kGasConstant = 8.314462618;  // J/(mol K)

/// Constant-c_v ideal gas written in entropy form,
///
///   U(S,V,N) = N c_v T_ref (N v_ref / V)^(R/c_v) exp((S/N - s_ref)/c_v).
///
/// The reference point (T_ref, v_ref, s_ref) is where S = N s_ref and
/// V = N v_ref give T = T_ref.
struct IdealGasEOS {
  double c_v = 1.5 * kGasConstant;
  double R = kGasConstant;
  double T_ref = 300.0;
  double v_ref = 0.0249;  // ~ R T_ref / 1 bar
  double s_ref = 150.0;

  void validate() const;

  double gamma() const { return (c_v + R) / c_v; }

  double internal_energy(double S, double V, double N) const;
  double temperature(double S, double V, double N) const;
  double pressure(double S, double V, double N) const;
  double chemical_potential(double S, double V, double N) const;

  /// Inverse of T(S,V,N): S = N (s_ref + c_v ln(T/T_ref) + R ln(V/(N v_ref))).
  double entropy(double T, double V, double N) const;
  double molar_entropy(double T, double molar_volume) const;
};

/// Molar properties of matter at a port held at (T, p).
struct MolarPortState {
  double entropy;          // J/(mol K)
  double volume;           // m^3/mol
  double internal_energy;  // J/mol
  double enthalpy;         // J/mol
  double chemical_potential;
};

MolarPortState molar_state_at_port(const IdealGasEOS& eos, double T, double p,
                                   double formation_energy = 0.0);

/// Several ideal-gas components sharing one temperature (one entropy
/// variable). Each component has its own EOS, its own volume and a constant
/// molar formation energy u0. Used for the membrane (compartments as
/// components), the reaction cell (species in a common volume) and the
/// fluid mixture.
class CompositeGas {
 public:
  struct Component {
    IdealGasEOS eos;
    double formation_energy = 0.0;  // J/mol
  };

  CompositeGas() = default;
  explicit CompositeGas(std::vector<Component> components);

  std::size_t size() const { return components_.size(); }
  const Component& component(std::size_t k) const { return components_[k]; }

  double temperature(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;
  double internal_energy(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;
  /// dU/dN_k at fixed S and volumes.
  Eigen::VectorXd chemical_potentials(double S, const Eigen::VectorXd& V,
                                      const Eigen::VectorXd& N) const;
  /// Partial pressures N_k R_k T / V_k (= -dU/dV_k).
  Eigen::VectorXd pressures(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;
  /// Total entropy giving temperature T.
  double entropy(double T, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;

 private:
  void check(const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;
  // Entropy of the mixture at T = 1 K, i.e. S(T) = base + C ln T.
  double entropy_offset(const Eigen::VectorXd& V, const Eigen::VectorXd& N) const;

  std::vector<Component> components_;
};

}  // namespace vartherm
