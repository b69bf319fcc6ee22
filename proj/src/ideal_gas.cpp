#include "vartherm/ideal_gas.hpp"

#include <cmath>
#include <string>

#include "vartherm/error.hpp"

namespace vartherm {

namespace {

void check_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorKind::domain, std::string(name) + " must be positive, got " + std::to_string(value));
}

}  // namespace

void IdealGasEOS::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw Error(ErrorKind::validation, std::string("gas.") + name + " must be positive");
  };
  positive(c_v, "c_v");
  positive(R, "R");
  positive(T_ref, "T_ref");
  positive(v_ref, "v_ref");
  if (!std::isfinite(s_ref)) throw Error(ErrorKind::validation, "gas.s_ref must be finite");
}

double IdealGasEOS::temperature(double S, double V, double N) const {
  check_positive(V, "volume");
  check_positive(N, "mole number");
  return T_ref * std::exp((R / c_v) * std::log(N * v_ref / V) + (S / N - s_ref) / c_v);
}

double IdealGasEOS::internal_energy(double S, double V, double N) const {
  return N * c_v * temperature(S, V, N);
}

double IdealGasEOS::pressure(double S, double V, double N) const {
  return N * R * temperature(S, V, N) / V;
}

double IdealGasEOS::chemical_potential(double S, double V, double N) const {
  const double T = temperature(S, V, N);
  return (c_v + R) * T - T * S / N;
}

double IdealGasEOS::molar_entropy(double T, double molar_volume) const {
  check_positive(T, "temperature");
  check_positive(molar_volume, "molar volume");
  return s_ref + c_v * std::log(T / T_ref) + R * std::log(molar_volume / v_ref);
}

double IdealGasEOS::entropy(double T, double V, double N) const {
  check_positive(V, "volume");
  check_positive(N, "mole number");
  return N * molar_entropy(T, V / N);
}

MolarPortState molar_state_at_port(const IdealGasEOS& eos, double T, double p,
                                   double formation_energy) {
  check_positive(T, "port temperature");
  check_positive(p, "port pressure");
  MolarPortState m{};
  m.volume = eos.R * T / p;
  m.entropy = eos.molar_entropy(T, m.volume);
  m.internal_energy = eos.c_v * T + formation_energy;
  m.enthalpy = m.internal_energy + p * m.volume;
  m.chemical_potential = m.enthalpy - T * m.entropy;
  return m;
}

CompositeGas::CompositeGas(std::vector<Component> components)
    : components_(std::move(components)) {
  for (const auto& c : components_) c.eos.validate();
}

void CompositeGas::check(const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  if (static_cast<std::size_t>(V.size()) != components_.size() ||
      static_cast<std::size_t>(N.size()) != components_.size())
    throw Error(ErrorKind::dimension_mismatch, "composite gas: expected " +
                                                   std::to_string(components_.size()) + " components");
  for (Eigen::Index k = 0; k < N.size(); ++k) {
    check_positive(V[k], "volume");
    check_positive(N[k], "mole number");
  }
}

double CompositeGas::entropy_offset(const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  double offset = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& e = components_[k].eos;
    offset += N[k] * (e.s_ref - e.c_v * std::log(e.T_ref) + e.R * std::log(V[k] / (N[k] * e.v_ref)));
  }
  return offset;
}

double CompositeGas::temperature(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  check(V, N);
  double heat_capacity = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) heat_capacity += N[k] * components_[k].eos.c_v;
  return std::exp((S - entropy_offset(V, N)) / heat_capacity);
}

double CompositeGas::internal_energy(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  const double T = temperature(S, V, N);
  double U = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k)
    U += N[k] * (components_[k].eos.c_v * T + components_[k].formation_energy);
  return U;
}

Eigen::VectorXd CompositeGas::chemical_potentials(double S, const Eigen::VectorXd& V,
                                                  const Eigen::VectorXd& N) const {
  const double T = temperature(S, V, N);
  Eigen::VectorXd mu(N.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double s_k = c.eos.molar_entropy(T, V[k] / N[k]);
    mu[k] = c.formation_energy + (c.eos.c_v + c.eos.R) * T - T * s_k;
  }
  return mu;
}

Eigen::VectorXd CompositeGas::pressures(double S, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  const double T = temperature(S, V, N);
  Eigen::VectorXd p(N.size());
  for (std::size_t k = 0; k < components_.size(); ++k) p[k] = N[k] * components_[k].eos.R * T / V[k];
  return p;
}

double CompositeGas::entropy(double T, const Eigen::VectorXd& V, const Eigen::VectorXd& N) const {
  check(V, N);
  check_positive(T, "temperature");
  double heat_capacity = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) heat_capacity += N[k] * components_[k].eos.c_v;
  return entropy_offset(V, N) + heat_capacity * std::log(T);
}

}  // namespace vartherm
