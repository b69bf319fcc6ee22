#include "vartherm/thermo.hpp"

#include <cmath>
#include <string>

#include "vartherm/error.hpp"

namespace vartherm {

double energy(const LagrangianModel& L, const ThermoState& x) {
  if (x.q.size() != x.v.size()) throw Error(ErrorKind::dimension_mismatch, "energy: q and v differ in length");
  return L.d_v(x).dot(x.v) - L.value(x);
}

Eigen::VectorXd temperatures(const LagrangianModel& L, const ThermoState& x) {
  Eigen::VectorXd T = -L.d_S(x);
  for (Eigen::Index A = 0; A < T.size(); ++A)
    if (!(T[A] > 0.0))
      throw Error(ErrorKind::inadmissible_state,
                  "non-positive temperature T[" + std::to_string(A) + "] = " + std::to_string(T[A]));
  return T;
}

double temperature(const LagrangianModel& L, const ThermoState& x, int A) {
  if (A < 0 || A >= x.S.size())
    throw Error(ErrorKind::dimension_mismatch, "temperature: subsystem index out of range");
  const double T = -L.d_S(x)[A];
  if (!(T > 0.0))
    throw Error(ErrorKind::inadmissible_state, "non-positive temperature " + std::to_string(T));
  return T;
}

double chemical_potential(const LagrangianModel& L, const ThermoState& x, int k) {
  if (k < 0 || k >= x.N.size())
    throw Error(ErrorKind::dimension_mismatch, "chemical_potential: compartment index out of range");
  return -L.d_N(x)[k];
}

Eigen::VectorXd affinity(const ReactionNetwork& net, const Eigen::VectorXd& mu) {
  if (mu.size() != net.species_count())
    throw Error(ErrorKind::dimension_mismatch, "affinity: expected " + std::to_string(net.species_count()) +
                                                   " chemical potentials");
  return -(net.stoichiometry() * mu);
}

bool lavoisier_check(const ReactionNetwork& net) {
  const Eigen::MatrixXd nu = net.stoichiometry();
  for (Eigen::Index a = 0; a < nu.rows(); ++a) {
    const Eigen::VectorXd weighted = nu.row(a).transpose().cwiseProduct(net.molecular_mass);
    if (std::abs(weighted.sum()) > 1e-12 * weighted.cwiseAbs().maxCoeff()) return false;
  }
  return true;
}

}  // namespace vartherm
