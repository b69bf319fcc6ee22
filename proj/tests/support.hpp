#pragma once

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "vartherm/error.hpp"
#include "vartherm/lagrangian.hpp"
#include "vartherm/state.hpp"

namespace vartherm::testing {

inline SystemTopology topology(int n, int P, int K) {
  SystemTopology t;
  t.n_mech = n;
  t.P = P;
  t.K = K;
  for (int k = 0; k < K; ++k) t.compartment_owner.push_back(P > 1 ? k % P : 0);
  return t;
}

// L = 1/2 m |v|^2 - (1/2 c |q|^2 + T0 . S + mu0 . N): constant temperatures and potentials.
inline LagrangianModel linear_model(double mass, Eigen::VectorXd T0, Eigen::VectorXd mu0 = {},
                                    int n_mech = 1, double stiffness = 0.0) {
  if (mu0.size() == 0) mu0 = Eigen::VectorXd::Zero(0);
  const Eigen::MatrixXd M = mass * Eigen::MatrixXd::Identity(n_mech, n_mech);
  return LagrangianModel::kinetic_minus_internal(
      M,
      [=](const ThermoState& x) { return 0.5 * stiffness * x.q.squaredNorm() + T0.dot(x.S) + mu0.dot(x.N); },
      [=](const ThermoState& x) -> Eigen::VectorXd { return stiffness * x.q; },
      [=](const ThermoState&) -> Eigen::VectorXd { return T0; },
      [=](const ThermoState&) -> Eigen::VectorXd { return mu0; });
}

inline ThermoState state_for(const SystemTopology& topo) { return ThermoState::zeros(topo); }

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

template <class F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected error of kind " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace vartherm::testing
