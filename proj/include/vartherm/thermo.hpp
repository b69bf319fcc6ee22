#pragma once

#include <Eigen/Dense>

#include "vartherm/lagrangian.hpp"
#include "vartherm/state.hpp"

namespace vartherm {

/// E = <dL/dv, v> - L.
double energy(const LagrangianModel& L, const ThermoState& x);

/// T^A = -dL/dS_A. Throws inadmissible_state when not strictly positive.
double temperature(const LagrangianModel& L, const ThermoState& x, int A);
Eigen::VectorXd temperatures(const LagrangianModel& L, const ThermoState& x);

/// mu^k = -dL/dN_k.
double chemical_potential(const LagrangianModel& L, const ThermoState& x, int k);

/// A^a = -sum_I nu^a_I mu^I.
Eigen::VectorXd affinity(const ReactionNetwork& net, const Eigen::VectorXd& mu);

/// Mass conservation per reaction: |sum_I m_I nu^a_I| <= 1e-12 max_I |m_I nu^a_I|.
bool lavoisier_check(const ReactionNetwork& net);

}  // namespace vartherm
