#pragma once

#include <Eigen/Dense>
#include <functional>

#include "vartherm/state.hpp"

namespace vartherm {

/// L(q, v, S, N) with its partial derivatives. Only (q, v, S, N) of the
/// ThermoState are read. Partials that are not supplied fall back to central
/// finite differences.
class LagrangianModel {
 public:
  using ScalarFn = std::function<double(const ThermoState&)>;
  using VectorFn = std::function<Eigen::VectorXd(const ThermoState&)>;
  using MatrixFn = std::function<Eigen::MatrixXd(const ThermoState&)>;
  /// (d2L/dv dq) v + (d2L/dv dS) dS + (d2L/dv dN) dN
  using CouplingFn = std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd& dS,
                                                   const Eigen::VectorXd& dN)>;

  struct Functions {
    ScalarFn value;
    VectorFn d_q, d_v, d_S, d_N;
    MatrixFn mass_matrix;
    CouplingFn momentum_coupling;
  };

  LagrangianModel() = default;
  explicit LagrangianModel(Functions f);

  /// L = 1/2 v^T M v - U(q, S, N) with constant M; U and its partials given.
  static LagrangianModel kinetic_minus_internal(Eigen::MatrixXd mass, ScalarFn U, VectorFn dU_dq,
                                                VectorFn dU_dS, VectorFn dU_dN);

  bool valid() const { return static_cast<bool>(f_.value); }
  bool analytic() const { return analytic_; }

  double value(const ThermoState& x) const { return f_.value(x); }
  Eigen::VectorXd d_q(const ThermoState& x) const { return f_.d_q(x); }
  Eigen::VectorXd d_v(const ThermoState& x) const { return f_.d_v(x); }
  Eigen::VectorXd d_S(const ThermoState& x) const { return f_.d_S(x); }
  Eigen::VectorXd d_N(const ThermoState& x) const { return f_.d_N(x); }
  Eigen::MatrixXd mass_matrix(const ThermoState& x) const { return f_.mass_matrix(x); }
  Eigen::VectorXd momentum_coupling(const ThermoState& x, const Eigen::VectorXd& dS,
                                    const Eigen::VectorXd& dN) const {
    return f_.momentum_coupling(x, dS, dN);
  }

  /// d/dt (dL/dv) along a rate (v, dv, dS, dN) at x.
  Eigen::VectorXd momentum_rate(const ThermoState& x, const Eigen::VectorXd& dv,
                                const Eigen::VectorXd& dS, const Eigen::VectorXd& dN) const;

  /// Central-difference partials of `value`, independent of the analytic ones.
  enum class Block { q, v, S, N };
  Eigen::VectorXd finite_difference_gradient(const ThermoState& x, Block block) const;

 private:
  Functions f_;
  bool analytic_ = false;
};

/// Central difference of a scalar function along one block of the state.
Eigen::VectorXd central_difference(const LagrangianModel::ScalarFn& f, const ThermoState& x,
                                   LagrangianModel::Block block);

}  // namespace vartherm
