#include "vartherm/lagrangian.hpp"

#include <algorithm>
#include <cmath>

#include "vartherm/error.hpp"

namespace vartherm {

namespace {

Eigen::VectorXd& block_of(ThermoState& x, LagrangianModel::Block block) {
  switch (block) {
    case LagrangianModel::Block::q: return x.q;
    case LagrangianModel::Block::v: return x.v;
    case LagrangianModel::Block::S: return x.S;
    case LagrangianModel::Block::N: return x.N;
  }
  return x.q;
}

// cbrt(eps) balances truncation against rounding for central differences.
double fd_step(double value, double floor) {
  return 6.0e-6 * std::max(std::abs(value), floor);
}

double block_floor(const Eigen::VectorXd& values) {
  const double m = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1e-3 * m, 1e-6);
}

template <class Fn>
Eigen::MatrixXd jacobian_of(const Fn& f, const ThermoState& x, LagrangianModel::Block block) {
  ThermoState probe = x;
  Eigen::VectorXd& b = block_of(probe, block);
  const Eigen::VectorXd base = b;
  const double floor = block_floor(base);
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double h = fd_step(base[i], floor);
    b[i] = base[i] + h;
    const Eigen::VectorXd fp = f(probe);
    b[i] = base[i] - h;
    const Eigen::VectorXd fm = f(probe);
    b[i] = base[i];
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

}  // namespace

Eigen::VectorXd central_difference(const LagrangianModel::ScalarFn& f, const ThermoState& x,
                                   LagrangianModel::Block block) {
  ThermoState probe = x;
  Eigen::VectorXd& b = block_of(probe, block);
  const Eigen::VectorXd base = b;
  const double floor = block_floor(base);
  Eigen::VectorXd g(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double h = fd_step(base[i], floor);
    b[i] = base[i] + h;
    const double fp = f(probe);
    b[i] = base[i] - h;
    const double fm = f(probe);
    b[i] = base[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

LagrangianModel::LagrangianModel(Functions f) : f_(std::move(f)) {
  if (!f_.value) throw Error(ErrorKind::validation, "Lagrangian model needs a value function");
  analytic_ = f_.d_q && f_.d_v && f_.d_S && f_.d_N;
  const ScalarFn value = f_.value;
  auto fallback = [&value](Block block) -> VectorFn {
    return [value, block](const ThermoState& x) { return central_difference(value, x, block); };
  };
  if (!f_.d_q) f_.d_q = fallback(Block::q);
  if (!f_.d_v) f_.d_v = fallback(Block::v);
  if (!f_.d_S) f_.d_S = fallback(Block::S);
  if (!f_.d_N) f_.d_N = fallback(Block::N);
  if (!f_.mass_matrix) {
    const VectorFn d_v = f_.d_v;
    f_.mass_matrix = [d_v](const ThermoState& x) {
      Eigen::MatrixXd M = jacobian_of(d_v, x, Block::v);
      return Eigen::MatrixXd(0.5 * (M + M.transpose()));
    };
  }
  if (!f_.momentum_coupling) {
    const VectorFn d_v = f_.d_v;
    f_.momentum_coupling = [d_v](const ThermoState& x, const Eigen::VectorXd& dS,
                                 const Eigen::VectorXd& dN) {
      // Directional derivative of dL/dv along (q, S, N) -> (v, dS, dN), v held.
      const double dir_norm = std::sqrt(x.v.squaredNorm() + dS.squaredNorm() + dN.squaredNorm());
      if (dir_norm == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(x.v.size()));
      const double state_norm = std::sqrt(x.q.squaredNorm() + x.S.squaredNorm() + x.N.squaredNorm());
      const double h = 6.0e-6 * std::max(state_norm, 1e-6) / dir_norm;
      ThermoState plus = x, minus = x;
      plus.q += h * x.v;
      minus.q -= h * x.v;
      plus.S += h * dS;
      minus.S -= h * dS;
      plus.N += h * dN;
      minus.N -= h * dN;
      return Eigen::VectorXd((d_v(plus) - d_v(minus)) / (2.0 * h));
    };
  }
}

LagrangianModel LagrangianModel::kinetic_minus_internal(Eigen::MatrixXd mass, ScalarFn U, VectorFn dU_dq,
                                                        VectorFn dU_dS, VectorFn dU_dN) {
  Functions f;
  f.value = [mass, U](const ThermoState& x) { return 0.5 * x.v.dot(mass * x.v) - U(x); };
  f.d_q = [dU_dq](const ThermoState& x) { return Eigen::VectorXd(-dU_dq(x)); };
  f.d_v = [mass](const ThermoState& x) { return Eigen::VectorXd(mass * x.v); };
  f.d_S = [dU_dS](const ThermoState& x) { return Eigen::VectorXd(-dU_dS(x)); };
  f.d_N = [dU_dN](const ThermoState& x) { return Eigen::VectorXd(-dU_dN(x)); };
  f.mass_matrix = [mass](const ThermoState&) { return mass; };
  f.momentum_coupling = [](const ThermoState& x, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(x.v.size()));
  };
  return LagrangianModel(std::move(f));
}

Eigen::VectorXd LagrangianModel::momentum_rate(const ThermoState& x, const Eigen::VectorXd& dv,
                                               const Eigen::VectorXd& dS, const Eigen::VectorXd& dN) const {
  return mass_matrix(x) * dv + momentum_coupling(x, dS, dN);
}

Eigen::VectorXd LagrangianModel::finite_difference_gradient(const ThermoState& x, Block block) const {
  return central_difference(f_.value, x, block);
}

}  // namespace vartherm
