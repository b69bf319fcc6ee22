#include "vartherm/general_form.hpp"

#include <algorithm>
#include <cmath>

#include "vartherm/error.hpp"

namespace vartherm {

EmbeddedSystem::EmbeddedSystem(const Scenario& sc)
    : sc_(&sc),
      n_(sc.topology.n_mech),
      P_(sc.topology.P),
      K_(sc.topology.K),
      r_(sc.topology.reaction_count()) {
  const Family f = sc.family;
  w_term_ = f == Family::diffusion || f == Family::heat_mass || f == Family::open || f == Family::reaction;
  gamma_term_ = f == Family::heat || f == Family::heat_mass || f == Family::open;

  off_q = 0;
  off_S = n_;
  off_N = off_S + P_;
  off_W = off_N + K_;
  off_Gamma = off_W + K_;
  off_Sigma = off_Gamma + P_;
  off_Nu = off_Sigma + P_;
  dim_ = off_Nu + r_;

  active_.assign(static_cast<std::size_t>(dim_), false);
  auto mark = [&](Eigen::Index off, Eigen::Index len) {
    for (Eigen::Index i = off; i < off + len; ++i) active_[static_cast<std::size_t>(i)] = true;
  };
  mark(off_q, n_);
  mark(off_S, P_);
  if (w_term_) {
    mark(off_N, K_);
    mark(off_W, K_);
  }
  if (gamma_term_) {
    mark(off_Gamma, P_);
    mark(off_Sigma, P_);
  }
  mark(off_Nu, r_);

  const Eigen::Index P = P_, n = n_, dim = dim_;
  const Eigen::Index oq = off_q, oS = off_S, oW = off_W, oG = off_Gamma, oSig = off_Sigma, oNu = off_Nu;
  const Scenario* scp = &sc;
  const EmbeddedSystem* self = this;

  switch (f) {
    case Family::simple:
    case Family::diffusion:
      cs_.count = 1;
      cs_.evaluate = [=](double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) {
        const ThermoState x = self->state(t, X, Xd);
        const Evaluation ev = scp->evaluate(x);
        ConstraintRows c{Eigen::MatrixXd::Zero(1, dim), Eigen::VectorXd::Zero(1)};
        if (n > 0) c.A.block(0, oq, 1, n) = -ev.fluxes.friction.row(0);
        c.A(0, oS) = scp->lagrangian.d_S(x)[0];
        if (f == Family::diffusion)
          c.A.block(0, oW, 1, ev.fluxes.matter.cols()) = -ev.fluxes.matter.colwise().sum();
        return c;
      };
      break;
    case Family::heat:
    case Family::heat_mass:
      cs_.count = static_cast<int>(P);
      cs_.evaluate = [=](double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) {
        const ThermoState x = self->state(t, X, Xd);
        const Evaluation ev = scp->evaluate(x);
        const Eigen::VectorXd dL_dS = scp->lagrangian.d_S(x);
        ConstraintRows c{Eigen::MatrixXd::Zero(P, dim), Eigen::VectorXd::Zero(P)};
        const Eigen::VectorXd inflow =
            f == Family::heat_mass ? Eigen::VectorXd(ev.fluxes.matter.colwise().sum().transpose())
                                   : Eigen::VectorXd();
        for (Eigen::Index A = 0; A < P; ++A) {
          if (n > 0) c.A.block(A, oq, 1, n) = -ev.fluxes.friction.row(A);
          c.A(A, oSig + A) = dL_dS[A];
          for (Eigen::Index B = 0; B < P; ++B) c.A(A, oG + B) = -ev.fluxes.heat(A, B);
          if (f == Family::heat_mass) c.A(A, oW + A) = -inflow[A];
        }
        return c;
      };
      break;
    case Family::open:
      cs_.count = 1;
      cs_.evaluate = [=](double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) {
        const ThermoState x = self->state(t, X, Xd);
        const Evaluation ev = scp->evaluate(x);
        ConstraintRows c{Eigen::MatrixXd::Zero(1, dim), Eigen::VectorXd::Zero(1)};
        if (n > 0) c.A.block(0, oq, 1, n) = -ev.fluxes.friction.row(0);
        c.A(0, oSig) = scp->lagrangian.d_S(x)[0];
        double matter = 0.0, entropy = 0.0, power = 0.0;
        for (const auto& a : ev.fluxes.ports) {
          matter += a.molar_flow;
          entropy += a.entropy_flow;
          power += a.molar_flow * a.chemical_potential + a.entropy_flow * a.temperature;
        }
        for (const auto& b : ev.fluxes.sources) {
          entropy += b.entropy_flow;
          power += b.entropy_flow * b.temperature;
        }
        c.A(0, oW) = -matter;
        c.A(0, oG) = -entropy;
        c.B[0] = power;
        return c;
      };
      break;
    case Family::reaction: {
      const Eigen::MatrixXd nu = sc.topology.reactions->stoichiometry();
      const Eigen::Index r = r_;
      cs_.count = static_cast<int>(1 + r);
      cs_.evaluate = [=](double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) {
        const ThermoState x = self->state(t, X, Xd);
        const Evaluation ev = scp->evaluate(x);
        ConstraintRows c{Eigen::MatrixXd::Zero(1 + r, dim), Eigen::VectorXd::Zero(1 + r)};
        c.A(0, oS) = scp->lagrangian.d_S(x)[0];
        for (Eigen::Index a = 0; a < r; ++a) {
          c.A(0, oNu + a) = -ev.fluxes.reactions[a];
          c.A(1 + a, oNu + a) = 1.0;
          c.A.block(1 + a, oW, 1, nu.cols()) = -nu.row(a);
        }
        return c;
      };
      break;
    }
  }
}

Eigen::VectorXd EmbeddedSystem::expected_multipliers(const Sample& s) const {
  Eigen::VectorXd lambda = Eigen::VectorXd::Constant(cs_.count, -1.0);
  if (sc_->family == Family::reaction)
    for (Eigen::Index a = 0; a < r_; ++a) lambda[1 + a] = -s.fluxes.reactions[a];
  return lambda;
}

Eigen::VectorXd EmbeddedSystem::position(const ThermoState& x) const {
  Eigen::VectorXd X(dim_);
  X << x.q, x.S, x.N, x.W, x.Gamma, x.Sigma, x.Nu;
  return X;
}

Eigen::VectorXd EmbeddedSystem::velocity(const StateRate& r) const {
  Eigen::VectorXd Xd(dim_);
  Xd << r.dq, r.dS, r.dN, r.dW, r.dGamma, r.dSigma, r.dNu;
  return Xd;
}

ThermoState EmbeddedSystem::state(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xdot) const {
  if (X.size() != dim_ || Xdot.size() != dim_)
    throw Error(ErrorKind::dimension_mismatch, "embedded system: configuration has wrong length");
  ThermoState x;
  x.t = t;
  x.q = X.segment(off_q, n_);
  x.v = Xdot.segment(off_q, n_);
  x.S = X.segment(off_S, P_);
  x.N = X.segment(off_N, K_);
  x.W = X.segment(off_W, K_);
  x.Gamma = X.segment(off_Gamma, P_);
  x.Sigma = X.segment(off_Sigma, P_);
  x.Nu = X.segment(off_Nu, r_);
  return x;
}

double EmbeddedSystem::extended_lagrangian(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) const {
  const ThermoState x = state(t, X, Xd);
  double value = sc_->lagrangian.value(x);
  if (w_term_) value += Xd.segment(off_W, K_).dot(x.N);
  if (gamma_term_) value += Xd.segment(off_Gamma, P_).dot(x.S - x.Sigma);
  return value;
}

Eigen::VectorXd EmbeddedSystem::momentum(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) const {
  const ThermoState x = state(t, X, Xd);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim_);
  if (n_ > 0) p.segment(off_q, n_) = sc_->lagrangian.d_v(x);
  if (w_term_) p.segment(off_W, K_) = x.N;
  if (gamma_term_) p.segment(off_Gamma, P_) = x.S - x.Sigma;
  return p;
}

Eigen::VectorXd EmbeddedSystem::gradient(double t, const Eigen::VectorXd& X, const Eigen::VectorXd& Xd) const {
  const ThermoState x = state(t, X, Xd);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  if (n_ > 0) g.segment(off_q, n_) = sc_->lagrangian.d_q(x);
  g.segment(off_S, P_) = sc_->lagrangian.d_S(x);
  if (w_term_) g.segment(off_N, K_) = sc_->lagrangian.d_N(x) + Xd.segment(off_W, K_);
  if (gamma_term_) {
    g.segment(off_S, P_) += Xd.segment(off_Gamma, P_);
    g.segment(off_Sigma, P_) = -Xd.segment(off_Gamma, P_);
  }
  return g;
}

Eigen::VectorXd EmbeddedSystem::external_force(double t, const Eigen::VectorXd& X,
                                               const Eigen::VectorXd& Xd) const {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(dim_);
  if (n_ > 0 && sc_->external_force)
    F.segment(off_q, n_) = sc_->external_force(t, X.segment(off_q, n_), Xd.segment(off_q, n_));
  return F;
}

ResidualReport constraint_residual(const ConstraintSet& cs, double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xdot) {
  ResidualReport rep;
  const ConstraintRows c = cs.evaluate(t, x, xdot);
  rep.residual = c.A * xdot + c.B;
  rep.scale = (c.A.cwiseAbs() * xdot.cwiseAbs()) + c.B.cwiseAbs();
  for (Eigen::Index a = 0; a < rep.residual.size(); ++a) {
    const double s = rep.scale[a];
    if (s > 0.0) rep.max_relative = std::max(rep.max_relative, std::abs(rep.residual[a]) / s);
    else if (rep.residual[a] != 0.0) rep.max_relative = std::numeric_limits<double>::infinity();
  }
  return rep;
}

namespace {

struct EulerLagrange {
  Eigen::VectorXd pdot, grad, force;
};

EulerLagrange euler_lagrange_terms(const EmbeddedSystem& sys, double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xdot, const Eigen::VectorXd& xddot, double h) {
  EulerLagrange el;
  const Eigen::VectorXd pp = sys.momentum(t + h, x + h * xdot, xdot + h * xddot);
  const Eigen::VectorXd pm = sys.momentum(t - h, x - h * xdot, xdot - h * xddot);
  el.pdot = (pp - pm) / (2.0 * h);
  el.grad = sys.gradient(t, x, xdot);
  el.force = sys.external_force(t, x, xdot);
  return el;
}

// Small fraction of the fastest relative change of q, S and N. The gauge
// blocks start at zero and would force a needlessly small step.
double fd_step(const EmbeddedSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& xdot) {
  double rate = 0.0;
  for (Eigen::Index i = 0; i < sys.off_W; ++i)
    if (x[i] != 0.0) rate = std::max(rate, std::abs(xdot[i] / x[i]));
  return rate > 0.0 ? 1e-4 / rate : 1e-4;
}

}  // namespace

MultiplierFit multiplier_recovery(const EmbeddedSystem& sys, double t, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& xdot, const Eigen::VectorXd& xddot,
                                  const Eigen::VectorXd* row_scale) {
  const auto& active = sys.active();
  const EulerLagrange el = euler_lagrange_terms(sys, t, x, xdot, xddot, fd_step(sys, x, xdot));
  const Eigen::VectorXd lhs = el.pdot - el.grad - el.force;
  const ConstraintRows c = sys.constraints().evaluate(t, x, xdot);
  const Eigen::Index k = c.A.rows();

  // Without a supplied scale, each row is weighted by the larger of its
  // physical terms and its constraint coefficients. Rows that vanish
  // identically are dropped.
  std::vector<Eigen::Index> rows;
  std::vector<double> scales;
  MultiplierFit fit;
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    if (!active[static_cast<std::size_t>(i)]) continue;
    const double terms = std::max({std::abs(el.pdot[i]), std::abs(el.grad[i]), std::abs(el.force[i])});
    fit.force_scale = std::max(fit.force_scale, terms);
    const double s = row_scale ? (*row_scale)[i] : std::max(terms, k > 0 ? c.A.col(i).cwiseAbs().maxCoeff() : 0.0);
    if (!(s > 0.0)) continue;
    rows.push_back(i);
    scales.push_back(s);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd At(m, k);
  Eigen::VectorXd b(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double w = 1.0 / scales[static_cast<std::size_t>(j)];
    At.row(j) = w * c.A.col(rows[static_cast<std::size_t>(j)]).transpose();
    b[j] = w * lhs[rows[static_cast<std::size_t>(j)]];
  }

  if (k == 0 || m == 0) {
    fit.lambda = Eigen::VectorXd::Zero(k);
    fit.rank = 0;
    fit.rank_deficient = k > 0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(At, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    fit.rank = static_cast<int>(svd.rank());
    fit.rank_deficient = fit.rank < k;
    fit.lambda = svd.solve(b);
  }

  // Post-fit residual of each row relative to the magnitude of its terms.
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Eigen::Index i = rows[j];
    double fitted = 0.0, spread = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      fitted += c.A(a, i) * fit.lambda[a];
      spread += std::abs(c.A(a, i) * fit.lambda[a]);
    }
    const double res = std::abs(fitted - lhs[i]);
    const double scale =
        row_scale ? scales[j]
                  : std::max({std::abs(el.pdot[i]), std::abs(el.grad[i]), std::abs(el.force[i]), spread});
    fit.raw_residual = std::max(fit.raw_residual, res);
    if (scale > 0.0) fit.residual_norm = std::max(fit.residual_norm, res / scale);
  }
  return fit;
}

double abstract_energy_balance(const EmbeddedSystem& sys, double t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& xdot, const Eigen::VectorXd& xddot,
                               const Eigen::VectorXd& lambda) {
  const EulerLagrange el = euler_lagrange_terms(sys, t, x, xdot, xddot, fd_step(sys, x, xdot));
  const ConstraintRows c = sys.constraints().evaluate(t, x, xdot);
  return (el.pdot - el.grad - el.force).dot(xdot) + lambda.dot(c.B);
}

Eigen::VectorXd central_derivative4(const std::vector<Eigen::VectorXd>& s, std::size_t i, double h) {
  if (i < 2 || i + 2 >= s.size())
    throw Error(ErrorKind::validation, "central_derivative4 needs two samples on each side");
  return (s[i - 2] - 8.0 * s[i - 1] + 8.0 * s[i + 1] - s[i + 2]) / (12.0 * h);
}

OracleSummary check_trajectory(const Scenario& sc, const Trajectory& traj) {
  const EmbeddedSystem sys(sc);
  OracleSummary out;
  std::vector<Eigen::VectorXd> X, Xd;
  X.reserve(traj.samples.size());
  Xd.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    X.push_back(sys.position(s.x));
    Xd.push_back(sys.velocity(s.rate));
    const ResidualReport rr = constraint_residual(sys.constraints(), s.x.t, X.back(), Xd.back());
    out.max_constraint_residual = std::max(out.max_constraint_residual, rr.max_relative);
  }

  // Accelerations from a central difference of the vector field along the
  // flow, so the check does not depend on the sample spacing.
  const auto& S = traj.samples;
  const StateLayout layout(sc.topology);
  const OdeSystem ode = ode_system(sc);
  std::vector<std::size_t> idx;
  std::vector<Eigen::VectorXd> Xdd;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Eigen::VectorXd y = layout.pack(S[i].x);
    const Eigen::VectorXd f = pack_rate(layout, S[i].rate);
    const double eps = fd_step(sys, X[i], Xd[i]);
    Eigen::VectorXd ydd;
    try {
      ydd = (ode.f(S[i].x.t + eps, y + eps * f) - ode.f(S[i].x.t - eps, y - eps * f)) / (2.0 * eps);
    } catch (const Error& e) {
      if (!e.recoverable_by_step_reduction()) throw;
      continue;
    }
    const ThermoState d = layout.unpack(S[i].x.t, ydd);
    StateRate r;
    r.dq = d.q;
    r.dv = d.v;
    r.dS = d.S;
    r.dN = d.N;
    r.dGamma = d.Gamma;
    r.dW = d.W;
    r.dSigma = d.Sigma;
    r.dNu = d.Nu;
    idx.push_back(i);
    Xdd.push_back(sys.velocity(r));
  }

  // Trajectory-wide magnitude of every row and of the power terms, so that
  // points near equilibrium are judged against the forces seen along the run.
  Eigen::VectorXd row_scale = Eigen::VectorXd::Zero(sys.dim());
  double power_scale = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::size_t i = idx[j];
    const EulerLagrange el = euler_lagrange_terms(sys, S[i].x.t, X[i], Xd[i], Xdd[j], fd_step(sys, X[i], Xd[i]));
    const ConstraintRows c = sys.constraints().evaluate(S[i].x.t, X[i], Xd[i]);
    const Eigen::VectorXd lam = sys.expected_multipliers(S[i]);
    const Eigen::VectorXd spread = c.A.cwiseAbs().transpose() * lam.cwiseAbs();
    for (Eigen::Index r = 0; r < sys.dim(); ++r)
      row_scale[r] = std::max({row_scale[r], std::abs(el.pdot[r]), std::abs(el.grad[r]), std::abs(el.force[r]),
                               spread[r]});
    power_scale = std::max(power_scale, el.pdot.cwiseProduct(Xd[i]).cwiseAbs().sum() +
                                            el.grad.cwiseProduct(Xd[i]).cwiseAbs().sum() +
                                            el.force.cwiseProduct(Xd[i]).cwiseAbs().sum() +
                                            lam.cwiseProduct(c.B).cwiseAbs().sum());
  }

  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::size_t i = idx[j];
    const MultiplierFit fit = multiplier_recovery(sys, S[i].x.t, X[i], Xd[i], Xdd[j], &row_scale);
    ++out.points;
    out.max_multiplier_residual = std::max(out.max_multiplier_residual, fit.residual_norm);
    if (fit.rank_deficient) {
      ++out.rank_deficient_points;
      continue;
    }
    const Eigen::VectorXd expected = sys.expected_multipliers(S[i]);
    const Eigen::Index thermo_rows = sc.family == Family::reaction ? 1 : expected.size();
    for (Eigen::Index a = 0; a < thermo_rows; ++a)
      out.max_lambda_deviation = std::max(out.max_lambda_deviation, std::abs(fit.lambda[a] - expected[a]));
    const double balance = abstract_energy_balance(sys, S[i].x.t, X[i], Xd[i], Xdd[j], fit.lambda);
    if (power_scale > 0.0) out.max_energy_balance = std::max(out.max_energy_balance, std::abs(balance) / power_scale);
  }
  return out;
}

}  // namespace vartherm
