#include "vartherm/nsf1d.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "vartherm/error.hpp"
#include "vartherm/phenomenology.hpp"

namespace vartherm::nsf1d {

void TransportCoefficients::validate(int species) const {
  if (!(mu_shear >= 0.0)) throw Error(ErrorKind::validation, "transport.mu_shear: must be non-negative");
  if (!(zeta >= 0.0)) throw Error(ErrorKind::validation, "transport.zeta: must be non-negative");
  if (L.rows() != species + 1 || L.cols() != species + 1)
    throw Error(ErrorKind::validation, fmt::format("transport.L: expected a {0}x{0} matrix", species + 1));
  const double mag = L.cwiseAbs().maxCoeff();
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mag)
    throw Error(ErrorKind::validation, "transport.L: must be symmetric (Onsager reciprocity)");
  if (min_relative_eigenvalue(L) < -1e-12)
    throw Error(ErrorKind::validation, "transport.L: must be positive semi-definite");
}

TransportCoefficients TransportCoefficients::none(int species) {
  TransportCoefficients t;
  t.L = Eigen::MatrixXd::Zero(species + 1, species + 1);
  return t;
}

FluidEOS::FluidEOS(std::vector<Species> species) : species_(std::move(species)) {
  if (species_.empty()) throw Error(ErrorKind::validation, "fluid: at least one species is required");
  std::vector<CompositeGas::Component> comps;
  for (const auto& sp : species_) {
    if (!(sp.molar_mass > 0.0)) throw Error(ErrorKind::validation, "species.molar_mass: must be positive");
    comps.push_back({sp.eos, sp.formation_energy});
  }
  gas_ = CompositeGas(std::move(comps));
}

Eigen::VectorXd FluidEOS::concentrations(const Eigen::VectorXd& rho) const {
  if (rho.size() != species()) throw Error(ErrorKind::dimension_mismatch, "fluid: density has wrong length");
  Eigen::VectorXd n(rho.size());
  for (int A = 0; A < species(); ++A) n[A] = rho[A] / species_[static_cast<std::size_t>(A)].molar_mass;
  return n;
}

FluidEOS::Local FluidEOS::evaluate(const Eigen::VectorXd& rho, double s) const {
  const Eigen::VectorXd n = concentrations(rho);
  const Eigen::VectorXd V = Eigen::VectorXd::Ones(n.size());
  Local out;
  out.temperature = gas_.temperature(s, V, n);
  const double T = out.temperature;
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::inadmissible_state, "fluid: non-positive temperature");
  out.mu.resize(n.size());
  for (int A = 0; A < species(); ++A) {
    const auto& sp = species_[static_cast<std::size_t>(A)];
    const double molar_mu = sp.formation_energy + (sp.eos.c_v + sp.eos.R) * T - T * sp.eos.molar_entropy(T, 1.0 / n[A]);
    out.mu[A] = molar_mu / sp.molar_mass;
    out.energy += n[A] * (sp.eos.c_v * T + sp.formation_energy);
    out.pressure += n[A] * sp.eos.R * T;
  }
  return out;
}

double FluidEOS::entropy_density(const Eigen::VectorXd& rho, double T) const {
  const Eigen::VectorXd n = concentrations(rho);
  return gas_.entropy(T, Eigen::VectorXd::Ones(n.size()), n);
}

double FluidEOS::sound_speed(const Eigen::VectorXd& rho, double s) const {
  const Eigen::VectorXd n = concentrations(rho);
  double cv = 0.0, cp = 0.0;
  for (int A = 0; A < species(); ++A) {
    const auto& e = species_[static_cast<std::size_t>(A)].eos;
    cv += n[A] * e.c_v;
    cp += n[A] * (e.c_v + e.R);
  }
  return std::sqrt(cp / cv * evaluate(rho, s).pressure / rho.sum());
}

Eigen::VectorXd ddx(const Eigen::VectorXd& f, double dx) {
  const Eigen::Index M = f.size();
  Eigen::VectorXd d(M);
  if (M == 0) return d;
  const double inv = 1.0 / (2.0 * dx);
  for (Eigen::Index i = 0; i < M; ++i) d[i] = (f[(i + 1) % M] - f[(i + M - 1) % M]) * inv;
  return d;
}

namespace {

void check_state(const Fluid1DState& x, const FluidEOS& eos) {
  const int M = x.grid.cells;
  if (M < 3) throw Error(ErrorKind::dimension_mismatch, "fluid: at least 3 cells are required");
  if (x.rho.rows() != eos.species() || x.rho.cols() != M || x.vel.size() != M || x.s.size() != M)
    throw Error(ErrorKind::dimension_mismatch, "fluid: field sizes do not match the grid and species count");
  if (!(x.grid.length > 0.0)) throw Error(ErrorKind::validation, "grid.length: must be positive");
  if ((x.rho.array() <= 0.0).any()) throw Error(ErrorKind::domain, "fluid: densities must be positive");
}

}  // namespace

FluidFluxes linear_fluxes(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr) {
  check_state(x, eos);
  const int M = x.grid.cells, P = x.species();
  const double dx = x.grid.dx();
  FluidFluxes f;
  f.T.resize(M);
  f.mu.resize(P, M);
  for (int i = 0; i < M; ++i) {
    const FluidEOS::Local loc = eos.evaluate(x.rho.col(i), x.s[i]);
    f.T[i] = loc.temperature;
    f.mu.col(i) = loc.mu;
  }
  f.dT = ddx(f.T, dx);
  f.dv = ddx(x.vel, dx);
  f.dmu.resize(P, M);
  for (int A = 0; A < P; ++A) f.dmu.row(A) = ddx(f.mu.row(A).transpose(), dx).transpose();

  Eigen::MatrixXd Pi = Eigen::MatrixXd::Identity(P + 1, P + 1);
  Pi.bottomRightCorner(P, P) -= Eigen::MatrixXd::Constant(P, P, 1.0 / P);
  const Eigen::MatrixXd Lp = Pi * tr.L * Pi;

  Eigen::MatrixXd X(P + 1, M);
  X.row(0) = f.dT.transpose();
  X.bottomRows(P) = f.dmu;
  const Eigen::MatrixXd J = -Lp * X;
  f.j_s = J.row(0).transpose();
  f.j = J.bottomRows(P);
  f.sigma = tr.viscosity() * f.dv;
  return f;
}

Eigen::VectorXd production_density(const FluidFluxes& f) {
  Eigen::VectorXd prod = f.sigma.cwiseProduct(f.dv) - f.j_s.cwiseProduct(f.dT);
  prod -= f.j.cwiseProduct(f.dmu).colwise().sum().transpose();
  return prod.cwiseQuotient(f.T);
}

Fluid1DState nsf_rhs(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr,
                     const RhsOptions& opt) {
  const FluidFluxes f = linear_fluxes(x, eos, tr);
  const int P = x.species();
  const double dx = x.grid.dx();
  const Eigen::VectorXd& v = x.vel;
  const Eigen::VectorXd rho = x.total_density();

  Fluid1DState r;
  r.t = x.t;
  r.grid = x.grid;
  r.rho.resize(P, x.cells());
  for (int A = 0; A < P; ++A) {
    const Eigen::VectorXd flux = x.rho.row(A).transpose().cwiseProduct(v) + f.j.row(A).transpose();
    r.rho.row(A) = -ddx(flux, dx).transpose();
  }
  r.s = -ddx(x.s.cwiseProduct(v) + f.j_s, dx) + production_density(f);

  if (opt.hold_velocity) {
    r.vel = Eigen::VectorXd::Zero(x.cells());
    return r;
  }
  const Eigen::VectorXd m = rho.cwiseProduct(v);
  Eigen::VectorXd dm = -ddx(v.cwiseProduct(m), dx) - m.cwiseProduct(f.dv) +
                       rho.cwiseProduct(ddx(0.5 * v.cwiseProduct(v), dx)) - x.s.cwiseProduct(f.dT) +
                       ddx(f.sigma, dx);
  for (int A = 0; A < P; ++A) dm -= x.rho.row(A).transpose().cwiseProduct(f.dmu.row(A).transpose());
  const Eigen::VectorXd drho = r.rho.colwise().sum().transpose();
  r.vel = (dm - v.cwiseProduct(drho)).cwiseQuotient(rho);
  return r;
}

void FluidProblem::validate() const {
  check_state(initial, eos);
  transport.validate(eos.species());
  integrator.validate();
  if (!(t_end >= 0.0)) throw Error(ErrorKind::validation, "t_end must be non-negative");
  if (sample_every < 0.0) throw Error(ErrorKind::validation, "sample_every must be non-negative");
  for (int i = 0; i < initial.cells(); ++i) eos.evaluate(initial.rho.col(i), initial.s[i]);
}

Eigen::VectorXd pack(const Fluid1DState& x) {
  const Eigen::Index P = x.rho.rows(), M = x.rho.cols();
  Eigen::VectorXd y((P + 2) * M);
  for (Eigen::Index A = 0; A < P; ++A) y.segment(A * M, M) = x.rho.row(A).transpose();
  y.segment(P * M, M) = x.vel;
  y.segment((P + 1) * M, M) = x.s;
  return y;
}

Fluid1DState unpack(const Fluid1DState& shape, double t, const Eigen::VectorXd& y) {
  const Eigen::Index P = shape.rho.rows(), M = shape.rho.cols();
  if (y.size() != (P + 2) * M) throw Error(ErrorKind::dimension_mismatch, "fluid: flat vector has wrong length");
  Fluid1DState x;
  x.t = t;
  x.grid = shape.grid;
  x.rho.resize(P, M);
  for (Eigen::Index A = 0; A < P; ++A) x.rho.row(A) = y.segment(A * M, M).transpose();
  x.vel = y.segment(P * M, M);
  x.s = y.segment((P + 1) * M, M);
  return x;
}

OdeSystem ode_system(const FluidProblem& pb) {
  OdeSystem sys;
  const Fluid1DState shape = pb.initial;
  sys.f = [&pb, shape](double t, const Eigen::VectorXd& y) {
    return pack(nsf_rhs(unpack(shape, t, y), pb.eos, pb.transport, pb.options));
  };
  sys.t_scale = pb.t_end > 0.0 ? pb.t_end : 1.0;
  return sys;
}

FluidTrajectory simulate(const FluidProblem& pb, const IntegratorConfig* cfg) {
  const IntegrationResult res =
      integrate(ode_system(pb), pb.initial.t, pack(pb.initial), pb.t_end, pb.sample_every, cfg ? *cfg : pb.integrator);
  FluidTrajectory traj;
  traj.steps = res.steps;
  traj.rejected = res.rejected;
  traj.samples.reserve(res.states.size());
  for (std::size_t i = 0; i < res.states.size(); ++i) traj.samples.push_back(unpack(pb.initial, res.times[i], res.states[i]));
  return traj;
}

FluidTotals fluid_totals(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr) {
  const double dx = x.grid.dx();
  FluidTotals out;
  out.t = x.t;
  out.mass = x.rho.rowwise().sum() * dx;
  const Eigen::VectorXd rho = x.total_density();
  for (int i = 0; i < x.cells(); ++i)
    out.energy += (0.5 * rho[i] * x.vel[i] * x.vel[i] + eos.evaluate(x.rho.col(i), x.s[i]).energy) * dx;
  out.entropy = x.s.sum() * dx;
  const Eigen::VectorXd prod = production_density(linear_fluxes(x, eos, tr));
  out.min_production = prod.minCoeff();
  out.max_production = prod.maxCoeff();
  return out;
}

FluidReport fluid_diagnostics(const FluidTrajectory& traj, const FluidEOS& eos, const TransportCoefficients& tr,
                              double tol) {
  if (traj.samples.empty()) throw Error(ErrorKind::unsupported, "fluid diagnostics need a nonempty trajectory");
  FluidReport rep;
  for (const auto& x : traj.samples) rep.totals.push_back(fluid_totals(x, eos, tr));
  const FluidTotals& first = rep.totals.front();
  double prod_scale = 0.0;
  for (const auto& t : rep.totals) prod_scale = std::max({prod_scale, std::abs(t.max_production), std::abs(t.min_production)});
  rep.min_production = std::numeric_limits<double>::infinity();
  rep.min_entropy_increment = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.totals.size(); ++k) {
    const FluidTotals& t = rep.totals[k];
    for (Eigen::Index A = 0; A < t.mass.size(); ++A)
      rep.max_mass_drift = std::max(rep.max_mass_drift, std::abs(t.mass[A] - first.mass[A]) / std::abs(first.mass[A]));
    rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(t.energy - first.energy) / std::abs(first.energy));
    const double relp = prod_scale > 0.0 ? t.min_production / prod_scale : 0.0;
    rep.min_production = std::min(rep.min_production, relp);
    if (relp < -tol) rep.production_nonnegative = false;
    if (k > 0) {
      const double inc = (t.entropy - rep.totals[k - 1].entropy) / std::abs(first.entropy);
      rep.min_entropy_increment = std::min(rep.min_entropy_increment, inc);
      if (inc < -tol) rep.entropy_non_decreasing = false;
    }
  }
  if (rep.totals.size() < 2) rep.min_entropy_increment = 0.0;
  rep.entropy_change = rep.totals.back().entropy - first.entropy;
  return rep;
}

void write_snapshots_csv(std::ostream& out, const FluidTrajectory& traj, const FluidEOS& eos) {
  out << "t,cell,x";
  for (int A = 0; A < eos.species(); ++A) {
    const std::string& n = eos.species(A).name;
    out << ",rho_" << (n.empty() ? std::to_string(A) : n);
  }
  out << ",v,s,T,p\n";
  for (const auto& x : traj.samples)
    for (int i = 0; i < x.cells(); ++i) {
      const FluidEOS::Local loc = eos.evaluate(x.rho.col(i), x.s[i]);
      out << fmt::format("{:.17g},{},{:.17g}", x.t, i, x.grid.center(i));
      for (int A = 0; A < x.species(); ++A) out << fmt::format(",{:.17g}", x.rho(A, i));
      out << fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g}\n", x.vel[i], x.s[i], loc.temperature, loc.pressure);
    }
}

FluidEOS default_eos(int species) {
  std::vector<FluidEOS::Species> sp;
  for (int A = 0; A < species; ++A) {
    FluidEOS::Species s;
    s.name = species == 1 ? "gas" : "gas" + std::to_string(A);
    s.molar_mass = 0.04 * (1.0 + 0.25 * A);
    sp.push_back(s);
  }
  return FluidEOS(std::move(sp));
}

Fluid1DState uniform_state(const FluidEOS& eos, Grid grid, double rho, double T) {
  Fluid1DState x;
  x.grid = grid;
  const int P = eos.species();
  x.rho = Eigen::MatrixXd::Constant(P, grid.cells, rho / P);
  x.vel = Eigen::VectorXd::Zero(grid.cells);
  const double s = eos.entropy_density(x.rho.col(0), T);
  x.s = Eigen::VectorXd::Constant(grid.cells, s);
  return x;
}

namespace {

IntegratorConfig fluid_integrator() {
  IntegratorConfig c;
  c.method = Method::dopri45;
  c.dt = 1e-7;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-12;
  return c;
}

double bump(double x, double center, double width) {
  const double d = (x - center) / width;
  return std::exp(-d * d);
}

}  // namespace

FluidProblem make_acoustic_pulse(int cells, double amplitude) {
  FluidProblem pb;
  pb.name = "acoustic_pulse";
  pb.eos = default_eos();
  const Grid grid{cells, 1.0};
  pb.initial = uniform_state(pb.eos, grid, 1.2, 300.0);
  // Isentropic: keep s / rho fixed while perturbing rho.
  const double s_per_mass = pb.initial.s[0] / 1.2;
  for (int i = 0; i < cells; ++i) {
    const double rho = 1.2 * (1.0 + amplitude * bump(grid.center(i), 0.5, 0.05));
    pb.initial.rho(0, i) = rho;
    pb.initial.s[i] = s_per_mass * rho;
  }
  pb.transport = TransportCoefficients::none(1);
  pb.integrator = fluid_integrator();
  pb.t_end = 1e-3;
  pb.sample_every = 5e-5;
  return pb;
}

FluidProblem make_viscous_relaxation(int cells) {
  FluidProblem pb;
  pb.name = "viscous_relaxation";
  pb.eos = default_eos();
  const Grid grid{cells, 1.0};
  pb.initial = uniform_state(pb.eos, grid, 1.2, 300.0);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int i = 0; i < cells; ++i) pb.initial.vel[i] = 1.0 * std::sin(two_pi * grid.center(i));
  pb.transport = TransportCoefficients::none(1);
  pb.transport.mu_shear = 0.5;
  pb.transport.zeta = 0.1;
  pb.transport.L(0, 0) = 1e-3;
  pb.integrator = fluid_integrator();
  pb.t_end = 5e-3;
  pb.sample_every = 2.5e-4;
  return pb;
}

FluidProblem make_heat_conduction(int cells) {
  FluidProblem pb;
  pb.name = "heat_conduction";
  pb.eos = default_eos();
  const Grid grid{cells, 1.0};
  pb.initial = uniform_state(pb.eos, grid, 1.2, 300.0);
  for (int i = 0; i < cells; ++i)
    pb.initial.s[i] = pb.eos.entropy_density(pb.initial.rho.col(i), 300.0 + 30.0 * bump(grid.center(i), 0.5, 0.1));
  pb.transport = TransportCoefficients::none(1);
  pb.transport.L(0, 0) = 0.05;
  pb.options.hold_velocity = true;
  pb.integrator = fluid_integrator();
  pb.t_end = 1.0;
  pb.sample_every = 0.05;
  return pb;
}

}  // namespace vartherm::nsf1d
