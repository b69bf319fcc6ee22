#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "vartherm/ideal_gas.hpp"
#include "vartherm/integrators.hpp"

namespace vartherm::nsf1d {

/// Uniform periodic grid of M cells on [0, length).
struct Grid {
  int cells = 0;
  double length = 1.0;
  double dx() const { return length / cells; }
  double center(int i) const { return (i + 0.5) * dx(); }
};

/// Cell values of the fluid fields. Also used to hold their time derivatives.
struct Fluid1DState {
  double t = 0.0;
  Grid grid;
  Eigen::MatrixXd rho;  // P x M, kg/m^3
  Eigen::VectorXd vel;  // M, m/s
  Eigen::VectorXd s;    // M, J/(K m^3)

  int species() const { return static_cast<int>(rho.rows()); }
  int cells() const { return grid.cells; }
  Eigen::VectorXd total_density() const { return rho.colwise().sum().transpose(); }
};

/// Linear transport: (-j_s, -j_A) = L (dT/dx, dmu^B/dx) and
/// sigma_fr = (zeta + 4 mu_shear / 3) dv/dx.
struct TransportCoefficients {
  double mu_shear = 0.0;
  double zeta = 0.0;
  Eigen::MatrixXd L;  // (P+1) x (P+1), index 0 is entropy

  double viscosity() const { return zeta + 4.0 * mu_shear / 3.0; }
  /// Nonnegative viscosities and symmetric PSD L of the right size.
  void validate(int species) const;
  static TransportCoefficients none(int species);
};

/// Ideal-gas mixture per unit volume. Species A has molar mass m_A, so its
/// molar concentration is rho_A / m_A. Partial entropies include the
/// mixing term through each species' own log concentration.
class FluidEOS {
 public:
  struct Species {
    std::string name;
    IdealGasEOS eos;
    double molar_mass = 0.04;  // kg/mol
    double formation_energy = 0.0;
  };

  struct Local {
    double energy = 0.0;       // epsilon, J/m^3
    double temperature = 0.0;  // d epsilon / d s
    double pressure = 0.0;     // mu^A rho_A + T s - epsilon
    Eigen::VectorXd mu;        // d epsilon / d rho_A, J/kg
  };

  FluidEOS() = default;
  explicit FluidEOS(std::vector<Species> species);

  int species() const { return static_cast<int>(species_.size()); }
  const Species& species(int A) const { return species_[static_cast<std::size_t>(A)]; }

  Local evaluate(const Eigen::VectorXd& rho, double s) const;
  /// Entropy density at temperature T.
  double entropy_density(const Eigen::VectorXd& rho, double T) const;
  /// sqrt(gamma p / rho) with the mixture's heat-capacity ratio.
  double sound_speed(const Eigen::VectorXd& rho, double s) const;

 private:
  Eigen::VectorXd concentrations(const Eigen::VectorXd& rho) const;

  std::vector<Species> species_;
  CompositeGas gas_;
};

/// Second-order central derivative on the periodic grid.
Eigen::VectorXd ddx(const Eigen::VectorXd& f, double dx);

struct FluidFluxes {
  Eigen::VectorXd j_s;    // M
  Eigen::MatrixXd j;      // P x M, sums to zero over species
  Eigen::VectorXd sigma;  // M, viscous stress
  Eigen::VectorXd T;      // M
  Eigen::MatrixXd mu;     // P x M
  Eigen::VectorXd dT, dv; // gradients
  Eigen::MatrixXd dmu;
};

/// The fluxes use Pi L Pi with Pi = diag(1, I - 11^T/P), which keeps the
/// species fluxes summing to zero and the production a PSD quadratic form.
FluidFluxes linear_fluxes(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr);

/// Pointwise entropy production density (1/T)[sigma v_x - j_s T_x - j_A mu^A_x].
Eigen::VectorXd production_density(const FluidFluxes& f);

struct RhsOptions {
  bool hold_velocity = false;  // freeze v (pure conduction/diffusion runs)
};

/// Semi-discrete right-hand side. Momentum uses the form
/// d_t m + d_x(v m) + m v_x = rho d_x(v^2/2) - rho_A d_x mu^A - s d_x T + d_x sigma
/// (m = rho v), which conserves the discrete total energy exactly.
Fluid1DState nsf_rhs(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr,
                     const RhsOptions& opt = {});

struct FluidProblem {
  std::string name = "fluid1d";
  Fluid1DState initial;
  FluidEOS eos;
  TransportCoefficients transport;
  RhsOptions options;
  IntegratorConfig integrator;
  double t_end = 1e-3;
  double sample_every = 1e-4;

  void validate() const;
};

struct FluidTrajectory {
  std::vector<Fluid1DState> samples;
  long steps = 0;
  long rejected = 0;
};

Eigen::VectorXd pack(const Fluid1DState& x);
Fluid1DState unpack(const Fluid1DState& shape, double t, const Eigen::VectorXd& y);
OdeSystem ode_system(const FluidProblem& pb);
FluidTrajectory simulate(const FluidProblem& pb, const IntegratorConfig* cfg = nullptr);

struct FluidTotals {
  double t = 0.0;
  Eigen::VectorXd mass;  // per species, kg/m^2
  double energy = 0.0;   // sum (rho v^2/2 + epsilon) dx
  double entropy = 0.0;  // sum s dx
  double min_production = 0.0;
  double max_production = 0.0;
};

FluidTotals fluid_totals(const Fluid1DState& x, const FluidEOS& eos, const TransportCoefficients& tr);

struct FluidReport {
  std::vector<FluidTotals> totals;
  double max_mass_drift = 0.0;         // max_A max_t |M_A - M_A(0)| / M_A(0)
  double max_energy_drift = 0.0;       // relative
  double min_entropy_increment = 0.0;  // min over consecutive samples, relative to |S(0)|
  double min_production = 0.0;         // relative to the largest production density
  double entropy_change = 0.0;         // S(end) - S(0)
  bool entropy_non_decreasing = true;
  bool production_nonnegative = true;
  bool ok() const { return entropy_non_decreasing && production_nonnegative; }
};

FluidReport fluid_diagnostics(const FluidTrajectory& traj, const FluidEOS& eos, const TransportCoefficients& tr,
                              double tol = 1e-12);

/// One row per cell per sample: t, cell, x, rho_<A>..., v, s, T, p.
void write_snapshots_csv(std::ostream& out, const FluidTrajectory& traj, const FluidEOS& eos);

// Presets on a single monatomic species (argon-like, 1.2 kg/m^3, 300 K).
FluidEOS default_eos(int species = 1);
Fluid1DState uniform_state(const FluidEOS& eos, Grid grid, double rho, double T);
/// Isentropic Gaussian density pulse of relative amplitude `amplitude` at
/// the domain center, at rest.
FluidProblem make_acoustic_pulse(int cells = 256, double amplitude = 1e-4);
/// Sinusoidal velocity relaxing under viscosity and heat conduction.
FluidProblem make_viscous_relaxation(int cells = 256);
/// Temperature bump at rest, velocity held at zero, Fourier conduction only.
FluidProblem make_heat_conduction(int cells = 256);

}  // namespace vartherm::nsf1d
