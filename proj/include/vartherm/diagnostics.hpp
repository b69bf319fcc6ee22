#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vartherm/models.hpp"
#include "vartherm/trajectory.hpp"

namespace vartherm {

enum class Process { friction, heat_conduction, matter_transfer, mixing, heating, reaction };
inline constexpr std::size_t kProcessCount = 6;
using ProcessArray = std::array<double, kProcessCount>;

const char* to_string(Process p);
inline constexpr std::array<Process, kProcessCount> kAllProcesses = {
    Process::friction, Process::heat_conduction, Process::matter_transfer,
    Process::mixing,   Process::heating,         Process::reaction};

/// Internal entropy production at one sample, split by process.
struct ProductionRate {
  double total = 0.0;  // sum of dSigma
  ProcessArray by_process{};
  double magnitude = 0.0;  // max(sum of |bucket|, sum of |dSigma_A|, boundary term sizes)
};

ProductionRate entropy_production_at(const Scenario& sc, const Sample& s);

struct ProductionSeries {
  std::vector<double> t;
  std::vector<ProductionRate> rate;
  ProcessArray integrated{};  // trapezoid rule, J/K
  double integrated_total = 0.0;
  double scale = 0.0;               // max magnitude along the run
  double completeness_error = 0.0;  // max |sum buckets - I| / scale
};

ProductionSeries internal_entropy_production(const Scenario& sc, const Trajectory& traj);

/// External powers recomputed from the scenario's force law, heat-source
/// specs and port profiles (not read back from the RHS).
struct ExternalPowers {
  double work = 0.0;    // <F_ext, v>
  double heat = 0.0;    // sum_b J_S^b T^b
  double matter = 0.0;  // sum_a J^a H^a
  double total() const { return work + heat + matter; }
};

ExternalPowers external_powers(const Scenario& sc, const ThermoState& x);

struct FirstLawSeries {
  std::vector<double> t;
  std::vector<double> energy_rate;  // chain rule on the StateRate
  std::vector<double> residual;     // dE/dt - P_W - P_H - P_M
  std::vector<ExternalPowers> powers;
  double scale = 0.0;  // max(power term magnitude, |E0| / duration)
  double max_abs = 0.0;
  double max_relative = 0.0;
};

FirstLawSeries first_law_residual(const Scenario& sc, const Trajectory& traj);

struct SecondLawResult {
  bool ok = true;
  std::optional<double> violation_time;
  std::string reason;
  double min_production = 0.0;  // W/K
};

/// I(t) >= -tol * scale at every sample; for scenarios without ports or
/// heat sources the total entropy must also be non-decreasing (to
/// 1e-10 |S| between samples).
SecondLawResult second_law_check(const Scenario& sc, const Trajectory& traj, double tol = 1e-12);

/// Powers into subsystem A at one sample: dE_A/dt = external + internal work + sum_B heat_in[B].
struct SubsystemPowers {
  double t = 0.0;
  double energy_rate = 0.0;
  double external_work = 0.0;
  double internal_work = 0.0;
  Eigen::VectorXd heat_in;  // P_H^{B->A} = J_AB (T^A - T^B)
};

/// Needs Scenario::subsystem_lagrangians (one per subsystem). External work
/// is booked on subsystem 0.
std::vector<SubsystemPowers> detailed_energy_balance(const Scenario& sc, const Trajectory& traj, int A);

struct DetailedBalanceCheck {
  double closure = 0.0;        // max |sum_A dE_A - dE| / scale
  double internal_work = 0.0;  // max |sum_A internal work| / scale
  double heat_antisymmetry = 0.0;
};

DetailedBalanceCheck check_detailed_balance(const Scenario& sc, const Trajectory& traj);

struct EquilibriumSummary {
  bool steady = false;
  double rate_norm = 0.0;  // max_i |ydot_i| / max_t |y_i| at the last sample (1/s)
  Eigen::VectorXd temperatures;
  double temperature_gap = 0.0;  // max_{A,B} |T^A - T^B|
  double temperature_gap_relative = 0.0;
  double chemical_potential_gap = 0.0;  // between exchanging compartments
  double mu_over_T_gap = 0.0;
  double max_affinity = 0.0;
  std::optional<double> mechanical_gap;  // |f1 - f2|
  std::optional<double> mechanical_gap_relative;
};

EquilibriumSummary equilibrium_summary(const Scenario& sc, const Trajectory& traj,
                                       double steady_threshold = 1e-8);

struct DiagnosticsOptions {
  double first_law_tol = 1e-8;
  double production_tol = 1e-12;
  double steady_threshold = 1e-8;
};

struct DiagnosticsReport {
  std::string scenario;
  Family family = Family::simple;
  bool open = false;
  bool isolated = false;
  std::size_t samples = 0;
  double t_begin = 0.0, t_end = 0.0;

  double max_first_law_residual = 0.0;  // relative
  double max_first_law_residual_abs = 0.0;
  double first_law_scale = 0.0;

  double min_internal_production = 0.0;
  double production_scale = 0.0;
  double decomposition_error = 0.0;
  ProcessArray production_by_process{};
  ProcessArray min_bucket_rate{};
  double total_production = 0.0;

  double energy_initial = 0.0, energy_final = 0.0;
  double max_energy_drift = 0.0;  // max |E - E0| / |E0|
  double entropy_initial = 0.0, entropy_final = 0.0;

  SecondLawResult second_law;
  std::optional<DetailedBalanceCheck> detailed_balance;
  EquilibriumSummary equilibrium;

  bool first_law_ok = true;
  bool second_law_ok = true;
  bool buckets_ok = true;
  std::vector<std::string> violations;

  bool ok() const { return first_law_ok && second_law_ok && buckets_ok; }
};

DiagnosticsReport diagnose(const Scenario& sc, const Trajectory& traj, const DiagnosticsOptions& opt = {});

}  // namespace vartherm
