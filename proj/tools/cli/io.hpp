#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "json.hpp"
#include "vartherm/diagnostics.hpp"
#include "vartherm/error.hpp"
#include "vartherm/nsf1d.hpp"
#include "vartherm/trajectory.hpp"

namespace vartherm::cli {

inline constexpr int kReportSchemaVersion = 1;

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// t, q[i], v[i], S[A], N[k], Gamma[A], W[k], Sigma[A], Nu[a], E, I, I_<process>...
std::vector<std::string> csv_header(const Scenario& sc);
void write_csv(std::ostream& out, const Scenario& sc, const Trajectory& traj);

/// Rebuilds states from the t and state columns of a CSV written by
/// write_csv. Throws config when the columns do not fit the scenario.
std::vector<ThermoState> read_csv(std::istream& in, const Scenario& sc);

nlohmann::ordered_json report_json(const RunConfig& rc, const Trajectory& traj, const DiagnosticsReport& rep);
nlohmann::ordered_json fluid_report_json(const RunConfig& rc, const nsf1d::FluidTrajectory& traj,
                                 const nsf1d::FluidReport& rep);
nlohmann::ordered_json failure_report_json(const std::string& scenario, const std::string& source, const Error& e,
                                   int exit_code);

/// Failures to open or write become io errors.
void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);
void write_json(const std::string& path, const nlohmann::ordered_json& j);

}  // namespace vartherm::cli
