#include "cli/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "vartherm/thermo.hpp"

namespace vartherm::cli {

using json = nlohmann::ordered_json;

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace {

void add_block(std::vector<std::string>& h, const char* name, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) h.push_back(fmt::format("{}[{}]", name, i));
}

void put_block(std::string& line, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    line += ',';
    line += format_double(v[i]);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
  return a;
}

json process_json(const ProcessArray& a) {
  json o = json::object();
  for (Process p : kAllProcesses) o[to_string(p)] = number_or_null(a[static_cast<std::size_t>(p)]);
  return o;
}

json integrator_json(const IntegratorConfig& c) {
  return {{"method", to_string(c.method)}, {"dt", c.dt}, {"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol}};
}

}  // namespace

std::vector<std::string> csv_header(const Scenario& sc) {
  const auto& topo = sc.topology;
  std::vector<std::string> h{"t"};
  add_block(h, "q", topo.n_mech);
  add_block(h, "v", topo.n_mech);
  add_block(h, "S", topo.P);
  add_block(h, "N", topo.K);
  add_block(h, "Gamma", topo.P);
  add_block(h, "W", topo.K);
  add_block(h, "Sigma", topo.P);
  add_block(h, "Nu", topo.reaction_count());
  h.emplace_back("E");
  h.emplace_back("I");
  for (Process p : kAllProcesses) h.push_back(std::string("I_") + to_string(p));
  return h;
}

void write_csv(std::ostream& out, const Scenario& sc, const Trajectory& traj) {
  const auto header = csv_header(sc);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::string line;
  for (const Sample& s : traj.samples) {
    const ThermoState& x = s.x;
    line = format_double(x.t);
    for (const Eigen::VectorXd* b : {&x.q, &x.v, &x.S, &x.N, &x.Gamma, &x.W, &x.Sigma, &x.Nu}) put_block(line, *b);
    const ProductionRate pr = entropy_production_at(sc, s);
    line += ',' + format_double(energy(sc.lagrangian, x));
    line += ',' + format_double(pr.total);
    for (double b : pr.by_process) line += ',' + format_double(b);
    out << line << '\n';
  }
}

std::vector<ThermoState> read_csv(std::istream& in, const Scenario& sc) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::config, "trajectory CSV: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;

  const auto& topo = sc.topology;
  const ThermoState shape = ThermoState::zeros(topo);
  struct Block {
    const char* name;
    Eigen::VectorXd ThermoState::*member;
  };
  const Block blocks[] = {{"q", &ThermoState::q},         {"v", &ThermoState::v},
                          {"S", &ThermoState::S},         {"N", &ThermoState::N},
                          {"Gamma", &ThermoState::Gamma}, {"W", &ThermoState::W},
                          {"Sigma", &ThermoState::Sigma}, {"Nu", &ThermoState::Nu}};
  if (!column.count("t")) throw Error(ErrorKind::config, "trajectory CSV: no 't' column");
  for (const auto& b : blocks) {
    const Eigen::Index n = (shape.*(b.member)).size();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!column.count(fmt::format("{}[{}]", b.name, i)))
        throw Error(ErrorKind::config, fmt::format("trajectory CSV: column '{}[{}]' required by scenario '{}' is missing",
                                                   b.name, i, sc.name));
    if (column.count(fmt::format("{}[{}]", b.name, n)))
      throw Error(ErrorKind::config, fmt::format("trajectory CSV: more '{}' columns than scenario '{}' has",
                                                 b.name, sc.name));
  }

  std::vector<ThermoState> states;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorKind::config, fmt::format("trajectory CSV row {}: expected {} fields, got {}", row,
                                                 header.size(), cells.size()));
    auto value = [&](const std::string& name) {
      const std::string& c = cells[column.at(name)];
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size())
        throw Error(ErrorKind::config, fmt::format("trajectory CSV row {}, column '{}': not a number", row, name));
      return v;
    };
    ThermoState x = shape;
    x.t = value("t");
    for (const auto& b : blocks) {
      Eigen::VectorXd& v = x.*(b.member);
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = value(fmt::format("{}[{}]", b.name, i));
    }
    states.push_back(std::move(x));
  }
  return states;
}

json report_json(const RunConfig& rc, const Trajectory& traj, const DiagnosticsReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "lumped";
  j["status"] = r.ok() ? "clean" : "law_violation";
  j["exit_code"] = r.ok() ? 0 : 2;
  j["scenario"] = r.scenario;
  j["source"] = rc.source;
  j["family"] = to_string(r.family);
  j["open"] = r.open;
  j["isolated"] = r.isolated;
  j["integrator"] = integrator_json(rc.integrator());
  j["run"] = {{"t_begin", number_or_null(r.t_begin)},
              {"t_end", number_or_null(r.t_end)},
              {"samples", r.samples},
              {"steps", traj.steps},
              {"rejected", traj.rejected},
              {"rhs_evaluations", traj.rhs_evaluations}};
  j["first_law"] = {{"ok", r.first_law_ok},
                    {"tolerance", rc.diagnostics.first_law_tol},
                    {"max_relative_residual", number_or_null(r.max_first_law_residual)},
                    {"max_abs_residual", number_or_null(r.max_first_law_residual_abs)},
                    {"scale", number_or_null(r.first_law_scale)}};
  j["second_law"] = {{"ok", r.second_law_ok},
                     {"min_production", number_or_null(r.second_law.min_production)},
                     {"violation_time", r.second_law.violation_time ? json(*r.second_law.violation_time) : json()},
                     {"reason", r.second_law.reason}};
  j["production"] = {{"ok", r.buckets_ok},
                     {"tolerance", rc.diagnostics.production_tol},
                     {"total", number_or_null(r.total_production)},
                     {"min_internal", number_or_null(r.min_internal_production)},
                     {"scale", number_or_null(r.production_scale)},
                     {"decomposition_error", number_or_null(r.decomposition_error)},
                     {"by_process", process_json(r.production_by_process)},
                     {"min_rate", process_json(r.min_bucket_rate)}};
  j["energy"] = {{"initial", number_or_null(r.energy_initial)},
                 {"final", number_or_null(r.energy_final)},
                 {"max_drift", number_or_null(r.max_energy_drift)}};
  j["entropy"] = {{"initial", number_or_null(r.entropy_initial)}, {"final", number_or_null(r.entropy_final)}};
  const EquilibriumSummary& e = r.equilibrium;
  j["equilibrium"] = {
      {"steady", e.steady},
      {"rate_norm", number_or_null(e.rate_norm)},
      {"temperatures", vector_json(e.temperatures)},
      {"temperature_gap", number_or_null(e.temperature_gap)},
      {"temperature_gap_relative", number_or_null(e.temperature_gap_relative)},
      {"chemical_potential_gap", number_or_null(e.chemical_potential_gap)},
      {"mu_over_T_gap", number_or_null(e.mu_over_T_gap)},
      {"max_affinity", number_or_null(e.max_affinity)},
      {"mechanical_gap", e.mechanical_gap ? number_or_null(*e.mechanical_gap) : json()},
      {"mechanical_gap_relative", e.mechanical_gap_relative ? number_or_null(*e.mechanical_gap_relative) : json()}};
  if (r.detailed_balance) {
    j["detailed_balance"] = {{"closure", number_or_null(r.detailed_balance->closure)},
                             {"internal_work", number_or_null(r.detailed_balance->internal_work)},
                             {"heat_antisymmetry", number_or_null(r.detailed_balance->heat_antisymmetry)}};
  } else {
    j["detailed_balance"] = nullptr;
  }
  j["violations"] = r.violations;
  return j;
}

json fluid_report_json(const RunConfig& rc, const nsf1d::FluidTrajectory& traj, const nsf1d::FluidReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "fluid1d";
  j["status"] = r.ok() ? "clean" : "law_violation";
  j["exit_code"] = r.ok() ? 0 : 2;
  j["scenario"] = rc.fluid->name;
  j["source"] = rc.source;
  j["integrator"] = integrator_json(rc.integrator());
  j["run"] = {{"t_begin", traj.samples.front().t},
              {"t_end", traj.samples.back().t},
              {"samples", traj.samples.size()},
              {"steps", traj.steps},
              {"rejected", traj.rejected},
              {"rhs_evaluations", nullptr}};
  j["fluid"] = {{"cells", rc.fluid->initial.cells()},
                {"species", rc.fluid->initial.species()},
                {"max_mass_drift", number_or_null(r.max_mass_drift)},
                {"max_energy_drift", number_or_null(r.max_energy_drift)},
                {"min_entropy_increment", number_or_null(r.min_entropy_increment)},
                {"min_production", number_or_null(r.min_production)},
                {"entropy_change", number_or_null(r.entropy_change)},
                {"entropy_non_decreasing", r.entropy_non_decreasing},
                {"production_nonnegative", r.production_nonnegative}};
  std::vector<std::string> violations;
  if (!r.entropy_non_decreasing) violations.emplace_back("total entropy decreased");
  if (!r.production_nonnegative) violations.emplace_back("negative pointwise entropy production");
  j["violations"] = violations;
  return j;
}

json failure_report_json(const std::string& scenario, const std::string& source, const Error& e, int exit_code) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "error";
  j["status"] = exit_code == 3 ? "integration_failure" : exit_code == 4 ? "config_error" : "io_error";
  j["exit_code"] = exit_code;
  j["scenario"] = scenario;
  j["source"] = source;
  j["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  return j;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

void write_json(const std::string& path, const json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

}  // namespace vartherm::cli
