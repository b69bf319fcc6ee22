#include "cli/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <ostream>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>
#include <thread>

#include "cli/io.hpp"
#include "vartherm/diagnostics.hpp"
#include "vartherm/nsf1d.hpp"
#include "vartherm/trajectory.hpp"

namespace vartherm::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kIoError;
    case ErrorKind::config:
    case ErrorKind::validation: return kConfigError;
    default: return kIntegrationFailure;
  }
}

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_logger_mt("vartherm");
    l->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("VARTHERM_LOG")) level = spdlog::level::from_str(env);
    l->set_level(level);
    return l;
  }();
  return log;
}

RunResult failure(const std::string& scenario, const std::string& source, const Error& e,
                  const std::string& report_path) {
  RunResult r;
  r.exit_code = exit_code_for(e.kind());
  r.scenario = scenario;
  r.summary = fmt::format("{}: error [{}] {}", source, to_string(e.kind()), e.what());
  r.report = failure_report_json(scenario, source, e, r.exit_code);
  if (!report_path.empty() && r.exit_code != kIoError) {
    try {
      write_json(report_path, r.report);
    } catch (const Error&) {
      r.exit_code = kIoError;
    }
  }
  return r;
}

std::string summarize(const std::string& source, const DiagnosticsReport& d) {
  return fmt::format("{}: {} {} samples={} first_law={:.3e} min_I={:.3e} dE/E={:.3e}{}", source, d.scenario,
                     d.ok() ? "clean" : "LAW VIOLATION", d.samples, d.max_first_law_residual,
                     d.min_internal_production, d.max_energy_drift,
                     d.violations.empty() ? "" : " (" + d.violations.front() + ")");
}

RunResult run_lumped(const RunConfig& rc, const std::string& csv, const std::string& report) {
  const Scenario& sc = *rc.lumped;
  logger()->info("{}: integrating to t = {} with {}", rc.source, sc.t_end, to_string(sc.integrator.method));
  Trajectory traj;
  try {
    traj = simulate(sc);
  } catch (const Error& e) {
    logger()->error("{}: {}", rc.source, e.what());
    return failure(rc.scenario, rc.source, e, report);
  }
  logger()->info("{}: {} samples, {} steps, {} rejected", rc.source, traj.samples.size(), traj.steps, traj.rejected);
  const DiagnosticsReport d = diagnose(sc, traj, rc.diagnostics);
  for (const auto& v : d.violations) logger()->warn("{}: {}", rc.source, v);

  RunResult r;
  r.scenario = rc.scenario;
  r.report = report_json(rc, traj, d);
  r.exit_code = d.ok() ? kClean : kLawViolation;
  r.summary = summarize(rc.source, d);
  try {
    if (!csv.empty()) write_file(csv, [&](std::ostream& o) { write_csv(o, sc, traj); });
    if (!report.empty()) write_json(report, r.report);
  } catch (const Error& e) {
    return failure(rc.scenario, rc.source, e, "");
  }
  return r;
}

RunResult run_fluid(const RunConfig& rc, const std::string& csv, const std::string& report) {
  const nsf1d::FluidProblem& pb = *rc.fluid;
  logger()->info("{}: {} cells to t = {}", rc.source, pb.initial.cells(), pb.t_end);
  nsf1d::FluidTrajectory traj;
  try {
    traj = nsf1d::simulate(pb);
  } catch (const Error& e) {
    logger()->error("{}: {}", rc.source, e.what());
    return failure(rc.scenario, rc.source, e, report);
  }
  const nsf1d::FluidReport d = nsf1d::fluid_diagnostics(traj, pb.eos, pb.transport, rc.diagnostics.production_tol);
  RunResult r;
  r.scenario = rc.scenario;
  r.report = fluid_report_json(rc, traj, d);
  r.exit_code = d.ok() ? kClean : kLawViolation;
  r.summary = fmt::format("{}: {} {} samples={} mass_drift={:.3e} energy_drift={:.3e} dS={:.6e}", rc.source, pb.name,
                          d.ok() ? "clean" : "LAW VIOLATION", traj.samples.size(), d.max_mass_drift,
                          d.max_energy_drift, d.entropy_change);
  try {
    if (!csv.empty()) write_file(csv, [&](std::ostream& o) { nsf1d::write_snapshots_csv(o, traj, pb.eos); });
    if (!report.empty()) write_json(report, r.report);
  } catch (const Error& e) {
    return failure(rc.scenario, rc.source, e, "");
  }
  return r;
}

}  // namespace

RunResult run_config(const std::string& path, const Overrides& ov, const std::string& out, const std::string& report) {
  RunConfig rc;
  try {
    rc = load_config(path, ov);
  } catch (const Error& e) {
    return failure("", path, e, report);
  }
  const std::string csv = out.empty() ? rc.output.csv : out;
  const std::string rep = report.empty() ? rc.output.report : report;
  return rc.is_fluid() ? run_fluid(rc, csv, rep) : run_lumped(rc, csv, rep);
}

RunResult check_trajectory_file(const std::string& csv_path, const std::string& config_path,
                                const std::string& report) {
  RunConfig rc;
  try {
    rc = load_config(config_path);
    if (!rc.lumped) throw Error(ErrorKind::config, config_path + ": check needs a lumped scenario");
  } catch (const Error& e) {
    return failure("", config_path, e, report);
  }
  rc.source = csv_path;
  Trajectory traj;
  try {
    std::ifstream in(csv_path);
    if (!in) throw Error(ErrorKind::io, "cannot open trajectory '" + csv_path + "'");
    const auto states = read_csv(in, *rc.lumped);
    if (states.empty()) throw Error(ErrorKind::config, csv_path + ": trajectory has no samples");
    traj = make_trajectory(*rc.lumped, states);
  } catch (const Error& e) {
    // A state the model cannot evaluate means the file does not fit the scenario.
    const Error err = exit_code_for(e.kind()) == kIntegrationFailure ? Error(ErrorKind::config, e.what()) : e;
    return failure(rc.scenario, csv_path, err, report);
  }
  const DiagnosticsReport d = diagnose(*rc.lumped, traj, rc.diagnostics);
  RunResult r;
  r.scenario = rc.scenario;
  r.report = report_json(rc, traj, d);
  r.exit_code = d.ok() ? kClean : kLawViolation;
  r.summary = summarize(csv_path, d);
  if (!report.empty()) {
    try {
      write_json(report, r.report);
    } catch (const Error& e) {
      return failure(rc.scenario, csv_path, e, "");
    }
  }
  return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational thermodynamics simulator: runs scenarios and checks the first and second laws."};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_path, report_path;
  Overrides ov;
  double t_end = 0.0, dt = 0.0, sample_every = 0.0;
  std::string method;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Integrate one or more configs and check the laws");
  run->add_option("configs", configs, "Config files")->required();
  run->add_option("--out", out_path, "Trajectory CSV (a directory when several configs are given)");
  run->add_option("--report", report_path, "Report JSON (a directory when several configs are given)");
  auto* t_end_opt = run->add_option("--t-end", t_end, "Override t_end")->check(CLI::NonNegativeNumber);
  auto* dt_opt = run->add_option("--dt", dt, "Override the (initial) step")->check(CLI::PositiveNumber);
  auto* sample_opt = run->add_option("--sample-every", sample_every, "Override the sampling interval");
  auto* method_opt = run->add_option("--integrator", method, "rk4, dopri45 or implicit_midpoint")
                         ->check(CLI::IsMember({"rk4", "dopri45", "implicit_midpoint"}));
  run->add_option("--jobs,-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-scenarios", "List the built-in scenarios");

  std::string csv_in, scenario_cfg;
  auto* check = app.add_subcommand("check", "Re-run the diagnostics on a trajectory CSV");
  check->add_option("trajectory", csv_in, "Trajectory CSV")->required();
  check->add_option("--scenario", scenario_cfg, "Config the trajectory was produced from")->required();
  check->add_option("--report", report_path, "Report JSON");

  std::vector<std::string> to_validate;
  auto* validate = app.add_subcommand("validate", "Parse and validate configs without running");
  validate->add_option("configs", to_validate, "Config files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kClean;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  logger();

  if (*list) {
    for (const auto& name : scenario_names()) {
      const Scenario sc = make_default_scenario(name);
      out << fmt::format("{:<18} {:<10} {}\n", name, to_string(sc.family), sc.description);
    }
    out << fmt::format("{:<18} {:<10} {}\n", "fluid1d", "nsf1d",
                       "Periodic 1D multicomponent Navier-Stokes-Fourier fluid; presets acoustic_pulse, "
                       "viscous_relaxation, heat_conduction.");
    return kClean;
  }

  if (*validate) {
    int code = kClean;
    for (const auto& path : to_validate) {
      try {
        const RunConfig rc = load_config(path);
        out << fmt::format("{}: ok ({})\n", path, rc.scenario);
      } catch (const Error& e) {
        err << fmt::format("{}: error [{}] {}\n", path, to_string(e.kind()), e.what());
        code = std::max(code, exit_code_for(e.kind()));
      }
    }
    return code;
  }

  if (*check) {
    const RunResult r = check_trajectory_file(csv_in, scenario_cfg, report_path);
    (r.exit_code == kClean || r.exit_code == kLawViolation ? out : err) << r.summary << "\n";
    return r.exit_code;
  }

  if (*t_end_opt) ov.t_end = t_end;
  if (*dt_opt) ov.dt = dt;
  if (*sample_opt) ov.sample_every = sample_every;
  if (*method_opt) ov.integrator = method;

  const bool batch = configs.size() > 1;
  auto target = [&](const std::string& dir, const std::string& cfg, const char* ext) -> std::string {
    if (dir.empty()) return "";
    if (!batch) return dir;
    return (fs::path(dir) / (fs::path(cfg).stem().string() + ext)).string();
  };
  if (batch) {
    std::error_code ec;
    for (const auto& dir : {out_path, report_path})
      if (!dir.empty() && !fs::create_directories(dir, ec) && ec) {
        err << "error: cannot create directory '" << dir << "': " << ec.message() << "\n";
        return kIoError;
      }
  }

  std::vector<RunResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++)
      results[i] = run_config(configs[i], ov, target(out_path, configs[i], ".csv"),
                              target(report_path, configs[i], ".report.json"));
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(configs.size())));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int code = kClean;
  for (const auto& r : results) {
    (r.exit_code == kClean || r.exit_code == kLawViolation ? out : err) << r.summary << "\n";
    code = std::max(code, r.exit_code);
  }
  return code;
}

}  // namespace vartherm::cli
