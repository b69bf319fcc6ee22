#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "vartherm/error.hpp"

namespace vartherm::cli {

using nlohmann::json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string suggest(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::config, (path.empty() ? std::string("config") : path) + ": " + why);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads the members of one JSON object. Every lookup registers the key as
// known, so finish() can reject the rest.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return join(path_, key); }
  const std::vector<std::string>& known() const { return known_; }

  const json* find(const std::string& key) {
    if (std::find(known_.begin(), known_.end(), key) == known_.end()) known_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void integer(const std::string& key, long& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<long>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (std::find(known_.begin(), known_.end(), item.key()) != known_.end()) continue;
      std::string msg = "unknown key '" + item.key() + "'";
      const std::string s = suggest(item.key(), known_);
      if (!s.empty()) msg += " (did you mean '" + s + "'?)";
      fail(at(item.key()), msg);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> known_;
};

const json kEmpty = json::object();

const json& object_or_empty(const json* v) { return v ? *v : kEmpty; }

Eigen::VectorXd read_vector(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols) fail(rp, "expected a row of " + std::to_string(cols) + " numbers");
    out.row(static_cast<Eigen::Index>(i)) = read_vector(v[i], rp).transpose();
  }
  return out;
}

void read_gas(Fields& f, const std::string& key, IdealGasEOS& gas) {
  const json* v = f.find(key);
  if (!v) return;
  Fields g(*v, f.at(key));
  g.number("c_v", gas.c_v);
  g.number("R", gas.R);
  g.number("T_ref", gas.T_ref);
  g.number("v_ref", gas.v_ref);
  g.number("s_ref", gas.s_ref);
  g.finish();
}

// A number, or {"times": [...], "values": [...]} for a piecewise-linear table.
void read_profile(Fields& f, const std::string& key, Profile& out) {
  const json* v = f.find(key);
  if (!v) return;
  if (v->is_number()) {
    out = Profile(v->get<double>());
    return;
  }
  Fields tab(*v, f.at(key));
  const json* t = tab.find("times");
  const json* y = tab.find("values");
  tab.finish();
  if (!t || !y) fail(f.at(key), "a table needs both 'times' and 'values'");
  const Eigen::VectorXd tv = read_vector(*t, tab.at("times"));
  const Eigen::VectorXd yv = read_vector(*y, tab.at("values"));
  try {
    out = Profile(std::vector<double>(tv.begin(), tv.end()), std::vector<double>(yv.begin(), yv.end()));
  } catch (const Error& e) {
    fail(f.at(key), e.what());
  }
}

void read_piston(Fields& p, Fields& ph, PistonParams& pp) {
  p.number("mass", pp.mass);
  p.number("area", pp.area);
  p.number("moles", pp.moles);
  p.number("external_force", pp.external_force);
  p.number("q0", pp.q0);
  p.number("v0", pp.v0);
  p.number("T0", pp.T0);
  read_gas(p, "gas", pp.gas);
  ph.number("friction", pp.friction);
}

Scenario build_piston(Fields& p, Fields& ph) {
  PistonParams pp;
  read_piston(p, ph, pp);
  p.finish();
  ph.finish();
  return make_piston(pp);
}

Scenario build_adiabatic_piston(Fields& p, Fields& ph) {
  AdiabaticPistonParams ap;
  p.number("m1", ap.m1);
  p.number("m2", ap.m2);
  p.number("m3", ap.m3);
  p.number("area1", ap.area1);
  p.number("area2", ap.area2);
  p.number("D", ap.D);
  p.number("ell", ap.ell);
  p.number("N1", ap.N1);
  p.number("N2", ap.N2);
  p.number("q0", ap.q0);
  p.number("v0", ap.v0);
  p.number("T1", ap.T1);
  p.number("T2", ap.T2);
  read_gas(p, "gas1", ap.gas1);
  read_gas(p, "gas2", ap.gas2);
  ph.number("friction1", ap.friction1);
  ph.number("friction2", ap.friction2);
  ph.number("kappa", ap.kappa);
  p.finish();
  ph.finish();
  return make_adiabatic_piston(ap);
}

Scenario build_membrane(Fields& p, Fields& ph) {
  MembraneParams mp;
  p.number("V1", mp.V1);
  p.number("Vm", mp.Vm);
  p.number("V2", mp.V2);
  p.number("N1", mp.N1);
  p.number("Nm", mp.Nm);
  p.number("N2", mp.N2);
  p.number("T0", mp.T0);
  read_gas(p, "gas1", mp.gas1);
  read_gas(p, "gas_m", mp.gas_m);
  read_gas(p, "gas2", mp.gas2);
  ph.number("G1m", mp.G1m);
  ph.number("Gm2", mp.Gm2);
  p.finish();
  ph.finish();
  return make_membrane(mp);
}

Scenario build_two_compartment(Fields& p, Fields& ph) {
  TwoCompartmentParams tp;
  p.number("V1", tp.V1);
  p.number("V2", tp.V2);
  p.number("N1", tp.N1);
  p.number("N2", tp.N2);
  p.number("T1", tp.T1);
  p.number("T2", tp.T2);
  read_gas(p, "gas1", tp.gas1);
  read_gas(p, "gas2", tp.gas2);
  if (const json* v = ph.find("onsager")) {
    const Eigen::MatrixXd m = read_matrix(*v, ph.at("onsager"));
    if (m.rows() != 2 || m.cols() != 2) fail(ph.at("onsager"), "expected a 2x2 matrix");
    tp.onsager = m;
  }
  p.finish();
  ph.finish();
  return make_two_compartment(tp);
}

Scenario build_open_piston(Fields& p, Fields& ph) {
  OpenPistonParams op = OpenPistonParams::defaults();
  read_piston(p, ph, op.piston);
  if (const json* ports = p.find("ports")) {
    if (!ports->is_array()) fail(p.at("ports"), "expected an array");
    op.ports.clear();
    for (std::size_t i = 0; i < ports->size(); ++i) {
      Fields f((*ports)[i], p.at("ports") + "[" + std::to_string(i) + "]");
      PortSpec port;
      read_profile(f, "temperature", port.temperature);
      read_profile(f, "pressure", port.pressure);
      read_profile(f, "molar_flow", port.molar_flow);
      f.boolean("track_interior", port.track_interior);
      f.finish();
      op.ports.push_back(port);
    }
  }
  if (const json* sources = p.find("sources")) {
    if (!sources->is_array()) fail(p.at("sources"), "expected an array");
    op.sources.clear();
    for (std::size_t i = 0; i < sources->size(); ++i) {
      Fields f((*sources)[i], p.at("sources") + "[" + std::to_string(i) + "]");
      HeatSourceSpec src;
      read_profile(f, "temperature", src.temperature);
      read_profile(f, "entropy_flow", src.entropy_flow);
      if (f.find("conductance")) {
        double g = 0.0;
        f.number("conductance", g);
        src.conductance = g;
      }
      f.finish();
      op.sources.push_back(src);
    }
  }
  p.finish();
  ph.finish();
  return make_open_piston(op);
}

Scenario build_reaction_cell(Fields& p, Fields& ph) {
  ReactionCellParams rp = ReactionCellParams::defaults();
  p.number("volume", rp.volume);
  p.number("T0", rp.T0);

  if (const json* species = p.find("species")) {
    if (!species->is_array() || species->empty()) fail(p.at("species"), "expected a non-empty array");
    const auto R = static_cast<Eigen::Index>(species->size());
    rp.species.clear();
    rp.network.species.clear();
    rp.network.molecular_mass.resize(R);
    rp.N0.resize(R);
    for (Eigen::Index I = 0; I < R; ++I) {
      Fields f((*species)[static_cast<std::size_t>(I)], p.at("species") + "[" + std::to_string(I) + "]");
      std::string name = "X" + std::to_string(I);
      double mass = 0.028, u0 = 0.0, n0 = 1.0;
      IdealGasEOS gas;
      f.string("name", name);
      f.number("molar_mass", mass);
      f.number("formation_energy", u0);
      f.number("N0", n0);
      read_gas(f, "gas", gas);
      f.finish();
      rp.network.species.push_back(name);
      rp.network.molecular_mass[I] = mass;
      rp.N0[I] = n0;
      rp.species.push_back({gas, u0});
    }
    // Species changed, so the default reaction no longer applies unless restated.
    rp.network.nu_fwd.resize(0, R);
    rp.network.nu_bwd.resize(0, R);
  }

  if (const json* reactions = p.find("reactions")) {
    if (!reactions->is_array()) fail(p.at("reactions"), "expected an array");
    const auto R = static_cast<Eigen::Index>(rp.network.species.size());
    const auto r = static_cast<Eigen::Index>(reactions->size());
    rp.network.nu_fwd = Eigen::MatrixXd::Zero(r, R);
    rp.network.nu_bwd = Eigen::MatrixXd::Zero(r, R);
    for (Eigen::Index a = 0; a < r; ++a) {
      const std::string rpath = p.at("reactions") + "[" + std::to_string(a) + "]";
      Fields f((*reactions)[static_cast<std::size_t>(a)], rpath);
      for (const char* side : {"reactants", "products"}) {
        const json* v = f.find(side);
        if (!v) fail(rpath, std::string("missing '") + side + "'");
        Fields coeffs(*v, f.at(side));
        for (const auto& item : v->items()) {
          const auto it = std::find(rp.network.species.begin(), rp.network.species.end(), item.key());
          if (it == rp.network.species.end()) {
            std::string msg = "unknown species '" + item.key() + "'";
            const std::string s = suggest(item.key(), rp.network.species);
            if (!s.empty()) msg += " (did you mean '" + s + "'?)";
            fail(coeffs.at(item.key()), msg);
          }
          double c = 0.0;
          coeffs.number(item.key(), c);
          if (!(c >= 0.0)) fail(coeffs.at(item.key()), "stoichiometric coefficients must be non-negative");
          const auto I = it - rp.network.species.begin();
          (std::string(side) == "reactants" ? rp.network.nu_fwd : rp.network.nu_bwd)(a, I) = c;
        }
      }
      f.finish();
    }
  }
  if (rp.network.reactions() == 0) fail(p.at("reactions"), "at least one reaction is required");

  std::string law = "linear";
  ph.string("law", law);
  if (law == "linear") {
    const auto r = rp.network.reactions();
    if (const json* v = ph.find("ell")) {
      rp.ell = read_matrix(*v, ph.at("ell"));
    } else if (rp.ell.rows() != r) {
      rp.ell = Eigen::MatrixXd::Identity(r, r) * 1e-4;
    }
  } else if (law == "mass_action") {
    rp.mass_action = true;
    const json* k = ph.find("rate_constants");
    if (!k) fail(ph.at("rate_constants"), "required for the mass-action law");
    rp.rate_constants = read_vector(*k, ph.at("rate_constants"));
  } else {
    fail(ph.at("law"), "expected 'linear' or 'mass_action'");
  }
  p.finish();
  ph.finish();
  return make_reaction_cell(rp);
}

nsf1d::FluidProblem build_fluid(Fields& p, Fields& tr) {
  std::string preset = "acoustic_pulse";
  int cells = 256;
  double amplitude = 1e-4;
  p.string("preset", preset);
  p.integer("cells", cells);
  p.number("amplitude", amplitude);
  bool hold_velocity = false;
  const bool hold_given = p.find("hold_velocity") != nullptr;
  p.boolean("hold_velocity", hold_velocity);
  p.finish();
  if (cells < 3) fail(p.at("cells"), "at least 3 cells are required");

  nsf1d::FluidProblem pb;
  if (preset == "acoustic_pulse") {
    if (!(amplitude > -1.0)) fail(p.at("amplitude"), "must exceed -1");
    pb = nsf1d::make_acoustic_pulse(cells, amplitude);
  } else if (preset == "viscous_relaxation") {
    pb = nsf1d::make_viscous_relaxation(cells);
  } else if (preset == "heat_conduction") {
    pb = nsf1d::make_heat_conduction(cells);
  } else {
    std::string msg = "unknown preset '" + preset + "'";
    const std::string s = suggest(preset, {"acoustic_pulse", "viscous_relaxation", "heat_conduction"});
    if (!s.empty()) msg += " (did you mean '" + s + "'?)";
    fail(p.at("preset"), msg);
  }
  if (hold_given) pb.options.hold_velocity = hold_velocity;

  tr.number("mu_shear", pb.transport.mu_shear);
  tr.number("zeta", pb.transport.zeta);
  if (const json* v = tr.find("L")) pb.transport.L = read_matrix(*v, tr.at("L"));
  tr.finish();
  return pb;
}

void read_integrator(Fields& f, IntegratorConfig& cfg) {
  std::string method = to_string(cfg.method);
  f.string("method", method);
  try {
    cfg.method = method_from_string(method);
  } catch (const Error& e) {
    fail(f.at("method"), e.what());
  }
  f.number("dt", cfg.dt);
  f.number("rel_tol", cfg.rel_tol);
  f.number("abs_tol", cfg.abs_tol);
  f.number("newton_tol", cfg.newton_tol);
  f.integer("newton_max_iter", cfg.newton_max_iter);
  f.integer("max_steps", cfg.max_steps);
  f.finish();
}

// Model constructors name their parameters without the block prefix.
[[noreturn]] void rethrow_validation(const Error& e, const std::vector<std::string>& param_keys) {
  std::string msg = e.what();
  const auto colon = msg.find(':');
  if (colon != std::string::npos) {
    const std::string head = msg.substr(0, colon);
    if (std::find(param_keys.begin(), param_keys.end(), head) != param_keys.end()) msg = "parameters." + msg;
  }
  throw Error(ErrorKind::config, msg);
}

bool is_model_error(ErrorKind k) {
  return k == ErrorKind::validation || k == ErrorKind::config || k == ErrorKind::domain ||
         k == ErrorKind::dimension_mismatch || k == ErrorKind::inadmissible_state ||
         k == ErrorKind::negative_moles || k == ErrorKind::geometry;
}

}  // namespace

std::vector<std::string> config_scenario_names() {
  std::vector<std::string> names = scenario_names();
  names.push_back("fluid1d");
  return names;
}

RunConfig parse_config(const json& j, const Overrides& ov, const std::string& origin) {
  Fields top(j, "");
  RunConfig rc;
  rc.source = origin;
  top.string("scenario", rc.scenario);
  if (rc.scenario.empty()) fail("scenario", "required");
  const auto names = config_scenario_names();
  if (std::find(names.begin(), names.end(), rc.scenario) == names.end()) {
    std::string msg = "unknown scenario '" + rc.scenario + "'";
    const std::string s = suggest(rc.scenario, names);
    if (!s.empty()) msg += " (did you mean '" + s + "'?)";
    fail("scenario", msg);
  }
  std::string description;
  top.string("description", description);

  const bool fluid = rc.scenario == "fluid1d";
  const json* params_json = top.find("parameters");
  const json* phen_json = fluid ? nullptr : top.find("phenomenology");
  const json* transport_json = fluid ? top.find("transport") : nullptr;
  Fields params(object_or_empty(params_json), "parameters");

  double t_end = -1.0, sample_every = -1.0;
  top.number("t_end", t_end);
  top.number("sample_every", sample_every);
  bool check_phen = true;
  if (!fluid) top.boolean("validate_phenomenology", check_phen);

  const json* integ_json = top.find("integrator");
  if (const json* out = top.find("output")) {
    Fields f(*out, "output");
    f.string("csv", rc.output.csv);
    f.string("report", rc.output.report);
    f.finish();
  }
  if (const json* d = top.find("diagnostics")) {
    Fields f(*d, "diagnostics");
    f.number("first_law_tol", rc.diagnostics.first_law_tol);
    f.number("production_tol", rc.diagnostics.production_tol);
    f.number("steady_threshold", rc.diagnostics.steady_threshold);
    f.finish();
  }
  top.finish();

  IntegratorConfig* integ = nullptr;
  double* t_end_slot = nullptr;
  double* sample_slot = nullptr;
  try {
    if (fluid) {
      Fields tr(object_or_empty(transport_json), "transport");
      rc.fluid = build_fluid(params, tr);
      integ = &rc.fluid->integrator;
      t_end_slot = &rc.fluid->t_end;
      sample_slot = &rc.fluid->sample_every;
    } else {
      Fields ph(object_or_empty(phen_json), "phenomenology");
      const std::string& s = rc.scenario;
      if (s == "piston") rc.lumped = build_piston(params, ph);
      else if (s == "adiabatic_piston") rc.lumped = build_adiabatic_piston(params, ph);
      else if (s == "membrane") rc.lumped = build_membrane(params, ph);
      else if (s == "two_compartment") rc.lumped = build_two_compartment(params, ph);
      else if (s == "open_piston") rc.lumped = build_open_piston(params, ph);
      else rc.lumped = build_reaction_cell(params, ph);
      rc.lumped->check_phenomenology = check_phen;
      integ = &rc.lumped->integrator;
      t_end_slot = &rc.lumped->t_end;
      sample_slot = &rc.lumped->sample_every;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config || !is_model_error(e.kind())) throw;
    rethrow_validation(e, params.known());
  }

  if (integ_json) {
    Fields f(*integ_json, "integrator");
    read_integrator(f, *integ);
  }
  if (j.contains("t_end")) *t_end_slot = t_end;
  if (j.contains("sample_every")) {
    if (sample_every < 0.0) fail("sample_every", "must be non-negative");
    *sample_slot = sample_every;
  }

  if (ov.t_end) *t_end_slot = *ov.t_end;
  if (ov.dt) integ->dt = *ov.dt;
  if (ov.sample_every) *sample_slot = *ov.sample_every;
  if (ov.integrator) {
    try {
      integ->method = method_from_string(*ov.integrator);
    } catch (const Error& e) {
      fail("--integrator", e.what());
    }
  }
  if (!(*t_end_slot >= 0.0)) fail("t_end", "must be non-negative");

  try {
    if (fluid) {
      rc.fluid->validate();
    } else {
      rc.lumped->validate();
    }
  } catch (const Error& e) {
    if (!is_model_error(e.kind())) throw;
    rethrow_validation(e, params.known());
  }
  return rc;
}

RunConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, path + ": JSON parse error: " + e.what());
  }
  return parse_config(j, ov, path);
}

Scenario load_scenario(const std::string& path) {
  RunConfig rc = load_config(path);
  if (!rc.lumped) throw Error(ErrorKind::config, path + ": '" + rc.scenario + "' is not a lumped scenario");
  return *rc.lumped;
}

}  // namespace vartherm::cli
