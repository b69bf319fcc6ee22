#include "vartherm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vartherm/error.hpp"
#include "vartherm/thermo.hpp"

namespace vartherm {

const char* to_string(Process p) {
  switch (p) {
    case Process::friction: return "friction";
    case Process::heat_conduction: return "heat_conduction";
    case Process::matter_transfer: return "matter_transfer";
    case Process::mixing: return "mixing";
    case Process::heating: return "heating";
    case Process::reaction: return "reaction";
  }
  return "unknown";
}

namespace {

constexpr std::size_t idx(Process p) { return static_cast<std::size_t>(p); }

void require_samples(const Trajectory& traj) {
  if (traj.empty()) throw Error(ErrorKind::unsupported, "diagnostics need a nonempty trajectory");
}

int owner(const Scenario& sc, Eigen::Index k) {
  const auto& own = sc.topology.compartment_owner;
  return own.empty() ? 0 : own[static_cast<std::size_t>(k)];
}

}  // namespace

ProductionRate entropy_production_at(const Scenario& sc, const Sample& s) {
  const ThermoState& x = s.x;
  const FluxSnapshot& f = s.fluxes;
  const Eigen::VectorXd T = temperatures(sc.lagrangian, x);
  const Eigen::VectorXd mu = x.N.size() > 0 ? Eigen::VectorXd(-sc.lagrangian.d_N(x)) : Eigen::VectorXd();
  ProductionRate out;
  auto& b = out.by_process;

  for (Eigen::Index A = 0; A < f.friction.rows(); ++A)
    if (x.v.size() > 0) b[idx(Process::friction)] -= f.friction.row(A).dot(x.v) / T[A];

  for (Eigen::Index A = 0; A < f.heat.rows(); ++A)
    for (Eigen::Index B = A + 1; B < f.heat.cols(); ++B)
      b[idx(Process::heat_conduction)] += f.heat(A, B) * (T[A] - T[B]) * (1.0 / T[A] - 1.0 / T[B]);

  // Pairwise form J^{l->k} (mu^l/T^l - mu^k/T^k) avoids cancellation near equilibrium.
  for (Eigen::Index k = 0; k < f.matter.rows(); ++k)
    for (Eigen::Index l = k + 1; l < f.matter.cols(); ++l)
      b[idx(Process::matter_transfer)] += f.matter(l, k) * (mu[l] / T[owner(sc, l)] - mu[k] / T[owner(sc, k)]);

  // Boundary buckets are differences of large terms; their sizes set the roundoff scale.
  double boundary_terms = 0.0;
  for (const auto& pf : f.ports) {
    const int A = owner(sc, pf.compartment);
    b[idx(Process::mixing)] += (pf.molar_flow * (pf.chemical_potential - mu[pf.compartment]) +
                                pf.entropy_flow * (pf.temperature - T[A])) /
                               T[A];
    boundary_terms += (std::abs(pf.molar_flow) * (std::abs(pf.chemical_potential) + std::abs(mu[pf.compartment])) +
                       std::abs(pf.entropy_flow) * (pf.temperature + T[A])) /
                      T[A];
  }
  for (const auto& sf : f.sources) {
    b[idx(Process::heating)] += sf.entropy_flow * (sf.temperature - T[0]) / T[0];
    boundary_terms += std::abs(sf.entropy_flow) * (sf.temperature + T[0]) / T[0];
  }

  if (f.reactions.size() > 0) b[idx(Process::reaction)] = f.reactions.dot(f.affinities) / T[0];

  out.total = s.rate.dSigma.sum();
  for (double v : b) out.magnitude += std::abs(v);
  out.magnitude = std::max({out.magnitude, s.rate.dSigma.cwiseAbs().sum(), boundary_terms});
  return out;
}

ProductionSeries internal_entropy_production(const Scenario& sc, const Trajectory& traj) {
  require_samples(traj);
  ProductionSeries out;
  out.t.reserve(traj.samples.size());
  out.rate.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    out.t.push_back(s.x.t);
    out.rate.push_back(entropy_production_at(sc, s));
    out.scale = std::max(out.scale, out.rate.back().magnitude);
  }
  for (std::size_t i = 0; i < out.rate.size(); ++i) {
    const ProductionRate& r = out.rate[i];
    double sum = 0.0;
    for (double v : r.by_process) sum += v;
    if (out.scale > 0.0) out.completeness_error = std::max(out.completeness_error, std::abs(sum - r.total) / out.scale);
    if (i == 0) continue;
    const double h = out.t[i] - out.t[i - 1];
    const ProductionRate& prev = out.rate[i - 1];
    for (std::size_t p = 0; p < kProcessCount; ++p)
      out.integrated[p] += 0.5 * h * (prev.by_process[p] + r.by_process[p]);
    out.integrated_total += 0.5 * h * (prev.total + r.total);
  }
  return out;
}

ExternalPowers external_powers(const Scenario& sc, const ThermoState& x) {
  ExternalPowers p;
  if (sc.external_force && x.q.size() > 0) p.work = sc.external_force(x.t, x.q, x.v).dot(x.v);
  if (!sc.topology.is_open()) return p;

  const Eigen::VectorXd T = temperatures(sc.lagrangian, x);
  for (const auto& src : sc.topology.heat_sources) {
    const double Tb = src.temperature(x.t);
    const double JS = src.conductance ? *src.conductance * (Tb - T[0]) / Tb : src.entropy_flow(x.t);
    p.heat += JS * Tb;
  }
  for (const auto& port : sc.topology.ports) {
    const double Ta = port.track_interior ? T[owner(sc, port.compartment)] : port.temperature(x.t);
    const double pa = port.track_interior ? sc.interior_pressure(x) : port.pressure(x.t);
    p.matter += port.molar_flow(x.t) * molar_state_at_port(port.eos, Ta, pa).enthalpy;
  }
  return p;
}

FirstLawSeries first_law_residual(const Scenario& sc, const Trajectory& traj) {
  require_samples(traj);
  const LagrangianModel& L = sc.lagrangian;
  FirstLawSeries out;
  double term_scale = 0.0;
  for (const auto& s : traj.samples) {
    const ThermoState& x = s.x;
    const StateRate& r = s.rate;
    const ExternalPowers P = external_powers(sc, x);
    const double dE = energy_rate(L, x, r);

    double terms = std::abs(P.work) + std::abs(P.heat) + std::abs(P.matter);
    if (x.q.size() > 0) {
      terms += std::abs(L.momentum_rate(x, r.dv, r.dS, r.dN).dot(x.v)) + std::abs(L.d_q(x).dot(x.v));
    }
    if (x.S.size() > 0) terms += L.d_S(x).cwiseProduct(r.dS).cwiseAbs().sum();
    if (x.N.size() > 0) terms += L.d_N(x).cwiseProduct(r.dN).cwiseAbs().sum();
    term_scale = std::max(term_scale, terms);

    out.t.push_back(x.t);
    out.energy_rate.push_back(dE);
    out.residual.push_back(dE - P.total());
    out.powers.push_back(P);
    out.max_abs = std::max(out.max_abs, std::abs(out.residual.back()));
  }
  const double E0 = energy(L, traj.samples.front().x);
  const double duration = traj.t_end() - traj.t_begin();
  const double energy_scale = duration > 0.0 ? std::abs(E0) / duration : std::abs(E0);
  out.scale = std::max(term_scale, energy_scale);
  out.max_relative = out.scale > 0.0 ? out.max_abs / out.scale : out.max_abs;
  return out;
}

SecondLawResult second_law_check(const Scenario& sc, const Trajectory& traj, double tol) {
  const ProductionSeries prod = internal_entropy_production(sc, traj);
  SecondLawResult out;
  out.min_production = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prod.rate.size(); ++i) {
    const double I = prod.rate[i].total;
    out.min_production = std::min(out.min_production, I);
    if (out.ok && I < -tol * prod.scale) {
      out.ok = false;
      out.violation_time = prod.t[i];
      out.reason = "negative internal entropy production";
    }
  }
  if (!sc.topology.is_open()) {
    double prev = traj.samples.front().x.S.sum();
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      const double S = traj.samples[i].x.S.sum();
      if (S < prev - 1e-10 * std::abs(prev)) {
        if (out.ok || (out.violation_time && traj.samples[i].x.t < *out.violation_time)) {
          out.ok = false;
          out.violation_time = traj.samples[i].x.t;
          out.reason = "total entropy decreased in an adiabatically closed system";
        }
        break;
      }
      prev = S;
    }
  }
  return out;
}

std::vector<SubsystemPowers> detailed_energy_balance(const Scenario& sc, const Trajectory& traj, int A) {
  require_samples(traj);
  const int P = sc.topology.P;
  if (static_cast<int>(sc.subsystem_lagrangians.size()) != P)
    throw Error(ErrorKind::unsupported,
                "detailed energy balance needs the Lagrangian split into one term per subsystem");
  if (A < 0 || A >= P) throw Error(ErrorKind::dimension_mismatch, "subsystem index out of range");
  const LagrangianModel& LA = sc.subsystem_lagrangians[static_cast<std::size_t>(A)];

  std::vector<SubsystemPowers> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const Eigen::VectorXd T = temperatures(sc.lagrangian, s.x);
    SubsystemPowers pw;
    pw.t = s.x.t;
    pw.energy_rate = energy_rate(LA, s.x, s.rate);
    if (A == 0) pw.external_work = external_powers(sc, s.x).work;
    pw.heat_in = Eigen::VectorXd::Zero(P);
    for (int B = 0; B < P; ++B)
      if (B != A) pw.heat_in[B] = s.fluxes.heat(A, B) * (T[A] - T[B]);
    pw.internal_work = pw.energy_rate - pw.external_work - pw.heat_in.sum();
    out.push_back(std::move(pw));
  }
  return out;
}

DetailedBalanceCheck check_detailed_balance(const Scenario& sc, const Trajectory& traj) {
  const int P = sc.topology.P;
  std::vector<std::vector<SubsystemPowers>> per(static_cast<std::size_t>(P));
  for (int A = 0; A < P; ++A) per[static_cast<std::size_t>(A)] = detailed_energy_balance(sc, traj, A);

  double scale = 0.0;
  std::vector<double> closure(traj.samples.size()), work(traj.samples.size()), heat(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double dE = energy_rate(sc.lagrangian, traj.samples[i].x, traj.samples[i].rate);
    double sum_dE = 0.0, sum_work = 0.0, mag = std::abs(dE), antisym = 0.0;
    for (int A = 0; A < P; ++A) {
      const SubsystemPowers& pw = per[static_cast<std::size_t>(A)][i];
      sum_dE += pw.energy_rate;
      sum_work += pw.internal_work;
      mag += std::abs(pw.energy_rate) + std::abs(pw.external_work) + std::abs(pw.internal_work) +
             pw.heat_in.cwiseAbs().sum();
      for (int B = 0; B < P; ++B)
        antisym = std::max(antisym, std::abs(pw.heat_in[B] + per[static_cast<std::size_t>(B)][i].heat_in[A]));
    }
    closure[i] = std::abs(sum_dE - dE);
    work[i] = std::abs(sum_work);
    heat[i] = antisym;
    scale = std::max(scale, mag);
  }
  DetailedBalanceCheck out;
  if (!(scale > 0.0)) return out;
  for (std::size_t i = 0; i < closure.size(); ++i) {
    out.closure = std::max(out.closure, closure[i] / scale);
    out.internal_work = std::max(out.internal_work, work[i] / scale);
    out.heat_antisymmetry = std::max(out.heat_antisymmetry, heat[i] / scale);
  }
  return out;
}

EquilibriumSummary equilibrium_summary(const Scenario& sc, const Trajectory& traj, double steady_threshold) {
  require_samples(traj);
  const Sample& last = traj.samples.back();
  const ThermoState& x = last.x;
  EquilibriumSummary out;

  // Rate of each controlled component relative to its largest magnitude along the run.
  auto fold = [&](auto block, auto rate_block) {
    const Eigen::VectorXd rate = rate_block(last.rate);
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      double mag = 0.0;
      for (const auto& s : traj.samples) mag = std::max(mag, std::abs(block(s.x)[i]));
      const double r = std::abs(rate[i]);
      if (r == 0.0) continue;
      out.rate_norm = std::max(out.rate_norm, mag > 0.0 ? r / mag : std::numeric_limits<double>::infinity());
    }
  };
  fold([](const ThermoState& s) { return s.q; }, [](const StateRate& r) { return r.dq; });
  fold([](const ThermoState& s) { return s.v; }, [](const StateRate& r) { return r.dv; });
  fold([](const ThermoState& s) { return s.S; }, [](const StateRate& r) { return r.dS; });
  fold([](const ThermoState& s) { return s.N; }, [](const StateRate& r) { return r.dN; });
  out.steady = out.rate_norm < steady_threshold;

  out.temperatures = temperatures(sc.lagrangian, x);
  const Eigen::VectorXd& T = out.temperatures;
  for (Eigen::Index A = 0; A < T.size(); ++A)
    for (Eigen::Index B = A + 1; B < T.size(); ++B) {
      const double gap = std::abs(T[A] - T[B]);
      out.temperature_gap = std::max(out.temperature_gap, gap);
      out.temperature_gap_relative = std::max(out.temperature_gap_relative, gap / std::min(T[A], T[B]));
    }

  if (sc.family == Family::diffusion || sc.family == Family::heat_mass) {
    const Eigen::VectorXd mu = -sc.lagrangian.d_N(x);
    const Eigen::Index K = mu.size();
    std::optional<Eigen::MatrixXd> G;
    if (sc.family == Family::diffusion && sc.phenomenology.diffusion) G = sc.phenomenology.diffusion(x);
    for (Eigen::Index k = 0; k < K; ++k)
      for (Eigen::Index l = k + 1; l < K; ++l) {
        if (G && (*G)(k, l) == 0.0 && (*G)(l, k) == 0.0) continue;
        const double Tk = T[owner(sc, k)], Tl = T[owner(sc, l)];
        out.chemical_potential_gap = std::max(out.chemical_potential_gap, std::abs(mu[k] - mu[l]));
        out.mu_over_T_gap = std::max(out.mu_over_T_gap, std::abs(mu[k] / Tk - mu[l] / Tl));
      }
  }
  if (last.fluxes.affinities.size() > 0) out.max_affinity = last.fluxes.affinities.cwiseAbs().maxCoeff();
  if (sc.mechanical_balance) {
    const Eigen::Vector2d f = sc.mechanical_balance(x);
    out.mechanical_gap = std::abs(f[0] - f[1]);
    const double ref = std::max(std::abs(f[0]), std::abs(f[1]));
    out.mechanical_gap_relative = ref > 0.0 ? *out.mechanical_gap / ref : 0.0;
  }
  return out;
}

namespace {

// Heat and matter buckets of a cross-coupled Onsager block are only
// nonnegative together.
bool cross_coupled(const Scenario& sc, const ThermoState& x) {
  if (sc.family != Family::heat_mass || !sc.phenomenology.onsager) return false;
  for (int A = 0; A < sc.topology.P; ++A)
    for (int B = A + 1; B < sc.topology.P; ++B) {
      const Eigen::Matrix2d m = sc.phenomenology.onsager(x, A, B);
      if (m(0, 1) != 0.0 || m(1, 0) != 0.0) return true;
    }
  return false;
}

}  // namespace

DiagnosticsReport diagnose(const Scenario& sc, const Trajectory& traj, const DiagnosticsOptions& opt) {
  require_samples(traj);
  DiagnosticsReport rep;
  rep.scenario = sc.name;
  rep.family = sc.family;
  rep.open = sc.topology.is_open();
  rep.samples = traj.samples.size();
  rep.t_begin = traj.t_begin();
  rep.t_end = traj.t_end();

  const FirstLawSeries fl = first_law_residual(sc, traj);
  rep.max_first_law_residual = fl.max_relative;
  rep.max_first_law_residual_abs = fl.max_abs;
  rep.first_law_scale = fl.scale;
  bool no_work = true;
  for (const auto& p : fl.powers) no_work = no_work && p.work == 0.0;
  rep.isolated = !rep.open && no_work;
  if (fl.max_relative > opt.first_law_tol) {
    rep.first_law_ok = false;
    rep.violations.push_back("first law residual " + std::to_string(fl.max_relative) + " exceeds " +
                             std::to_string(opt.first_law_tol));
  }

  const ProductionSeries prod = internal_entropy_production(sc, traj);
  rep.production_scale = prod.scale;
  rep.decomposition_error = prod.completeness_error;
  rep.production_by_process = prod.integrated;
  rep.total_production = prod.integrated_total;
  rep.min_internal_production = std::numeric_limits<double>::infinity();
  rep.min_bucket_rate.fill(std::numeric_limits<double>::infinity());
  const bool coupled = cross_coupled(sc, traj.samples.front().x);
  const double floor = -opt.production_tol * prod.scale;
  for (std::size_t i = 0; i < prod.rate.size(); ++i) {
    const ProductionRate& r = prod.rate[i];
    rep.min_internal_production = std::min(rep.min_internal_production, r.total);
    for (std::size_t p = 0; p < kProcessCount; ++p) rep.min_bucket_rate[p] = std::min(rep.min_bucket_rate[p], r.by_process[p]);
    if (!rep.buckets_ok) continue;
    for (std::size_t p = 0; p < kProcessCount; ++p) {
      double v = r.by_process[p];
      if (coupled && kAllProcesses[p] == Process::heat_conduction) continue;
      if (coupled && kAllProcesses[p] == Process::matter_transfer)
        v += r.by_process[idx(Process::heat_conduction)];
      if (v < floor) {
        rep.buckets_ok = false;
        rep.violations.push_back(std::string("negative ") + to_string(kAllProcesses[p]) +
                                 " production at t = " + std::to_string(prod.t[i]));
        break;
      }
    }
  }

  rep.second_law = second_law_check(sc, traj, opt.production_tol);
  if (!rep.second_law.ok) {
    rep.second_law_ok = false;
    rep.violations.push_back("second law: " + rep.second_law.reason + " at t = " +
                             std::to_string(*rep.second_law.violation_time));
  }

  const LagrangianModel& L = sc.lagrangian;
  rep.energy_initial = energy(L, traj.samples.front().x);
  rep.energy_final = energy(L, traj.samples.back().x);
  for (const auto& s : traj.samples)
    rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(energy(L, s.x) - rep.energy_initial));
  if (rep.energy_initial != 0.0) rep.max_energy_drift /= std::abs(rep.energy_initial);
  rep.entropy_initial = traj.samples.front().x.S.sum();
  rep.entropy_final = traj.samples.back().x.S.sum();

  if (static_cast<int>(sc.subsystem_lagrangians.size()) == sc.topology.P && sc.topology.P > 0)
    rep.detailed_balance = check_detailed_balance(sc, traj);
  rep.equilibrium = equilibrium_summary(sc, traj, opt.steady_threshold);
  return rep;
}

}  // namespace vartherm
