// Randomized invariants over the scenario zoo. Seeds are fixed.
#include <cmath>
#include <random>

#include "support.hpp"
#include "vartherm/diagnostics.hpp"
#include "vartherm/thermo.hpp"

using namespace vartherm;
using namespace vartherm::testing;

namespace {

constexpr int kDraws = 40;

ThermoState perturb(const Scenario& sc, std::mt19937& rng) {
  std::uniform_real_distribution<double> scale(0.9, 1.1), shift(-1.0, 1.0);
  ThermoState x = sc.initial;
  for (Eigen::Index i = 0; i < x.q.size(); ++i) x.q[i] *= scale(rng);
  for (Eigen::Index i = 0; i < x.v.size(); ++i) x.v[i] = shift(rng);
  for (Eigen::Index i = 0; i < x.S.size(); ++i) x.S[i] += shift(rng);
  for (Eigen::Index i = 0; i < x.N.size(); ++i) x.N[i] *= scale(rng);
  return x;
}

// Independent central difference along one block.
Eigen::VectorXd fd(const LagrangianModel& L, ThermoState x, Eigen::VectorXd ThermoState::*block, double rel) {
  Eigen::VectorXd& b = x.*block;
  Eigen::VectorXd g(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double b0 = b[i], h = rel * std::max(std::abs(b0), 1.0);
    b[i] = b0 + h;
    const double up = L.value(x);
    b[i] = b0 - h;
    const double down = L.value(x);
    b[i] = b0;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

bool is_open(const Scenario& sc) { return sc.topology.is_open(); }

}  // namespace

TEST(Properties, AnalyticGradientsMatchFiniteDifferences) {
  std::mt19937 rng(20261016);
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    const LagrangianModel& L = sc.lagrangian;
    for (int k = 0; k < kDraws; ++k) {
      const ThermoState x = perturb(sc, rng);
      EXPECT_LT(relative_gap(L.d_q(x), fd(L, x, &ThermoState::q, 1e-6)), 1e-6) << name;
      EXPECT_LT(relative_gap(L.d_v(x), fd(L, x, &ThermoState::v, 1e-3)), 1e-8) << name;
      EXPECT_LT(relative_gap(L.d_S(x), fd(L, x, &ThermoState::S, 1e-6)), 1e-6) << name;
      EXPECT_LT(relative_gap(L.d_N(x), fd(L, x, &ThermoState::N, 1e-6)), 1e-6) << name;
    }
  }
}

TEST(Properties, MassMatrixIsSymmetricPositiveDefinite) {
  std::mt19937 rng(7);
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    if (sc.initial.q.size() == 0) continue;
    for (int k = 0; k < 10; ++k) {
      const Eigen::MatrixXd M = sc.lagrangian.mass_matrix(perturb(sc, rng));
      EXPECT_EQ(M, M.transpose()) << name;
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff(), 0.0) << name;
    }
  }
}

TEST(Properties, PhenomenologyIsPositiveSemidefinite) {
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    const PhenomenologyModel& ph = sc.phenomenology;
    const int P = static_cast<int>(sc.topology.P);
    for (int k = 0; k < kDraws; ++k) {
      const ThermoState x = perturb(sc, rng);
      if (ph.friction && x.v.size() > 0)
        for (int A = 0; A < P; ++A) EXPECT_GE(min_relative_eigenvalue(ph.friction(x, A)), -1e-12) << name;
      if (ph.conduction) {
        const Eigen::MatrixXd kap = ph.conduction(x);
        for (int A = 0; A < P; ++A)
          for (int B = 0; B < P; ++B)
            if (A != B) EXPECT_GE(kap(A, B), 0.0) << name;
      }
      if (ph.diffusion) {
        const Eigen::MatrixXd G = ph.diffusion(x);
        EXPECT_EQ(G, G.transpose()) << name;
        EXPECT_GE(G.minCoeff(), 0.0) << name;
      }
      if (ph.onsager)
        for (int A = 0; A < P; ++A)
          for (int B = A + 1; B < P; ++B) EXPECT_GE(min_relative_eigenvalue(ph.onsager(x, A, B)), -1e-12) << name;
      if (ph.reaction_flux) {
        Eigen::VectorXd aff(sc.topology.reaction_count());
        for (Eigen::Index a = 0; a < aff.size(); ++a) aff[a] = 3000.0 * gauss(rng);
        EXPECT_GE(ph.reaction_flux(x, aff).dot(aff), 0.0) << name;
      }
    }
  }
}

TEST(Properties, MassActionDissipatesForAnyAffinity) {
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  ReactionCellParams p = ReactionCellParams::defaults();
  p.mass_action = true;
  p.rate_constants = vec({5.0});
  const Scenario sc = make_reaction_cell(p);
  for (int k = 0; k < 200; ++k) {
    const ThermoState x = perturb(sc, rng);
    const Eigen::VectorXd aff = vec({5000.0 * gauss(rng)});
    const Eigen::VectorXd J = sc.phenomenology.reaction_flux(x, aff);
    EXPECT_GE(J[0] * aff[0], 0.0);
  }
}

TEST(Properties, FluxesAreAntisymmetric) {
  std::mt19937 rng(5);
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    for (int k = 0; k < kDraws; ++k) {
      const FluxSnapshot f = sc.evaluate(perturb(sc, rng)).fluxes;
      if (f.matter.size() > 0) {
        const double scale = std::max(1e-300, f.matter.cwiseAbs().maxCoeff());
        EXPECT_LE((f.matter + f.matter.transpose()).cwiseAbs().maxCoeff(), 1e-14 * scale) << name;
      }
      if (f.heat.size() > 0) {
        const double scale = std::max(1e-300, f.heat.cwiseAbs().maxCoeff());
        EXPECT_LE(f.heat.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13 * scale) << name;
      }
    }
  }
}

TEST(Properties, ProductionIsNonNegativeAtRandomStates) {
  std::mt19937 rng(13);
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    for (int k = 0; k < kDraws; ++k) {
      const ThermoState x = perturb(sc, rng);
      const Evaluation e = sc.evaluate(x);
      const ProductionRate pr = entropy_production_at(sc, Sample{x, e.rate, e.fluxes});
      EXPECT_GE(pr.total, -1e-12 * pr.magnitude) << name;
      for (double b : pr.by_process) EXPECT_GE(b, -1e-12 * pr.magnitude) << name;
    }
  }
}

TEST(Properties, EnergyRateEqualsExternalPower) {
  std::mt19937 rng(17);
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    for (int k = 0; k < kDraws; ++k) {
      const ThermoState x = perturb(sc, rng);
      const Evaluation e = sc.evaluate(x);
      const ExternalPowers pw = external_powers(sc, x);
      const double scale = std::abs(pw.work) + std::abs(pw.heat) + std::abs(pw.matter) +
                           std::abs(x.v.dot(sc.lagrangian.d_q(x))) + std::abs(e.rate.dS.dot(sc.lagrangian.d_S(x)));
      EXPECT_NEAR(energy_rate(sc.lagrangian, x, e.rate), pw.total(), 1e-12 * std::max(scale, 1.0)) << name;
    }
  }
}

TEST(Properties, ClosedSystemsNeverLoseEntropy) {
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    if (is_open(sc)) continue;
    const Trajectory tr = simulate(sc);
    double prev = tr.samples.front().x.S.sum();
    for (const auto& s : tr.samples) {
      const double S = s.x.S.sum();
      EXPECT_GE(S, prev - 1e-12 * std::abs(prev)) << name << " t=" << s.x.t;
      prev = S;
    }
  }
}

TEST(Properties, InternalProductionAccumulatesMonotonically) {
  for (const auto& name : scenario_names()) {
    const Scenario sc = make_default_scenario(name);
    const Trajectory tr = simulate(sc);
    double prev = tr.samples.front().x.Sigma.sum();
    for (const auto& s : tr.samples) {
      const double Sg = s.x.Sigma.sum();
      EXPECT_GE(Sg, prev - 1e-12 * std::max(1.0, std::abs(prev))) << name;
      prev = Sg;
    }
  }
}
