#include "vartherm/phenomenology.hpp"

#include <cmath>
#include <string>

#include "vartherm/error.hpp"

namespace vartherm {

std::function<Eigen::MatrixXd(const ThermoState&, int)> constant_friction(std::vector<Eigen::MatrixXd> per_subsystem) {
  return [m = std::move(per_subsystem)](const ThermoState&, int A) {
    if (A < 0 || static_cast<std::size_t>(A) >= m.size())
      throw Error(ErrorKind::dimension_mismatch, "friction: subsystem index out of range");
    return m[static_cast<std::size_t>(A)];
  };
}

std::function<Eigen::MatrixXd(const ThermoState&)> constant_matrix(Eigen::MatrixXd m) {
  return [m = std::move(m)](const ThermoState&) { return m; };
}

std::function<Eigen::Matrix2d(const ThermoState&, int, int)> constant_onsager(Eigen::Matrix2d block) {
  return [block](const ThermoState&, int, int) { return block; };
}

std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd&)> linear_reaction_law(Eigen::MatrixXd ell) {
  return [ell = std::move(ell)](const ThermoState&, const Eigen::VectorXd& affinity) {
    return Eigen::VectorXd(ell * affinity);
  };
}

std::function<Eigen::VectorXd(const ThermoState&, const Eigen::VectorXd&)> mass_action_law(
    Eigen::VectorXd rate_constants, Eigen::MatrixXd nu_fwd, double volume,
    std::function<double(const ThermoState&)> temperature) {
  return [k = std::move(rate_constants), nu = std::move(nu_fwd), volume,
          temperature = std::move(temperature)](const ThermoState& x, const Eigen::VectorXd& affinity) {
    const double RT = kGasConstant * temperature(x);
    Eigen::VectorXd J(affinity.size());
    for (Eigen::Index a = 0; a < affinity.size(); ++a) {
      double forward = k[a];
      for (Eigen::Index I = 0; I < nu.cols(); ++I)
        if (nu(a, I) != 0.0) forward *= std::pow(std::max(x.N[I], 0.0) / volume, nu(a, I));
      J[a] = -forward * std::expm1(-affinity[a] / RT);
    }
    return J;
  };
}

double min_relative_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return es.eigenvalues().minCoeff() / scale;
}

namespace {

constexpr double kPsdTolerance = -1e-12;

void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::validation, "phenomenology." + field + ": " + why);
}

bool nearly_symmetric(const Eigen::MatrixXd& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300);
}

}  // namespace

void validate_phenomenology(const PhenomenologyModel& phen, const SystemTopology& topo, const ThermoState& x) {
  if (phen.friction) {
    for (int A = 0; A < std::max(topo.P, 1); ++A) {
      const Eigen::MatrixXd lambda = phen.friction(x, A);
      if (lambda.rows() != topo.n_mech || lambda.cols() != topo.n_mech)
        fail("friction", "expected " + std::to_string(topo.n_mech) + "x" + std::to_string(topo.n_mech));
      if (min_relative_eigenvalue(lambda) < kPsdTolerance)
        fail("friction", "symmetric part is not positive semi-definite (subsystem " + std::to_string(A) + ")");
    }
  }
  if (phen.conduction) {
    const Eigen::MatrixXd kappa = phen.conduction(x);
    if (kappa.rows() != topo.P || kappa.cols() != topo.P)
      fail("kappa", "expected a " + std::to_string(topo.P) + "x" + std::to_string(topo.P) + " matrix");
    if (!nearly_symmetric(kappa)) fail("kappa", "must be symmetric");
    for (int A = 0; A < topo.P; ++A)
      for (int B = 0; B < topo.P; ++B)
        if (A != B && kappa(A, B) < 0.0) fail("kappa", "heat conduction coefficients must be non-negative");
  }
  if (phen.diffusion) {
    const Eigen::MatrixXd G = phen.diffusion(x);
    if (G.rows() != topo.K || G.cols() != topo.K)
      fail("G", "expected a " + std::to_string(topo.K) + "x" + std::to_string(topo.K) + " matrix");
    if (!nearly_symmetric(G)) fail("G", "must be symmetric");
    if (G.minCoeff() < 0.0) fail("G", "diffusion coefficients must be non-negative");
  }
  if (phen.onsager) {
    for (int A = 0; A < topo.P; ++A)
      for (int B = A + 1; B < topo.P; ++B) {
        const Eigen::Matrix2d L = phen.onsager(x, A, B);
        if (!nearly_symmetric(L)) fail("onsager", "block must be symmetric (reciprocal relations)");
        if (min_relative_eigenvalue(L) < kPsdTolerance) fail("onsager", "block must be positive semi-definite");
      }
  }
  if (phen.reaction_flux && topo.reactions) {
    const auto r = topo.reactions->reactions();
    // J . A >= 0 on signed unit affinities and their pairwise sums.
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = a; b < r; ++b)
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd affinity = Eigen::VectorXd::Zero(r);
          affinity[a] += sign * 1e3;
          affinity[b] += 1e3;
          const Eigen::VectorXd J = phen.reaction_flux(x, affinity);
          const double scale = J.cwiseAbs().sum() * affinity.cwiseAbs().maxCoeff();
          if (J.dot(affinity) < kPsdTolerance * std::max(scale, 1e-300))
            fail("reaction_flux", "law produces negative entropy production J.A < 0");
        }
  }
}

}  // namespace vartherm
