#include "vartherm/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vartherm/error.hpp"

namespace vartherm {

Profile::Profile(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw Error(ErrorKind::validation, "profile: times and values must be non-empty and equally long");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error(ErrorKind::validation, "profile: times must be strictly increasing");
}

double Profile::operator()(double t) const {
  if (values_.size() == 1 || t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return (1.0 - w) * values_[i - 1] + w * values_[i];
}

bool Profile::is_identically_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

void SystemTopology::validate() const {
  if (n_mech < 0 || P < 0 || K < 0)
    throw Error(ErrorKind::validation, "topology: negative dimension");
  if (static_cast<int>(compartment_owner.size()) != K)
    throw Error(ErrorKind::validation, "topology: compartment_owner must have K entries");
  for (int owner : compartment_owner)
    if (owner < 0 || owner >= P)
      throw Error(ErrorKind::validation, "topology: compartment owner out of range");
  for (const auto& port : ports)
    if (port.compartment < 0 || port.compartment >= K)
      throw Error(ErrorKind::validation, "topology: port compartment out of range");
  if (reactions) {
    const auto& net = *reactions;
    if (net.nu_bwd.rows() != net.nu_fwd.rows() || net.nu_bwd.cols() != net.nu_fwd.cols() ||
        net.molecular_mass.size() != net.nu_fwd.cols())
      throw Error(ErrorKind::validation, "topology: inconsistent reaction network dimensions");
  }
}

ThermoState ThermoState::zeros(const SystemTopology& topo) {
  ThermoState x;
  x.q = Eigen::VectorXd::Zero(topo.n_mech);
  x.v = Eigen::VectorXd::Zero(topo.n_mech);
  x.S = Eigen::VectorXd::Zero(topo.P);
  x.N = Eigen::VectorXd::Zero(topo.K);
  x.Gamma = Eigen::VectorXd::Zero(topo.P);
  x.W = Eigen::VectorXd::Zero(topo.K);
  x.Sigma = Eigen::VectorXd::Zero(topo.P);
  x.Nu = Eigen::VectorXd::Zero(topo.reaction_count());
  return x;
}

void check_dimensions(const SystemTopology& topo, const ThermoState& x) {
  auto expect = [](Eigen::Index got, int want, const char* name) {
    if (got != want)
      throw Error(ErrorKind::dimension_mismatch, std::string("state.") + name + " has length " +
                                                     std::to_string(got) + ", topology expects " +
                                                     std::to_string(want));
  };
  expect(x.q.size(), topo.n_mech, "q");
  expect(x.v.size(), topo.n_mech, "v");
  expect(x.S.size(), topo.P, "S");
  expect(x.N.size(), topo.K, "N");
  expect(x.Gamma.size(), topo.P, "Gamma");
  expect(x.W.size(), topo.K, "W");
  expect(x.Sigma.size(), topo.P, "Sigma");
  expect(x.Nu.size(), topo.reaction_count(), "Nu");
}

void check_mole_floor(const ThermoState& x) {
  if (x.N.size() == 0) return;
  const double floor = -1e-9 * std::max(x.N.maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < x.N.size(); ++k)
    if (x.N[k] < floor || !std::isfinite(x.N[k]))
      throw Error(ErrorKind::negative_moles,
                  "mole number N[" + std::to_string(k) + "] = " + std::to_string(x.N[k]) + " below floor");
}

StateLayout::StateLayout(const SystemTopology& topo)
    : n_(topo.n_mech), P_(topo.P), K_(topo.K), r_(topo.reaction_count()),
      size_(2 * n_ + 3 * P_ + 2 * K_ + r_) {}

Eigen::VectorXd StateLayout::pack(const ThermoState& x) const {
  Eigen::VectorXd y(size_);
  y << x.q, x.v, x.S, x.N, x.Gamma, x.W, x.Sigma, x.Nu;
  return y;
}

ThermoState StateLayout::unpack(double t, const Eigen::VectorXd& y) const {
  if (y.size() != size_) throw Error(ErrorKind::dimension_mismatch, "state vector has wrong length");
  ThermoState x;
  x.t = t;
  Eigen::Index o = 0;
  auto take = [&](Eigen::Index n) {
    Eigen::VectorXd part = y.segment(o, n);
    o += n;
    return part;
  };
  x.q = take(n_);
  x.v = take(n_);
  x.S = take(P_);
  x.N = take(K_);
  x.Gamma = take(P_);
  x.W = take(K_);
  x.Sigma = take(P_);
  x.Nu = take(r_);
  return x;
}

std::vector<bool> StateLayout::controlled_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(size_), false);
  const Eigen::Index physical = 2 * n_ + P_ + K_;
  std::fill(mask.begin(), mask.begin() + physical, true);
  return mask;
}

}  // namespace vartherm
