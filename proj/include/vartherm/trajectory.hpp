#pragma once

#include <string>
#include <vector>

#include "vartherm/evolution.hpp"
#include "vartherm/integrators.hpp"
#include "vartherm/models.hpp"

namespace vartherm {

struct Sample {
  ThermoState x;
  StateRate rate;
  FluxSnapshot fluxes;
};

struct Trajectory {
  std::string scenario;
  std::vector<Sample> samples;
  long steps = 0;
  long rejected = 0;
  long rhs_evaluations = 0;

  bool empty() const { return samples.empty(); }
  double t_begin() const { return samples.front().x.t; }
  double t_end() const { return samples.back().x.t; }
};

/// Re-evaluates the RHS at each state to attach rates and fluxes.
Trajectory make_trajectory(const Scenario& sc, const std::vector<ThermoState>& states);

/// Integrates the scenario with its own integrator settings unless `cfg` is given.
Trajectory simulate(const Scenario& sc, const IntegratorConfig* cfg = nullptr);

}  // namespace vartherm
