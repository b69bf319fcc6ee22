#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vartherm {

enum class Method { rk4, dopri45, implicit_midpoint };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct IntegratorConfig {
  Method method = Method::dopri45;
  double dt = 1e-3;  // fixed step, or initial step for dopri45
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double newton_tol = 1e-13;
  int newton_max_iter = 25;
  long max_steps = 10'000'000;

  void validate() const;
};

/// First-order system y' = f(t, y). `controlled` marks the components that
/// enter adaptive error control (empty = all). `t_scale` sets the stiffness
/// floor dt_min = 1e-14 t_scale.
struct OdeSystem {
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> f;
  std::vector<bool> controlled;
  double t_scale = 1.0;
};

/// Classical RK4. Recoverable RHS failures at any stage are rethrown as
/// step_rejected.
Eigen::VectorXd step_rk4(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt);

struct AdaptiveStep {
  Eigen::VectorXd y;      // accepted state at t + dt
  Eigen::VectorXd f_end;  // f(t + dt, y), reused as the next first stage
  double dt = 0.0;        // step actually taken
  double next_dt = 0.0;
  double error = 0.0;     // scaled error norm of the accepted step (<= 1)
  int rejected = 0;
};

/// Dormand-Prince 5(4) with PI step control and max-norm error over the
/// controlled components. Retries internally on rejection; throws stiffness
/// once dt drops below 1e-14 t_scale. `f0` is f(t, y) when known (FSAL);
/// `err_prev` carries the PI controller memory.
AdaptiveStep step_adaptive(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt,
                           const IntegratorConfig& cfg, const std::optional<Eigen::VectorXd>& f0 = std::nullopt,
                           double err_prev = 1e-4);

/// y1 = y0 + dt f(t + dt/2, (y0 + y1)/2), solved by Newton with a
/// finite-difference Jacobian. Non-convergence throws step_rejected.
Eigen::VectorXd step_implicit_midpoint(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt,
                                       const IntegratorConfig& cfg, int* iterations = nullptr);

/// Cubic Hermite interpolation on [t0, t1] from end values and slopes.
Eigen::VectorXd hermite(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double t1,
                        const Eigen::VectorXd& y1, const Eigen::VectorXd& f1, double t);

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  long steps = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Integrates from t0 to t_end and samples at t0 + k*sample_every (plus t_end).
/// Adaptive steps are truncated to land on sample times. For fixed-step
/// methods, sample times that coincide with step nodes take the node values
/// exactly and the others use cubic Hermite dense output.
/// sample_every <= 0 records every node.
IntegrationResult integrate(const OdeSystem& sys, double t0, const Eigen::VectorXd& y0, double t_end,
                            double sample_every, const IntegratorConfig& cfg);

}  // namespace vartherm
