#include "vartherm/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vartherm/error.hpp"

namespace vartherm {

const char* to_string(Method m) {
  switch (m) {
    case Method::rk4: return "rk4";
    case Method::dopri45: return "dopri45";
    case Method::implicit_midpoint: return "implicit_midpoint";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "rk4") return Method::rk4;
  if (name == "dopri45") return Method::dopri45;
  if (name == "implicit_midpoint") return Method::implicit_midpoint;
  throw Error(ErrorKind::config, "unknown integrator '" + name + "' (expected rk4, dopri45 or implicit_midpoint)");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "integrator.dt must be positive");
  if (!(abs_tol > 0.0)) throw Error(ErrorKind::config, "integrator.abs_tol must be positive");
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::config, "integrator.rel_tol must be positive");
  if (!(newton_tol > 0.0)) throw Error(ErrorKind::config, "integrator.newton_tol must be positive");
  if (newton_max_iter < 1) throw Error(ErrorKind::config, "integrator.newton_max_iter must be at least 1");
  if (max_steps < 1) throw Error(ErrorKind::config, "integrator.max_steps must be at least 1");
}

namespace {

// Evaluates f and converts recoverable failures into step rejections.
Eigen::VectorXd eval(const OdeSystem& sys, double t, const Eigen::VectorXd& y) {
  try {
    Eigen::VectorXd f = sys.f(t, y);
    if (!f.allFinite()) throw Error(ErrorKind::step_rejected, "non-finite derivative");
    return f;
  } catch (const Error& e) {
    if (e.recoverable_by_step_reduction() && e.kind() != ErrorKind::step_rejected)
      throw Error(ErrorKind::step_rejected, std::string("stage rejected: ") + e.what());
    throw;
  }
}

Eigen::VectorXd rk4_from(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt,
                         const Eigen::VectorXd& k1) {
  const Eigen::VectorXd k2 = eval(sys, t + 0.5 * dt, y + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = eval(sys, t + 0.5 * dt, y + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = eval(sys, t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool is_controlled(const OdeSystem& sys, Eigen::Index i) {
  return sys.controlled.empty() || sys.controlled[static_cast<std::size_t>(i)];
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

}  // namespace

Eigen::VectorXd step_rk4(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt) {
  return rk4_from(sys, t, y, dt, eval(sys, t, y));
}

AdaptiveStep step_adaptive(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt,
                           const IntegratorConfig& cfg, const std::optional<Eigen::VectorXd>& f0,
                           double err_prev) {
  const double dt_min = 1e-14 * sys.t_scale;
  const Eigen::VectorXd k1 = f0 ? *f0 : eval(sys, t, y);
  AdaptiveStep out;
  double h = dt;
  while (true) {
    if (h < dt_min)
      throw Error(ErrorKind::stiffness, "step size underflow at t = " + std::to_string(t) +
                                            " (dt < 1e-14 t_scale); the problem is too stiff for dopri45");
    try {
      const Eigen::VectorXd k2 = eval(sys, t + c2 * h, y + h * (a21 * k1));
      const Eigen::VectorXd k3 = eval(sys, t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      const Eigen::VectorXd k4 = eval(sys, t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Eigen::VectorXd k5 = eval(sys, t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Eigen::VectorXd k6 =
          eval(sys, t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Eigen::VectorXd y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Eigen::VectorXd k7 = eval(sys, t + h, y1);
      const Eigen::VectorXd e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!is_controlled(sys, i)) continue;
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
        err = std::max(err, std::abs(e[i]) / sc);
      }
      if (err <= 1.0) {
        double factor = kMaxFactor;
        if (err > 0.0)
          factor = std::clamp(kSafety * std::pow(err, -kAlpha) * std::pow(std::max(err_prev, 1e-4), kBeta),
                              kMinFactor, kMaxFactor);
        if (out.rejected > 0) factor = std::min(factor, 1.0);
        out.y = std::move(y1);
        out.f_end = k7;
        out.dt = h;
        out.next_dt = h * factor;
        out.error = err;
        return out;
      }
      ++out.rejected;
      h *= std::max(kMinFactor, kSafety * std::pow(err, -kAlpha));
    } catch (const Error& ex) {
      if (ex.kind() != ErrorKind::step_rejected) throw;
      ++out.rejected;
      h *= 0.5;
    }
  }
}

Eigen::VectorXd step_implicit_midpoint(const OdeSystem& sys, double t, const Eigen::VectorXd& y, double dt,
                                       const IntegratorConfig& cfg, int* iterations) {
  const Eigen::Index n = y.size();
  const double tm = t + 0.5 * dt;
  Eigen::VectorXd y1 = y;
  auto residual = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return z - y - dt * eval(sys, tm, 0.5 * (y + z));
  };

  Eigen::VectorXd g = residual(y1);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  auto factor_jacobian = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& gz) {
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1.5e-8 * std::max(std::abs(z[j]), 1e-6);
      Eigen::VectorXd zp = z;
      zp[j] += h;
      J.col(j) = (residual(zp) - gz) / h;
    }
    lu.compute(J);
  };
  factor_jacobian(y1, g);

  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.newton_max_iter; ++it) {
    const Eigen::VectorXd delta = lu.solve(-g);
    if (!delta.allFinite()) break;
    y1 += delta;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = std::max(std::abs(y[i]), std::abs(y1[i])) + cfg.abs_tol;
      norm = std::max(norm, std::abs(delta[i]) / sc);
    }
    if (iterations) *iterations = it;
    // Converged, or stalled at round-off level.
    if (norm <= cfg.newton_tol || (norm <= 1e3 * cfg.newton_tol && norm >= 0.5 * prev)) return y1;
    g = residual(y1);
    if (norm > 0.5 * prev) factor_jacobian(y1, g);
    prev = norm;
  }
  throw Error(ErrorKind::step_rejected, "implicit midpoint: Newton iteration did not converge at t = " +
                                            std::to_string(t));
}

Eigen::VectorXd hermite(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double t1,
                        const Eigen::VectorXd& y1, const Eigen::VectorXd& f1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

IntegrationResult integrate(const OdeSystem& sys_in, double t0, const Eigen::VectorXd& y0, double t_end,
                            double sample_every, const IntegratorConfig& cfg) {
  cfg.validate();
  if (t_end < t0) throw Error(ErrorKind::config, "t_end must not precede the initial time");

  IntegrationResult res;
  OdeSystem sys = sys_in;
  sys.f = [&res, f = sys_in.f](double t, const Eigen::VectorXd& y) {
    ++res.rhs_evaluations;
    return f(t, y);
  };

  const bool every_node = !(sample_every > 0.0);
  long next_k = 1;
  auto sample_time = [&](long k) { return std::min(t0 + static_cast<double>(k) * sample_every, t_end); };

  res.times.push_back(t0);
  res.states.push_back(y0);
  if (t_end == t0) return res;

  double t = t0;
  Eigen::VectorXd y = y0;
  Eigen::VectorXd f = eval(sys, t, y);
  double dt = std::min(cfg.dt, t_end - t0);
  double err_prev = 1e-4;
  long n = 0;
  const double node_tol = 1e-9;

  while (t < t_end) {
    if (res.steps >= cfg.max_steps)
      throw Error(ErrorKind::stiffness, "maximum number of steps (" + std::to_string(cfg.max_steps) +
                                            ") reached at t = " + std::to_string(t));
    double t1;
    Eigen::VectorXd y1, f1;
    if (cfg.method == Method::dopri45) {
      // Adaptive steps stop on sample times so that samples are node values.
      const double target = every_node ? t_end : sample_time(next_k);
      const double h = std::min(dt, target - t);
      AdaptiveStep st = step_adaptive(sys, t, y, h, cfg, f, err_prev);
      res.rejected += st.rejected;
      t1 = (target - (t + st.dt) <= 1e-12 * std::max(std::abs(target), sys.t_scale)) ? target : t + st.dt;
      y1 = std::move(st.y);
      f1 = std::move(st.f_end);
      err_prev = std::max(st.error, 1e-4);
      // Keep the controller's proposal unless the last step was truncated by t_end.
      dt = (st.dt < h || h == dt) ? st.next_dt : dt;
    } else {
      ++n;
      t1 = t0 + static_cast<double>(n) * cfg.dt;
      if (t1 >= t_end || t_end - t1 <= node_tol * cfg.dt) t1 = t_end;
      const double h = t1 - t;
      y1 = cfg.method == Method::rk4 ? rk4_from(sys, t, y, h, f) : step_implicit_midpoint(sys, t, y, h, cfg);
      f1 = eval(sys, t1, y1);
    }
    ++res.steps;

    if (every_node) {
      res.times.push_back(t1);
      res.states.push_back(y1);
    } else {
      const double tol = node_tol * (t1 - t);
      while (true) {
        const double ts = sample_time(next_k);
        if (ts > t1 + tol || res.times.back() >= t_end) break;
        Eigen::VectorXd ys;
        if (std::abs(ts - t1) <= tol) ys = y1;
        else if (std::abs(ts - t) <= tol) ys = y;
        else ys = hermite(t, y, f, t1, y1, f1, ts);
        res.times.push_back(ts);
        res.states.push_back(std::move(ys));
        ++next_k;
      }
    }
    t = t1;
    y = std::move(y1);
    f = std::move(f1);
  }
  if (res.times.back() < t_end) {
    res.times.push_back(t_end);
    res.states.push_back(y);
  }
  return res;
}

}  // namespace vartherm
