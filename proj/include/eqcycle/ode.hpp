#pragma once

// Adaptive ODE integration: explicit Dormand-Prince 5(4) for nonstiff work
// and an L-stable stiffly-accurate SDIRK3 with analytic-Jacobian Newton for
// the stiff regimes (stiffness ratios here reach e^{2z}/eps).  Cubic Hermite
// dense output on every accepted step, sign-change event localization on the
// dense output, variational (monodromy) integration, adaptive quadrature.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqcycle/errors.hpp"

namespace eqcycle {

enum class Method { explicit_rk, stiff };

struct IntegratorConfig {
  Method method = Method::explicit_rk;
  double rtol = 1e-8;
  std::vector<double> atol{1e-10};  // broadcast when a single entry
  double max_step = 1e6;
  double min_step = 0.0;  // 0 -> machine floor relative to t
  std::int64_t max_steps = 5'000'000;
  double first_step = 0.0;  // 0 -> automatic
  int guard_component = -1;  // overflow guard, off when negative
  double guard_threshold = 600.0;
  bool check_jacobian = false;  // debug: compare analytic vs FD Jacobian
};

struct EventSpec {
  std::function<double(double, std::span<const double>)> g;
  int direction = 0;  // +1 rising zero, -1 falling, 0 both
  bool terminal = false;
  double root_tol = 1e-12;
  int id = 0;
};

struct EventRecord {
  double t;
  int id;
  std::vector<double> state;
};

enum class IntStatus {
  ok,
  terminal_event,
  guard_tripped,
  step_underflow,
  max_steps_exceeded,
};

struct Trajectory {
  int dim = 0;
  std::vector<double> t;
  std::vector<std::vector<double>> y;   // state at t[i]
  std::vector<std::vector<double>> dy;  // field at t[i] (Hermite data)
  std::vector<EventRecord> events;
  IntStatus status = IntStatus::ok;
  std::string message;
  std::vector<std::string> warnings;
  // Optional ledgers for stitched multi-chart runs.
  std::vector<int> chart_tag;
  std::vector<double> t_physical;

  std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }
  double t_end() const { return t.back(); }
  const std::vector<double>& back() const { return y.back(); }

  // Cubic Hermite interpolation; reproduces the stored nodes exactly.
  void eval(double tq, std::span<double> out) const;
  std::vector<double> eval(double tq) const;
};

using Rhs = std::function<void(double, std::span<const double>, std::span<double>)>;
using Jac = std::function<void(double, std::span<const double>, Eigen::MatrixXd&)>;

Trajectory integrate(const Rhs& f, const Jac& jac, std::span<const double> y0,
                     double t0, double t1, const IntegratorConfig& cfg,
                     const std::vector<EventSpec>& events = {});

// Throws IntegrationError unless the run ended at t1 or on a terminal event.
Trajectory integrate_checked(const Rhs& f, const Jac& jac,
                             std::span<const double> y0, double t0, double t1,
                             const IntegratorConfig& cfg,
                             const std::vector<EventSpec>& events = {});

// Monodromy of the n-dimensional flow linearized along the orbit from y0 over
// [0, T]: integrates the n + n^2 augmented system, returns the n x n matrix.
Eigen::MatrixXd integrate_variational(const Rhs& f, const Jac& jac,
                                      std::span<const double> y0, double T,
                                      const IntegratorConfig& cfg);

struct QuadResult {
  double value;
  double error;
};

// Adaptive Simpson quadrature to absolute tolerance tol.
QuadResult quad_adaptive(const std::function<double(double)>& f, double a,
                         double b, double tol);

// Semi-infinite version: |f(x)| <= coef * exp(-rate * x) for x >= a justifies
// truncation; the analytic tail bound is added to the error estimate.
QuadResult quad_adaptive_decay(const std::function<double(double)>& f, double a,
                               double tol, double rate, double coef);

}  // namespace eqcycle
