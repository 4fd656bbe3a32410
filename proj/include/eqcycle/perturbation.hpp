#pragma once

// First-order slow-manifold reduction for 0 < eps << 1, the Hopf quantities
// alpha_H and the first Lyapunov coefficient, and the Melnikov distance
// machinery Delta_alpha(h), Delta_eps(h), alpha_M(h).

#include <vector>

#include "eqcycle/model.hpp"

namespace eqcycle {

// Fenichel validity margin: the compact slow manifold covers
// 0 <= H <= 1 - margin, so Melnikov h-grids are restricted to
// (0, 1 - margin].  Overridable per call.
inline constexpr double kMelnikovMargin = 0.05;

// S_eps at first order; at eps=0 this is critical_manifold_z.
double slow_manifold_z(double x, double y, const Params& p);

// Flow on S_eps truncated at O(eps); at eps=0 identical to reduced_rhs.
StateR f_eps_rhs(const StateR& s, const Params& p);

// Exact eps-derivative of f_eps at (alpha, eps) = (xi, 0).
StateR f_eps_deps(const StateR& s, double xi);

double hopf_alpha(double xi, double eps);            // xi - eps xi^2
double lyapunov_coefficient(double xi, double eps);  // -(1/8) eps xi^3 (1+xi)

struct HopfData {
  double alpha_H;          // leading-order formula
  double alpha_H_numeric;  // located on the full 3D Jacobian
  double lyapunov_a;
  bool supercritical;
};

// Bisection on the real part of the complex eigenvalue pair of the full 3D
// Jacobian at the origin, bracket [xi - 10 xi^2 eps, xi].
HopfData hopf_locate_numeric(double xi, double eps);

struct MelnikovResult {
  double h;
  double delta_alpha;
  double delta_eps;
  double alpha_M;
  double quadrature_error_estimate;
};

// Integral of xi e^{-xi y} z (e^z - 1) along the h-level set (h < 1: over one
// period; h = 1: y-parameterized with exponential tail bound).
double delta_alpha(double h, double xi, double tol = 1e-8,
                   double* err_out = nullptr);

// Integral of grad H . df_eps/deps along the h-level set,
// h in (0, 1 - margin].
double delta_eps(double h, double xi, double tol = 1e-8,
                 double* err_out = nullptr, double margin = kMelnikovMargin);

// alpha_M(h) = xi - eps Delta_eps(h)/Delta_alpha(h).
MelnikovResult alpha_M(double h, double xi, double eps, double tol = 1e-8,
                       double margin = kMelnikovMargin);

}  // namespace eqcycle
