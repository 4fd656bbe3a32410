#pragma once

// Hamiltonian structure of the reduced problem at alpha = xi:
//   f0(y,z; xi) = g(y,z) J grad H(y,z),
//   g = e^{xi y + z}/xi,
//   H = -e^{-xi y} (xi y - xi z + xi + 1 - xi e^{-z}) + 1.
// Orbits lie on level sets of H; H in (0,1) closed, H >= 1 unbounded.

#include <optional>
#include <vector>

#include "eqcycle/model.hpp"

namespace eqcycle {

double H_eval(double y, double z, double xi);
double g_eval(double y, double z, double xi);
StateR grad_H(double y, double z, double xi);

// || f0(y,z;xi,alpha=xi) - g J grad H ||_2, relative to the field magnitude.
double factorization_residual(double y, double z, double xi);

// Real roots of -e^{-xi y}(xi y + 1) + 1 = h, i.e. the level set's y-axis
// crossings.  y_lower < 0 always exists; y_upper > 0 iff h in (0,1).
struct LambertRoots {
  double y_lower;
  std::optional<double> y_upper;
};
LambertRoots lambert_roots(double h, double xi);

enum class LevelKind { closed, unbounded };

struct LevelSet {
  double h;
  double xi;
  LevelKind kind;
  std::vector<StateR> polyline;
  std::optional<double> period;       // closed only
  double closure_gap = 0.0;           // closed only
  // unbounded only: the two graphs z(y), y from the axis crossing to y_max.
  // branch_to_Q3 grows linearly (z ~ y + 1 + 1/xi), branch_to_Q6 ~ -ln y.
  std::vector<StateR> branch_to_Q3;
  std::vector<StateR> branch_to_Q6;
};

// h in (0,1): integrate the reduced flow at alpha=xi from (y_upper(h),0) to
// first return (orbit closure is the accuracy diagnostic).  h >= 1: the two
// graphs solved from the level equation up to y_max (default 30/xi).
LevelSet trace_level_set(double h, double xi, double tol = 1e-8,
                         double rtol = 1e-10, double y_max = 0.0,
                         int samples = 800);

// Diffeomorphism between the positive y-axis and h in (0,1); forward is
// H(y,0), inverse solves it.
double h_from_yD(double y, double xi);
double yD_from_h(double h, double xi);

}  // namespace eqcycle
