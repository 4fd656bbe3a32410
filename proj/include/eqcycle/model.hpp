#pragma once

// Spring-block fault model in dimensionless form and its singular-perturbation
// limits.  State (x,y,z): x = scaled friction state, y = scaled displacement,
// z = ln(w) with w the scaled slip velocity.
//
//   slow:   x' = -e^z (x + (1+a) z)
//           y' =  e^z - 1
//       eps z' = -e^{-z} (y + (x+z)/xi)
//
// The fast problem is the same field on the fast time tau = t/eps; the layer
// and reduced problems are the eps=0 limits of fast and slow respectively.
// Critical manifold C0: z = -x - xi*y.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eqcycle {

struct PhysicalParams {
  double mass;       // M  [kg]
  double stiffness;  // kappa [N/m]
  double slip_dist;  // L  [m], characteristic slip distance
  double a_f;        // rate coefficient of the friction law
  double b_f;        // state coefficient of the friction law
  double v0;         // driving plate velocity [m/s]
};

struct Params {
  double eps;
  double xi;
  double alpha;
};

struct State3 {
  double x, y, z;
};

struct StateR {
  double y, z;
};

using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// exp() with the library's overflow policy: unrepresentable growth is a
// range_error, never a silent inf.  Blow-up must be handled by chart
// switching, not by propagating infinities.
inline double checked_exp(double arg) {
  if (arg > 709.0)
    throw std::range_error("checked_exp: exponent " + std::to_string(arg) +
                           " overflows double");
  return std::exp(arg);
}

inline void validate(const PhysicalParams& p) {
  if (!(p.mass > 0 && p.stiffness > 0 && p.slip_dist > 0 && p.a_f > 0 &&
        p.b_f > 0 && p.v0 > 0))
    throw std::domain_error("PhysicalParams: all fields must be > 0");
}

inline void require_full(const Params& p) {
  if (!(p.eps > 0)) throw std::domain_error("Params: eps must be > 0 here");
  if (!(p.xi > 0)) throw std::domain_error("Params: xi must be > 0");
}

inline void require_xi(double xi) {
  if (!(xi > 0)) throw std::domain_error("xi must be > 0");
}

// eps = M v0^2/(kappa L^2), xi = kappa L / a_f, alpha = (b_f - a_f)/b_f.
inline Params nondimensionalize(const PhysicalParams& p) {
  validate(p);
  return Params{p.mass * p.v0 * p.v0 / (p.stiffness * p.slip_dist * p.slip_dist),
                p.stiffness * p.slip_dist / p.a_f, (p.b_f - p.a_f) / p.b_f};
}

inline State3 slow_rhs(const State3& s, const Params& p) {
  require_full(p);
  const double ez = checked_exp(s.z);
  const double emz = checked_exp(-s.z);
  return State3{-ez * (s.x + (1.0 + p.alpha) * s.z), ez - 1.0,
                -emz * (s.y + (s.x + s.z) / p.xi) / p.eps};
}

inline State3 fast_rhs(const State3& s, const Params& p) {
  if (!(p.eps >= 0)) throw std::domain_error("fast_rhs: eps must be >= 0");
  require_xi(p.xi);
  const double ez = checked_exp(s.z);
  const double emz = checked_exp(-s.z);
  return State3{-p.eps * ez * (s.x + (1.0 + p.alpha) * s.z),
                p.eps * (ez - 1.0), -emz * (s.y + (s.x + s.z) / p.xi)};
}

inline StateR reduced_rhs(const StateR& s, double xi, double alpha) {
  const double ez = checked_exp(s.z);
  return StateR{ez - 1.0, xi + ez * (alpha * s.z - xi * s.y - xi)};
}

inline double layer_rhs(double z, double x0, double y0, double xi) {
  return -checked_exp(-z) * (y0 + (x0 + z) / xi);
}

inline double critical_manifold_z(double x, double y, double xi) {
  return -x - xi * y;
}

// Family of x-nullclines that organizes the dynamics for z >> 1.
inline double linfinity_nullcline_x(double z, double alpha) {
  return -(1.0 + alpha) * z;
}

inline Mat2 jacobian_reduced(const StateR& s, double xi, double alpha) {
  const double ez = checked_exp(s.z);
  return Mat2{{{0.0, ez},
               {-xi * ez, ez * (alpha * s.z - xi * s.y - xi) + alpha * ez}}};
}

inline Mat3 jacobian_slow(const State3& s, const Params& p) {
  require_full(p);
  const double ez = checked_exp(s.z);
  const double emz = checked_exp(-s.z);
  return Mat3{{{-ez, 0.0, -ez * (s.x + (1.0 + p.alpha) * s.z) - ez * (1.0 + p.alpha)},
               {0.0, 0.0, ez},
               {-emz / (p.xi * p.eps), -emz / p.eps,
                emz * (s.y + (s.x + s.z) / p.xi) / p.eps - emz / (p.xi * p.eps)}}};
}

inline Mat3 jacobian_fast(const State3& s, const Params& p) {
  if (!(p.eps >= 0)) throw std::domain_error("jacobian_fast: eps must be >= 0");
  const double ez = checked_exp(s.z);
  const double emz = checked_exp(-s.z);
  return Mat3{{{-p.eps * ez, 0.0,
                -p.eps * (ez * (s.x + (1.0 + p.alpha) * s.z) + ez * (1.0 + p.alpha))},
               {0.0, 0.0, p.eps * ez},
               {-emz / p.xi, -emz, emz * (s.y + (s.x + s.z) / p.xi) - emz / p.xi}}};
}

// x-elimination on C0 (x = -xi*y - z) and its inverse, for comparing full
// trajectories with reduced ones.
inline StateR project_to_reduced(const State3& s) { return StateR{s.y, s.z}; }

inline State3 lift_to_critical(const StateR& s, double xi) {
  return State3{-xi * s.y - s.z, s.y, s.z};
}

}  // namespace eqcycle
