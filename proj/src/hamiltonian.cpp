#include "eqcycle/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "eqcycle/errors.hpp"
#include "eqcycle/ode.hpp"

namespace eqcycle {

double H_eval(double y, double z, double xi) {
  require_xi(xi);
  const double emy = checked_exp(-xi * y);
  const double emz = checked_exp(-z);
  return -emy * (xi * y - xi * z + xi + 1.0 - xi * emz) + 1.0;
}

double g_eval(double y, double z, double xi) {
  require_xi(xi);
  return checked_exp(xi * y + z) / xi;
}

StateR grad_H(double y, double z, double xi) {
  const double emy = checked_exp(-xi * y);
  const double emz = checked_exp(-z);
  return StateR{xi * xi * emy * (y - z + 1.0 - emz), xi * emy * (1.0 - emz)};
}

double factorization_residual(double y, double z, double xi) {
  const StateR f = reduced_rhs(StateR{y, z}, xi, xi);
  const StateR gh = grad_H(y, z, xi);
  const double g = g_eval(y, z, xi);
  // J grad H = (dH/dz, -dH/dy)
  const double ry = f.y - g * gh.z;
  const double rz = f.z - (-g * gh.y);
  const double mag = std::max(1.0, std::hypot(f.y, f.z));
  return std::hypot(ry, rz) / mag;
}

namespace {

// Lambert-equation left side minus h; equals H(y,0) - h.
double lambert_f(double y, double xi, double h) {
  return -checked_exp(-xi * y) * (xi * y + 1.0) + 1.0 - h;
}

// Bisection + Newton polish to |f| below residual_tol.
double lambert_solve(double lo, double hi, double xi, double h) {
  double flo = lambert_f(lo, xi, h);
  double fhi = lambert_f(hi, xi, h);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo < 0) == (fhi < 0))
    throw SearchError("lambert_solve: no sign change in bracket");
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (lo + hi);
    const double fm = lambert_f(m, xi, h);
    if ((fm < 0) == (flo < 0)) {
      lo = m; flo = fm;
    } else {
      hi = m; fhi = fm;
    }
    if (hi - lo < 1e-15 * std::max(1.0, std::fabs(m))) break;
  }
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 12; ++it) {
    const double fy = lambert_f(y, xi, h);
    const double dfy = xi * xi * y * checked_exp(-xi * y);  // dH/dy on z=0
    if (dfy == 0) break;
    const double step = fy / dfy;
    y -= step;
    if (std::fabs(fy) < 1e-13 && std::fabs(step) < 1e-13) break;
  }
  return y;
}

}  // namespace

LambertRoots lambert_roots(double h, double xi) {
  require_xi(xi);
  if (!(h > 0)) throw std::domain_error("lambert_roots: h must be > 0");
  LambertRoots out{};
  if (h == 1.0) {
    out.y_lower = -1.0 / xi;  // exact: -e^{1}(0)+1-1 = 0
    return out;
  }
  out.y_lower = lambert_solve(-(1.0 + 40.0) / xi, 0.0, xi, h);
  if (h < 1.0) {
    // grow the upper bracket geometrically until the sign flips
    double hi = 1.0 / xi;
    while (lambert_f(hi, xi, h) < 0) {
      hi *= 2;
      if (hi > 1e6 / xi)
        throw SearchError("lambert_roots: upper bracket growth failed");
    }
    out.y_upper = lambert_solve(0.0, hi, xi, h);
  }
  return out;
}

double h_from_yD(double y, double xi) {
  if (!(y > 0)) throw std::domain_error("h_from_yD: y must be > 0");
  return H_eval(y, 0.0, xi);
}

double yD_from_h(double h, double xi) {
  if (!(h > 0 && h < 1))
    throw std::domain_error("yD_from_h: h must be in (0,1)");
  return *lambert_roots(h, xi).y_upper;
}

namespace {

// z-branches of H(y,z) = h for h >= 1: z + e^{-z} = R(y) with
// R(y) = y + 1 + 1/xi - ((1-h)/xi) e^{xi y}.  phi(z) = z + e^{-z} has a
// minimum 1 at z = 0: one branch per sign of z.
double solve_phi(double target, bool positive_branch) {
  if (target < 1.0)
    throw SearchError("level-set branch: target below the phi minimum");
  double lo, hi;
  if (positive_branch) {
    lo = 0.0;
    hi = target;  // phi(target) >= target
  } else {
    hi = 0.0;
    lo = -std::log(target) - 1.0;
    while (lo + std::exp(-lo) < target) lo -= 1.0;
  }
  // phi is increasing on z>0 and decreasing on z<0
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    const double fm = m + std::exp(-m) - target;
    const bool pos = fm > 0;
    if (positive_branch) {
      if (pos) hi = m; else lo = m;
    } else {
      if (pos) lo = m; else hi = m;
    }
    if (hi - lo < 1e-14 * std::max(1.0, std::fabs(m))) break;
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double f = z + std::exp(-z) - target;
    const double df = 1.0 - std::exp(-z);
    if (std::fabs(df) < 1e-14) break;
    z -= f / df;
  }
  return z;
}

}  // namespace

LevelSet trace_level_set(double h, double xi, double tol, double rtol,
                         double y_max, int samples) {
  require_xi(xi);
  if (!(h > 0)) throw std::domain_error("trace_level_set: h must be > 0");
  LevelSet ls;
  ls.h = h;
  ls.xi = xi;

  if (h < 1.0) {
    ls.kind = LevelKind::closed;
    const double yD = yD_from_h(h, xi);
    Rhs f = [xi](double, std::span<const double> s, std::span<double> ds) {
      const StateR d = reduced_rhs(StateR{s[0], s[1]}, xi, xi);
      ds[0] = d.y;
      ds[1] = d.z;
    };
    IntegratorConfig cfg;
    cfg.method = Method::explicit_rk;
    cfg.rtol = rtol;
    cfg.atol = {rtol * 1e-2, rtol * 1e-2};
    EventSpec ret;           // first return: z falls through 0 again
    ret.g = [](double, std::span<const double> s) { return s[1]; };
    ret.direction = -1;
    ret.terminal = true;
    ret.root_tol = 1e-13;
    const double start[2] = {yD, 0.0};
    Trajectory tr = integrate_checked(f, nullptr, start, 0.0, 1e5, cfg, {ret});
    if (tr.status != IntStatus::terminal_event)
      throw AccuracyError("trace_level_set: no return to the section");
    const double T = tr.t_end();
    ls.period = T;
    ls.closure_gap = std::hypot(tr.back()[0] - yD, tr.back()[1]);
    if (ls.closure_gap > tol)
      throw AccuracyError("trace_level_set: closure gap " +
                          std::to_string(ls.closure_gap) + " > tol");
    // second pass capped at T/samples: the polyline is made of true
    // integration nodes (dense-output interpolation would cost two orders of
    // conservation accuracy)
    IntegratorConfig cfg2 = cfg;
    cfg2.max_step = T / samples;
    Trajectory fine = integrate_checked(f, nullptr, start, 0.0, T, cfg2);
    ls.polyline.reserve(fine.y.size());
    for (const auto& s : fine.y) ls.polyline.push_back(StateR{s[0], s[1]});
    return ls;
  }

  ls.kind = LevelKind::unbounded;
  if (y_max <= 0) y_max = 30.0 / xi;
  const double y0 = lambert_roots(h, xi).y_lower;  // branches meet at z = 0
  auto Rfun = [&](double y) {
    return y + 1.0 + 1.0 / xi - ((1.0 - h) / xi) * checked_exp(xi * y);
  };
  ls.branch_to_Q3.reserve(samples + 1);
  ls.branch_to_Q6.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    // denser near the fold at y0
    const double u = static_cast<double>(i) / samples;
    const double y = y0 + (y_max - y0) * u * u;
    const double R = std::max(1.0, Rfun(y));
    ls.branch_to_Q3.push_back(StateR{y, i == 0 ? 0.0 : solve_phi(R, true)});
    ls.branch_to_Q6.push_back(StateR{y, i == 0 ? 0.0 : solve_phi(R, false)});
  }
  // connected polyline: down the linear branch, through the fold, out the
  // logarithmic branch
  ls.polyline.reserve(2 * samples + 1);
  for (int i = samples; i >= 0; --i) ls.polyline.push_back(ls.branch_to_Q3[i]);
  for (int i = 1; i <= samples; ++i) ls.polyline.push_back(ls.branch_to_Q6[i]);
  return ls;
}

}  // namespace eqcycle
