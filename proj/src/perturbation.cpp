#include "eqcycle/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "eqcycle/errors.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/ode.hpp"

namespace eqcycle {

double slow_manifold_z(double x, double y, const Params& p) {
  require_xi(p.xi);
  if (!(p.eps >= 0)) throw std::domain_error("slow_manifold_z: eps >= 0");
  const double s = x + p.xi * y;
  const double corr = checked_exp(-2.0 * s) *
                      (p.alpha * s + p.xi * (y + 1.0) - p.xi * checked_exp(s));
  return -s + p.eps * p.xi * corr;
}

namespace {
// chi(y,z) = alpha z e^z - xi y e^z - xi e^z + xi, associated exactly like
// reduced_rhs so the eps=0 limit is bitwise identical
inline double chi(const StateR& s, double xi, double alpha) {
  const double ez = checked_exp(s.z);
  return xi + ez * (alpha * s.z - xi * s.y - xi);
}
}  // namespace

StateR f_eps_rhs(const StateR& s, const Params& p) {
  require_xi(p.xi);
  const double xi = p.xi, al = p.alpha;
  const double ez = checked_exp(s.z);
  const double c = chi(s, xi, al);
  const double e2z = ez * ez;
  return StateR{ez - 1.0 - p.eps * xi * c * e2z,
                c - p.eps * xi * c * e2z * (al * s.z - xi * s.y + al - xi + 1.0)};
}

StateR f_eps_deps(const StateR& s, double xi) {
  const double ez = checked_exp(s.z);
  const double c = chi(s, xi, xi);
  const double e2z = ez * ez;
  return StateR{-xi * c * e2z, -xi * c * e2z * (xi * s.z - xi * s.y + 1.0)};
}

double hopf_alpha(double xi, double eps) {
  require_xi(xi);
  if (!(eps >= 0)) throw std::domain_error("hopf_alpha: eps >= 0");
  return xi - eps * xi * xi;
}

double lyapunov_coefficient(double xi, double eps) {
  require_xi(xi);
  if (!(eps >= 0)) throw std::domain_error("lyapunov_coefficient: eps >= 0");
  return -0.125 * eps * xi * xi * xi * (1.0 + xi);
}

namespace {

// real part of the complex pair of the full 3D Jacobian at the origin
double pair_real_part(double xi, double eps, double alpha) {
  Eigen::Matrix3d J;
  J << -1.0, 0.0, -(1.0 + alpha),
       0.0, 0.0, 1.0,
       -1.0 / (xi * eps), -1.0 / eps, -1.0 / (xi * eps);
  Eigen::EigenSolver<Eigen::Matrix3d> es(J);
  double best = 0;
  double maxim = -1;
  for (int i = 0; i < 3; ++i) {
    const double im = std::fabs(es.eigenvalues()[i].imag());
    if (im > maxim) {
      maxim = im;
      best = es.eigenvalues()[i].real();
    }
  }
  if (maxim <= 0) throw SearchError("hopf_locate_numeric: no complex pair");
  return best;
}

}  // namespace

HopfData hopf_locate_numeric(double xi, double eps) {
  require_xi(xi);
  if (!(eps > 0 && eps <= 1e-1))
    throw std::domain_error("hopf_locate_numeric: eps in (0, 1e-1]");
  double lo = xi - 10.0 * xi * xi * eps;
  double hi = xi;
  double flo = pair_real_part(xi, eps, lo);
  double fhi = pair_real_part(xi, eps, hi);
  if ((flo < 0) == (fhi < 0))
    throw SearchError("hopf_locate_numeric: no sign change in bracket");
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    const double fm = pair_real_part(xi, eps, m);
    if ((fm < 0) == (flo < 0)) {
      lo = m; flo = fm;
    } else {
      hi = m; fhi = fm;
    }
  }
  HopfData out;
  out.alpha_H = hopf_alpha(xi, eps);
  out.alpha_H_numeric = 0.5 * (lo + hi);
  out.lyapunov_a = lyapunov_coefficient(xi, eps);
  out.supercritical = out.lyapunov_a < 0;
  return out;
}

namespace {

// One closed-orbit pass at alpha=xi integrating the two Melnikov integrands
// as quadrature variables.  Returns (I_alpha, I_eps) and the period.
struct OrbitIntegrals {
  double I_alpha, I_eps, T;
};

OrbitIntegrals melnikov_orbit_pass(double h, double xi, double rtol) {
  const double yD = yD_from_h(h, xi);
  Rhs f = [xi](double, std::span<const double> s, std::span<double> ds) {
    const StateR d = reduced_rhs(StateR{s[0], s[1]}, xi, xi);
    ds[0] = d.y;
    ds[1] = d.z;
    const double y = s[0], z = s[1];
    const double ez = checked_exp(z);
    ds[2] = xi * checked_exp(-xi * y) * z * (ez - 1.0);
    const StateR gh = grad_H(y, z, xi);
    const StateR dfe = f_eps_deps(StateR{y, z}, xi);
    ds[3] = gh.y * dfe.y + gh.z * dfe.z;
  };
  IntegratorConfig cfg;
  cfg.method = Method::explicit_rk;
  cfg.rtol = rtol;
  cfg.atol = {rtol * 1e-2, rtol * 1e-2, rtol * 1e-2, rtol * 1e-2};
  EventSpec ret;
  ret.g = [](double, std::span<const double> s) { return s[1]; };
  ret.direction = -1;
  ret.terminal = true;
  ret.root_tol = 1e-13;
  const double s0[4] = {yD, 0.0, 0.0, 0.0};
  Trajectory tr = integrate_checked(f, nullptr, s0, 0.0, 1e5, cfg, {ret});
  if (tr.status != IntStatus::terminal_event)
    throw AccuracyError("melnikov: closed orbit did not return");
  return OrbitIntegrals{tr.back()[2], tr.back()[3], tr.t_end()};
}

}  // namespace

double delta_alpha(double h, double xi, double tol, double* err_out) {
  require_xi(xi);
  if (!(h > 0 && h <= 1))
    throw std::domain_error("delta_alpha: h must be in (0,1]");
  if (h < 1.0) {
    const OrbitIntegrals a = melnikov_orbit_pass(h, xi, 1e-12);
    const OrbitIntegrals b = melnikov_orbit_pass(h, xi, 1e-9);
    const double err = std::fabs(a.I_alpha - b.I_alpha);
    if (err > tol * std::max(1.0, std::fabs(a.I_alpha)))
      throw AccuracyError("delta_alpha: error estimate exceeds tolerance");
    if (err_out) *err_out = err;
    return a.I_alpha;
  }
  // h = 1: y-parameterized form over [-1/xi, y_max] with analytic tail bound
  const double y_max = 30.0 / xi;
  LevelSet ls = trace_level_set(1.0, xi, 1e-8, 1e-10, y_max, 2000);
  auto z_branch = [&](double y, bool toQ3) {
    const double R = std::max(1.0, y + 1.0 + 1.0 / xi);
    // solve z + e^{-z} = R on the requested side
    double lo, hi;
    if (toQ3) { lo = 0.0; hi = R; }
    else { hi = 0.0; lo = -std::log(R) - 1.0;
           while (lo + std::exp(-lo) < R) lo -= 1.0; }
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      const bool pos = (m + std::exp(-m) - R) > 0;
      if (toQ3) { if (pos) hi = m; else lo = m; }
      else { if (pos) lo = m; else hi = m; }
      if (hi - lo < 1e-14 * std::max(1.0, std::fabs(m))) break;
    }
    return 0.5 * (lo + hi);
  };
  auto integrand = [&](double y) {
    const double zm = z_branch(y, true);   // linear branch (to Q3)
    const double zp = z_branch(y, false);  // logarithmic branch (to Q6)
    return xi * std::exp(-xi * y) * (zm - zp);
  };
  QuadResult q = quad_adaptive(integrand, -1.0 / xi, y_max, tol * 0.5);
  const double zmax = std::max(std::fabs(ls.branch_to_Q3.back().z),
                               std::fabs(ls.branch_to_Q6.back().z));
  const double slope = 1.0;  // z ~ y + 1 + 1/xi on the linear branch
  const double tail = xi * std::exp(-xi * y_max) * (zmax + slope * y_max);
  const double err = q.error + tail;
  if (err > tol) throw AccuracyError("delta_alpha(1): tolerance not met");
  if (err_out) *err_out = err;
  return q.value;
}

double delta_eps(double h, double xi, double tol, double* err_out,
                 double margin) {
  require_xi(xi);
  if (!(h > 0 && h <= 1.0 - margin))
    throw std::domain_error("delta_eps: h must be in (0, 1 - margin] = (0, " +
                            std::to_string(1.0 - margin) + "]");
  const OrbitIntegrals a = melnikov_orbit_pass(h, xi, 1e-12);
  const OrbitIntegrals b = melnikov_orbit_pass(h, xi, 1e-9);
  const double err = std::fabs(a.I_eps - b.I_eps);
  if (err > tol * std::max(1.0, std::fabs(a.I_eps)))
    throw AccuracyError("delta_eps: error estimate exceeds tolerance");
  if (err_out) *err_out = err;
  return a.I_eps;
}

MelnikovResult alpha_M(double h, double xi, double eps, double tol,
                       double margin) {
  require_xi(xi);
  if (!(h > 0 && h <= 1.0 - margin))
    throw std::domain_error("alpha_M: h must be in (0, 1 - margin] = (0, " +
                            std::to_string(1.0 - margin) + "]");
  if (!(eps > 0)) throw std::domain_error("alpha_M: eps must be > 0");
  // one orbit pass serves both integrals
  const OrbitIntegrals a = melnikov_orbit_pass(h, xi, 1e-12);
  const OrbitIntegrals b = melnikov_orbit_pass(h, xi, 1e-9);
  const double err =
      std::fabs(a.I_alpha - b.I_alpha) + std::fabs(a.I_eps - b.I_eps);
  const double scale = std::max({1.0, std::fabs(a.I_alpha), std::fabs(a.I_eps)});
  if (err > tol * scale) throw AccuracyError("alpha_M: tolerance not met");
  MelnikovResult r;
  r.h = h;
  r.delta_alpha = a.I_alpha;
  r.delta_eps = a.I_eps;
  r.alpha_M = xi - eps * a.I_eps / a.I_alpha;
  r.quadrature_error_estimate = err;
  return r;
}

}  // namespace eqcycle
