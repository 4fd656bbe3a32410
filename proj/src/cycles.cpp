#include "eqcycle/cycles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "eqcycle/errors.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/perturbation.hpp"

namespace eqcycle {

namespace {

double sphere_dist(const SpherePoint& a, const SpherePoint& b) {
  double acc = 0;
  for (int i = 0; i < 4; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

Rhs reduced_field(double xi, double alpha) {
  return [xi, alpha](double, std::span<const double> s, std::span<double> ds) {
    const StateR d = reduced_rhs(StateR{s[0], s[1]}, xi, alpha);
    ds[0] = d.y;
    ds[1] = d.z;
  };
}

Rhs k3_2d_field(double xi, double alpha) {
  return [xi, alpha](double, std::span<const double> s, std::span<double> ds) {
    const auto f =
        chart_rhs(ChartPoint{ChartId::K3_2D, {s[0], s[1]}}, ChartParams{xi, alpha});
    ds[0] = f[0];
    ds[1] = f[1];
  };
}

}  // namespace

SeparatrixTrace trace_separatrix(SepKind kind, double alpha, double xi,
                                 double seed_offset) {
  require_xi(xi);
  SeparatrixTrace out;
  out.kind = kind;
  out.alpha = alpha;
  out.xi = xi;
  const double z_switch = 5.0;  // chart hand-off at w3 = 0.2

  IntegratorConfig cfg;
  cfg.method = Method::explicit_rk;
  cfg.rtol = 1e-11;
  cfg.atol = {1e-12, 1e-12};
  cfg.max_steps = 20'000'000;

  EventSpec axis;  // records y-axis crossings in the reduced plane
  axis.g = [](double, std::span<const double> s) { return s[1]; };
  axis.direction = 0;
  axis.id = 1;

  if (kind == SepKind::Wcs) {
    const double delta = seed_offset > 0 ? seed_offset : 1e-4;
    // center direction at Q3 = (w3, y3) = (0, alpha/xi): (alpha, -(1+alpha))
    const double nrm = std::hypot(alpha, 1.0 + alpha);
    const double w0 = delta * alpha / nrm;
    const double y0 = alpha / xi - delta * (1.0 + alpha) / nrm;
    out.points.push_back(ChartPoint{ChartId::K3_2D, {w0, y0}});
    // backward in chart time until the hand-off boundary w3 = 0.2
    EventSpec leave;
    leave.g = [](double, std::span<const double> s) { return s[0] - 0.2; };
    leave.direction = +1;
    leave.terminal = true;
    // the crawl along the center manifold is algebraic (w3' ~ -c w3^2), so
    // the backward time to w3 = 0.2 scales like 1/(c delta)
    const double s0[2] = {w0, y0};
    Trajectory tr1 = integrate_checked(k3_2d_field(xi, alpha), nullptr, s0, 0.0,
                                       -1e7, cfg, {leave});
    if (tr1.status != IntStatus::terminal_event)
      throw TraceError("Wcs: never reached the chart hand-off", "K3_2D");
    for (std::size_t i = 1; i < tr1.t.size(); ++i) {
      out.points.push_back(ChartPoint{ChartId::K3_2D, tr1.y[i]});
      if (tr1.y[i][0] > 1e-3)
        out.plane.push_back(StateR{tr1.y[i][1] / tr1.y[i][0], 1.0 / tr1.y[i][0]});
    }
    // continue backward in the reduced plane; stop at |y| = 40: beyond that
    // the e^{xi y} amplification of the seed's ~1e-10 energy offset makes the
    // geometric path seed-limited (H itself stays conserved)
    const double yz0[2] = {tr1.back()[1] / tr1.back()[0], 1.0 / tr1.back()[0]};
    EventSpec far_off;  // toward Q6 (y -> +inf along z ~ -ln y) or Q7 (y -> -inf)
    far_off.g = [](double, std::span<const double> s) {
      return std::fabs(s[0]) - 40.0;
    };
    far_off.direction = +1;
    far_off.terminal = true;
    EventSpec z_up;  // alpha < xi: backward escape toward Q7 through z >> 1
    z_up.g = [z_switch](double, std::span<const double> s) {
      return s[1] - z_switch;
    };
    z_up.direction = +1;
    z_up.terminal = true;
    z_up.id = 2;
    Trajectory tr2 = integrate_checked(reduced_field(xi, alpha), nullptr, yz0,
                                       0.0, -1e5, cfg, {axis, far_off, z_up});
    for (std::size_t i = 0; i < tr2.t.size(); ++i) {
      out.points.push_back(ChartPoint{ChartId::R2, tr2.y[i]});
      out.plane.push_back(StateR{tr2.y[i][0], tr2.y[i][1]});
    }
    for (const auto& ev : tr2.events)
      if (ev.id == 1) out.axis_crossings_y.push_back(ev.state[0]);
    out.final_chart = "R2";
    return out;
  }

  // Wcu: seed on the first-order center manifold of Q6 in KAP3_EXP
  const double rho0 = seed_offset > 0 ? seed_offset : 0.1;
  if (rho0 < 0.02)
    throw std::domain_error(
        "trace_separatrix(Wcu): rho seed below 0.02 is not representable "
        "(e^{-1/rho} underflows)");
  const double eta0 =
      1.0 + std::exp(-1.0 / rho0) * (alpha / (xi * rho0) + 1.0 + 1.0 / xi);
  out.points.push_back(ChartPoint{ChartId::KAP3_EXP, {rho0, eta0}});
  // map down: w1 = e^{-1/rho} eta, z1 = -e^{-1/rho} eta / rho
  const double w1 = std::exp(-1.0 / rho0) * eta0;
  const double y20 = 1.0 / w1;
  const double z20 = -1.0 / rho0 * 1.0;  // z2 = z1/w1
  const double yz0[2] = {y20, z20};
  EventSpec to_k3;
  to_k3.g = [z_switch](double, std::span<const double> s) {
    return s[1] - z_switch;
  };
  to_k3.direction = +1;
  to_k3.terminal = true;
  to_k3.id = 2;
  IntegratorConfig cfg_fw = cfg;
  cfg_fw.max_step = 50.0;
  Trajectory tr1 = integrate_checked(reduced_field(xi, alpha), nullptr, yz0, 0.0,
                                     1e6, cfg_fw, {axis, to_k3});
  for (std::size_t i = 0; i < tr1.t.size(); ++i) {
    out.points.push_back(ChartPoint{ChartId::R2, tr1.y[i]});
    out.plane.push_back(StateR{tr1.y[i][0], tr1.y[i][1]});
  }
  for (const auto& ev : tr1.events)
    if (ev.id == 1) out.axis_crossings_y.push_back(ev.state[0]);
  out.final_chart = "R2";
  if (tr1.status != IntStatus::terminal_event)
    throw TraceError("Wcu: never escaped toward the equator", "R2");
  // hand off to K3_2D and run toward the Q1 contraction regime
  const double w30 = 1.0 / tr1.back()[1];
  const double y30 = tr1.back()[0] / tr1.back()[1];
  EventSpec wsmall;
  wsmall.g = [](double, std::span<const double> s) { return s[0] - 0.02; };
  wsmall.direction = -1;
  wsmall.terminal = true;
  const double k30[2] = {w30, y30};
  Trajectory tr2 = integrate_checked(k3_2d_field(xi, alpha), nullptr, k30, 0.0,
                                     1e4, cfg, {wsmall});
  for (std::size_t i = 1; i < tr2.t.size(); ++i) {
    out.points.push_back(ChartPoint{ChartId::K3_2D, tr2.y[i]});
    if (tr2.y[i][0] > 1e-3)
      out.plane.push_back(StateR{tr2.y[i][1] / tr2.y[i][0], 1.0 / tr2.y[i][0]});
  }
  out.final_chart = "K3_2D";
  if (tr2.status != IntStatus::terminal_event)
    throw TraceError("Wcu: stalled before the Q1 regime", "K3_2D");
  if (alpha > xi && std::fabs(tr2.back()[1]) > 0.02) {
    // settle along the equator till y3 is small: the Q1 contraction regime
    // (capped: y3 decays like e^{-alpha tau} and w3 underflows past ~60)
    EventSpec ysmall;
    ysmall.g = [](double, std::span<const double> s) {
      return std::fabs(s[1]) - 0.02;
    };
    ysmall.direction = -1;
    ysmall.terminal = true;
    const double k31[2] = {tr2.back()[0], tr2.back()[1]};
    Trajectory tr3 = integrate_checked(k3_2d_field(xi, alpha), nullptr, k31, 0.0,
                                       60.0, cfg, {ysmall});
    for (std::size_t i = 1; i < tr3.t.size(); ++i)
      out.points.push_back(ChartPoint{ChartId::K3_2D, tr3.y[i]});
  }
  return out;
}

namespace {

std::vector<SpherePoint> line_k3(double x0, double y0, double x1, double y1,
                                 int n) {
  std::vector<SpherePoint> out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    out.push_back(sphere_from_k3_3d(x0 + u * (x1 - x0), y0 + u * (y1 - y0), 0.0));
  }
  return out;
}

std::vector<SpherePoint> line_k1(double x0, double z0, double x1, double z1,
                                 int n) {
  std::vector<SpherePoint> out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    out.push_back(sphere_from_k1_3d(x0 + u * (x1 - x0), z0 + u * (z1 - z0), 0.0));
  }
  return out;
}

}  // namespace

SingularCycle build_gamma0(double alpha, double xi, int samples_per_segment) {
  require_xi(xi);
  if (!(alpha > xi))
    throw std::domain_error("build_gamma0: requires alpha > xi");
  const int n = samples_per_segment;
  SingularCycle g;
  g.alpha = alpha;
  g.xi = xi;

  const SpherePoint Q1 = sphere_from_k3_3d(-1.0, 0.0, 0.0);
  const SpherePoint Q2 = sphere_from_k3_3d(-1.0 - alpha, 0.0, 0.0);
  const SpherePoint Q4 = sphere_from_k3_3d(-1.0 - alpha, 2.0 * alpha / xi, 0.0);
  const double q5x = -(xi / (2.0 * alpha)) * (1.0 + alpha);
  const double q5z = (xi / (2.0 * alpha)) * (1.0 - alpha);
  const SpherePoint Q5 = sphere_from_k1_3d(q5x, q5z, 0.0);
  const SpherePoint Q6 = sphere_from_k1_3d(-xi, 0.0, 0.0);
  g.corners = {{"Q1", Q1}, {"Q2", Q2}, {"Q4", Q4}, {"Q5", Q5}, {"Q6", Q6}};

  g.segments.push_back({"gamma12", line_k3(-1.0, 0.0, -1.0 - alpha, 0.0, n)});
  g.segments.push_back(
      {"gamma24", line_k3(-1.0 - alpha, 0.0, -1.0 - alpha, 2.0 * alpha / xi, n)});
  // gamma45: fast fiber in K1 at constant x1, from K31(Q4) down to Q5
  g.segments.push_back(
      {"gamma45", line_k1(q5x, xi / (2.0 * alpha), q5x, q5z, n)});
  // gamma56: on C_{0,inf}: x1 = -xi - z1
  g.segments.push_back({"gamma56", [&] {
                          std::vector<SpherePoint> seg;
                          seg.reserve(n + 1);
                          for (int i = 0; i <= n; ++i) {
                            const double u = static_cast<double>(i) / n;
                            const double z1 = q5z * (1.0 - u);
                            seg.push_back(sphere_from_k1_3d(-xi - z1, z1, 0.0));
                          }
                          return seg;
                        }()});

  // Wcu: numerically traced on C0, Q6 -> Q1
  SeparatrixTrace w = trace_separatrix(SepKind::Wcu, alpha, xi);
  GammaSegment wcu{"Wcu", {}};
  wcu.sphere.push_back(Q6);
  for (const auto& p : w.points) {
    if (p.chart == ChartId::R2)
      wcu.sphere.push_back(sphere_from_reduced(StateR{p.c[0], p.c[1]}, xi));
    else if (p.chart == ChartId::K3_2D)
      wcu.sphere.push_back(sphere_from_k3_2d(p.c[0], p.c[1], xi));
  }
  g.wcu_seed_gap = sphere_dist(wcu.sphere[1], Q6);
  g.wcu_end_gap = sphere_dist(wcu.sphere.back(), Q1);
  wcu.sphere.push_back(Q1);
  g.segments.push_back(std::move(wcu));

  // junction gaps of the closed-form construction
  auto gap = [&](const std::vector<SpherePoint>& a,
                 const SpherePoint& corner) { return sphere_dist(a.back(), corner); };
  double mg = 0.0;
  mg = std::max(mg, sphere_dist(g.segments[0].sphere.front(), Q1));
  mg = std::max(mg, gap(g.segments[0].sphere, Q2));
  mg = std::max(mg, sphere_dist(g.segments[1].sphere.front(), Q2));
  mg = std::max(mg, gap(g.segments[1].sphere, Q4));
  // gamma45 starts at K31(Q4)
  mg = std::max(mg, sphere_dist(g.segments[2].sphere.front(),
                                sphere_from_k1_3d(q5x, xi / (2.0 * alpha), 0.0)));
  mg = std::max(mg, gap(g.segments[2].sphere, Q5));
  mg = std::max(mg, sphere_dist(g.segments[3].sphere.front(), Q5));
  mg = std::max(mg, gap(g.segments[3].sphere, Q6));
  mg = std::max(mg, sphere_dist(g.segments[4].sphere.front(), Q6));
  mg = std::max(mg, gap(g.segments[4].sphere, Q1));
  g.max_corner_gap = mg;
  return g;
}

namespace {

struct SectionMap {
  const Params& p;
  const LimitCycleOptions& opt;

  Rhs field() const {
    const Params pp = p;
    return [pp](double, std::span<const double> s, std::span<double> ds) {
      const State3 d = slow_rhs(State3{s[0], s[1], s[2]}, pp);
      ds[0] = d.x;
      ds[1] = d.y;
      ds[2] = d.z;
    };
  }
  Jac jacobian() const {
    const Params pp = p;
    return [pp](double, std::span<const double> s, Eigen::MatrixXd& J) {
      const Mat3 m = jacobian_slow(State3{s[0], s[1], s[2]}, pp);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) J(i, j) = m[i][j];
    };
  }
  IntegratorConfig config() const {
    IntegratorConfig cfg;
    cfg.method = Method::stiff;
    cfg.rtol = opt.rtol;
    cfg.atol = opt.atol;
    cfg.guard_component = 2;
    cfg.guard_threshold = 600.0;
    return cfg;
  }
  static EventSpec section_event() {
    EventSpec ev;
    ev.g = [](double, std::span<const double> s) { return s[2]; };
    ev.direction = -1;
    ev.terminal = true;
    ev.root_tol = 1e-13;
    return ev;
  }

  // one full return: (x,y) on {z=0, zdot<0} -> next downward crossing
  std::array<double, 2> apply(const std::array<double, 2>& s, double* T_out,
                              Trajectory* orbit_out = nullptr) const {
    const double s0[3] = {s[0], s[1], 0.0};
    Trajectory tr = integrate_checked(field(), jacobian(), s0, 0.0, opt.t_budget,
                                      config(), {section_event()});
    if (tr.status != IntStatus::terminal_event)
      throw SearchError("find_limit_cycle: no return to the section");
    if (T_out) *T_out = tr.t_end();
    std::array<double, 2> out{tr.back()[0], tr.back()[1]};
    if (orbit_out) *orbit_out = std::move(tr);
    return out;
  }
};

}  // namespace

LimitCycle find_limit_cycle(const Params& p, const std::array<double, 2>* guess,
                            const LimitCycleOptions& opt) {
  require_full(p);
  if (p.eps > 1e-1)
    throw std::domain_error("find_limit_cycle: eps must be <= 1e-1");
  if (!(p.alpha > hopf_alpha(p.xi, p.eps)))
    throw std::domain_error("find_limit_cycle: alpha must exceed alpha_H");
  SectionMap map{p, opt};

  std::array<double, 2> s;
  if (guess) {
    s = *guess;
  } else {
    // relax onto the attractor: hop from section crossing to section crossing
    const double z0 = slow_manifold_z(0.0, 1.0, p);
    std::vector<double> state{0.0, 1.0, z0};
    IntegratorConfig cfg = map.config();
    const EventSpec ev = SectionMap::section_event();
    bool found = false;
    for (int k = 0; k < opt.burn_in_crossings; ++k) {
      Trajectory tr = integrate_checked(map.field(), map.jacobian(), state, 0.0,
                                        opt.t_budget, cfg, {ev});
      if (tr.status != IntStatus::terminal_event) break;
      state = tr.back();
      state[2] = 0.0;
      found = true;
    }
    if (!found)
      throw SearchError("find_limit_cycle: burn-in found no section crossing");
    s = {state[0], state[1]};
  }

  // damped Newton on R(s) = P(s) - s with finite-difference dP
  double T = 0;
  std::array<double, 2> Ps = map.apply(s, &T);
  std::array<double, 2> R{Ps[0] - s[0], Ps[1] - s[1]};
  auto norm2 = [](const std::array<double, 2>& v) {
    return std::hypot(v[0], v[1]);
  };
  int it = 0;
  while (norm2(R) > opt.closure_tol) {
    if (++it > opt.max_newton)
      throw SearchError("find_limit_cycle: Newton budget exhausted, residual " +
                        std::to_string(norm2(R)));
    Eigen::Matrix2d DP;
    for (int j = 0; j < 2; ++j) {
      std::array<double, 2> sp = s;
      const double dj = 1e-6 * (1.0 + std::fabs(s[j]));
      sp[j] += dj;
      const std::array<double, 2> Pp = map.apply(sp, nullptr);
      DP(0, j) = (Pp[0] - Ps[0]) / dj;
      DP(1, j) = (Pp[1] - Ps[1]) / dj;
    }
    Eigen::Matrix2d A = DP - Eigen::Matrix2d::Identity();
    Eigen::Vector2d rhs(-R[0], -R[1]);
    Eigen::Vector2d step = A.fullPivLu().solve(rhs);
    double lam = 1.0;
    for (int half = 0; half < 6; ++half) {
      std::array<double, 2> sn{s[0] + lam * step(0), s[1] + lam * step(1)};
      double Tn;
      std::array<double, 2> Pn = map.apply(sn, &Tn);
      std::array<double, 2> Rn{Pn[0] - sn[0], Pn[1] - sn[1]};
      if (norm2(Rn) < norm2(R) || half == 5) {
        s = sn;
        Ps = Pn;
        R = Rn;
        T = Tn;
        break;
      }
      lam *= 0.5;
    }
  }

  LimitCycle lc;
  lc.params = p;
  lc.section_point = s;
  lc.closure_gap = norm2(R);
  std::array<double, 2> dummy = map.apply(s, &lc.period, &lc.orbit);
  (void)dummy;
  double ymin = 1e300, ymax = -1e300;
  for (const auto& st : lc.orbit.y) {
    ymin = std::min(ymin, st[1]);
    ymax = std::max(ymax, st[1]);
  }
  lc.amplitude_y = ymax - ymin;
  lc.best_effort = p.eps < 1e-6;

  // Floquet multipliers from the monodromy over one period
  const double s3[3] = {s[0], s[1], 0.0};
  IntegratorConfig vcfg = map.config();
  Eigen::MatrixXd M =
      integrate_variational(map.field(), map.jacobian(), s3, lc.period, vcfg);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  std::array<std::complex<double>, 3> mu;
  for (int i = 0; i < 3; ++i) mu[i] = es.eigenvalues()[i];
  // trivial multiplier: the one nearest 1
  std::sort(mu.begin(), mu.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return std::abs(a - 1.0) < std::abs(b - 1.0);
            });
  lc.multipliers = mu;
  lc.trivial_defect = std::abs(mu[0] - 1.0);
  lc.stable = std::abs(mu[1]) < 1.0 && std::abs(mu[2]) < 1.0;
  return lc;
}

namespace {

double point_segment_dist(const SpherePoint& p, const SpherePoint& a,
                          const SpherePoint& b) {
  double ab2 = 0, ap_ab = 0;
  for (int i = 0; i < 4; ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    ap_ab += (p[i] - a[i]) * (b[i] - a[i]);
  }
  double t = ab2 > 0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = a[i] + t * (b[i] - a[i]) - p[i];
    d2 += c * c;
  }
  return std::sqrt(d2);
}

double point_to_polylines(const SpherePoint& p,
                          const std::vector<std::vector<SpherePoint>>& ls) {
  double best = 1e300;
  for (const auto& poly : ls)
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
      best = std::min(best, point_segment_dist(p, poly[i], poly[i + 1]));
  return best;
}

double directed_hausdorff(const std::vector<std::vector<SpherePoint>>& a,
                          const std::vector<std::vector<SpherePoint>>& b,
                          int refine) {
  double worst = 0;
  for (const auto& poly : a)
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      for (int k = 0; k <= refine; ++k) {
        const double u = static_cast<double>(k) / (refine + 1);
        SpherePoint q;
        for (int c = 0; c < 4; ++c)
          q[c] = poly[i][c] + u * (poly[i + 1][c] - poly[i][c]);
        worst = std::max(worst, point_to_polylines(q, b));
      }
    }
  // last endpoint
  for (const auto& poly : a)
    if (!poly.empty()) worst = std::max(worst, point_to_polylines(poly.back(), b));
  return worst;
}

}  // namespace

double hausdorff_polylines(const std::vector<std::vector<SpherePoint>>& a,
                           const std::vector<std::vector<SpherePoint>>& b) {
  double prev = -1;
  for (int refine = 0; refine <= 8; refine = refine == 0 ? 1 : refine * 2) {
    const double d =
        std::max(directed_hausdorff(a, b, refine), directed_hausdorff(b, a, refine));
    if (prev >= 0 && std::fabs(d - prev) <= 0.01 * std::max(prev, 1e-12))
      return d;
    prev = d;
  }
  return prev;
}

double hausdorff_to_gamma0(const LimitCycle& c, const SingularCycle& g) {
  std::vector<SpherePoint> cyc;
  const std::size_t stride = std::max<std::size_t>(1, c.orbit.y.size() / 4000);
  for (std::size_t i = 0; i < c.orbit.y.size(); i += stride)
    cyc.push_back(
        project_to_sphere(State3{c.orbit.y[i][0], c.orbit.y[i][1], c.orbit.y[i][2]}));
  cyc.push_back(cyc.front());
  std::vector<std::vector<SpherePoint>> A{cyc}, B;
  for (const auto& seg : g.segments) B.push_back(seg.sphere);
  return hausdorff_polylines(A, B);
}

std::vector<BifurcationRow> bifurcation_diagram(double xi, SweepMode mode,
                                                const Params& fixed,
                                                const std::vector<double>& grid,
                                                const LimitCycleOptions& opt) {
  std::vector<BifurcationRow> rows;
  std::array<double, 2> warm{};
  bool have_warm = false;
  for (double v : grid) {
    Params p{mode == SweepMode::amplitude_vs_eps ? v : fixed.eps, xi,
             mode == SweepMode::amplitude_vs_alpha ? v : fixed.alpha};
    BifurcationRow row{v, 0, 0, 0, "ok"};
    try {
      LimitCycle lc =
          find_limit_cycle(p, have_warm ? &warm : nullptr, opt);
      row.amplitude = lc.amplitude_y;
      row.period = lc.period;
      row.max_multiplier =
          std::max(std::abs(lc.multipliers[1]), std::abs(lc.multipliers[2]));
      warm = lc.section_point;
      have_warm = true;
    } catch (const std::exception&) {
      row.status = "gap";
      have_warm = false;
    }
    rows.push_back(row);
  }
  return rows;
}

BlowupResult finite_time_blowup(double alpha, double xi, const StateR& s0) {
  require_xi(xi);
  if (alpha < xi)
    throw std::domain_error("finite_time_blowup: needs alpha > xi, or alpha = xi "
                            "with H(s0) >= 1");
  if (alpha == xi && H_eval(s0.y, s0.z, xi) < 1.0)
    throw std::domain_error(
        "finite_time_blowup: alpha = xi with H(s0) = " +
        std::to_string(H_eval(s0.y, s0.z, xi)) +
        " < 1 is a closed orbit (bounded; no blow-up)");
  const double z_switch = 5.0;

  IntegratorConfig cfg;
  cfg.method = Method::explicit_rk;
  cfg.rtol = 1e-11;
  cfg.atol = {1e-12, 1e-12};
  EventSpec up;
  up.g = [z_switch](double, std::span<const double> s) { return s[1] - z_switch; };
  up.direction = +1;
  up.terminal = true;
  const double start[2] = {s0.y, s0.z};
  Trajectory tr = integrate_checked(reduced_field(xi, alpha), nullptr, start, 0.0,
                                    1e5, cfg, {up});
  if (tr.status != IntStatus::terminal_event)
    throw std::domain_error(
        "finite_time_blowup: trajectory stayed bounded within the budget "
        "(precondition violated?)");
  BlowupResult out;
  out.switch_time = tr.t_end();
  out.w3_levels = {1e-1, 1e-2, 1e-3};

  // chart K3_2D with the physical-time ledger dT/dtau3 = e^{-1/w3}
  const double w30 = 1.0 / tr.back()[1];
  const double y30 = tr.back()[0] / tr.back()[1];
  Rhs f3 = [xi, alpha](double, std::span<const double> s, std::span<double> ds) {
    const auto f = chart_rhs(ChartPoint{ChartId::K3_2D, {s[0], s[1]}},
                             ChartParams{xi, alpha});
    ds[0] = f[0];
    ds[1] = f[1];
    ds[2] = s[0] > 0 ? std::exp(-1.0 / s[0]) : 0.0;
  };
  std::vector<EventSpec> levels;
  for (int k = 0; k < 3; ++k) {
    EventSpec ev;
    const double lvl = out.w3_levels[k];
    ev.g = [lvl](double, std::span<const double> s) { return s[0] - lvl; };
    ev.direction = -1;
    ev.terminal = (k == 2);
    ev.id = k;
    levels.push_back(ev);
  }
  IntegratorConfig cfg3 = cfg;
  cfg3.atol = {1e-14, 1e-12, 1e-14};
  const double start3[3] = {w30, y30, 0.0};
  Trajectory tr3 =
      integrate_checked(f3, nullptr, start3, 0.0, 1e4, cfg3, levels);
  if (tr3.status != IntStatus::terminal_event)
    throw TraceError("finite_time_blowup: w3 did not reach 1e-3", "K3_2D");
  out.t_estimates.assign(3, 0.0);
  for (const auto& ev : tr3.events)
    out.t_estimates[ev.id] = out.switch_time + ev.state[2];
  for (int k = 1; k < 3; ++k)
    out.cauchy_diffs.push_back(std::fabs(out.t_estimates[k] - out.t_estimates[k - 1]));
  out.t_star = out.t_estimates.back();
  return out;
}

}  // namespace eqcycle
