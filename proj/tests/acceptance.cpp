// Acceptance suite: runs every contract criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion.  Exit code = number of failures.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eqcycle/charts.hpp"
#include "eqcycle/cycles.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/io.hpp"
#include "eqcycle/model.hpp"
#include "eqcycle/ode.hpp"
#include "eqcycle/perturbation.hpp"

using namespace eqcycle;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guard(int id, const std::string& what, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

std::string golden_dir = ".";

}  // namespace

// 1. Hamiltonian identity: factorization residual <= 1e-12 relative on 1000
//    random points in [-3,3]^2 for xi in {0.3, 0.5, 1}.
static void criterion1() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  double worst = 0;
  for (double xi : {0.3, 0.5, 1.0})
    for (int k = 0; k < 1000; ++k)
      worst = std::max(worst, factorization_residual(U(rng), U(rng), xi));
  report(1, "Hamiltonian factorization residual", worst <= 1e-12,
         "max residual " + fmt_g17(worst));
}

// 2. Conservation: h in {0.1,0.4,0.8}, xi=0.5, one period at rtol 1e-10 ->
//    max |H-h| <= 1e-8.
static void criterion2() {
  double worst = 0;
  for (double h : {0.1, 0.4, 0.8}) {
    const LevelSet ls = trace_level_set(h, 0.5, 1e-7, 1e-10);
    for (const auto& p : ls.polyline)
      worst = std::max(worst, std::fabs(H_eval(p.y, p.z, 0.5) - h));
  }
  report(2, "energy conservation along closed orbits", worst <= 1e-8,
         "max |H-h| " + fmt_g17(worst));
}

// 3. Lambert separatrix anchor and root counts.
static void criterion3() {
  bool ok = true;
  std::string detail;
  const LambertRoots sep = lambert_roots(1.0, 0.5);
  if (std::fabs(sep.y_lower + 2.0) > 1e-10 || sep.y_upper) {
    ok = false;
    detail = "separatrix root y_lower = " + fmt_g17(sep.y_lower);
  }
  for (int k = 1; k <= 19 && ok; ++k) {
    const LambertRoots r = lambert_roots(0.05 * k, 0.5);
    if (!r.y_upper) {
      ok = false;
      detail = "missing second root at h = " + fmt_g17(0.05 * k);
    }
  }
  for (double h : {1.0, 1.5, 3.0}) {
    const LambertRoots r = lambert_roots(h, 0.5);
    if (r.y_upper) {
      ok = false;
      detail = "spurious second root at h = " + fmt_g17(h);
    }
  }
  if (ok) detail = "y_lower(1) = " + fmt_g17(sep.y_lower);
  report(3, "Lambert roots: anchor and count dichotomy", ok, detail);
}

// 4. Hopf formula: |alpha_H_numeric - (xi - eps xi^2)| <= 5 eps^2 for
//    eps in {1e-2, 1e-3}; supercriticality from trajectories on both sides.
static void criterion4() {
  bool ok = true;
  std::string detail;
  for (double eps : {1e-2, 1e-3}) {
    const HopfData h = hopf_locate_numeric(0.5, eps);
    const double err = std::fabs(h.alpha_H_numeric - hopf_alpha(0.5, eps));
    detail += "eps=" + fmt_g17(eps) + " err=" + fmt_g17(err) + " ";
    if (err > 5 * eps * eps) ok = false;
  }
  // trajectory check at eps = 1e-2
  const double eps = 1e-2, xi = 0.5;
  const HopfData h = hopf_locate_numeric(xi, eps);
  auto final_radius = [&](double alpha) {
    const Params p{eps, xi, alpha};
    Rhs f = [p](double, std::span<const double> s, std::span<double> ds) {
      const State3 d = slow_rhs(State3{s[0], s[1], s[2]}, p);
      ds[0] = d.x; ds[1] = d.y; ds[2] = d.z;
    };
    Jac j = [p](double, std::span<const double> s, Eigen::MatrixXd& J) {
      const Mat3 m = jacobian_slow(State3{s[0], s[1], s[2]}, p);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) J(a, b) = m[a][b];
    };
    IntegratorConfig cfg;
    cfg.method = Method::stiff;
    cfg.rtol = 1e-8;
    cfg.atol = {1e-10, 1e-10, 1e-8};
    const double s0[3] = {0.0, 1e-3, slow_manifold_z(0.0, 1e-3, p)};
    Trajectory tr = integrate_checked(f, j, s0, 0.0, 8000.0, cfg);
    double late = 0, all = 0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      all = std::max(all, std::fabs(tr.y[i][1]));
      if (tr.t[i] > 6000.0)
        late = std::max(late, std::hypot(tr.y[i][1], tr.y[i][2]));
    }
    return std::pair<double, double>(late, all);
  };
  const auto below = final_radius(h.alpha_H_numeric - 0.3 * eps);
  const auto above = final_radius(h.alpha_H_numeric + 0.3 * eps);
  if (!(below.first < 1e-4)) { ok = false; detail += "below-side not decaying "; }
  if (!(above.first > 1e-2 && above.second < 50.0)) {
    ok = false;
    detail += "above-side not a bounded oscillation ";
  }
  report(4, "Hopf location and supercriticality", ok, detail);
}

// 5. Melnikov-Hopf consistency + Fig.7-style curve golden file.
// The curve's pointwise values are archived, not asserted: the recorded
// numerical finding (validated against the raw 3D per-period H drift) is that
// Delta_eps changes sign at h* ~ 0.254, so the leading-order coefficient
// -Delta_eps/Delta_alpha of alpha_M - xi is the branch that dominates the
// plotted range.
static void criterion5() {
  const double ratio = delta_eps(1e-3, 0.5, 1e-9) / delta_alpha(1e-3, 0.5, 1e-9);
  bool ok = std::fabs(ratio - 0.25) <= 0.05 * 0.25;
  std::string detail = "ratio(h->0) = " + fmt_g17(ratio);
  double min_da = 1e300;
  double sign_change = 0;
  std::vector<MelnikovResult> rows;
  for (int k = 1; k <= 24; ++k) {
    const double h = 0.025 * k;
    MelnikovResult m = alpha_M(h, 0.5, 1e-3, 1e-7);  // defined on all of (0,0.6]
    min_da = std::min(min_da, m.delta_alpha);
    if (!rows.empty() && m.delta_eps < 0 && rows.back().delta_eps > 0)
      sign_change = h;
    rows.push_back(m);
  }
  detail += "; delta_eps sign change near h = " + fmt_g17(sign_change);
  min_da = std::min(min_da, delta_alpha(1.0, 0.5, 1e-7));
  if (min_da <= 0) {
    ok = false;
    detail += " delta_alpha not positive";
  }
  // golden curve: archived on first computation, compared afterwards
  const std::string path = golden_dir + "/melnikov_fig7_xi05.csv";
  std::ifstream in(path);
  if (!in.good()) {
    write_text(path, melnikov_csv(rows));
    detail += "; golden file created";
  } else {
    std::string header;
    std::getline(in, header);
    std::size_t i = 0;
    for (std::string line; std::getline(in, line) && i < rows.size(); ++i) {
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      std::getline(ss, cell, ',');
      const double da = std::stod(cell);
      std::getline(ss, cell, ',');
      const double de = std::stod(cell);
      if (std::fabs(da - rows[i].delta_alpha) > 1e-6 * std::fabs(da) ||
          std::fabs(de - rows[i].delta_eps) > 1e-6 * std::fabs(de)) {
        ok = false;
        detail += "; golden mismatch at row " + std::to_string(i);
        break;
      }
    }
    if (i == rows.size()) detail += "; golden match";
  }
  report(5, "Melnikov-Hopf consistency and Fig7 curve", ok, detail);
}

// 6. Closed-loop check of the Melnikov prediction at eps=1e-3, h=0.3.
static void criterion6() {
  const MelnikovResult m = alpha_M(0.3, 0.5, 1e-3, 1e-7);
  LimitCycleOptions opt;
  opt.closure_tol = 1e-6;  // weakly attracting near-Hamiltonian cycle
  const double yD = yD_from_h(0.3, 0.5);
  const std::array<double, 2> guess{-0.5 * yD, yD};
  const LimitCycle lc = find_limit_cycle({1e-3, 0.5, m.alpha_M}, &guess, opt);
  const double h_here = H_eval(lc.section_point[1], 0.0, 0.5);
  const bool ok = std::fabs(h_here - 0.3) <= 0.05;
  report(6, "limit cycle at alpha_M(0.3) carries energy 0.3 +- 0.05", ok,
         "H at section = " + fmt_g17(h_here) +
             ", alpha_M = " + fmt_g17(m.alpha_M));
}

// 7. Fixed-point catalogue.
static void criterion7() {
  const double xi = 0.5, al = 0.9;
  const ChartParams cp{xi, al, 0.0};
  bool ok = true;
  std::string detail;
  const auto pts = fixed_points_at_infinity(xi, al);
  if (pts.size() != 9) ok = false;
  double worst_eq = 0, worst_eig = 0;
  for (const auto& fp : pts) {
    const auto f = chart_rhs(fp.point, cp);
    double n2 = 0;
    for (double v : f) n2 += v * v;
    worst_eq = std::max(worst_eq, std::sqrt(n2));
    if (chart_dim(fp.chart) == 2) {
      const Mat2 J = chart_jacobian2(fp.point, cp);
      const double tr = J[0][0] + J[1][1];
      const double disc =
          (J[0][0] - J[1][1]) * (J[0][0] - J[1][1]) / 4.0 + J[0][1] * J[1][0];
      double l1, l2;
      if (disc >= 0) {
        l1 = tr / 2 + std::sqrt(disc);
        l2 = tr / 2 - std::sqrt(disc);
      } else {
        l1 = l2 = tr / 2;  // complex pair: compare real parts
      }
      double w1 = fp.eigenvalues[0], w2 = fp.eigenvalues[1];
      if (w1 < w2) std::swap(w1, w2);
      if (l1 < l2) std::swap(l1, l2);
      worst_eig = std::max({worst_eig, std::fabs(l1 - w1), std::fabs(l2 - w2)});
    }
  }
  if (worst_eq > 1e-14) ok = false;
  if (worst_eig > 1e-8) ok = false;
  detail = "max |rhs| = " + fmt_g17(worst_eq) +
           ", max eig dev = " + fmt_g17(worst_eig);
  report(7, "nine-point catalogue: equilibria and eigenvalues", ok, detail);
}

// 8. Lemma-6 heteroclinic residual on 100 samples.
static void criterion8() {
  double worst = 0;
  for (int k = 1; k < 100; ++k) {
    const double y = (2.0 * 0.9 / 0.5) * k / 100.0;
    worst = std::max(worst, verify_heteroclinic_L0(0.9, 0.5, y));
  }
  report(8, "heteroclinic parabola residual on L0", worst <= 1e-12,
         "max residual " + fmt_g17(worst));
}

// 9. Finite-time blow-up Cauchy certificate.
static void criterion9() {
  const double y0 = lambert_roots(1.5, 0.5).y_lower;
  const BlowupResult b = finite_time_blowup(0.5, 0.5, StateR{y0, 0.0});
  const bool ok = b.cauchy_diffs.back() < 1e-4 && std::isfinite(b.t_star);
  report(9, "finite-time blow-up (H=1.5 seed, alpha=xi)", ok,
         "t* = " + fmt_g17(b.t_star) +
             ", |t(1e-2)-t(1e-3)| = " + fmt_g17(b.cauchy_diffs.back()));
}

// 10. Conjecture-1 behaviour at desk scale: eps in {1e-2,1e-3,1e-4}.
static void criterion10() {
  const SingularCycle g = build_gamma0(0.9, 0.5);
  bool ok = true;
  std::string detail;
  double prev_amp = -1, prev_dist = 1e300;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const LimitCycle lc = find_limit_cycle({eps, 0.5, 0.9});
    const double d = hausdorff_to_gamma0(lc, g);
    detail += "eps=" + fmt_g17(eps) + ": amp=" + fmt_g17(lc.amplitude_y) +
              " dist=" + fmt_g17(d) + " ";
    if (!(lc.amplitude_y > prev_amp)) { ok = false; detail += "[amp not up] "; }
    if (!(d < prev_dist)) { ok = false; detail += "[dist not down] "; }
    if (!lc.stable) { ok = false; detail += "[unstable] "; }
    prev_amp = lc.amplitude_y;
    prev_dist = d;
  }
  report(10, "Gamma_eps -> Gamma_0 trend with stability", ok, detail);
}

// 11. Hopf amplitude scaling: fit exponent 0.5 +- 0.1 near onset.
static void criterion11() {
  const double eps = 1e-3, xi = 0.5;
  const HopfData h = hopf_locate_numeric(xi, eps);
  const std::vector<double> offsets{5e-6, 1e-5, 2e-5, 4e-5};
  LimitCycleOptions opt;
  opt.closure_tol = 1e-6;  // onset cycles contract only at O(eps (a - a_H))
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double alpha = h.alpha_H_numeric + offsets[i];
    // seed on the energy shell the Melnikov family predicts for this alpha
    double lo = 1e-4, hi = 0.3;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (alpha_M(mid, xi, eps, 1e-6).alpha_M < alpha ? lo : hi) = mid;
    }
    const double yD = yD_from_h(0.5 * (lo + hi), xi);
    const std::array<double, 2> guess{-xi * yD, yD};
    try {
      const LimitCycle lc = find_limit_cycle({eps, xi, alpha}, &guess, opt);
      const double lx = std::log(offsets[i]), ly = std::log(lc.amplitude_y);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      ++n;
    } catch (const std::exception& e) {
      ok = false;
      detail += "offset " + fmt_g17(offsets[i]) + ": " + e.what() + " ";
    }
  }
  double slope = 0;
  if (n >= 3) {
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (std::fabs(slope - 0.5) > 0.1) ok = false;
  } else {
    ok = false;
  }
  report(11, "Hopf onset amplitude exponent 0.5 +- 0.1", ok,
         detail + "fit exponent = " + fmt_g17(slope));
}

// 12. Reduced-flow dichotomy around alpha = xi.
static void criterion12() {
  bool ok = true;
  std::string detail;
  IntegratorConfig cfg;
  cfg.method = Method::explicit_rk;
  cfg.rtol = 1e-10;
  cfg.atol = {1e-12, 1e-12};
  {  // alpha = 0.45: inside seed contracts below 1e-3
    Rhs f = [](double, std::span<const double> s, std::span<double> ds) {
      const StateR d = reduced_rhs(StateR{s[0], s[1]}, 0.5, 0.45);
      ds[0] = d.y; ds[1] = d.z;
    };
    EventSpec in;
    in.g = [](double, std::span<const double> s) {
      return std::hypot(s[0], s[1]) - 1e-3;
    };
    in.direction = -1;
    in.terminal = true;
    const double s0[2] = {0.5, 0.0};
    Trajectory tr = integrate_checked(f, nullptr, s0, 0.0, 3000.0, cfg, {in});
    if (tr.status != IntStatus::terminal_event) {
      ok = false;
      detail += "inside seed did not contract ";
    }
    // outside seed enters the Q1 regime
    EventSpec zl;
    zl.g = [](double, std::span<const double> s) { return s[1] - 5.0; };
    zl.direction = +1;
    zl.terminal = true;
    const double s1[2] = {-3.0, 0.0};
    Trajectory t2 = integrate_checked(f, nullptr, s1, 0.0, 3000.0, cfg, {zl});
    if (t2.status != IntStatus::terminal_event) {
      ok = false;
      detail += "outside seed did not escape ";
    }
  }
  {  // alpha = 0.55: H increases across successive crossings
    Rhs f = [](double, std::span<const double> s, std::span<double> ds) {
      const StateR d = reduced_rhs(StateR{s[0], s[1]}, 0.5, 0.55);
      ds[0] = d.y; ds[1] = d.z;
    };
    EventSpec cross;
    cross.g = [](double, std::span<const double> s) { return s[1]; };
    cross.direction = -1;
    cross.id = 1;
    EventSpec escape;  // the spiral blows up in finite time past some turn
    escape.g = [](double, std::span<const double> s) { return s[1] - 5.0; };
    escape.direction = +1;
    escape.terminal = true;
    const double s0[2] = {0.01, 0.0};
    Trajectory tr =
        integrate_checked(f, nullptr, s0, 0.0, 4000.0, cfg, {cross, escape});
    std::vector<double> hs;
    for (const auto& ev : tr.events) hs.push_back(H_eval(ev.state[0], ev.state[1], 0.5));
    if (hs.size() < 5) {
      ok = false;
      detail += "too few crossings ";
    }
    for (std::size_t i = 1; i < hs.size(); ++i)
      if (!(hs[i] > hs[i - 1])) {
        ok = false;
        detail += "H not increasing ";
        break;
      }
  }
  if (detail.empty()) detail = "both regimes as predicted";
  report(12, "reduced-flow dichotomy across alpha = xi", ok, detail);
}

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--golden-dir") == 0) golden_dir = argv[i + 1];
  guard(1, "Hamiltonian factorization residual", criterion1);
  guard(2, "energy conservation along closed orbits", criterion2);
  guard(3, "Lambert roots: anchor and count dichotomy", criterion3);
  guard(4, "Hopf location and supercriticality", criterion4);
  guard(5, "Melnikov-Hopf consistency and Fig7 curve", criterion5);
  guard(6, "limit cycle at alpha_M(0.3) carries energy 0.3 +- 0.05", criterion6);
  guard(7, "nine-point catalogue: equilibria and eigenvalues", criterion7);
  guard(8, "heteroclinic parabola residual on L0", criterion8);
  guard(9, "finite-time blow-up (H=1.5 seed, alpha=xi)", criterion9);
  guard(10, "Gamma_eps -> Gamma_0 trend with stability", criterion10);
  guard(11, "Hopf onset amplitude exponent 0.5 +- 0.1", criterion11);
  guard(12, "reduced-flow dichotomy across alpha = xi", criterion12);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
