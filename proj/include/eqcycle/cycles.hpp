#pragma once

// The singular cycle Gamma_0 (alpha > xi), numerical limit cycles of the full
// system located through a Poincare return map on {z=0, dz/dt<0}, Hausdorff
// convergence measurements on S^{3,+}, bifurcation sweeps, finite-time
// blow-up certification, and the W^{c,s}/W^{c,u} separatrix traces.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "eqcycle/charts.hpp"
#include "eqcycle/model.hpp"
#include "eqcycle/ode.hpp"

namespace eqcycle {

using SpherePoint = std::array<double, 4>;

struct GammaSegment {
  std::string tag;  // gamma12, gamma24, gamma45, gamma56, Wcu
  std::vector<SpherePoint> sphere;
};

struct SingularCycle {
  double alpha, xi;
  std::vector<GammaSegment> segments;  // in traversal order Q1->Q2->Q4->Q5->Q6->Q1
  std::vector<std::pair<std::string, SpherePoint>> corners;  // Q1,Q2,Q4,Q5,Q6
  double max_corner_gap;   // junction mismatch of the closed-form segments
  double wcu_seed_gap;     // sphere distance, trace start vs exact Q6
  double wcu_end_gap;      // sphere distance, trace end vs exact Q1
};

SingularCycle build_gamma0(double alpha, double xi, int samples_per_segment = 200);

enum class SepKind { Wcs, Wcu };

struct SeparatrixTrace {
  SepKind kind;
  double alpha, xi;
  std::vector<ChartPoint> points;        // mixed charts, in trace order
  std::vector<StateR> plane;             // reduced-plane samples (finite part)
  std::vector<double> axis_crossings_y;  // y at z=0 crossings, in order
  std::string final_chart;
};

// Wcs: seed on the center direction at Q3 (chart K3_2D), integrate backward.
// Wcu: seed on the center manifold at Q6 (chart KAP3_EXP), integrate forward.
// seed_offset <= 0 picks the per-kind default (1e-4 for Wcs, 0.1 for Wcu; the
// Wcu offset is the rho coordinate and must stay representable: e^{-1/rho}).
SeparatrixTrace trace_separatrix(SepKind kind, double alpha, double xi,
                                 double seed_offset = 0.0);

struct LimitCycleOptions {
  double closure_tol = 1e-8;  // absolute, on the section residual
  double rtol = 1e-10;
  std::vector<double> atol{1e-12, 1e-12, 1e-10};
  int max_newton = 30;
  int burn_in_crossings = 8;
  double t_budget = 2e5;
};

struct LimitCycle {
  Params params;
  std::string section = "z=0, dz/dt<0";
  std::array<double, 2> section_point;  // (x, y) fixed point of the return map
  Trajectory orbit;                     // one period from the section point
  double period;
  double amplitude_y;  // max y - min y
  double closure_gap;
  std::array<std::complex<double>, 3> multipliers;  // trivial first
  double trivial_defect;  // |mu_0 - 1|
  bool stable;
  bool best_effort = false;  // eps below the supported envelope
};

LimitCycle find_limit_cycle(const Params& p,
                            const std::array<double, 2>* guess = nullptr,
                            const LimitCycleOptions& opt = {});

// Symmetric chordal Hausdorff distance on S^{3,+} between the sphere-projected
// cycle and the union of Gamma_0's segments; polylines are densified until the
// value moves by < 1%.
double hausdorff_to_gamma0(const LimitCycle& c, const SingularCycle& g);
double hausdorff_polylines(const std::vector<std::vector<SpherePoint>>& a,
                           const std::vector<std::vector<SpherePoint>>& b);

enum class SweepMode { amplitude_vs_alpha, amplitude_vs_eps };

struct BifurcationRow {
  double param;
  double amplitude;
  double period;
  double max_multiplier;  // modulus of the largest nontrivial multiplier
  std::string status;     // "ok" or "gap"
};

// Continuation by parameter stepping with warm-started find_limit_cycle.
// amplitude_vs_alpha: fixed.eps held; amplitude_vs_eps: fixed.alpha held.
std::vector<BifurcationRow> bifurcation_diagram(double xi, SweepMode mode,
                                                const Params& fixed,
                                                const std::vector<double>& grid,
                                                const LimitCycleOptions& opt = {});

struct BlowupResult {
  double t_star;                    // original-time blow-up estimate
  double switch_time;               // time spent before the K3_2D hand-off
  std::vector<double> w3_levels;    // {1e-1, 1e-2, 1e-3}
  std::vector<double> t_estimates;  // original time at each level
  std::vector<double> cauchy_diffs; // successive differences
};

// Certifies finite original-time escape of the reduced flow by integrating in
// chart K3_2D with the e^{-1/w3} time-rescaling ledger.  Preconditions:
// alpha > xi, or alpha = xi with H(s0) >= 1 (else domain_error).
BlowupResult finite_time_blowup(double alpha, double xi, const StateR& s0);

}  // namespace eqcycle
