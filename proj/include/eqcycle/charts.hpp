#pragma once

// Compactification atlas: Poincare hemispheres S^{2,+} (reduced plane) and
// S^{3,+} (full space), directional charts, the blow-up stack at infinity
// (including the exponential blow-up and the q = e^{-2/w} augmentation),
// chart transitions, de-singularized fields with their time-rescaling
// factors, and the catalogue of fixed points at infinity.
//
// Chart coordinates (in order):
//   R2          (y, z)                 reduced plane, original slow time
//   K2_2D       (y2, z2)               = R2 embedded at W=1
//   K3_2D       (w3, y3)               Z=1 chart; field / e^{1/w3}
//   K1_2D       (w1, z1)               Y=1 chart; raw field
//   KAP1        (omega1, r1)           w=r*omega, z=r;  field / (e^{1/omega}/r)
//   KAP2        (zeta2, r2)            w=r, z=r*zeta;   field / (e^{zeta}/r)
//   KAP3        (omega3, r3)           w=r*omega, z=-r; field / omega
//   KAP3_EXP    (rho, eta)             omega=rho, r = e^{-1/rho} eta/rho; x eta
//   R3          (x, y, z)              full space, slow time
//   K2_3D       (x2, y2, z2, eps)      fast problem, eps carried as a state
//   K3_3D       (x3, y3, w3, eps)      Z=1 chart of S^{3,+}; field / e^{1/w3}
//   K1_3D       (x1, z1, w1, eps)      Y=1 chart; field / e^{z1/w1}
//   K3Q         (w, x, y, q, eps)      q = e^{-2/w} augmentation; field * w
//   QEPS_K1     (w, xt, y, eps1)       q=r1, eps=r1*eps1; xt=x+xi*y+1; / r1
//   QEPS_K2     (w, x, y, q2)          q=r2*q2, eps=r2 (r2 = eps const); / r2
//   HATK1       (r, x, y, q)           w=r, q2=r*q; field / r
//   HATK1_RHO_SIGMA (sigma, y, rho)    r=rho*sigma, q=rho on x=-1-alpha; / rho

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "eqcycle/model.hpp"

namespace eqcycle {

enum class ChartId {
  R2, K2_2D, K3_2D, K1_2D, KAP1, KAP2, KAP3, KAP3_EXP,
  R3, K2_3D, K3_3D, K1_3D, K3Q, QEPS_K1, QEPS_K2, HATK1, HATK1_RHO_SIGMA,
};

struct ChartParams {
  double xi;
  double alpha;
  double eps = 0.0;
};

struct ChartPoint {
  ChartId chart;
  std::vector<double> c;
};

int chart_dim(ChartId id);
std::string chart_name(ChartId id);
std::vector<std::string> chart_coord_names(ChartId id);

// Validity-domain predicate (radial/weight coordinates nonnegative where the
// chart requires).  chart_rhs and transition refuse points outside it.
bool chart_contains(const ChartPoint& p);

// Coordinate change between overlapping charts.  Throws domain_error when the
// pair has no defined map or the point is outside the overlap; never
// extrapolates silently.  QEPS_K1 is reachable from K3Q only (its radial
// variable is projected out); the inverse of HATK1_RHO_SIGMA sets
// x = -1-alpha (center-manifold convention).
ChartPoint transition(const ChartPoint& p, ChartId target, const ChartParams& cp);

// De-singularized vector field of the chart, exactly with all exponential
// terms.  paper_approximation=true replaces 1-e^{-1/w} by 1 in the augmented
// y-equations (the simplification used to present the intermediate systems).
std::vector<double> chart_rhs(const ChartPoint& p, const ChartParams& cp,
                              bool paper_approximation = false);

// Analytic Jacobian of chart_rhs; implemented for the 2D charts.
Mat2 chart_jacobian2(const ChartPoint& p, const ChartParams& cp);

// dt/dtau: factor relating original slow time t to the chart's
// de-singularized time; integrate it along a chart trajectory to recover t.
double time_factor(const ChartPoint& p, const ChartParams& cp);

struct InfinityFixedPoint {
  std::string name;  // Q1..Q7, O1, O3
  ChartId chart;     // chart carrying the stability data
  ChartPoint point;
  std::vector<double> eigenvalues;
  std::string note;  // improper-node | node | saddle | center-direction | ...
  std::array<double, 4> sphere;  // (X,Y,Z,W) on S^{3,+}
  // (x3,y3,w3) in K3 or (x1,z1,w1) in K1 where the point is visible
  std::optional<ChartId> chart3d;
  std::vector<double> coords3d;
};

std::vector<InfinityFixedPoint> fixed_points_at_infinity(double xi, double alpha);

// (x,y,z) -> (X,Y,Z,W) with W > 0, unit norm.
std::array<double, 4> project_to_sphere(const State3& s);

// Sphere embedding of chart points (reduced-plane points are lifted to C0).
std::array<double, 4> sphere_from_reduced(const StateR& s, double xi);
std::array<double, 4> sphere_from_k3_2d(double w3, double y3, double xi);
std::array<double, 4> sphere_from_k3_3d(double x3, double y3, double w3);
std::array<double, 4> sphere_from_k1_3d(double x1, double z1, double w1);

// Tangency defect of sigma = 2(alpha/xi) y - y^2 in the rho=0 restriction of
// the HATK1_RHO_SIGMA field; vanishes identically for y in (0, 2 alpha/xi).
double verify_heteroclinic_L0(double alpha, double xi, double y);

// Machine-readable atlas description (charts, domains, transitions,
// time factors, fixed points) for documentation and plotting.
std::string atlas_json(double xi, double alpha);

}  // namespace eqcycle
