#include "eqcycle/charts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace eqcycle {

namespace {

// e^{-1/w} with its w -> 0+ limit; the flat zero is the whole point of the
// exponential blow-up machinery.
double em1(double w) {
  if (w < 0) throw std::domain_error("chart: radial coordinate must be >= 0");
  return w == 0 ? 0.0 : std::exp(-1.0 / w);
}

double em2(double w) {
  if (w < 0) throw std::domain_error("chart: radial coordinate must be >= 0");
  return w == 0 ? 0.0 : std::exp(-2.0 / w);
}

[[noreturn]] void bad_pair(ChartId a, ChartId b) {
  throw std::domain_error("transition " + chart_name(a) + " -> " + chart_name(b) +
                          " is not defined");
}

void need(bool cond, const char* what) {
  if (!cond) throw std::domain_error(std::string("transition: ") + what);
}

ChartPoint mk(ChartId id, std::vector<double> c) { return ChartPoint{id, std::move(c)}; }

}  // namespace

int chart_dim(ChartId id) {
  switch (id) {
    case ChartId::R2: case ChartId::K2_2D: case ChartId::K3_2D:
    case ChartId::K1_2D: case ChartId::KAP1: case ChartId::KAP2:
    case ChartId::KAP3: case ChartId::KAP3_EXP:
      return 2;
    case ChartId::R3: case ChartId::HATK1_RHO_SIGMA:
      return 3;
    case ChartId::K2_3D: case ChartId::K3_3D: case ChartId::K1_3D:
    case ChartId::QEPS_K1: case ChartId::QEPS_K2: case ChartId::HATK1:
      return 4;
    case ChartId::K3Q:
      return 5;
  }
  return 0;
}

std::string chart_name(ChartId id) {
  switch (id) {
    case ChartId::R2: return "R2";
    case ChartId::K2_2D: return "K2_2D";
    case ChartId::K3_2D: return "K3_2D";
    case ChartId::K1_2D: return "K1_2D";
    case ChartId::KAP1: return "KAP1";
    case ChartId::KAP2: return "KAP2";
    case ChartId::KAP3: return "KAP3";
    case ChartId::KAP3_EXP: return "KAP3_EXP";
    case ChartId::R3: return "R3";
    case ChartId::K2_3D: return "K2_3D";
    case ChartId::K3_3D: return "K3_3D";
    case ChartId::K1_3D: return "K1_3D";
    case ChartId::K3Q: return "K3Q";
    case ChartId::QEPS_K1: return "QEPS_K1";
    case ChartId::QEPS_K2: return "QEPS_K2";
    case ChartId::HATK1: return "HATK1";
    case ChartId::HATK1_RHO_SIGMA: return "HATK1_RHO_SIGMA";
  }
  return "?";
}

std::vector<std::string> chart_coord_names(ChartId id) {
  switch (id) {
    case ChartId::R2: return {"y", "z"};
    case ChartId::K2_2D: return {"y2", "z2"};
    case ChartId::K3_2D: return {"w3", "y3"};
    case ChartId::K1_2D: return {"w1", "z1"};
    case ChartId::KAP1: return {"omega1", "r1"};
    case ChartId::KAP2: return {"zeta2", "r2"};
    case ChartId::KAP3: return {"omega3", "r3"};
    case ChartId::KAP3_EXP: return {"rho", "eta"};
    case ChartId::R3: return {"x", "y", "z"};
    case ChartId::K2_3D: return {"x2", "y2", "z2", "eps"};
    case ChartId::K3_3D: return {"x3", "y3", "w3", "eps"};
    case ChartId::K1_3D: return {"x1", "z1", "w1", "eps"};
    case ChartId::K3Q: return {"w", "x", "y", "q", "eps"};
    case ChartId::QEPS_K1: return {"w", "xt", "y", "eps1"};
    case ChartId::QEPS_K2: return {"w", "x", "y", "q2"};
    case ChartId::HATK1: return {"r", "x", "y", "q"};
    case ChartId::HATK1_RHO_SIGMA: return {"sigma", "y", "rho"};
  }
  return {};
}

bool chart_contains(const ChartPoint& p) {
  const auto& c = p.c;
  if (static_cast<int>(c.size()) != chart_dim(p.chart)) return false;
  auto nonneg = [&](std::initializer_list<int> idx) {
    for (int i : idx)
      if (c[static_cast<std::size_t>(i)] < 0) return false;
    return true;
  };
  switch (p.chart) {
    case ChartId::R2: case ChartId::K2_2D: case ChartId::R3:
      return true;
    case ChartId::K2_3D: return c[3] >= 0;
    case ChartId::K3_2D: return nonneg({0});
    case ChartId::K1_2D: return nonneg({0});
    case ChartId::KAP1: return nonneg({0, 1});
    case ChartId::KAP2: return nonneg({1});
    case ChartId::KAP3: return nonneg({0, 1});
    case ChartId::KAP3_EXP: return nonneg({0, 1});
    case ChartId::K3_3D: return nonneg({2, 3});
    case ChartId::K1_3D: return nonneg({2, 3});
    case ChartId::K3Q: return nonneg({0, 3, 4});
    case ChartId::QEPS_K1: return nonneg({0, 3});
    case ChartId::QEPS_K2: return nonneg({0, 3});
    case ChartId::HATK1: return nonneg({0, 3});
    case ChartId::HATK1_RHO_SIGMA: return nonneg({0, 2});
  }
  return false;
}

ChartPoint transition(const ChartPoint& p, ChartId target, const ChartParams& cp) {
  const ChartId s = p.chart;
  const auto& c = p.c;
  if (static_cast<int>(c.size()) != chart_dim(s))
    throw std::domain_error("transition: coordinate count mismatch");
  if (!chart_contains(p))
    throw std::domain_error("transition: point outside the " + chart_name(s) +
                            " validity domain");
  if (s == target) return p;

  // --- reduced plane ---
  if (s == ChartId::R2 && target == ChartId::K2_2D) return mk(target, {c[0], c[1]});
  if (s == ChartId::K2_2D && target == ChartId::R2) return mk(target, {c[0], c[1]});
  if (s == ChartId::K2_2D && target == ChartId::K3_2D) {
    need(c[1] > 0, "K2->K3 needs z2 > 0");
    return mk(target, {1.0 / c[1], c[0] / c[1]});
  }
  if (s == ChartId::K3_2D && target == ChartId::K2_2D) {
    need(c[0] > 0, "K3->K2 needs w3 > 0");
    return mk(target, {c[1] / c[0], 1.0 / c[0]});
  }
  if (s == ChartId::K2_2D && target == ChartId::K1_2D) {
    need(c[0] > 0, "K2->K1 needs y2 > 0");
    return mk(target, {1.0 / c[0], c[1] / c[0]});
  }
  if (s == ChartId::K1_2D && target == ChartId::K2_2D) {
    need(c[0] > 0, "K1->K2 needs w1 > 0");
    return mk(target, {1.0 / c[0], c[1] / c[0]});
  }
  if (s == ChartId::K3_2D && target == ChartId::K1_2D) {
    need(c[1] > 0, "K3->K1 needs y3 > 0");
    return mk(target, {c[0] / c[1], 1.0 / c[1]});
  }
  if (s == ChartId::K1_2D && target == ChartId::K3_2D) {
    need(c[1] > 0, "K1->K3 needs z1 > 0");
    return mk(target, {c[0] / c[1], 1.0 / c[1]});
  }
  if (s == ChartId::K1_2D && target == ChartId::KAP1) {
    need(c[1] > 0, "K1->KAP1 needs z1 > 0");
    return mk(target, {c[0] / c[1], c[1]});
  }
  if (s == ChartId::KAP1 && target == ChartId::K1_2D) {
    need(c[1] > 0, "KAP1->K1 needs r1 > 0");
    return mk(target, {c[1] * c[0], c[1]});
  }
  if (s == ChartId::K1_2D && target == ChartId::KAP2) {
    need(c[0] > 0, "K1->KAP2 needs w1 > 0");
    return mk(target, {c[1] / c[0], c[0]});
  }
  if (s == ChartId::KAP2 && target == ChartId::K1_2D) {
    need(c[1] > 0, "KAP2->K1 needs r2 > 0");
    return mk(target, {c[1], c[1] * c[0]});
  }
  if (s == ChartId::K1_2D && target == ChartId::KAP3) {
    need(c[1] < 0, "K1->KAP3 needs z1 < 0");
    return mk(target, {-c[0] / c[1], -c[1]});
  }
  if (s == ChartId::KAP3 && target == ChartId::K1_2D) {
    need(c[1] > 0, "KAP3->K1 needs r3 > 0");
    return mk(target, {c[1] * c[0], -c[1]});
  }
  if (s == ChartId::KAP1 && target == ChartId::KAP2) {
    need(c[0] > 0, "KAP1->KAP2 needs omega1 > 0");
    return mk(target, {1.0 / c[0], c[1] * c[0]});
  }
  if (s == ChartId::KAP2 && target == ChartId::KAP1) {
    need(c[0] > 0, "KAP2->KAP1 needs zeta2 > 0");
    return mk(target, {1.0 / c[0], c[1] * c[0]});
  }
  if (s == ChartId::KAP2 && target == ChartId::KAP3) {
    need(c[0] < 0, "KAP2->KAP3 needs zeta2 < 0");
    return mk(target, {-1.0 / c[0], -c[1] * c[0]});
  }
  if (s == ChartId::KAP3 && target == ChartId::KAP2) {
    need(c[0] > 0, "KAP3->KAP2 needs omega3 > 0");
    return mk(target, {-1.0 / c[0], c[1] * c[0]});
  }
  if (s == ChartId::KAP3 && target == ChartId::KAP3_EXP) {
    need(c[0] > 0, "KAP3->EXP needs omega3 > 0");
    const double eta = c[1] * c[0] * std::exp(1.0 / c[0]);
    if (!std::isfinite(eta))
      throw std::domain_error("KAP3->EXP: eta overflows; omega3 too small");
    return mk(target, {c[0], eta});
  }
  if (s == ChartId::KAP3_EXP && target == ChartId::KAP3) {
    need(c[0] > 0, "EXP->KAP3 needs rho > 0");
    return mk(target, {c[0], em1(c[0]) * c[1] / c[0]});
  }

  // --- full space ---
  if (s == ChartId::R3 && target == ChartId::K2_3D)
    return mk(target, {c[0], c[1], c[2], cp.eps});
  if (s == ChartId::K2_3D && target == ChartId::R3)
    return mk(target, {c[0], c[1], c[2]});
  if (s == ChartId::K2_3D && target == ChartId::K3_3D) {
    need(c[2] > 0, "K2->K3 needs z2 > 0");
    return mk(target, {c[0] / c[2], c[1] / c[2], 1.0 / c[2], c[3]});
  }
  if (s == ChartId::K3_3D && target == ChartId::K2_3D) {
    need(c[2] > 0, "K3->K2 needs w3 > 0");
    return mk(target, {c[0] / c[2], c[1] / c[2], 1.0 / c[2], c[3]});
  }
  if (s == ChartId::K2_3D && target == ChartId::K1_3D) {
    need(c[1] > 0, "K2->K1 needs y2 > 0");
    return mk(target, {c[0] / c[1], c[2] / c[1], 1.0 / c[1], c[3]});
  }
  if (s == ChartId::K1_3D && target == ChartId::K2_3D) {
    need(c[2] > 0, "K1->K2 needs w1 > 0");
    return mk(target, {c[0] / c[2], 1.0 / c[2], c[1] / c[2], c[3]});
  }
  if (s == ChartId::K3_3D && target == ChartId::K1_3D) {
    need(c[1] > 0, "K3->K1 needs y3 > 0");
    return mk(target, {c[0] / c[1], 1.0 / c[1], c[2] / c[1], c[3]});
  }
  if (s == ChartId::K1_3D && target == ChartId::K3_3D) {
    need(c[1] > 0, "K1->K3 needs z1 > 0");
    return mk(target, {c[0] / c[1], 1.0 / c[1], c[2] / c[1], c[3]});
  }
  if (s == ChartId::K3_3D && target == ChartId::K3Q) {
    need(c[2] >= 0, "K3->K3Q needs w3 >= 0");
    return mk(target, {c[2], c[0], c[1], em2(c[2]), c[3]});
  }
  if (s == ChartId::K3Q && target == ChartId::K3_3D) {
    const double qw = em2(c[0]);
    need(std::fabs(c[3] - qw) <= 1e-6 * std::max(qw, 1e-300),
         "K3Q->K3: q is not on the slaved set q = e^{-2/w}");
    return mk(target, {c[1], c[2], c[0], c[4]});
  }
  if (s == ChartId::K3Q && target == ChartId::QEPS_K1) {
    need(c[3] > 0, "K3Q->QEPS_K1 needs q > 0");
    const double xt = c[1] + cp.xi * c[2] + 1.0;
    return mk(target, {c[0], xt, c[2], c[4] / c[3]});
  }
  if (s == ChartId::K3Q && target == ChartId::QEPS_K2) {
    need(c[4] > 0, "K3Q->QEPS_K2 needs eps > 0");
    return mk(target, {c[0], c[1], c[2], c[3] / c[4]});
  }
  if (s == ChartId::QEPS_K2 && target == ChartId::K3Q) {
    need(cp.eps > 0, "QEPS_K2->K3Q needs cp.eps > 0 (the blow-up radius)");
    return mk(target, {c[0], c[1], c[2], c[3] * cp.eps, cp.eps});
  }
  if (s == ChartId::QEPS_K1 && target == ChartId::QEPS_K2) {
    need(c[3] > 0, "QEPS_K1->QEPS_K2 needs eps1 > 0");
    const double x = c[1] - cp.xi * c[2] - 1.0;
    return mk(target, {c[0], x, c[2], 1.0 / c[3]});
  }
  if (s == ChartId::QEPS_K2 && target == ChartId::QEPS_K1) {
    need(c[3] > 0, "QEPS_K2->QEPS_K1 needs q2 > 0");
    const double xt = c[1] + cp.xi * c[2] + 1.0;
    return mk(target, {c[0], xt, c[2], 1.0 / c[3]});
  }
  if (s == ChartId::QEPS_K2 && target == ChartId::HATK1) {
    need(c[0] > 0, "QEPS_K2->HATK1 needs w > 0");
    return mk(target, {c[0], c[1], c[2], c[3] / c[0]});
  }
  if (s == ChartId::HATK1 && target == ChartId::QEPS_K2) {
    need(c[0] > 0, "HATK1->QEPS_K2 needs r > 0");
    return mk(target, {c[0], c[1], c[2], c[3] * c[0]});
  }
  if (s == ChartId::HATK1 && target == ChartId::HATK1_RHO_SIGMA) {
    need(c[3] > 0, "HATK1->RHO_SIGMA needs q > 0");
    need(std::fabs(c[1] + 1.0 + cp.alpha) <= 0.1,
         "HATK1->RHO_SIGMA: point not near the center manifold x = -1-alpha");
    return mk(target, {c[0] / c[3], c[2], c[3]});
  }
  if (s == ChartId::HATK1_RHO_SIGMA && target == ChartId::HATK1) {
    // x pinned to the leading center-manifold value
    return mk(target, {c[2] * c[0], -1.0 - cp.alpha, c[1], c[2]});
  }
  bad_pair(s, target);
}

std::vector<double> chart_rhs(const ChartPoint& p, const ChartParams& cp,
                              bool paper_approximation) {
  const double xi = cp.xi, al = cp.alpha;
  require_xi(xi);
  const auto& c = p.c;
  if (static_cast<int>(c.size()) != chart_dim(p.chart))
    throw std::domain_error("chart_rhs: coordinate count mismatch");
  if (!chart_contains(p))
    throw std::domain_error("chart_rhs: point outside the " +
                            chart_name(p.chart) + " validity domain");
  switch (p.chart) {
    case ChartId::R2:
    case ChartId::K2_2D: {
      const StateR d = reduced_rhs(StateR{c[0], c[1]}, xi, al);
      return {d.y, d.z};
    }
    case ChartId::K3_2D: {
      const double w = c[0], y = c[1], E = em1(w);
      return {-w * (al - xi * y) + xi * w * w * (1.0 - E),
              -y * (al - xi * y) + w * (1.0 + xi * y) * (1.0 - E)};
    }
    case ChartId::K1_2D: {
      const double w = c[0], z = c[1];
      double F;  // e^{z/w}
      if (w == 0) {
        if (z >= 0 && z != 0)
          throw std::domain_error("K1_2D: w=0 with z>0 is outside the chart");
        F = z == 0 ? 1.0 : 0.0;
      } else {
        F = checked_exp(z / w);
      }
      return {w * w * (1.0 - F),
              w * (xi + z) * (1.0 - F) + F * (al * z - xi)};
    }
    case ChartId::KAP1: {
      const double om = c[0], r = c[1], E = em1(om);
      return {om * (xi - al * r) + r * om * om * xi * (1.0 - E),
              -r * (xi - al * r) - r * r * om * (xi + r) * (1.0 - E)};
    }
    case ChartId::KAP2: {
      const double ze = c[0], r = c[1];
      const double g = checked_exp(-ze) - 1.0;
      return {xi * r * g + al * r * ze - xi, r * r * r * g};
    }
    case ChartId::KAP3: {
      const double om = c[0], r = c[1], E = em1(om);
      if (r <= 0 && om > 0)
        throw std::domain_error("KAP3: r3 must be > 0 away from omega3 = 0");
      const double Eor = om == 0 ? 0.0 : E / om;
      const double Err = (E == 0.0) ? 0.0 : E / r;
      return {xi * om * (1.0 - E) - Err * (al * r + xi),
              -r * (xi - r) * (1.0 - E) + Eor * (al * r + xi)};
    }
    case ChartId::KAP3_EXP: {
      const double rho = c[0], eta = c[1], E = em1(rho);
      const double Eor = rho == 0 ? 0.0 : E / rho;
      return {xi * rho * rho * (eta * (1.0 - E) - 1.0) - al * rho * eta * E,
              eta * eta * (1.0 - E) * (eta * E - xi) + al * eta * eta * Eor +
                  xi * eta};
    }
    case ChartId::R3: {
      const State3 d = slow_rhs(State3{c[0], c[1], c[2]},
                                Params{cp.eps, xi, al});
      return {d.x, d.y, d.z};
    }
    case ChartId::K2_3D: {
      const State3 d = fast_rhs(State3{c[0], c[1], c[2]}, Params{c[3], xi, al});
      return {d.x, d.y, d.z, 0.0};
    }
    case ChartId::K3_3D: {
      const double x = c[0], y = c[1], w = c[2], eps = c[3];
      const double common = em2(w) * (y + (x + 1.0) / xi);
      const double ycor = paper_approximation ? w : w * (1.0 - em1(w));
      return {-eps * (x + 1.0 + al) + x * common,
              eps * ycor + y * common,
              w * common, 0.0};
    }
    case ChartId::K1_3D: {
      const double x = c[0], z = c[1], w = c[2], eps = c[3];
      double Fz;  // e^{-z/w}
      if (w == 0) {
        if (z < 0) throw std::domain_error("K1_3D: w=0 needs z1 >= 0");
        Fz = z == 0 ? 1.0 : 0.0;
      } else {
        Fz = checked_exp(-z / w);
      }
      const double F2z = w == 0 ? (z == 0 ? 1.0 : 0.0) : checked_exp(-2.0 * z / w);
      return {-eps * (x + (1.0 + al) * z) - eps * x * w * (1.0 - Fz),
              -F2z * (1.0 + (x + z) / xi) - eps * z * w * (1.0 - Fz),
              -eps * w * w * (1.0 - Fz), 0.0};
    }
    case ChartId::K3Q: {
      const double w = c[0], x = c[1], y = c[2], q = c[3], eps = c[4];
      const double u = y + (x + 1.0) / xi;
      const double ycor = paper_approximation ? w * w : w * w * (1.0 - em1(w));
      return {w * w * q * u,
              -eps * w * (x + 1.0 + al) + x * q * w * u,
              eps * ycor + y * q * w * u,
              2.0 * q * q * u, 0.0};
    }
    case ChartId::QEPS_K1: {
      const double w = c[0], xt = c[1], y = c[2], e1 = c[3];
      const double x = xt - xi * y - 1.0;
      const double u = xt / xi;
      const double ycor = paper_approximation ? w * w : w * w * (1.0 - em1(w));
      return {w * w * u,
              -e1 * w * (x + 1.0 + al) + xi * e1 * ycor + w * u * (xt - 1.0),
              e1 * ycor + y * w * u,
              -2.0 * e1 * u};
    }
    case ChartId::QEPS_K2: {
      const double w = c[0], x = c[1], y = c[2], q2 = c[3];
      const double u = y + (x + 1.0) / xi;
      const double ycor = paper_approximation ? w * w : w * w * (1.0 - em1(w));
      return {w * w * q2 * u,
              -w * (x + 1.0 + al) + x * q2 * w * u,
              ycor + y * q2 * w * u,
              2.0 * q2 * q2 * u};
    }
    case ChartId::HATK1: {
      const double r = c[0], x = c[1], y = c[2], q = c[3];
      const double u = y + (x + 1.0) / xi;
      const double ycor = paper_approximation ? r : r * (1.0 - em1(r));
      return {r * r * q * u,
              -(x + 1.0 + al) + x * r * q * u,
              ycor + y * r * q * u,
              q * q * (2.0 - r) * u};
    }
    case ChartId::HATK1_RHO_SIGMA: {
      const double sg = c[0], y = c[1], rho = c[2];
      const double u = y - al / xi;
      const double r = rho * sg;
      const double ycor = paper_approximation ? sg : sg * (1.0 - em1(r));
      return {2.0 * sg * (rho * sg - 1.0) * u,
              ycor + y * rho * sg * u,
              rho * (2.0 - rho * sg) * u};
    }
  }
  throw std::domain_error("chart_rhs: unknown chart");
}

Mat2 chart_jacobian2(const ChartPoint& p, const ChartParams& cp) {
  const double xi = cp.xi, al = cp.alpha;
  const auto& c = p.c;
  switch (p.chart) {
    case ChartId::R2:
    case ChartId::K2_2D:
      return jacobian_reduced(StateR{c[0], c[1]}, xi, al);
    case ChartId::K3_2D: {
      const double w = c[0], y = c[1], E = em1(w);
      const double Eow = w == 0 ? 0.0 : E / w;
      return Mat2{{{-(al - xi * y) + xi * (2.0 * w * (1.0 - E) - E), xi * w},
                   {(1.0 + xi * y) * ((1.0 - E) - Eow),
                    -al + 2.0 * xi * y + xi * w * (1.0 - E)}}};
    }
    case ChartId::K1_2D: {
      const double w = c[0], z = c[1];
      const double F = w == 0 ? (z == 0 ? 1.0 : 0.0) : checked_exp(z / w);
      const double Fw = w == 0 ? 0.0 : F * (-z / (w * w));
      const double Fz = w == 0 ? 0.0 : F / w;
      return Mat2{{{2.0 * w * (1.0 - F) - w * w * Fw, -w * w * Fz},
                   {(xi + z) * (1.0 - F) - w * (xi + z) * Fw + (al * z - xi) * Fw,
                    w * (1.0 - F) - w * (xi + z) * Fz + al * F +
                        (al * z - xi) * Fz}}};
    }
    case ChartId::KAP1: {
      const double om = c[0], r = c[1], E = em1(om);
      const double Eoo = om == 0 ? 0.0 : E / om;
      return Mat2{{{(xi - al * r) + r * xi * (2.0 * om * (1.0 - E) - E),
                    -al * om + om * om * xi * (1.0 - E)},
                   {-r * r * (xi + r) * ((1.0 - E) - Eoo),
                    -(xi - al * r) + al * r -
                        om * (1.0 - E) * (2.0 * r * (xi + r) + r * r)}}};
    }
    case ChartId::KAP2: {
      const double ze = c[0], r = c[1];
      const double emz = checked_exp(-ze);
      return Mat2{{{-xi * r * emz + al * r, xi * (emz - 1.0) + al * ze},
                   {-r * r * r * emz, 3.0 * r * r * (emz - 1.0)}}};
    }
    case ChartId::KAP3: {
      const double om = c[0], r = c[1], E = em1(om);
      const double Eo2 = om == 0 ? 0.0 : E / (om * om);
      const double Eo1 = om == 0 ? 0.0 : E / om;
      const double Eo3 = om == 0 ? 0.0 : E / (om * om * om);
      return Mat2{{{xi * (1.0 - E) - xi * Eo1 - Eo2 * (al * r + xi) / r,
                    (E == 0.0 ? 0.0 : xi * E / (r * r))},
                   {r * (xi - r) * Eo2 + (al * r + xi) * (Eo3 - Eo2),
                    -(xi - 2.0 * r) * (1.0 - E) + al * Eo1}}};
    }
    case ChartId::KAP3_EXP: {
      const double rho = c[0], eta = c[1], E = em1(rho);
      const double Er2 = rho == 0 ? 0.0 : E / (rho * rho);
      const double Er1 = rho == 0 ? 0.0 : E / rho;
      const double Er3 = rho == 0 ? 0.0 : E / (rho * rho * rho);
      const double d_rho_rho = 2.0 * xi * rho * (eta * (1.0 - E) - 1.0) -
                               xi * eta * E - al * eta * E - al * eta * Er1;
      const double d_rho_eta = xi * rho * rho * (1.0 - E) - al * rho * E;
      const double d_eta_rho = -eta * eta * Er2 * (eta * E - xi) +
                               eta * eta * eta * (1.0 - E) * Er2 +
                               al * eta * eta * (Er3 - Er2);
      const double d_eta_eta = 2.0 * eta * (1.0 - E) * (eta * E - xi) +
                               eta * eta * (1.0 - E) * E + 2.0 * al * eta * Er1 +
                               xi;
      return Mat2{{{d_rho_rho, d_rho_eta}, {d_eta_rho, d_eta_eta}}};
    }
    default:
      throw std::domain_error("chart_jacobian2: only the 2D charts");
  }
}

double time_factor(const ChartPoint& p, const ChartParams& cp) {
  const auto& c = p.c;
  switch (p.chart) {
    case ChartId::R2: case ChartId::K2_2D: case ChartId::K1_2D: case ChartId::R3:
      return 1.0;
    case ChartId::K3_2D: return em1(c[0]);
    case ChartId::KAP1: return c[1] * em1(c[0]);
    case ChartId::KAP2: return c[1] * std::exp(-c[0]);
    case ChartId::KAP3: return c[0] == 0 ? std::numeric_limits<double>::infinity()
                                         : 1.0 / c[0];
    case ChartId::KAP3_EXP: return c[1];
    case ChartId::K2_3D: return c[3];
    case ChartId::K3_3D: return c[3] * em1(c[2]);
    case ChartId::K1_3D:
      return c[3] * (c[2] == 0 ? (c[1] == 0 ? 1.0 : 0.0)
                               : std::exp(-c[1] / c[2]));
    case ChartId::K3Q: return c[4] * em1(c[0]) * c[0];
    case ChartId::QEPS_K1: return c[3] * em1(c[0]) * c[0];  // eps1 e^{-1/w} w
    case ChartId::QEPS_K2: return em1(c[0]) * c[0];
    case ChartId::HATK1: return em1(c[0]);
    case ChartId::HATK1_RHO_SIGMA: {
      const double r = c[2] * c[0];
      return c[2] == 0 ? 0.0 : em1(r) / c[2];
    }
  }
  (void)cp;
  return 1.0;
}

std::array<double, 4> project_to_sphere(const State3& s) {
  const double n = std::sqrt(1.0 + s.x * s.x + s.y * s.y + s.z * s.z);
  return {s.x / n, s.y / n, s.z / n, 1.0 / n};
}

std::array<double, 4> sphere_from_reduced(const StateR& s, double xi) {
  return project_to_sphere(lift_to_critical(s, xi));
}

namespace {
std::array<double, 4> normalize4(double X, double Y, double Z, double W) {
  const double n = std::sqrt(X * X + Y * Y + Z * Z + W * W);
  return {X / n, Y / n, Z / n, W / n};
}
}  // namespace

std::array<double, 4> sphere_from_k3_2d(double w3, double y3, double xi) {
  // below 1e-8 the point is within 1e-8 of the equator; inverting w3 there
  // only loses precision (and can overflow)
  if (w3 > 1e-8) return sphere_from_reduced(StateR{y3 / w3, 1.0 / w3}, xi);
  return normalize4(-xi * y3 - 1.0, y3, 1.0, 0.0);
}

std::array<double, 4> sphere_from_k3_3d(double x3, double y3, double w3) {
  return normalize4(x3, y3, 1.0, w3);
}

std::array<double, 4> sphere_from_k1_3d(double x1, double z1, double w1) {
  return normalize4(x1, 1.0, z1, w1);
}

std::vector<InfinityFixedPoint> fixed_points_at_infinity(double xi, double alpha) {
  require_xi(xi);
  std::vector<InfinityFixedPoint> out;
  auto add = [&](InfinityFixedPoint f) { out.push_back(std::move(f)); };

  add({"Q1", ChartId::K3_2D, {ChartId::K3_2D, {0.0, 0.0}},
       {-alpha, -alpha}, "improper stable node, single eigenvector (0,1)",
       sphere_from_k3_3d(-1.0, 0.0, 0.0), ChartId::K3_3D, {-1.0, 0.0, 0.0}});
  add({"Q2", ChartId::HATK1,
       {ChartId::HATK1, {0.0, -1.0 - alpha, 0.0, 0.0}},
       {-1.0, 0.0, 0.0, 0.0}, "on L0; hyperbolic (stable) in x only",
       sphere_from_k3_3d(-1.0 - alpha, 0.0, 0.0), ChartId::K3_3D,
       {-1.0 - alpha, 0.0, 0.0}});
  add({"Q3", ChartId::K3_2D, {ChartId::K3_2D, {0.0, alpha / xi}},
       {alpha, 0.0},
       "saddle-like: unstable (0,1), center direction (alpha, -(1+alpha))",
       sphere_from_k3_3d(-1.0 - alpha, alpha / xi, 0.0), ChartId::K3_3D,
       {-1.0 - alpha, alpha / xi, 0.0}});
  add({"Q4", ChartId::HATK1,
       {ChartId::HATK1, {0.0, -1.0 - alpha, 2.0 * alpha / xi, 0.0}},
       {-1.0, 0.0, 0.0, 0.0}, "on L0; hyperbolic (stable) in x only",
       sphere_from_k3_3d(-1.0 - alpha, 2.0 * alpha / xi, 0.0), ChartId::K3_3D,
       {-1.0 - alpha, 2.0 * alpha / xi, 0.0}});
  add({"Q5", ChartId::K1_3D,
       {ChartId::K1_3D,
        {-(xi / (2.0 * alpha)) * (1.0 + alpha),
         (xi / (2.0 * alpha)) * (1.0 - alpha), 0.0, 0.0}},
       {0.0, 0.0, 0.0, 0.0},
       "non-hyperbolic in the chart field; layer contraction rate -1/xi",
       sphere_from_k1_3d(-(xi / (2.0 * alpha)) * (1.0 + alpha),
                         (xi / (2.0 * alpha)) * (1.0 - alpha), 0.0),
       ChartId::K1_3D,
       {-(xi / (2.0 * alpha)) * (1.0 + alpha),
        (xi / (2.0 * alpha)) * (1.0 - alpha), 0.0}});
  add({"Q6", ChartId::KAP3_EXP, {ChartId::KAP3_EXP, {0.0, 1.0}},
       {0.0, -xi}, "stable (0,1) with eigenvalue -xi, center (1,0)",
       sphere_from_k1_3d(-xi, 0.0, 0.0), ChartId::K1_3D, {-xi, 0.0, 0.0}});
  add({"Q7", ChartId::KAP3, {ChartId::KAP3, {0.0, xi}},
       {xi, xi}, "unstable node, double eigenvalue xi (diagonal)",
       sphere_from_k3_2d(0.0, -1.0 / xi, xi), std::nullopt, {}});
  add({"O1", ChartId::KAP1, {ChartId::KAP1, {0.0, 0.0}},
       {xi, -xi}, "saddle; eigenvectors (1,0) and (0,1)",
       sphere_from_k1_3d(-xi, 0.0, 0.0), std::nullopt, {}});
  add({"O3", ChartId::KAP3_EXP, {ChartId::KAP3_EXP, {0.0, 0.0}},
       {0.0, xi}, "unstable (0,1) with eigenvalue xi, center (1,0)",
       sphere_from_k1_3d(-xi, 0.0, 0.0), std::nullopt, {}});
  return out;
}

double verify_heteroclinic_L0(double alpha, double xi, double y) {
  require_xi(xi);
  if (!(y > 0 && y < 2.0 * alpha / xi))
    throw std::domain_error("verify_heteroclinic_L0: y must be in (0, 2a/xi)");
  const double sg = 2.0 * (alpha / xi) * y - y * y;
  const ChartPoint p{ChartId::HATK1_RHO_SIGMA, {sg, y, 0.0}};
  const auto f = chart_rhs(p, ChartParams{xi, alpha});
  const double dsigma_dy = 2.0 * (alpha / xi) - 2.0 * y;
  // tangency defect in the (sigma, y) plane plus any spurious rho motion
  return std::fabs(f[0] - dsigma_dy * f[1]) + std::fabs(f[2]);
}

std::string atlas_json(double xi, double alpha) {
  nlohmann::json j;
  j["xi"] = xi;
  j["alpha"] = alpha;
  const ChartId all[] = {
      ChartId::R2, ChartId::K2_2D, ChartId::K3_2D, ChartId::K1_2D,
      ChartId::KAP1, ChartId::KAP2, ChartId::KAP3, ChartId::KAP3_EXP,
      ChartId::R3, ChartId::K2_3D, ChartId::K3_3D, ChartId::K1_3D,
      ChartId::K3Q, ChartId::QEPS_K1, ChartId::QEPS_K2, ChartId::HATK1,
      ChartId::HATK1_RHO_SIGMA};
  for (ChartId id : all) {
    nlohmann::json cj;
    cj["name"] = chart_name(id);
    cj["dim"] = chart_dim(id);
    cj["coords"] = chart_coord_names(id);
    j["charts"].push_back(cj);
  }
  j["transitions"] = {
      "R2<->K2_2D", "K2_2D<->K3_2D (z2>0)", "K2_2D<->K1_2D (y2>0)",
      "K3_2D<->K1_2D (y3>0)", "K1_2D<->KAP1 (z1>0)", "K1_2D<->KAP2 (w1>0)",
      "K1_2D<->KAP3 (z1<0)", "KAP1<->KAP2 (omega1>0)", "KAP2<->KAP3 (zeta2<0)",
      "KAP3<->KAP3_EXP (omega3>0)", "R3<->K2_3D", "K2_3D<->K3_3D (z2>0)",
      "K2_3D<->K1_3D (y2>0)", "K3_3D<->K1_3D (y3>0)",
      "K3_3D<->K3Q (q slaved to e^{-2/w})", "K3Q->QEPS_K1 (q>0, projection)",
      "K3Q<->QEPS_K2 (eps>0)", "QEPS_K2<->HATK1 (w>0)",
      "HATK1<->HATK1_RHO_SIGMA (q>0, x pinned to -1-alpha)"};
  for (const auto& fp : fixed_points_at_infinity(xi, alpha)) {
    nlohmann::json pj;
    pj["name"] = fp.name;
    pj["chart"] = chart_name(fp.chart);
    pj["coords"] = fp.point.c;
    pj["eigenvalues"] = fp.eigenvalues;
    pj["note"] = fp.note;
    pj["sphere"] = fp.sphere;
    if (fp.chart3d) {
      pj["chart3d"] = chart_name(*fp.chart3d);
      pj["coords3d"] = fp.coords3d;
    }
    j["fixed_points"].push_back(pj);
  }
  return j.dump(2);
}

}  // namespace eqcycle
