#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqcycle/charts.hpp"
#include "eqcycle/cycles.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/model.hpp"
#include "eqcycle/ode.hpp"
#include "eqcycle/perturbation.hpp"

namespace py = pybind11;
using namespace eqcycle;

namespace {

py::dict levelset_dict(const LevelSet& ls) {
  py::dict d;
  d["h"] = ls.h;
  d["xi"] = ls.xi;
  d["kind"] = ls.kind == LevelKind::closed ? "closed" : "unbounded";
  if (ls.period) d["period"] = *ls.period;
  d["closure_gap"] = ls.closure_gap;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(ls.polyline.size());
  for (const auto& p : ls.polyline) pts.emplace_back(p.y, p.z);
  d["points"] = pts;
  return d;
}

py::dict cycle_dict(const LimitCycle& lc) {
  py::dict d;
  d["eps"] = lc.params.eps;
  d["xi"] = lc.params.xi;
  d["alpha"] = lc.params.alpha;
  d["period"] = lc.period;
  d["amplitude_y"] = lc.amplitude_y;
  d["closure_gap"] = lc.closure_gap;
  d["stable"] = lc.stable;
  d["best_effort"] = lc.best_effort;
  d["section_point"] = lc.section_point;
  d["multipliers"] = std::vector<std::complex<double>>{
      lc.multipliers[0], lc.multipliers[1], lc.multipliers[2]};
  d["trivial_defect"] = lc.trivial_defect;
  return d;
}

}  // namespace

PYBIND11_MODULE(_eqcycle, m) {
  m.doc() = "spring-block earthquake cycle model: fields, Hamiltonian "
            "structure, Melnikov machinery, compactification atlas, cycles";

  py::class_<Params>(m, "Params")
      .def(py::init<double, double, double>(), py::arg("eps"), py::arg("xi"),
           py::arg("alpha"))
      .def_readwrite("eps", &Params::eps)
      .def_readwrite("xi", &Params::xi)
      .def_readwrite("alpha", &Params::alpha);

  m.def("nondimensionalize",
        [](double M, double kappa, double L, double a_f, double b_f, double v0) {
          return nondimensionalize({M, kappa, L, a_f, b_f, v0});
        },
        py::arg("M"), py::arg("kappa"), py::arg("L"), py::arg("a_f"),
        py::arg("b_f"), py::arg("v0"));

  m.def("slow_rhs", [](double x, double y, double z, const Params& p) {
    const State3 d = slow_rhs({x, y, z}, p);
    return std::make_tuple(d.x, d.y, d.z);
  });
  m.def("fast_rhs", [](double x, double y, double z, const Params& p) {
    const State3 d = fast_rhs({x, y, z}, p);
    return std::make_tuple(d.x, d.y, d.z);
  });
  m.def("reduced_rhs", [](double y, double z, double xi, double alpha) {
    const StateR d = reduced_rhs({y, z}, xi, alpha);
    return std::make_tuple(d.y, d.z);
  });
  m.def("layer_rhs", &layer_rhs);
  m.def("critical_manifold_z", &critical_manifold_z);
  m.def("linfinity_nullcline_x", &linfinity_nullcline_x);

  m.def("H", &H_eval, py::arg("y"), py::arg("z"), py::arg("xi"));
  m.def("g", &g_eval, py::arg("y"), py::arg("z"), py::arg("xi"));
  m.def("factorization_residual", &factorization_residual);
  m.def("lambert_roots", [](double h, double xi) {
    const LambertRoots r = lambert_roots(h, xi);
    py::dict d;
    d["y_lower"] = r.y_lower;
    if (r.y_upper) d["y_upper"] = *r.y_upper;
    return d;
  });
  m.def("trace_level_set",
        [](double h, double xi, double tol, double rtol) {
          return levelset_dict(trace_level_set(h, xi, tol, rtol));
        },
        py::arg("h"), py::arg("xi"), py::arg("tol") = 1e-8,
        py::arg("rtol") = 1e-10);
  m.def("h_from_yD", &h_from_yD);
  m.def("yD_from_h", &yD_from_h);

  m.def("slow_manifold_z", &slow_manifold_z);
  m.def("hopf_alpha", &hopf_alpha);
  m.def("lyapunov_coefficient", &lyapunov_coefficient);
  m.def("hopf_locate", [](double xi, double eps) {
    const HopfData h = hopf_locate_numeric(xi, eps);
    py::dict d;
    d["alpha_H"] = h.alpha_H;
    d["alpha_H_numeric"] = h.alpha_H_numeric;
    d["lyapunov_a"] = h.lyapunov_a;
    d["criticality"] = h.supercritical ? "super" : "sub";
    return d;
  });
  m.def("delta_alpha",
        [](double h, double xi, double tol) { return delta_alpha(h, xi, tol); },
        py::arg("h"), py::arg("xi"), py::arg("tol") = 1e-8);
  m.def("delta_eps",
        [](double h, double xi, double tol) { return delta_eps(h, xi, tol); },
        py::arg("h"), py::arg("xi"), py::arg("tol") = 1e-8);
  m.def("alpha_M",
        [](double h, double xi, double eps, double tol) {
          const MelnikovResult r = alpha_M(h, xi, eps, tol);
          py::dict d;
          d["h"] = r.h;
          d["delta_alpha"] = r.delta_alpha;
          d["delta_eps"] = r.delta_eps;
          d["alpha_M"] = r.alpha_M;
          d["err"] = r.quadrature_error_estimate;
          return d;
        },
        py::arg("h"), py::arg("xi"), py::arg("eps"), py::arg("tol") = 1e-8);

  m.def("project_to_sphere", [](double x, double y, double z) {
    return project_to_sphere({x, y, z});
  });
  m.def("chart_rhs",
        [](const std::string& chart, std::vector<double> coords, double xi,
           double alpha, double eps) {
          static const std::map<std::string, ChartId> names = {
              {"R2", ChartId::R2}, {"K2_2D", ChartId::K2_2D},
              {"K3_2D", ChartId::K3_2D}, {"K1_2D", ChartId::K1_2D},
              {"KAP1", ChartId::KAP1}, {"KAP2", ChartId::KAP2},
              {"KAP3", ChartId::KAP3}, {"KAP3_EXP", ChartId::KAP3_EXP},
              {"R3", ChartId::R3}, {"K2_3D", ChartId::K2_3D},
              {"K3_3D", ChartId::K3_3D}, {"K1_3D", ChartId::K1_3D},
              {"K3Q", ChartId::K3Q}, {"QEPS_K1", ChartId::QEPS_K1},
              {"QEPS_K2", ChartId::QEPS_K2}, {"HATK1", ChartId::HATK1},
              {"HATK1_RHO_SIGMA", ChartId::HATK1_RHO_SIGMA}};
          return chart_rhs(ChartPoint{names.at(chart), std::move(coords)},
                           ChartParams{xi, alpha, eps});
        },
        py::arg("chart"), py::arg("coords"), py::arg("xi"), py::arg("alpha"),
        py::arg("eps") = 0.0);
  m.def("fixed_points_at_infinity", [](double xi, double alpha) {
    py::list out;
    for (const auto& fp : fixed_points_at_infinity(xi, alpha)) {
      py::dict d;
      d["name"] = fp.name;
      d["chart"] = chart_name(fp.chart);
      d["coords"] = fp.point.c;
      d["eigenvalues"] = fp.eigenvalues;
      d["note"] = fp.note;
      d["sphere"] = fp.sphere;
      out.append(d);
    }
    return out;
  });
  m.def("verify_heteroclinic_L0", &verify_heteroclinic_L0);
  m.def("atlas_json", &atlas_json);

  m.def("find_limit_cycle",
        [](double eps, double xi, double alpha) {
          return cycle_dict(find_limit_cycle(Params{eps, xi, alpha}));
        },
        py::arg("eps"), py::arg("xi"), py::arg("alpha"));
  m.def("finite_time_blowup", [](double alpha, double xi, double y, double z) {
    const BlowupResult b = finite_time_blowup(alpha, xi, {y, z});
    py::dict d;
    d["t_star"] = b.t_star;
    d["t_estimates"] = b.t_estimates;
    d["cauchy_diffs"] = b.cauchy_diffs;
    return d;
  });

  m.def("simulate",
        [](double eps, double xi, double alpha, double tmax, double rtol) {
          const Params p{eps, xi, alpha};
          Rhs f = [p](double, std::span<const double> s, std::span<double> ds) {
            const State3 d = slow_rhs(State3{s[0], s[1], s[2]}, p);
            ds[0] = d.x; ds[1] = d.y; ds[2] = d.z;
          };
          Jac j = [p](double, std::span<const double> s, Eigen::MatrixXd& J) {
            const Mat3 mm = jacobian_slow(State3{s[0], s[1], s[2]}, p);
            for (int a = 0; a < 3; ++a)
              for (int b = 0; b < 3; ++b) J(a, b) = mm[a][b];
          };
          IntegratorConfig cfg;
          cfg.method = Method::stiff;
          cfg.rtol = rtol;
          cfg.atol = {1e-10, 1e-10, 1e-8};
          cfg.guard_component = 2;
          const double s0[3] = {0.0, 1.0, slow_manifold_z(0.0, 1.0, p)};
          Trajectory tr = integrate_checked(f, j, s0, 0.0, tmax, cfg);
          py::dict d;
          d["t"] = tr.t;
          std::vector<double> xs, ys, zs;
          for (const auto& s : tr.y) {
            xs.push_back(s[0]);
            ys.push_back(s[1]);
            zs.push_back(s[2]);
          }
          d["x"] = xs;
          d["y"] = ys;
          d["z"] = zs;
          return d;
        },
        py::arg("eps"), py::arg("xi"), py::arg("alpha"), py::arg("tmax") = 200.0,
        py::arg("rtol") = 1e-9);
}
