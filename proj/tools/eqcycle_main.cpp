// eqcycle: command-line front end for the spring-block fault-model analyses.
// Every run writes its data files plus a manifest JSON (full configuration,
// tolerances, wall time) so results can be reproduced byte for byte.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "eqcycle/charts.hpp"
#include "eqcycle/cycles.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/io.hpp"
#include "eqcycle/model.hpp"
#include "eqcycle/ode.hpp"
#include "eqcycle/perturbation.hpp"

using namespace eqcycle;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string outdir_default() {
  const char* env = std::getenv("EQCYCLE_OUTDIR");
  return env ? env : ".";
}

std::vector<double> parse_grid(const std::string& spec) {
  // start:stop:step
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("grid", "expected start:stop:step");
  const double a = std::stod(spec.substr(0, c1));
  const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double s = std::stod(spec.substr(c2 + 1));
  if (!(s > 0) || b < a) throw CLI::ValidationError("grid", "bad range");
  std::vector<double> g;
  for (double v = a; v <= b + 1e-12 * s; v += s) g.push_back(v);
  return g;
}

struct RunContext {
  std::string outdir = outdir_default();
  std::string format = "csv";
  json manifest;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void finish(const std::string& cmd) {
    manifest["command"] = cmd;
    manifest["version"] = kVersion;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_text(outdir + "/" + cmd + "_manifest.json", manifest.dump(2) + "\n");
  }
  std::string path(const std::string& name) const { return outdir + "/" + name; }
};

Rhs slow_field(const Params& p) {
  return [p](double, std::span<const double> s, std::span<double> ds) {
    const State3 d = slow_rhs(State3{s[0], s[1], s[2]}, p);
    ds[0] = d.x;
    ds[1] = d.y;
    ds[2] = d.z;
  };
}

Jac slow_jac(const Params& p) {
  return [p](double, std::span<const double> s, Eigen::MatrixXd& J) {
    const Mat3 m = jacobian_slow(State3{s[0], s[1], s[2]}, p);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) J(a, b) = m[a][b];
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spring-block earthquake cycle analysis"};
  app.require_subcommand(1);
  RunContext ctx;
  app.add_option("--outdir", ctx.outdir, "output directory")
      ->capture_default_str();
  app.add_option("--format", ctx.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  // ---- simulate ----
  double eps = 1e-2, alpha = 0.9, xi = 0.5, tmax = 200.0, rtol = 1e-9;
  double x0 = 0.0, y0 = 1.0, z0 = std::nan("");
  auto* sim = app.add_subcommand("simulate", "integrate the full slow system");
  sim->add_option("--eps", eps)->required();
  sim->add_option("--alpha", alpha)->required();
  sim->add_option("--xi", xi)->required();
  sim->add_option("--tmax", tmax)->capture_default_str();
  sim->add_option("--rtol", rtol)->capture_default_str();
  sim->add_option("--x0", x0);
  sim->add_option("--y0", y0);
  sim->add_option("--z0", z0, "default: on the slow manifold");
  sim->callback([&] {
    if (!(eps > 0) || eps > 1e-1)
      throw CLI::ValidationError(
          "--eps", "must be in (0, 1e-1]; for the eps=0 reduced flow use the "
                   "'levelset' or 'gamma0' commands");
    const Params p{eps, xi, alpha};
    const double zs = std::isnan(z0) ? slow_manifold_z(x0, y0, p) : z0;
    IntegratorConfig cfg;
    cfg.method = Method::stiff;
    cfg.rtol = rtol;
    cfg.atol = {1e-10, 1e-10, 1e-8};
    cfg.guard_component = 2;
    const double s0[3] = {x0, y0, zs};
    Trajectory tr = integrate_checked(slow_field(p), slow_jac(p), s0, 0.0, tmax, cfg);
    write_text(ctx.path("simulate.csv"), trajectory_csv(tr, xi));
    ctx.manifest = {{"eps", eps}, {"alpha", alpha}, {"xi", xi},
                    {"tmax", tmax}, {"rtol", rtol},
                    {"start", {x0, y0, zs}}, {"steps", tr.steps()}};
    ctx.finish("simulate");
  });

  // ---- levelset ----
  double h = 0.4, ls_tol = 1e-8, ls_rtol = 1e-10;
  auto* lsc = app.add_subcommand("levelset", "trace an H-level set of the "
                                             "Hamiltonian reduced flow");
  lsc->add_option("--energy,--h-level", h, "level H = h")->required();
  lsc->add_option("--xi", xi)->required();
  lsc->add_option("--tol", ls_tol)->capture_default_str();
  lsc->add_option("--rtol", ls_rtol)->capture_default_str();
  lsc->callback([&] {
    const LevelSet ls = trace_level_set(h, xi, ls_tol, ls_rtol);
    write_text(ctx.path("levelset.csv"), levelset_csv(ls));
    if (ctx.format == "json")
      write_text(ctx.path("levelset.json"), levelset_json(ls) + "\n");
    ctx.manifest = {{"h", h}, {"xi", xi}, {"tol", ls_tol}, {"rtol", ls_rtol},
                    {"kind", ls.kind == LevelKind::closed ? "closed" : "unbounded"}};
    if (ls.period) ctx.manifest["period"] = *ls.period;
    ctx.finish("levelset");
  });

  // ---- melnikov ----
  std::string hgrid = "0.05:0.6:0.05";
  double mel_eps = 1e-3, mel_tol = 1e-7, margin = kMelnikovMargin;
  int jobs = 1;
  auto* mel = app.add_subcommand("melnikov", "Delta_alpha, Delta_eps, alpha_M "
                                             "over an h-grid");
  mel->add_option("--xi", xi)->required();
  mel->add_option("--h-grid", hgrid)->capture_default_str();
  mel->add_option("--eps", mel_eps)->capture_default_str();
  mel->add_option("--tol", mel_tol)->capture_default_str();
  mel->add_option("--margin", margin, "h-grid restricted to (0, 1-margin]")
      ->capture_default_str();
  mel->add_option("--jobs", jobs)->capture_default_str();
  mel->callback([&] {
    const std::vector<double> grid = parse_grid(hgrid);
    for (double hv : grid)
      if (!(hv > 0 && hv <= 1.0 - margin))
        throw CLI::ValidationError(
            "--h-grid", "grid exceeds (0, 1-margin]; adjust --margin");
    std::vector<MelnikovResult> rows(grid.size());
    std::vector<std::string> errors(grid.size());
    const int nw = std::max(1, jobs);
    std::vector<std::thread> pool;
    std::size_t chunk = (grid.size() + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w * chunk;
             i < std::min(grid.size(), (w + 1) * chunk); ++i) {
          try {
            rows[i] = alpha_M(grid[i], xi, mel_eps, mel_tol, margin);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (!e.empty()) throw AccuracyError("melnikov sweep: " + e);
    write_text(ctx.path("melnikov.csv"), melnikov_csv(rows));
    ctx.manifest = {{"xi", xi}, {"h_grid", hgrid}, {"eps", mel_eps},
                    {"tol", mel_tol}, {"margin", margin}, {"jobs", jobs},
                    {"rows", rows.size()}};
    ctx.finish("melnikov");
  });

  // ---- hopf ----
  double hopf_eps = 1e-2;
  auto* hc = app.add_subcommand("hopf", "Hopf point: expansion vs numeric");
  hc->add_option("--xi", xi)->required();
  hc->add_option("--eps", hopf_eps)->required();
  hc->callback([&] {
    const HopfData hd = hopf_locate_numeric(xi, hopf_eps);
    json j = {{"xi", xi},
              {"eps", hopf_eps},
              {"alpha_H", hd.alpha_H},
              {"alpha_H_numeric", hd.alpha_H_numeric},
              {"lyapunov_a", hd.lyapunov_a},
              {"criticality", hd.supercritical ? "super" : "sub"}};
    write_text(ctx.path("hopf.json"), j.dump(2) + "\n");
    ctx.manifest = j;
    ctx.finish("hopf");
  });

  // ---- gamma0 ----
  auto* g0 = app.add_subcommand("gamma0", "singular cycle segments + corners");
  g0->add_option("--alpha", alpha)->required();
  g0->add_option("--xi", xi)->required();
  g0->callback([&] {
    const SingularCycle g = build_gamma0(alpha, xi);
    write_text(ctx.path("gamma0.csv"), singular_cycle_csv(g));
    json j = json::parse(singular_cycle_json(g));
    // corner table in chart coordinates as well
    for (const auto& fp : fixed_points_at_infinity(xi, alpha))
      if (fp.chart3d)
        j["corner_chart_coords"][fp.name] = {
            {"chart", chart_name(*fp.chart3d)}, {"coords", fp.coords3d}};
    write_text(ctx.path("gamma0.json"), j.dump(2) + "\n");
    ctx.manifest = {{"alpha", alpha}, {"xi", xi},
                    {"max_corner_gap", g.max_corner_gap}};
    ctx.finish("gamma0");
  });

  // ---- cycle ----
  double gx = std::nan(""), gy = std::nan("");
  auto* cyc = app.add_subcommand("cycle", "locate a limit cycle of the full "
                                          "system");
  cyc->add_option("--eps", eps)->required();
  cyc->add_option("--alpha", alpha)->required();
  cyc->add_option("--xi", xi)->required();
  cyc->add_option("--guess-x", gx);
  cyc->add_option("--guess-y", gy);
  cyc->callback([&] {
    const Params p{eps, xi, alpha};
    std::array<double, 2> guess{gx, gy};
    const bool has_guess = !std::isnan(gx) && !std::isnan(gy);
    const LimitCycle lc = find_limit_cycle(p, has_guess ? &guess : nullptr);
    write_text(ctx.path("cycle.json"), limit_cycle_json(lc) + "\n");
    write_text(ctx.path("cycle_orbit.csv"), limit_cycle_csv(lc));
    ctx.manifest = {{"eps", eps}, {"alpha", alpha}, {"xi", xi},
                    {"period", lc.period}, {"amplitude_y", lc.amplitude_y},
                    {"stable", lc.stable}, {"best_effort", lc.best_effort}};
    ctx.finish("cycle");
  });

  // ---- bifurcate ----
  std::string mode = "alpha", bgrid = "0.55:0.9:0.05";
  auto* bif = app.add_subcommand("bifurcate", "amplitude sweeps with warm "
                                              "starts");
  bif->add_option("--xi", xi)->required();
  bif->add_option("--mode", mode)->check(CLI::IsMember({"alpha", "eps"}));
  bif->add_option("--grid", bgrid)->capture_default_str();
  bif->add_option("--eps", eps, "fixed eps for mode=alpha")->capture_default_str();
  bif->add_option("--alpha", alpha, "fixed alpha for mode=eps")
      ->capture_default_str();
  bif->callback([&] {
    const std::vector<double> grid = parse_grid(bgrid);
    const SweepMode m = mode == "alpha" ? SweepMode::amplitude_vs_alpha
                                        : SweepMode::amplitude_vs_eps;
    const auto rows = bifurcation_diagram(xi, m, Params{eps, xi, alpha}, grid);
    write_text(ctx.path("bifurcation.csv"), bifurcation_csv(rows));
    ctx.manifest = {{"xi", xi}, {"mode", mode}, {"grid", bgrid},
                    {"eps", eps}, {"alpha", alpha}, {"rows", rows.size()}};
    ctx.finish("bifurcate");
  });

  // ---- atlas ----
  auto* atl = app.add_subcommand("atlas", "chart atlas + fixed-point catalogue");
  atl->add_option("--xi", xi)->required();
  atl->add_option("--alpha", alpha)->required();
  atl->callback([&] {
    write_text(ctx.path("atlas.json"), atlas_json(xi, alpha) + "\n");
    ctx.manifest = {{"xi", xi}, {"alpha", alpha}};
    ctx.finish("atlas");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;  // rejected configuration / precondition
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    json diag = {{"error", e.what()}};
    try {
      write_text(ctx.path("error.json"), diag.dump(2) + "\n");
    } catch (...) {
    }
    return 1;  // numeric failure
  }
  return 0;
}
