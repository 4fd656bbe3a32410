#include "eqcycle/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace eqcycle {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << body;
}

std::string trajectory_csv(const Trajectory& tr, double xi_for_defect) {
  std::string s;
  const bool defect = xi_for_defect >= 0 && tr.dim >= 3;
  const bool charts = tr.chart_tag.size() == tr.t.size();
  const bool tphys = tr.t_physical.size() == tr.t.size();
  if (defect) {
    s += "t,x,y,z,defect";
  } else {
    s += "t";
    for (int i = 0; i < tr.dim; ++i) s += ",y" + std::to_string(i);
  }
  if (charts) s += ",chart";
  if (tphys) s += ",t_physical";
  s += "\n";
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    s += fmt_g17(tr.t[k]);
    for (int i = 0; i < tr.dim; ++i) s += "," + fmt_g17(tr.y[k][i]);
    if (defect)
      s += "," + fmt_g17(tr.y[k][2] + xi_for_defect * tr.y[k][1] + tr.y[k][0]);
    if (charts) s += "," + std::to_string(tr.chart_tag[k]);
    if (tphys) s += "," + fmt_g17(tr.t_physical[k]);
    s += "\n";
  }
  return s;
}

std::string levelset_csv(const LevelSet& ls) {
  std::string s = "y,z\n";
  for (const auto& p : ls.polyline)
    s += fmt_g17(p.y) + "," + fmt_g17(p.z) + "\n";
  return s;
}

std::string levelset_json(const LevelSet& ls) {
  nlohmann::json j;
  j["h"] = ls.h;
  j["xi"] = ls.xi;
  j["kind"] = ls.kind == LevelKind::closed ? "closed" : "unbounded";
  if (ls.period) j["period"] = *ls.period;
  if (ls.kind == LevelKind::closed) j["closure_gap"] = ls.closure_gap;
  auto& pts = j["points"];
  for (const auto& p : ls.polyline) pts.push_back({p.y, p.z});
  return j.dump(2);
}

std::string melnikov_csv(const std::vector<MelnikovResult>& rows) {
  std::string s = "h,delta_alpha,delta_eps,alpha_M,err\n";
  for (const auto& r : rows)
    s += fmt_g17(r.h) + "," + fmt_g17(r.delta_alpha) + "," +
         fmt_g17(r.delta_eps) + "," + fmt_g17(r.alpha_M) + "," +
         fmt_g17(r.quadrature_error_estimate) + "\n";
  return s;
}

std::string bifurcation_csv(const std::vector<BifurcationRow>& rows) {
  std::string s = "param,amplitude,period,max_multiplier,status\n";
  for (const auto& r : rows)
    s += fmt_g17(r.param) + "," + fmt_g17(r.amplitude) + "," +
         fmt_g17(r.period) + "," + fmt_g17(r.max_multiplier) + "," + r.status +
         "\n";
  return s;
}

std::string limit_cycle_json(const LimitCycle& lc) {
  nlohmann::json j;
  j["eps"] = lc.params.eps;
  j["xi"] = lc.params.xi;
  j["alpha"] = lc.params.alpha;
  j["section"] = lc.section;
  j["section_point"] = lc.section_point;
  j["period"] = lc.period;
  j["amplitude_y"] = lc.amplitude_y;
  j["closure_gap"] = lc.closure_gap;
  j["trivial_defect"] = lc.trivial_defect;
  j["stable"] = lc.stable;
  j["best_effort"] = lc.best_effort;
  for (const auto& m : lc.multipliers)
    j["multipliers"].push_back({m.real(), m.imag()});
  return j.dump(2);
}

std::string limit_cycle_csv(const LimitCycle& lc) {
  return trajectory_csv(lc.orbit, lc.params.xi);
}

std::string singular_cycle_json(const SingularCycle& g) {
  nlohmann::json j;
  j["alpha"] = g.alpha;
  j["xi"] = g.xi;
  j["metric_note"] =
      "segments live on S^{3,+}; distances use the chordal metric in R^4 "
      "(artifact convention)";
  j["max_corner_gap"] = g.max_corner_gap;
  j["wcu_seed_gap"] = g.wcu_seed_gap;
  j["wcu_end_gap"] = g.wcu_end_gap;
  for (const auto& [name, pt] : g.corners) j["corners"][name] = pt;
  for (const auto& seg : g.segments)
    j["segments"].push_back({{"tag", seg.tag}, {"points", seg.sphere.size()}});
  return j.dump(2);
}

std::string singular_cycle_csv(const SingularCycle& g) {
  std::string s = "tag,X,Y,Z,W\n";
  for (const auto& seg : g.segments)
    for (const auto& p : seg.sphere)
      s += seg.tag + "," + fmt_g17(p[0]) + "," + fmt_g17(p[1]) + "," +
           fmt_g17(p[2]) + "," + fmt_g17(p[3]) + "\n";
  return s;
}

}  // namespace eqcycle
