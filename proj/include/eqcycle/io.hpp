#pragma once

// CSV / JSON serialization for the analysis products.  CSV numbers are
// printed with %.17g so re-running a manifest reproduces byte-identical
// output.

#include <string>
#include <vector>

#include "eqcycle/cycles.hpp"
#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/ode.hpp"
#include "eqcycle/perturbation.hpp"

namespace eqcycle {

std::string fmt_g17(double v);

void write_text(const std::string& path, const std::string& body);

// columns t,x,y,z[,defect]  (defect = z + xi*y + x when xi >= 0 is passed)
std::string trajectory_csv(const Trajectory& tr, double xi_for_defect = -1.0);

std::string levelset_csv(const LevelSet& ls);
std::string levelset_json(const LevelSet& ls);

std::string melnikov_csv(const std::vector<MelnikovResult>& rows);

std::string bifurcation_csv(const std::vector<BifurcationRow>& rows);

std::string limit_cycle_json(const LimitCycle& lc);
std::string limit_cycle_csv(const LimitCycle& lc);

std::string singular_cycle_json(const SingularCycle& g);
std::string singular_cycle_csv(const SingularCycle& g);

}  // namespace eqcycle
