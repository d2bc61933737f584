#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "instanton/cost.hpp"
#include "instanton/polytope.hpp"

namespace instanton {

struct NelderMeadOptions {
  std::size_t max_evaluations = 20000;
  double tolerance = 1e-12;  // relative spread of vertex values at convergence
};

struct NelderMeadResult {
  Vector best;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Downhill simplex with the usual reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). `simplex` holds n + 1 starting vertices.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                             std::vector<Vector> simplex, const NelderMeadOptions& options = {});

struct AmoebaOptions {
  std::size_t restarts = 200;
  std::uint64_t seed = 0;
  double penalty = 1e6;  // per MW of the smallest margin, interior points only
  NelderMeadOptions simplex;
};

struct AmoebaResult {
  Vector best_rho;
  double best_cost = 0.0;        // S at best_rho
  double best_objective = 0.0;   // penalized objective at best_rho
  bool best_is_exterior = false;
  std::vector<double> restart_costs;  // best penalized objective per restart
  std::size_t evaluations = 0;
};

/// Objective minimized by the amoeba: S outside the open polytope, S plus
/// penalty times the smallest margin inside it, +inf off the cost domain.
double amoeba_objective(const Polytope& polytope, const CostModel& cost, const Vector& rho,
                        double penalty);

/// Random-restart downhill simplex over the exterior of the polytope. Every
/// restart starts from n + 1 boundary points (random rays from rho0 cut at the
/// first facet they cross) and uses its own seeded stream, so results do not
/// depend on the restart count of other runs.
AmoebaResult amoeba_search(const Polytope& polytope, const CostModel& cost,
                           const AmoebaOptions& options);

}  // namespace instanton
