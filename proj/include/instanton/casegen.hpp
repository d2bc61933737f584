#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "instanton/grid_model.hpp"

namespace instanton {

/// Synthetic renewable extension of a base grid without renewables.
struct ExtensionSpec {
  std::size_t n_new = 0;
  double penetration = 0.0;  // sum(rho_bar) / sum(p) of the emitted grid
  std::uint64_t seed = 0;
  /// Relative share of the renewable total per new site; equal split when empty.
  std::optional<std::vector<double>> site_weights;
};

/// Adds `n_new` renewable buses with ids following the largest base id.
///
/// Each site draws its degree from the degree distribution of the base
/// Generator buses and its neighbours uniformly without replacement among
/// the base buses. New lines share the median base rating and draw their
/// reactance uniformly from the interquartile range of base reactances.
/// Conventional outputs are rescaled so the grid balances at rho = rho_bar
/// (alpha = 1) with sum(rho_bar) = penetration * sum(p).
///
/// Site k's topology comes from its own seeded stream (seed, k, attempt), so
/// a larger extension with the same seed starts with the smaller one's sites
/// and lines. When rho_bar is not strictly feasible the sites are redrawn
/// from the last one backwards, up to 100 times.
///
/// Throws InvalidSpec for a bad spec or a base that already has renewables,
/// CannotPlaceFeasibly when every attempt leaves rho_bar outside the polytope.
GridModel extend(const GridModel& base, const ExtensionSpec& spec);

/// sum(rho_bar) / sum(p); zero without renewables.
double penetration_achieved(const GridModel& grid);

}  // namespace instanton
