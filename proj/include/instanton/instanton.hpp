#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "instanton/cost.hpp"
#include "instanton/polytope.hpp"

namespace instanton {

/// Certification thresholds for facet minima.
inline constexpr double kKktTolerance = 1e-8;
/// Facet minima closer than this (inf-norm, MW) are the same point.
inline constexpr double kDuplicateTolerance = 1e-6;
/// Costs within this of each other are reported as ties.
inline constexpr double kTieTolerance = 1e-9;

/// Minimize S over one face of the polytope: facet `facet` saturated, every
/// other facet and rho >= 0 kept as inequalities.
struct FacetSubproblem {
  std::size_t facet = 0;
  Vector eq_normal;
  double eq_offset = 0.0;
  Matrix ineq_normals;  // other facets, then one -e_i row per site
  Vector ineq_offsets;
  std::vector<std::size_t> ineq_facets;  // facet index of each facet row
  std::size_t facet_count = 0;           // K of the parent polytope
  double alpha0 = 0.0;
  double alpha_slope = 0.0;

  std::size_t site_count() const { return static_cast<std::size_t>(eq_normal.size()); }
};

FacetSubproblem make_subproblem(const Polytope& polytope, std::size_t facet);

enum class FacetStatus { Optimal, Infeasible, Degenerate };

std::string_view to_string(FacetStatus status);

struct FacetResult {
  std::size_t facet = 0;
  FacetStatus status = FacetStatus::Infeasible;
  Vector rho;
  double cost = 0.0;  // +inf unless Optimal
  std::vector<std::size_t> active_facets;  // tight inequality facets in the working set
  std::vector<std::size_t> active_bounds;  // sites held at rho_i = 0
  double eq_multiplier = 0.0;              // lambda of the saturated facet
  Vector facet_multipliers;                // one per polytope facet (saturated one = lambda)
  Vector bound_multipliers;                // one per site, >= 0
  double alpha = 0.0;
  std::size_t stressed_site = 0;  // argmax rho_i / rho0_i
  double kkt_residual = 0.0;
  double saturated_residual = 0.0;  // |w_a . rho - c_a|
  double min_other_margin = 0.0;
  std::size_t iterations = 0;
};

/// Exact minimizer of one facet subproblem.
///
/// Quadratic costs need a single active-set QP. General convex costs run a
/// sequential-QP Newton iteration: each step minimizes the local quadratic
/// model over the face with the same active-set solver, then backtracks on S.
/// The working-set size is capped at 100 K iterations; exceeding it marks
/// the facet Degenerate.
FacetResult solve_facet(const FacetSubproblem& subproblem, const CostModel& cost);

struct SpectrumEntry {
  std::optional<std::size_t> rank;  // 1-based; empty for Infeasible/Degenerate
  FacetResult result;
  bool tied_with_previous = false;
  std::vector<std::size_t> merged_facets;  // other facets with the same minimizer
};

/// Facet minima sorted by cost. Optimal entries come first (rank 1 is the
/// instanton), then the Infeasible and Degenerate facets in index order.
struct InstantonSpectrum {
  std::vector<SpectrumEntry> entries;
  std::vector<std::size_t> skipped_facets;  // zero-normal facets, never scanned
  std::size_t facet_count = 0;

  std::size_t optimal_count() const;
  const SpectrumEntry& top() const;
};

struct ScanOptions {
  unsigned jobs = 1;
};

/// Solves every facet subproblem and ranks the minima.
/// Throws EquilibriumInfeasible when rho0 is not strictly inside the polytope
/// and AllInfeasible when no facet is reachable.
InstantonSpectrum scan(const Polytope& polytope, const CostModel& cost,
                       const ScanOptions& options = {});

/// Sorting, tie detection and deduplication applied by scan(); results must be
/// in facet-index order.
InstantonSpectrum rank_results(std::vector<FacetResult> results,
                               std::vector<std::size_t> skipped, std::size_t facet_count);

}  // namespace instanton
