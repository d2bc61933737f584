#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "instanton/amoeba.hpp"
#include "instanton/instanton.hpp"

namespace instanton {

struct LineLoading {
  std::size_t line = 0;
  int from = 0;
  int to = 0;
  double flow = 0.0;     // MW, positive from -> to
  double loading = 0.0;  // |flow| / rating

  friend bool operator==(const LineLoading&, const LineLoading&) = default;
};

/// Human-facing view of one facet minimum (or of an arbitrary point).
struct InstantonReport {
  std::optional<std::size_t> rank;
  std::optional<std::size_t> facet;
  std::string status = "optimal";
  std::optional<FacetKind> saturated_kind;
  std::optional<std::size_t> saturated_line;
  std::optional<int> saturated_from;
  std::optional<int> saturated_to;
  double cost = 0.0;
  double likelihood = 0.0;  // exp(-S)
  double alpha = 0.0;
  std::vector<double> rho;
  std::vector<double> rho_ratio;  // rho / rho_bar per site
  std::vector<int> site_buses;
  std::size_t stressed_site = 0;
  int stressed_bus = 0;
  std::vector<LineLoading> loadings;
  double kkt_residual = 0.0;
  double saturated_residual = 0.0;
  double min_other_margin = 0.0;
  std::vector<std::size_t> active_facets;
  std::vector<std::size_t> active_bounds;
  std::vector<std::size_t> merged_facets;
  bool tied_with_previous = false;

  friend bool operator==(const InstantonReport&, const InstantonReport&) = default;
};

/// Report for an Optimal facet result.
InstantonReport describe(const FacetResult& result, const GridModel& grid,
                         const Polytope& polytope, const CostModel& cost);
InstantonReport describe(const SpectrumEntry& entry, const GridModel& grid,
                         const Polytope& polytope, const CostModel& cost);
/// Report for any renewable vector, e.g. the equilibrium itself.
InstantonReport describe_point(const Vector& rho, const GridModel& grid, const Polytope& polytope,
                               const CostModel& cost);

std::string report_to_json(const InstantonReport& report);
InstantonReport report_from_json(const std::string& text);

struct AmoebaComparison {
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  double amoeba_cost = 0.0;
  double exact_cost = 0.0;
  double gap = 0.0;  // amoeba - exact; >= -1e-6 when the exact scan is right
  bool amoeba_exterior = false;
  std::vector<double> rho;
};

struct ScanReportInput {
  std::string grid_label;
  std::string cost_name;
  const GridModel* grid = nullptr;
  const Polytope* polytope = nullptr;
  const CostModel* cost = nullptr;
  const InstantonSpectrum* spectrum = nullptr;
  std::optional<AmoebaComparison> amoeba;
  double kkt_tolerance = kKktTolerance;
};

/// Structured spectrum report (JSON). Contains no timing data, so equal
/// inputs give byte-identical output.
std::string spectrum_report_json(const ScanReportInput& in);
/// Plain-text table: rank, S, exp(-S), alpha, saturated element, stressed site.
std::string summary_table(const ScanReportInput& in);
/// Per-site rho and rho / rho_bar for the equilibrium and the top instantons.
std::string sites_csv(const ScanReportInput& in, std::size_t top);
/// Per-line loadings for the equilibrium and the top instantons.
std::string lines_csv(const ScanReportInput& in, std::size_t top);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace instanton
