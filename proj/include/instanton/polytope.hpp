#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instanton/dc_flow.hpp"
#include "instanton/grid_model.hpp"

namespace instanton {

/// Line flows and the control coefficient as affine functions of rho:
///   flow(rho)  = sensitivity * rho + base_flow
///   alpha(rho) = alpha0 - alpha_slope * sum(rho)
struct AffineFlowMap {
  Matrix sensitivity;  // lines x renewables, MW per MW
  Vector base_flow;    // MW at rho = 0
  double alpha0 = 0.0;
  double alpha_slope = 0.0;

  std::size_t line_count() const { return static_cast<std::size_t>(sensitivity.rows()); }
  std::size_t site_count() const { return static_cast<std::size_t>(sensitivity.cols()); }
  Vector flows(const Vector& rho) const { return sensitivity * rho + base_flow; }
  double alpha(const Vector& rho) const { return alpha0 - alpha_slope * rho.sum(); }
};

/// Uses one DC solve for the base flow plus one per renewable site.
AffineFlowMap build_affine_map(const GridModel& grid, const ReducedFactorization& factorization);

enum class FacetKind { EdgeUpper, EdgeLower, PowerUpper, PowerLower };

std::string_view to_string(FacetKind kind);
FacetKind parse_facet_kind(std::string_view text);

/// Half-space normal . rho <= offset.
struct FacetConstraint {
  FacetKind kind = FacetKind::EdgeUpper;
  std::optional<std::size_t> line;  // set for edge facets
  Vector normal;
  double offset = 0.0;

  double margin(const Vector& rho) const { return offset - normal.dot(rho); }
  /// True when the normal vanishes (flow insensitive to every renewable site).
  bool zero_normal() const;
  bool is_edge() const { return kind == FacetKind::EdgeUpper || kind == FacetKind::EdgeLower; }
};

/// Feasibility region of the renewable vector: every line within rating and
/// the control coefficient within its bounds. Facets are ordered
/// EdgeUpper(0), EdgeLower(0), ..., EdgeUpper(L-1), EdgeLower(L-1),
/// PowerUpper, PowerLower, so there are always 2L + 2 of them.
class Polytope {
 public:
  Polytope(std::vector<FacetConstraint> facets, AffineFlowMap map);

  const std::vector<FacetConstraint>& facets() const { return facets_; }
  const FacetConstraint& facet(std::size_t i) const { return facets_.at(i); }
  std::size_t size() const { return facets_.size(); }
  std::size_t dimension() const { return map_.site_count(); }
  const AffineFlowMap& flow_map() const { return map_; }

  /// Facet rows stacked as a matrix; row i is facets()[i].normal.
  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }

 private:
  std::vector<FacetConstraint> facets_;
  AffineFlowMap map_;
  Matrix normals_;
  Vector offsets_;
};

/// Builds the 2L + 2 facets. Throws EquilibriumInfeasible unless the typical
/// renewable output strictly satisfies every facet.
Polytope enumerate_facets(const AffineFlowMap& map, const GridModel& grid);

/// Factorize, build the affine map and enumerate facets in one go.
Polytope build_polytope(const GridModel& grid);

struct Membership {
  bool inside = false;
  Vector margins;  // offset - normal . rho, one per facet
  double min_margin = 0.0;
};

/// Closed-polytope membership: a margin of zero (within 1e-12 relative to the
/// offset) counts as inside.
Membership contains(const Polytope& polytope, const Vector& rho);

/// Facets as a JSON document (kind, line, normal, offset, endpoints).
std::string facets_to_json(const Polytope& polytope, const GridModel& grid);

}  // namespace instanton
