#include "instanton/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "instanton/errors.hpp"

namespace instanton {

namespace {

double boundary_tolerance(double offset) { return 1e-12 * std::max(1.0, std::abs(offset)); }

}  // namespace

AffineFlowMap build_affine_map(const GridModel& grid, const ReducedFactorization& factorization) {
  const std::size_t n_sites = grid.renewable_count();
  const double generation = total_nominal_generation(grid);

  AffineFlowMap map;
  map.alpha0 = total_demand(grid) / generation;
  map.alpha_slope = 1.0 / generation;

  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(n_sites));
  map.base_flow =
      line_flows(grid, solve_phases(factorization, assemble_injection(grid, zero)));

  // Column k: 1 MW injected at site k, absorbed by every generator in
  // proportion to its nominal output.
  map.sensitivity.resize(static_cast<Eigen::Index>(grid.line_count()),
                         static_cast<Eigen::Index>(n_sites));
  Vector unit = Vector::Zero(static_cast<Eigen::Index>(grid.bus_count()));
  for (std::size_t i = 0; i < grid.bus_count(); ++i) {
    const Bus& b = grid.buses()[i];
    if (b.role == BusRole::Generator)
      unit(static_cast<Eigen::Index>(i)) = -b.nominal_output / generation;
  }
  const auto& sites = grid.renewable_buses();
  for (std::size_t k = 0; k < n_sites; ++k) {
    Vector injection = unit;
    injection(static_cast<Eigen::Index>(sites[k])) += 1.0;
    map.sensitivity.col(static_cast<Eigen::Index>(k)) =
        line_flows(grid, factorization.solve(injection));
  }
  return map;
}

std::string_view to_string(FacetKind kind) {
  switch (kind) {
    case FacetKind::EdgeUpper: return "edge_upper";
    case FacetKind::EdgeLower: return "edge_lower";
    case FacetKind::PowerUpper: return "power_upper";
    case FacetKind::PowerLower: return "power_lower";
  }
  return "edge_upper";
}

FacetKind parse_facet_kind(std::string_view text) {
  if (text == "edge_upper") return FacetKind::EdgeUpper;
  if (text == "edge_lower") return FacetKind::EdgeLower;
  if (text == "power_upper") return FacetKind::PowerUpper;
  if (text == "power_lower") return FacetKind::PowerLower;
  throw ParseError("unknown facet kind '" + std::string(text) + "'");
}

bool FacetConstraint::zero_normal() const {
  return normal.size() == 0 || normal.cwiseAbs().maxCoeff() <= 1e-12;
}

Polytope::Polytope(std::vector<FacetConstraint> facets, AffineFlowMap map)
    : facets_(std::move(facets)), map_(std::move(map)) {
  const auto k = static_cast<Eigen::Index>(facets_.size());
  const auto n = static_cast<Eigen::Index>(map_.site_count());
  normals_.resize(k, n);
  offsets_.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    normals_.row(i) = facets_[static_cast<std::size_t>(i)].normal.transpose();
    offsets_(i) = facets_[static_cast<std::size_t>(i)].offset;
  }
}

Polytope enumerate_facets(const AffineFlowMap& map, const GridModel& grid) {
  const auto n = static_cast<Eigen::Index>(map.site_count());
  std::vector<FacetConstraint> facets;
  facets.reserve(2 * map.line_count() + 2);
  for (std::size_t l = 0; l < map.line_count(); ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    const double rating = grid.lines()[l].rating;
    const Vector row = map.sensitivity.row(li).transpose();
    facets.push_back({FacetKind::EdgeUpper, l, row, rating - map.base_flow(li)});
    facets.push_back({FacetKind::EdgeLower, l, -row, rating + map.base_flow(li)});
  }
  // alpha <= alpha_max  <=>  sum(rho) >= sum(d) - alpha_max * sum(p)
  // alpha >= alpha_min  <=>  sum(rho) <= sum(d) - alpha_min * sum(p)
  const double demand = total_demand(grid);
  const double generation = total_nominal_generation(grid);
  facets.push_back({FacetKind::PowerUpper, std::nullopt, -Vector::Ones(n),
                    grid.alpha_max() * generation - demand});
  facets.push_back({FacetKind::PowerLower, std::nullopt, Vector::Ones(n),
                    demand - grid.alpha_min() * generation});

  Vector typical(n);
  const auto outputs = grid.typical_outputs();
  for (Eigen::Index k = 0; k < n; ++k) typical(k) = outputs[static_cast<std::size_t>(k)];
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const double m = facets[i].margin(typical);
    if (!(m > 0.0)) {
      std::string what = "typical renewable output violates facet " + std::to_string(i) +
                         " (" + std::string(to_string(facets[i].kind));
      if (facets[i].line) {
        const Line& l = grid.lines()[*facets[i].line];
        what += " line " + std::to_string(l.from) + "-" + std::to_string(l.to);
      }
      throw EquilibriumInfeasible(what + "), margin " + std::to_string(m));
    }
  }
  return Polytope(std::move(facets), map);
}

Polytope build_polytope(const GridModel& grid) {
  const ReducedFactorization f = factorize(grid);
  return enumerate_facets(build_affine_map(grid, f), grid);
}

Membership contains(const Polytope& polytope, const Vector& rho) {
  Membership m;
  m.margins = polytope.offsets() - polytope.normals() * rho;
  m.inside = true;
  m.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polytope.size(); ++i) {
    const double v = m.margins(static_cast<Eigen::Index>(i));
    m.min_margin = std::min(m.min_margin, v);
    if (v < -boundary_tolerance(polytope.facet(i).offset)) m.inside = false;
  }
  return m;
}

std::string facets_to_json(const Polytope& polytope, const GridModel& grid) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < polytope.size(); ++i) {
    const FacetConstraint& f = polytope.facet(i);
    nlohmann::ordered_json jf;
    jf["index"] = i;
    jf["kind"] = std::string(to_string(f.kind));
    if (f.line) {
      const Line& l = grid.lines()[*f.line];
      jf["line"] = *f.line;
      jf["from"] = l.from;
      jf["to"] = l.to;
    }
    jf["normal"] = std::vector<double>(f.normal.data(), f.normal.data() + f.normal.size());
    jf["offset"] = f.offset;
    jf["zero_normal"] = f.zero_normal();
    doc.push_back(std::move(jf));
  }
  return doc.dump(2) + "\n";
}

}  // namespace instanton
