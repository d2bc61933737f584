#include "instanton/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "instanton/errors.hpp"

namespace instanton {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void fill_point(InstantonReport& rep, const Vector& rho, const GridModel& grid,
                const Polytope& polytope, const CostModel& cost) {
  const AffineFlowMap& map = polytope.flow_map();
  const Vector typical = typical_vector(grid);
  rep.cost = cost.value(rho);
  rep.likelihood = relative_likelihood(rep.cost);
  rep.alpha = map.alpha(rho);
  rep.rho = to_std(rho);
  rep.rho_ratio = to_std(rho.cwiseQuotient(typical));
  rep.site_buses.clear();
  for (std::size_t i : grid.renewable_buses()) rep.site_buses.push_back(grid.buses()[i].id);
  Eigen::Index stressed = 0;
  rho.cwiseQuotient(typical).maxCoeff(&stressed);
  rep.stressed_site = static_cast<std::size_t>(stressed);
  rep.stressed_bus = rep.site_buses.at(rep.stressed_site);
  const Vector flows = map.flows(rho);
  rep.loadings.clear();
  for (std::size_t l = 0; l < grid.line_count(); ++l) {
    const Line& line = grid.lines()[l];
    const double f = flows(static_cast<Eigen::Index>(l));
    rep.loadings.push_back({l, line.from, line.to, f, std::abs(f) / line.rating});
  }
}

ordered_json json_of(const InstantonReport& r) {
  ordered_json j;
  j["rank"] = r.rank ? ordered_json(*r.rank) : ordered_json(nullptr);
  j["facet"] = r.facet ? ordered_json(*r.facet) : ordered_json(nullptr);
  j["status"] = r.status;
  j["S"] = r.cost;
  j["likelihood"] = r.likelihood;
  j["alpha"] = r.alpha;
  j["saturated_kind"] =
      r.saturated_kind ? ordered_json(std::string(to_string(*r.saturated_kind))) : ordered_json(nullptr);
  j["saturated_line"] = r.saturated_line ? ordered_json(*r.saturated_line) : ordered_json(nullptr);
  j["saturated_from"] = r.saturated_from ? ordered_json(*r.saturated_from) : ordered_json(nullptr);
  j["saturated_to"] = r.saturated_to ? ordered_json(*r.saturated_to) : ordered_json(nullptr);
  j["rho"] = r.rho;
  j["rho_ratio"] = r.rho_ratio;
  j["site_buses"] = r.site_buses;
  j["stressed_site"] = r.stressed_site;
  j["stressed_bus"] = r.stressed_bus;
  ordered_json loads = ordered_json::array();
  for (const LineLoading& l : r.loadings)
    loads.push_back({{"line", l.line}, {"from", l.from}, {"to", l.to}, {"flow", l.flow},
                     {"loading", l.loading}});
  j["loadings"] = std::move(loads);
  j["kkt_residual"] = r.kkt_residual;
  j["saturated_residual"] = r.saturated_residual;
  j["min_other_margin"] = r.min_other_margin;
  j["active_facets"] = r.active_facets;
  j["active_bounds"] = r.active_bounds;
  j["merged_facets"] = r.merged_facets;
  j["tied_with_previous"] = r.tied_with_previous;
  return j;
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string saturated_label(const InstantonReport& r) {
  if (!r.saturated_kind) return "-";
  if (r.saturated_line)
    return std::string(to_string(*r.saturated_kind)) + " line " + std::to_string(*r.saturated_line) +
           " (" + std::to_string(*r.saturated_from) + "-" + std::to_string(*r.saturated_to) + ")";
  return std::string(to_string(*r.saturated_kind));
}

std::vector<InstantonReport> top_reports(const ScanReportInput& in, std::size_t top) {
  std::vector<InstantonReport> out;
  for (const SpectrumEntry& e : in.spectrum->entries) {
    if (out.size() >= top || e.result.status != FacetStatus::Optimal) break;
    out.push_back(describe(e, *in.grid, *in.polytope, *in.cost));
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

InstantonReport describe(const FacetResult& result, const GridModel& grid,
                         const Polytope& polytope, const CostModel& cost) {
  if (result.status != FacetStatus::Optimal)
    throw std::invalid_argument("describe needs an optimal facet result");
  InstantonReport rep;
  fill_point(rep, result.rho, grid, polytope, cost);
  const FacetConstraint& f = polytope.facet(result.facet);
  rep.facet = result.facet;
  rep.status = std::string(to_string(result.status));
  rep.saturated_kind = f.kind;
  if (f.line) {
    rep.saturated_line = *f.line;
    rep.saturated_from = grid.lines()[*f.line].from;
    rep.saturated_to = grid.lines()[*f.line].to;
  }
  rep.kkt_residual = result.kkt_residual;
  rep.saturated_residual = result.saturated_residual;
  rep.min_other_margin = result.min_other_margin;
  rep.active_facets = result.active_facets;
  rep.active_bounds = result.active_bounds;
  return rep;
}

InstantonReport describe(const SpectrumEntry& entry, const GridModel& grid,
                         const Polytope& polytope, const CostModel& cost) {
  InstantonReport rep = describe(entry.result, grid, polytope, cost);
  rep.rank = entry.rank;
  rep.merged_facets = entry.merged_facets;
  rep.tied_with_previous = entry.tied_with_previous;
  return rep;
}

InstantonReport describe_point(const Vector& rho, const GridModel& grid, const Polytope& polytope,
                               const CostModel& cost) {
  InstantonReport rep;
  rep.status = "point";
  fill_point(rep, rho, grid, polytope, cost);
  rep.min_other_margin = contains(polytope, rho).min_margin;
  return rep;
}

std::string report_to_json(const InstantonReport& report) { return json_of(report).dump(2) + "\n"; }

InstantonReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    InstantonReport r;
    r.rank = optional_field<std::size_t>(j, "rank");
    r.facet = optional_field<std::size_t>(j, "facet");
    r.status = j.at("status").get<std::string>();
    r.cost = j.at("S").get<double>();
    r.likelihood = j.at("likelihood").get<double>();
    r.alpha = j.at("alpha").get<double>();
    if (auto k = optional_field<std::string>(j, "saturated_kind")) r.saturated_kind = parse_facet_kind(*k);
    r.saturated_line = optional_field<std::size_t>(j, "saturated_line");
    r.saturated_from = optional_field<int>(j, "saturated_from");
    r.saturated_to = optional_field<int>(j, "saturated_to");
    r.rho = j.at("rho").get<std::vector<double>>();
    r.rho_ratio = j.at("rho_ratio").get<std::vector<double>>();
    r.site_buses = j.at("site_buses").get<std::vector<int>>();
    r.stressed_site = j.at("stressed_site").get<std::size_t>();
    r.stressed_bus = j.at("stressed_bus").get<int>();
    for (const auto& l : j.at("loadings"))
      r.loadings.push_back({l.at("line").get<std::size_t>(), l.at("from").get<int>(),
                            l.at("to").get<int>(), l.at("flow").get<double>(),
                            l.at("loading").get<double>()});
    r.kkt_residual = j.at("kkt_residual").get<double>();
    r.saturated_residual = j.at("saturated_residual").get<double>();
    r.min_other_margin = j.at("min_other_margin").get<double>();
    r.active_facets = j.at("active_facets").get<std::vector<std::size_t>>();
    r.active_bounds = j.at("active_bounds").get<std::vector<std::size_t>>();
    r.merged_facets = j.at("merged_facets").get<std::vector<std::size_t>>();
    r.tied_with_previous = j.at("tied_with_previous").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instanton report: ") + e.what());
  }
}

std::string spectrum_report_json(const ScanReportInput& in) {
  ordered_json doc;
  doc["grid"] = in.grid_label;
  doc["cost"] = in.cost_name;
  doc["tolerances"] = {{"kkt_residual", in.kkt_tolerance},
                       {"saturated_margin", kKktTolerance},
                       {"other_margins", -kKktTolerance},
                       {"duplicate_rho", kDuplicateTolerance},
                       {"tie_cost", kTieTolerance},
                       {"boundary", 1e-12}};
  doc["bus_count"] = in.grid->bus_count();
  doc["line_count"] = in.grid->line_count();
  doc["site_count"] = in.grid->renewable_count();
  doc["facet_count"] = in.spectrum->facet_count;
  doc["skipped_facets"] = in.spectrum->skipped_facets;
  doc["optimal_count"] = in.spectrum->optimal_count();
  doc["equilibrium"] = json_of(describe_point(in.cost->equilibrium(), *in.grid, *in.polytope, *in.cost));
  ordered_json optimal = ordered_json::array();
  ordered_json rest = ordered_json::array();
  for (const SpectrumEntry& e : in.spectrum->entries) {
    if (e.result.status == FacetStatus::Optimal) {
      optimal.push_back(json_of(describe(e, *in.grid, *in.polytope, *in.cost)));
      continue;
    }
    const FacetConstraint& f = in.polytope->facet(e.result.facet);
    ordered_json jr;
    jr["facet"] = e.result.facet;
    jr["status"] = std::string(to_string(e.result.status));
    jr["kind"] = std::string(to_string(f.kind));
    jr["line"] = f.line ? ordered_json(*f.line) : ordered_json(nullptr);
    jr["S"] = "inf";
    rest.push_back(std::move(jr));
  }
  doc["instantons"] = std::move(optimal);
  doc["unreachable"] = std::move(rest);
  if (in.amoeba) {
    const AmoebaComparison& a = *in.amoeba;
    doc["amoeba"] = {{"restarts", a.restarts}, {"seed", a.seed},     {"amoeba_S", a.amoeba_cost},
                     {"exact_S", a.exact_cost}, {"gap", a.gap},       {"exterior", a.amoeba_exterior},
                     {"rho", a.rho}};
  }
  return doc.dump(2) + "\n";
}

std::string summary_table(const ScanReportInput& in) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-5s %-14s %-13s %-9s %-36s %s\n", "rank", "S", "exp(-S)",
                "alpha", "saturated", "stressed site");
  out << line;
  for (const SpectrumEntry& e : in.spectrum->entries) {
    if (e.result.status != FacetStatus::Optimal) break;
    const InstantonReport r = describe(e, *in.grid, *in.polytope, *in.cost);
    std::snprintf(line, sizeof line, "%-5zu %-14.8g %-13.6e %-9.5f %-36s bus %d (rho/rho_bar %.4f)%s\n",
                  *r.rank, r.cost, r.likelihood, r.alpha, saturated_label(r).c_str(), r.stressed_bus,
                  r.rho_ratio[r.stressed_site], e.tied_with_previous ? " [tie]" : "");
    out << line;
  }
  std::size_t uncertified = 0;
  for (const SpectrumEntry& e : in.spectrum->entries)
    if (e.result.status == FacetStatus::Optimal && e.result.kkt_residual > in.kkt_tolerance) ++uncertified;
  std::size_t unreachable = in.spectrum->entries.size() - in.spectrum->optimal_count();
  out << "facets: " << in.spectrum->facet_count << " total, " << in.spectrum->optimal_count()
      << " distinct minima, " << unreachable << " unreachable, " << in.spectrum->skipped_facets.size()
      << " skipped (zero normal), " << uncertified
      << " above KKT tolerance " << format_double(in.kkt_tolerance) << "\n";
  if (in.amoeba)
    out << "amoeba: best S " << format_double(in.amoeba->amoeba_cost) << " over " << in.amoeba->restarts
        << " restarts, gap to exact " << format_double(in.amoeba->gap) << "\n";
  return out.str();
}

std::string sites_csv(const ScanReportInput& in, std::size_t top) {
  const auto reports = top_reports(in, top);
  const InstantonReport eq = describe_point(in.cost->equilibrium(), *in.grid, *in.polytope, *in.cost);
  std::ostringstream out;
  out << "site,bus,rho_bar";
  for (const auto& r : reports) out << ",rho_" << *r.rank << ",ratio_" << *r.rank;
  out << "\n";
  for (std::size_t k = 0; k < eq.rho.size(); ++k) {
    out << k << "," << eq.site_buses[k] << "," << format_double(eq.rho[k]);
    for (const auto& r : reports) out << "," << format_double(r.rho[k]) << "," << format_double(r.rho_ratio[k]);
    out << "\n";
  }
  return out.str();
}

std::string lines_csv(const ScanReportInput& in, std::size_t top) {
  const auto reports = top_reports(in, top);
  const InstantonReport eq = describe_point(in.cost->equilibrium(), *in.grid, *in.polytope, *in.cost);
  std::ostringstream out;
  out << "line,from,to,rating,loading_equilibrium";
  for (const auto& r : reports) out << ",loading_" << *r.rank;
  out << "\n";
  for (std::size_t l = 0; l < eq.loadings.size(); ++l) {
    const LineLoading& e = eq.loadings[l];
    out << l << "," << e.from << "," << e.to << "," << format_double(in.grid->lines()[l].rating) << ","
        << format_double(e.loading);
    for (const auto& r : reports) out << "," << format_double(r.loadings[l].loading);
    out << "\n";
  }
  return out.str();
}

}  // namespace instanton
