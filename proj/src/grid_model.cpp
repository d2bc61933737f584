#include "instanton/grid_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "instanton/errors.hpp"

namespace instanton {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string bus_label(const Bus& b) { return "bus " + std::to_string(b.id); }

void validate_bus(const Bus& b) {
  auto fail = [&](const std::string& what) {
    throw ValidationError(bus_label(b) + ": " + what);
  };
  switch (b.role) {
    case BusRole::Demand:
      if (!positive_finite(b.demand)) fail("demand must be positive");
      if (b.nominal_output != 0.0 || b.typical_output != 0.0)
        fail("demand bus carries generation fields");
      break;
    case BusRole::Generator:
      if (!positive_finite(b.nominal_output)) fail("nominal output must be positive");
      if (!std::isfinite(b.demand) || b.demand < 0.0) fail("local demand must be nonnegative");
      if (b.typical_output != 0.0) fail("generator bus carries a renewable output");
      break;
    case BusRole::Renewable:
      if (!positive_finite(b.typical_output)) fail("typical output must be positive");
      if (b.demand != 0.0 || b.nominal_output != 0.0)
        fail("renewable bus carries demand or nominal output");
      break;
    case BusRole::Junction:
      if (b.demand != 0.0 || b.nominal_output != 0.0 || b.typical_output != 0.0)
        fail("junction bus carries power fields");
      break;
  }
}

// Merges parallel circuits: reactances combine in parallel, ratings add.
// Orientation and position follow the first occurrence of each pair.
std::vector<Line> merge_parallel(const std::vector<Line>& lines) {
  std::vector<Line> merged;
  std::vector<double> susceptance;
  std::map<std::pair<int, int>, std::size_t> seen;
  for (const Line& l : lines) {
    auto key = std::minmax(l.from, l.to);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, merged.size());
      merged.push_back(l);
      susceptance.push_back(1.0 / l.reactance);
    } else {
      susceptance[it->second] += 1.0 / l.reactance;
      merged[it->second].rating += l.rating;
      merged[it->second].reactance = 1.0 / susceptance[it->second];
    }
  }
  return merged;
}

}  // namespace

std::string_view to_string(BusRole role) {
  switch (role) {
    case BusRole::Demand: return "demand";
    case BusRole::Renewable: return "renewable";
    case BusRole::Generator: return "generator";
    case BusRole::Junction: return "junction";
  }
  return "junction";
}

BusRole parse_role(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "demand") return BusRole::Demand;
  if (lower == "renewable") return BusRole::Renewable;
  if (lower == "generator") return BusRole::Generator;
  if (lower == "junction") return BusRole::Junction;
  throw ParseError("unknown bus role '" + std::string(text) + "'");
}

GridModel GridModel::create(std::vector<Bus> buses, std::vector<Line> lines,
                            std::optional<int> slack, double alpha_min,
                            double alpha_max) {
  GridModel g;
  if (buses.empty()) throw ValidationError("grid has no buses");
  std::sort(buses.begin(), buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < buses.size(); ++i) {
    validate_bus(buses[i]);
    if (!g.index_.emplace(buses[i].id, i).second)
      throw ValidationError("duplicate bus id " + std::to_string(buses[i].id));
  }

  for (const Line& l : lines) {
    const std::string name =
        "line " + std::to_string(l.from) + "-" + std::to_string(l.to);
    if (!g.index_.count(l.from) || !g.index_.count(l.to))
      throw ValidationError(name + ": unknown endpoint");
    if (l.from == l.to) throw ValidationError(name + ": self loop");
    if (!positive_finite(l.reactance))
      throw ValidationError(name + ": reactance must be positive");
    if (!positive_finite(l.rating))
      throw ValidationError(name + ": rating must be positive");
  }
  g.lines_ = merge_parallel(lines);
  g.buses_ = std::move(buses);

  // Breadth-first traversal from the first bus.
  std::vector<std::vector<std::size_t>> adjacency(g.buses_.size());
  for (const Line& l : g.lines_) {
    adjacency[g.index_.at(l.from)].push_back(g.index_.at(l.to));
    adjacency[g.index_.at(l.to)].push_back(g.index_.at(l.from));
  }
  std::vector<bool> visited(g.buses_.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  visited[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : adjacency[v]) {
      if (!visited[w]) {
        visited[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  if (reached != g.buses_.size())
    throw ValidationError("grid is disconnected: " + std::to_string(reached) + " of " +
                          std::to_string(g.buses_.size()) + " buses reachable");

  if (slack) {
    if (!g.index_.count(*slack))
      throw ValidationError("slack bus " + std::to_string(*slack) + " does not exist");
    g.slack_ = *slack;
  } else {
    auto it = std::find_if(g.buses_.begin(), g.buses_.end(),
                           [](const Bus& b) { return b.role == BusRole::Generator; });
    if (it == g.buses_.end()) throw ValidationError("no slack given and no generator bus");
    g.slack_ = it->id;
  }

  if (!std::isfinite(alpha_min) || !std::isfinite(alpha_max) || !(alpha_min < 1.0) ||
      !(1.0 < alpha_max))
    throw ValidationError("alpha bounds must satisfy alpha_min < 1 < alpha_max");
  g.alpha_min_ = alpha_min;
  g.alpha_max_ = alpha_max;

  for (std::size_t i = 0; i < g.buses_.size(); ++i)
    if (g.buses_[i].role == BusRole::Renewable) g.renewables_.push_back(i);

  if (!(total_demand(g) > 0.0)) throw ValidationError("total demand must be positive");
  if (!(total_nominal_generation(g) > 0.0))
    throw ValidationError("total nominal generation must be positive");
  return g;
}

std::vector<double> GridModel::typical_outputs() const {
  std::vector<double> out;
  out.reserve(renewables_.size());
  for (std::size_t i : renewables_) out.push_back(buses_[i].typical_output);
  return out;
}

double total_demand(const GridModel& grid) {
  double s = 0.0;
  for (const Bus& b : grid.buses()) s += b.demand;
  return s;
}

double total_nominal_generation(const GridModel& grid) {
  double s = 0.0;
  for (const Bus& b : grid.buses())
    if (b.role == BusRole::Generator) s += b.nominal_output;
  return s;
}

double total_typical_renewable(const GridModel& grid) {
  double s = 0.0;
  for (const Bus& b : grid.buses())
    if (b.role == BusRole::Renewable) s += b.typical_output;
  return s;
}

GridModel parse_grid(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid file is not valid JSON: ") + e.what());
  }

  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::optional<int> slack;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  try {
    if (!doc.is_object()) throw ParseError("grid document must be an object");
    for (const char* key : {"buses", "lines", "alpha_bounds"})
      if (!doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.role = parse_role(jb.at("role").get<std::string>());
      b.demand = jb.value("d", 0.0);
      b.nominal_output = jb.value("p", 0.0);
      b.typical_output = jb.value("rho_bar", 0.0);
      buses.push_back(b);
    }
    for (const auto& jl : doc.at("lines")) {
      Line l;
      l.from = jl.at("from").get<int>();
      l.to = jl.at("to").get<int>();
      l.reactance = jl.at("x").get<double>();
      l.rating = jl.at("u").get<double>();
      lines.push_back(l);
    }
    if (doc.contains("slack") && !doc.at("slack").is_null())
      slack = doc.at("slack").get<int>();
    const auto& bounds = doc.at("alpha_bounds");
    if (!bounds.is_array() || bounds.size() != 2)
      throw ParseError("alpha_bounds must be a two-element array");
    alpha_min = bounds.at(0).get<double>();
    alpha_max = bounds.at(1).get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed grid document: ") + e.what());
  }
  return GridModel::create(std::move(buses), std::move(lines), slack, alpha_min, alpha_max);
}

GridModel load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_grid(buffer.str());
}

std::string serialize_grid(const GridModel& grid) {
  ordered_json doc;
  ordered_json buses = ordered_json::array();
  for (const Bus& b : grid.buses()) {
    ordered_json jb;
    jb["id"] = b.id;
    jb["role"] = std::string(to_string(b.role));
    if (b.demand != 0.0) jb["d"] = b.demand;
    if (b.nominal_output != 0.0) jb["p"] = b.nominal_output;
    if (b.typical_output != 0.0) jb["rho_bar"] = b.typical_output;
    buses.push_back(std::move(jb));
  }
  ordered_json lines = ordered_json::array();
  for (const Line& l : grid.lines())
    lines.push_back({{"from", l.from}, {"to", l.to}, {"x", l.reactance}, {"u", l.rating}});
  doc["buses"] = std::move(buses);
  doc["lines"] = std::move(lines);
  doc["slack"] = grid.slack();
  doc["alpha_bounds"] = {grid.alpha_min(), grid.alpha_max()};
  return doc.dump(2) + "\n";
}

void save_grid(const GridModel& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write grid file " + path);
  out << serialize_grid(grid);
}

}  // namespace instanton
