#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace instanton {

enum class BusRole { Demand, Renewable, Generator, Junction };

std::string_view to_string(BusRole role);
BusRole parse_role(std::string_view text);

/// A network node. Power quantities are in MW and stored as positive magnitudes.
///
/// `demand` is the fixed consumption of a Demand bus. A Generator bus may also
/// carry a fixed local demand (RTS-96 places loads and units on the same bus);
/// it stays a single node with injection `alpha * nominal_output - demand`.
struct Bus {
  int id = 0;
  BusRole role = BusRole::Junction;
  double demand = 0.0;
  double nominal_output = 0.0;
  double typical_output = 0.0;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Transmission line; reactance in per-unit, rating in MW.
struct Line {
  int from = 0;
  int to = 0;
  double reactance = 0.0;
  double rating = 0.0;

  friend bool operator==(const Line&, const Line&) = default;
};

/// Validated, immutable transmission grid.
///
/// Buses are kept sorted by id. Parallel lines are merged on construction
/// (reactances combined in parallel, ratings summed) so the line list always
/// describes a simple graph. Renewable sites are indexed in bus order; that
/// index is the coordinate of the renewable vector used everywhere else.
class GridModel {
 public:
  /// Validates and builds a grid. Throws ValidationError on any violated
  /// invariant. When `slack` is empty the lowest-id Generator bus is used.
  static GridModel create(std::vector<Bus> buses, std::vector<Line> lines,
                          std::optional<int> slack, double alpha_min,
                          double alpha_max);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  int slack() const { return slack_; }
  std::size_t slack_index() const { return index_of(slack_); }
  double alpha_min() const { return alpha_min_; }
  double alpha_max() const { return alpha_max_; }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t line_count() const { return lines_.size(); }

  bool has_bus(int id) const { return index_.count(id) != 0; }
  /// Position of bus `id` in buses(). Throws std::out_of_range if absent.
  std::size_t index_of(int id) const { return index_.at(id); }

  /// Bus positions of the renewable sites, in renewable-vector order.
  const std::vector<std::size_t>& renewable_buses() const { return renewables_; }
  std::size_t renewable_count() const { return renewables_.size(); }
  /// Typical outputs of the renewable sites, in renewable-vector order.
  std::vector<double> typical_outputs() const;

  friend bool operator==(const GridModel& a, const GridModel& b) {
    return a.buses_ == b.buses_ && a.lines_ == b.lines_ && a.slack_ == b.slack_ &&
           a.alpha_min_ == b.alpha_min_ && a.alpha_max_ == b.alpha_max_;
  }

 private:
  GridModel() = default;

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  int slack_ = 0;
  double alpha_min_ = 0.0;
  double alpha_max_ = 0.0;
  std::unordered_map<int, std::size_t> index_;
  std::vector<std::size_t> renewables_;
};

double total_demand(const GridModel& grid);
double total_nominal_generation(const GridModel& grid);
double total_typical_renewable(const GridModel& grid);

/// Parses a grid document (JSON). Throws ParseError or ValidationError.
GridModel parse_grid(std::string_view text);
GridModel load_grid(const std::string& path);

/// Deterministic serialization; parse_grid(serialize_grid(g)) == g.
std::string serialize_grid(const GridModel& grid);
void save_grid(const GridModel& grid, const std::string& path);

}  // namespace instanton
