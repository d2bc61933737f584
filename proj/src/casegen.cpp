#include "instanton/casegen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "instanton/errors.hpp"
#include "instanton/polytope.hpp"
#include "instanton/random.hpp"

namespace instanton {

namespace {

constexpr int kMaxResamples = 100;

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct BaseStatistics {
  std::vector<std::size_t> generator_degrees;
  double rating = 0.0;
  double reactance_lo = 0.0;
  double reactance_hi = 0.0;
};

BaseStatistics base_statistics(const GridModel& base) {
  BaseStatistics st;
  std::map<int, std::size_t> degree;
  std::vector<double> ratings;
  std::vector<double> reactances;
  for (const Line& l : base.lines()) {
    ++degree[l.from];
    ++degree[l.to];
    ratings.push_back(l.rating);
    reactances.push_back(l.reactance);
  }
  for (const Bus& b : base.buses())
    if (b.role == BusRole::Generator) st.generator_degrees.push_back(degree[b.id]);
  st.rating = quantile(ratings, 0.5);
  st.reactance_lo = quantile(reactances, 0.25);
  st.reactance_hi = quantile(reactances, 0.75);
  return st;
}

std::vector<Line> draw_site_lines(const GridModel& base, const BaseStatistics& st, int site_id,
                                  std::uint64_t seed, std::size_t site, std::uint64_t attempt) {
  Random rng{seed, site, attempt};
  const std::size_t n_base = base.bus_count();
  std::size_t k = st.generator_degrees[rng.below(st.generator_degrees.size())];
  k = std::clamp<std::size_t>(k, 1, n_base);
  std::vector<int> chosen;
  while (chosen.size() < k) {
    const int id = base.buses()[rng.below(n_base)].id;
    if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) continue;
    chosen.push_back(id);
  }
  std::vector<Line> lines;
  for (int id : chosen)
    lines.push_back({id, site_id, rng.uniform(st.reactance_lo, st.reactance_hi), st.rating});
  return lines;
}

}  // namespace

GridModel extend(const GridModel& base, const ExtensionSpec& spec) {
  if (spec.n_new < 1) throw InvalidSpec("extension needs at least one new renewable bus");
  if (!(spec.penetration > 0.0 && spec.penetration < 1.0))
    throw InvalidSpec("penetration must lie in (0, 1)");
  if (base.renewable_count() != 0) throw InvalidSpec("base grid already has renewable buses");
  std::vector<double> weights(spec.n_new, 1.0);
  if (spec.site_weights) {
    if (spec.site_weights->size() != spec.n_new)
      throw InvalidSpec("site_weights must have one entry per new bus");
    weights = *spec.site_weights;
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidSpec("site weights must be positive");
  }
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (base.line_count() == 0) throw InvalidSpec("base grid has no lines");

  const BaseStatistics st = base_statistics(base);
  if (st.generator_degrees.empty()) throw InvalidSpec("base grid has no generator buses");

  // Balance at alpha = 1 with the requested ratio sum(rho_bar) / sum(p).
  const double demand = total_demand(base);
  const double generation = total_nominal_generation(base);
  const double new_generation = demand / (1.0 + spec.penetration);
  const double renewable_total = demand - new_generation;
  const double scale = new_generation / generation;

  std::vector<Bus> buses = base.buses();
  for (Bus& b : buses)
    if (b.role == BusRole::Generator) b.nominal_output *= scale;
  const int first_id = base.buses().back().id + 1;
  for (std::size_t k = 0; k < spec.n_new; ++k) {
    Bus b;
    b.id = first_id + static_cast<int>(k);
    b.role = BusRole::Renewable;
    b.typical_output = renewable_total * weights[k] / weight_sum;
    buses.push_back(b);
  }

  std::vector<std::uint64_t> attempts(spec.n_new, 0);
  std::string last_failure;
  for (int round = 0; round <= kMaxResamples; ++round) {
    if (round > 0) {
      const std::size_t site = spec.n_new - 1 - static_cast<std::size_t>(round - 1) % spec.n_new;
      ++attempts[site];
    }
    std::vector<Line> lines = base.lines();
    for (std::size_t k = 0; k < spec.n_new; ++k) {
      auto site_lines =
          draw_site_lines(base, st, first_id + static_cast<int>(k), spec.seed, k, attempts[k]);
      lines.insert(lines.end(), site_lines.begin(), site_lines.end());
    }
    GridModel grid = GridModel::create(buses, std::move(lines), base.slack(), base.alpha_min(),
                                       base.alpha_max());
    try {
      build_polytope(grid);
      return grid;
    } catch (const EquilibriumInfeasible& e) {
      last_failure = e.what();
    }
  }
  throw CannotPlaceFeasibly("no feasible placement after " + std::to_string(kMaxResamples) +
                            " resamples: " + last_failure);
}

double penetration_achieved(const GridModel& grid) {
  return total_typical_renewable(grid) / total_nominal_generation(grid);
}

}  // namespace instanton
