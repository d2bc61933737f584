#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "instanton/cost.hpp"
#include "instanton/dc_flow.hpp"
#include "instanton/grid_model.hpp"
#include "instanton/random.hpp"

namespace testing {

using instanton::Bus;
using instanton::BusRole;
using instanton::GridModel;
using instanton::Line;
using instanton::Matrix;
using instanton::Vector;

inline std::string data_path(const std::string& name) {
  return (std::filesystem::path(INSTANTON_DATA_DIR) / name).string();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("instanton_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Bus demand_bus(int id, double d) { return Bus{id, BusRole::Demand, d, 0.0, 0.0}; }
inline Bus generator_bus(int id, double p) { return Bus{id, BusRole::Generator, 0.0, p, 0.0}; }
inline Bus renewable_bus(int id, double rho_bar) {
  return Bus{id, BusRole::Renewable, 0.0, 0.0, rho_bar};
}

/// Generator 0 -- renewable 1 -- demand 2 (path), balanced at rho_bar.
inline GridModel three_bus_path(double rating = 150.0) {
  return GridModel::create({generator_bus(0, 60.0), renewable_bus(1, 40.0), demand_bus(2, 100.0)},
                           {{0, 1, 0.1, rating}, {1, 2, 0.2, rating}}, 0, 0.0, 2.0);
}

/// Phases by dense LU of the grounded Laplacian assembled entry by entry.
/// Independent of the library's factorization.
inline Vector oracle_phases(const GridModel& g, const Vector& injection) {
  const auto n = static_cast<Eigen::Index>(g.bus_count());
  Matrix b = Matrix::Zero(n, n);
  for (const Line& l : g.lines()) {
    const auto i = static_cast<Eigen::Index>(g.index_of(l.from));
    const auto j = static_cast<Eigen::Index>(g.index_of(l.to));
    b(i, i) += 1.0 / l.reactance;
    b(j, j) += 1.0 / l.reactance;
    b(i, j) -= 1.0 / l.reactance;
    b(j, i) -= 1.0 / l.reactance;
  }
  const auto s = static_cast<Eigen::Index>(g.slack_index());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != s) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Matrix r(m, m);
  Vector p(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    p(a) = injection(keep[a]);
    for (Eigen::Index c = 0; c < m; ++c) r(a, c) = b(keep[a], keep[c]);
  }
  const Vector x = r.fullPivLu().solve(p);
  Vector phi = Vector::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) phi(keep[a]) = x(a);
  return phi;
}

/// Injection vector written directly from the bus roles.
inline Vector oracle_injection(const GridModel& g, const Vector& rho) {
  double d = 0.0, p = 0.0;
  for (const Bus& b : g.buses()) {
    d += b.demand;
    p += b.nominal_output;
  }
  const double alpha = (d - rho.sum()) / p;
  Vector inj = Vector::Zero(static_cast<Eigen::Index>(g.bus_count()));
  std::size_t k = 0;
  for (std::size_t i = 0; i < g.bus_count(); ++i) {
    const Bus& b = g.buses()[i];
    switch (b.role) {
      case BusRole::Renewable: inj(i) = rho(k++); break;
      case BusRole::Generator: inj(i) = alpha * b.nominal_output - b.demand; break;
      default: inj(i) = -b.demand; break;
    }
  }
  return inj;
}

inline Vector oracle_flows(const GridModel& g, const Vector& rho) {
  const Vector phi = oracle_phases(g, oracle_injection(g, rho));
  Vector f(static_cast<Eigen::Index>(g.line_count()));
  for (std::size_t l = 0; l < g.line_count(); ++l) {
    const Line& ln = g.lines()[l];
    f(l) = (phi(g.index_of(ln.from)) - phi(g.index_of(ln.to))) / ln.reactance;
  }
  return f;
}

inline double oracle_alpha(const GridModel& g, const Vector& rho) {
  double d = 0.0, p = 0.0;
  for (const Bus& b : g.buses()) {
    d += b.demand;
    p += b.nominal_output;
  }
  return (d - rho.sum()) / p;
}

/// Random connected grid: bus 0 generator (slack), `sites` renewables after
/// it, the rest demand. A random spanning tree plus `extra` chords. Ratings
/// leave headroom over the flows at rho_bar, which is balanced (alpha = 1).
inline GridModel random_grid(std::uint64_t seed, int buses, int sites, int extra) {
  instanton::Random rng{0x5eed, seed};
  std::vector<Bus> bs;
  double sum_rho = 0.0, sum_d = 0.0;
  std::vector<double> rho_bar;
  for (int k = 0; k < sites; ++k) {
    rho_bar.push_back(rng.uniform(50.0, 150.0));
    sum_rho += rho_bar.back();
  }
  const int demands = buses - 1 - sites;
  std::vector<double> d;
  for (int k = 0; k < demands; ++k) d.push_back(rng.uniform(50.0, 150.0) + sum_rho / demands);
  for (double v : d) sum_d += v;
  bs.push_back(generator_bus(0, sum_d - sum_rho));
  for (int k = 0; k < sites; ++k) bs.push_back(renewable_bus(1 + k, rho_bar[k]));
  for (int k = 0; k < demands; ++k) bs.push_back(demand_bus(1 + sites + k, d[k]));

  std::vector<Line> lines;
  auto linked = [&](int a, int b) {
    return std::any_of(lines.begin(), lines.end(), [&](const Line& l) {
      return (l.from == a && l.to == b) || (l.from == b && l.to == a);
    });
  };
  for (int i = 1; i < buses; ++i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    lines.push_back({j, i, rng.uniform(0.05, 0.3), 1.0});
  }
  for (int e = 0, guard = 0; e < extra && guard < 1000; ++guard) {
    const int a = static_cast<int>(rng.below(buses));
    const int b = static_cast<int>(rng.below(buses));
    if (a == b || linked(a, b)) continue;
    lines.push_back({a, b, rng.uniform(0.05, 0.3), 1.0});
    ++e;
  }
  const GridModel probe = GridModel::create(bs, lines, 0, 0.0, 2.0);
  const Vector f = oracle_flows(probe, Eigen::Map<const Vector>(rho_bar.data(), sites));
  for (std::size_t l = 0; l < lines.size(); ++l)
    lines[l].rating = std::abs(f(l)) * rng.uniform(1.3, 2.5) + 10.0;
  return GridModel::create(bs, lines, 0, 0.0, 2.0);
}

/// Half-planes a . rho <= c of the feasibility region in two renewable
/// coordinates, derived from three oracle flow evaluations (flows are affine).
struct PlanarRegion {
  std::vector<Eigen::Vector2d> normals;
  std::vector<double> offsets;
};

inline PlanarRegion oracle_region(const GridModel& g) {
  PlanarRegion r;
  const Vector z = Vector::Zero(2);
  const Vector f0 = oracle_flows(g, z);
  const Vector fx = oracle_flows(g, Vector::Unit(2, 0)) - f0;
  const Vector fy = oracle_flows(g, Vector::Unit(2, 1)) - f0;
  for (std::size_t l = 0; l < g.line_count(); ++l) {
    const double u = g.lines()[l].rating;
    r.normals.emplace_back(fx(l), fy(l));
    r.offsets.push_back(u - f0(l));
    r.normals.emplace_back(-fx(l), -fy(l));
    r.offsets.push_back(u + f0(l));
  }
  const double a0 = oracle_alpha(g, z);
  const double slope = a0 - oracle_alpha(g, Vector::Unit(2, 0));
  // alpha0 - slope * sum <= alpha_max and >= alpha_min
  r.normals.emplace_back(-slope, -slope);
  r.offsets.push_back(g.alpha_max() - a0);
  r.normals.emplace_back(slope, slope);
  r.offsets.push_back(a0 - g.alpha_min());
  return r;
}

/// Minimum of a separable convex cost over the exterior lattice points
/// {(i, j) * step} of the region within [0, extent]^2. In each column the
/// inside points form one interval, and a separable convex cost is minimized
/// by the exterior point nearest its column optimum, so the column needs only
/// the points bracketing that interval and the optimum. Returns the minimum
/// and its location.
template <class F>
std::pair<double, Eigen::Vector2d> lattice_exterior_min(const PlanarRegion& region, F cost,
                                                        Eigen::Vector2d centre, double step,
                                                        double extent) {
  const auto columns = static_cast<long>(std::floor(extent / step));
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d arg(0, 0);
  auto consider = [&](double x, double y) {
    if (y < 0.0 || y > extent) return;
    const Eigen::Vector2d pt(x, y);
    bool inside = true;
    for (std::size_t k = 0; k < region.normals.size() && inside; ++k)
      inside = region.normals[k].dot(pt) <= region.offsets[k];
    if (inside) return;
    const double s = cost(pt);
    if (s < best) {
      best = s;
      arg = pt;
    }
  };
  for (long i = 0; i <= columns; ++i) {
    const double x = static_cast<double>(i) * step;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool empty = false;
    for (std::size_t k = 0; k < region.normals.size(); ++k) {
      const double a = region.normals[k](1);
      const double rest = region.offsets[k] - region.normals[k](0) * x;
      if (a > 0.0) hi = std::min(hi, rest / a);
      else if (a < 0.0) lo = std::max(lo, rest / a);
      else if (rest < 0.0) empty = true;
    }
    const double yc = std::floor(centre(1) / step) * step;
    for (double y : {yc, yc + step}) consider(x, y);
    if (empty || lo > hi) continue;
    if (std::isfinite(lo)) {
      const double below = std::ceil(lo / step) * step - step;
      consider(x, below);
      consider(x, below - step);
    }
    if (std::isfinite(hi)) {
      const double above = std::floor(hi / step) * step + step;
      consider(x, above);
      consider(x, above + step);
    }
  }
  return {best, arg};
}

}  // namespace testing
