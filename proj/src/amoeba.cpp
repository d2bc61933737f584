#include "instanton/amoeba.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "instanton/random.hpp"

namespace instanton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Point where the ray rho0 + t d first leaves the polytope, or nothing when
// the ray never crosses a facet.
bool boundary_point(const Polytope& polytope, const Vector& origin, const Vector& direction,
                    Vector& out) {
  const Vector margins = polytope.offsets() - polytope.normals() * origin;
  const Vector rates = polytope.normals() * direction;
  double t = kInf;
  for (Eigen::Index i = 0; i < rates.size(); ++i)
    if (rates(i) > 0.0) t = std::min(t, margins(i) / rates(i));
  if (!std::isfinite(t)) return false;
  out = origin + t * direction;
  return true;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                             std::vector<Vector> simplex, const NelderMeadOptions& options) {
  if (simplex.empty()) throw std::invalid_argument("empty simplex");
  const std::size_t n = static_cast<std::size_t>(simplex.front().size());
  if (simplex.size() != n + 1) throw std::invalid_argument("simplex needs n + 1 vertices");

  NelderMeadResult res;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
  res.evaluations = n + 1;
  std::vector<std::size_t> order(n + 1);

  while (res.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    const double lo = values[best];
    const double hi = values[worst];
    if (std::isfinite(hi) &&
        std::abs(hi - lo) <= options.tolerance * (std::abs(hi) + std::abs(lo)) + 1e-300)
      break;

    Vector centroid = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    auto probe = [&](double coefficient) {
      return Vector(centroid + coefficient * (simplex[worst] - centroid));
    };
    Vector reflected = probe(-1.0);
    const double fr = f(reflected);
    ++res.evaluations;
    if (fr < lo) {
      Vector expanded = probe(-2.0);
      const double fe = f(expanded);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = std::move(reflected);
      values[worst] = fr;
      continue;
    }
    // Contract outside if the reflection improved on the worst vertex, else inside.
    Vector contracted = fr < hi ? probe(-0.5) : probe(0.5);
    const double fc = f(contracted);
    ++res.evaluations;
    if (fc < std::min(fr, hi)) {
      simplex[worst] = std::move(contracted);
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = f(simplex[i]);
      ++res.evaluations;
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  res.best = simplex[static_cast<std::size_t>(it - values.begin())];
  res.value = *it;
  return res;
}

double amoeba_objective(const Polytope& polytope, const CostModel& cost, const Vector& rho,
                        double penalty) {
  if (!cost.in_domain(rho)) return kInf;
  const double s = cost.value(rho);
  const double margin = (polytope.offsets() - polytope.normals() * rho).minCoeff();
  return margin > 0.0 ? s + penalty * margin : s;
}

AmoebaResult amoeba_search(const Polytope& polytope, const CostModel& cost,
                           const AmoebaOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("amoeba needs at least one restart");
  const Vector origin = cost.equilibrium();
  const auto n = origin.size();
  auto objective = [&](const Vector& rho) {
    return amoeba_objective(polytope, cost, rho, options.penalty);
  };

  AmoebaResult out;
  out.best_objective = kInf;
  out.best_cost = kInf;
  for (std::size_t restart = 0; restart < options.restarts; ++restart) {
    Random rng{options.seed, restart};
    std::vector<Vector> simplex;
    while (simplex.size() < static_cast<std::size_t>(n) + 1) {
      Vector point;
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        Vector d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = origin(i) * rng.normal();
        placed = boundary_point(polytope, origin, d, point) && (point.array() >= 0.0).all();
      }
      if (!placed) point = point.size() == n ? point.cwiseMax(0.0) : origin;
      simplex.push_back(std::move(point));
    }
    NelderMeadResult run = nelder_mead(objective, std::move(simplex), options.simplex);
    out.evaluations += run.evaluations;

    // One restart of the simplex around the converged point.
    std::vector<Vector> refresh{run.best};
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector v = run.best;
      v(i) += 1e-2 * origin(i);
      refresh.push_back(std::move(v));
    }
    NelderMeadResult again = nelder_mead(objective, std::move(refresh), options.simplex);
    out.evaluations += again.evaluations;
    if (again.value < run.value) run = std::move(again);

    out.restart_costs.push_back(run.value);
    if (run.value < out.best_objective) {
      out.best_objective = run.value;
      out.best_rho = run.best;
    }
  }
  out.best_cost = cost.value(out.best_rho);
  out.best_is_exterior = !((polytope.offsets() - polytope.normals() * out.best_rho).minCoeff() > 0.0);
  return out;
}

}  // namespace instanton
