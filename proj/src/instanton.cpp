#include "instanton/instanton.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "instanton/active_set_qp.hpp"
#include "instanton/errors.hpp"

namespace instanton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Certificate {
  double kkt_residual = 0.0;
  double saturated_residual = 0.0;
  double min_other_margin = kInf;
};

QpProblem face_qp(const FacetSubproblem& sp, Matrix hessian, Vector linear) {
  QpProblem qp;
  qp.hessian = std::move(hessian);
  qp.linear = std::move(linear);
  qp.eq_matrix = sp.eq_normal.transpose();
  qp.eq_rhs = Vector::Constant(1, sp.eq_offset);
  qp.ineq_matrix = sp.ineq_normals;
  qp.ineq_rhs = sp.ineq_offsets;
  return qp;
}

// Local quadratic model of S at `at`; the Hessian is nudged until it factors.
void quadratic_model(const CostModel& cost, const Vector& at, Matrix& hessian, Vector& linear) {
  hessian = cost.hessian(at);
  hessian = 0.5 * (hessian + hessian.transpose());
  const auto n = hessian.rows();
  double shift = 1e-12 * std::max(1e-300, hessian.diagonal().cwiseAbs().maxCoeff());
  while (Eigen::LLT<Matrix>(hessian).info() != Eigen::Success) {
    hessian += shift * Matrix::Identity(n, n);
    shift *= 10.0;
  }
  linear = cost.gradient(at) - hessian * at;
}

Certificate certify(const FacetSubproblem& sp, const CostModel& cost, const Vector& rho,
                    const QpResult& qp) {
  Certificate c;
  const std::size_t n_facet_rows = sp.ineq_facets.size();
  Vector stationarity = cost.gradient(rho) + qp.eq_multipliers(0) * sp.eq_normal;
  double complementarity = 0.0;
  double dual_violation = 0.0;
  for (Eigen::Index j = 0; j < sp.ineq_normals.rows(); ++j) {
    const double mu = qp.ineq_multipliers(j);
    const double margin = sp.ineq_offsets(j) - sp.ineq_normals.row(j).dot(rho);
    stationarity += mu * sp.ineq_normals.row(j).transpose();
    complementarity = std::max(complementarity, std::abs(mu * margin));
    dual_violation = std::max(dual_violation, -mu);
    if (static_cast<std::size_t>(j) < n_facet_rows) c.min_other_margin = std::min(c.min_other_margin, margin);
  }
  c.kkt_residual = std::max({stationarity.cwiseAbs().maxCoeff(), complementarity, dual_violation});
  c.saturated_residual = std::abs(sp.eq_normal.dot(rho) - sp.eq_offset);
  return c;
}

void fill_optimal(FacetResult& r, const FacetSubproblem& sp, const CostModel& cost,
                  const QpResult& qp) {
  const std::size_t n_facet_rows = sp.ineq_facets.size();
  const Vector rho = qp.x.cwiseMax(0.0);  // clears -0.0 style round-off on the bounds
  r.status = FacetStatus::Optimal;
  r.rho = rho;
  r.cost = cost.value(rho);
  r.eq_multiplier = qp.eq_multipliers(0);
  r.facet_multipliers = Vector::Zero(static_cast<Eigen::Index>(sp.facet_count));
  r.facet_multipliers(static_cast<Eigen::Index>(sp.facet)) = r.eq_multiplier;
  r.bound_multipliers = Vector::Zero(static_cast<Eigen::Index>(sp.site_count()));
  for (std::size_t j : qp.active) {
    if (j < n_facet_rows) {
      r.active_facets.push_back(sp.ineq_facets[j]);
      r.facet_multipliers(static_cast<Eigen::Index>(sp.ineq_facets[j])) =
          qp.ineq_multipliers(static_cast<Eigen::Index>(j));
    } else {
      r.active_bounds.push_back(j - n_facet_rows);
      r.bound_multipliers(static_cast<Eigen::Index>(j - n_facet_rows)) =
          qp.ineq_multipliers(static_cast<Eigen::Index>(j));
    }
  }
  std::sort(r.active_facets.begin(), r.active_facets.end());
  r.alpha = sp.alpha0 - sp.alpha_slope * rho.sum();
  const Vector ratio = rho.cwiseQuotient(cost.equilibrium());
  Eigen::Index best = 0;
  ratio.maxCoeff(&best);
  r.stressed_site = static_cast<std::size_t>(best);
  const Certificate c = certify(sp, cost, rho, qp);
  r.kkt_residual = c.kkt_residual;
  r.saturated_residual = c.saturated_residual;
  r.min_other_margin = c.min_other_margin;
}

}  // namespace

std::string_view to_string(FacetStatus status) {
  switch (status) {
    case FacetStatus::Optimal: return "optimal";
    case FacetStatus::Infeasible: return "infeasible";
    case FacetStatus::Degenerate: return "degenerate";
  }
  return "infeasible";
}

FacetSubproblem make_subproblem(const Polytope& polytope, std::size_t facet) {
  const std::size_t k = polytope.size();
  const auto n = static_cast<Eigen::Index>(polytope.dimension());
  if (facet >= k) throw std::out_of_range("facet index out of range");
  FacetSubproblem sp;
  sp.facet = facet;
  sp.facet_count = k;
  sp.eq_normal = polytope.facet(facet).normal;
  sp.eq_offset = polytope.facet(facet).offset;
  sp.alpha0 = polytope.flow_map().alpha0;
  sp.alpha_slope = polytope.flow_map().alpha_slope;
  const auto rows = static_cast<Eigen::Index>(k - 1) + n;
  sp.ineq_normals.resize(rows, n);
  sp.ineq_offsets.resize(rows);
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < k; ++b) {
    if (b == facet) continue;
    sp.ineq_normals.row(row) = polytope.facet(b).normal.transpose();
    sp.ineq_offsets(row) = polytope.facet(b).offset;
    sp.ineq_facets.push_back(b);
    ++row;
  }
  for (Eigen::Index i = 0; i < n; ++i, ++row) {
    sp.ineq_normals.row(row).setZero();
    sp.ineq_normals(row, i) = -1.0;
    sp.ineq_offsets(row) = 0.0;
  }
  return sp;
}

FacetResult solve_facet(const FacetSubproblem& sp, const CostModel& cost) {
  FacetResult r;
  r.facet = sp.facet;
  r.cost = kInf;
  const std::size_t max_iterations = 100 * std::max<std::size_t>(sp.facet_count, 1);
  const auto n = static_cast<Eigen::Index>(sp.site_count());
  if (cost.dimension() != sp.site_count())
    throw std::invalid_argument("cost dimension does not match the polytope");

  auto classify = [&](const QpResult& qp) {
    r.iterations += qp.iterations;
    if (qp.status == QpStatus::Infeasible) r.status = FacetStatus::Infeasible;
    if (qp.status == QpStatus::MaxIterations) r.status = FacetStatus::Degenerate;
    if (qp.status != QpStatus::Optimal) r.rho = Vector::Constant(n, std::nan(""));
    return qp.status == QpStatus::Optimal;
  };

  Matrix hessian;
  Vector linear;
  Vector x = cost.equilibrium();
  quadratic_model(cost, x, hessian, linear);
  QpResult qp = solve_qp(face_qp(sp, hessian, linear), max_iterations);
  if (!classify(qp)) return r;
  if (cost.is_quadratic()) {
    fill_optimal(r, sp, cost, qp);
    return r;
  }

  // Sequential QP on the face. Every QP solution is feasible, so iterates stay
  // feasible once x has been replaced by the first one.
  x = qp.x.cwiseMax(0.0);
  for (int iter = 0; iter < 200; ++iter) {
    if (certify(sp, cost, x, qp).kkt_residual <= 1e-2 * kKktTolerance) break;
    quadratic_model(cost, x, hessian, linear);
    QpResult next = solve_qp(face_qp(sp, hessian, linear), max_iterations);
    if (!classify(next)) return r;
    const Vector step = next.x.cwiseMax(0.0) - x;
    if (step.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) {
      qp = std::move(next);
      break;
    }
    const double s0 = cost.value(x);
    const double slope = cost.gradient(x).dot(step);
    double t = 1.0;
    while (t > 1e-12) {
      const Vector trial = x + t * step;
      if (cost.in_domain(trial) && cost.value(trial) <= s0 + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    x = (x + t * step).cwiseMax(0.0);
    qp = std::move(next);
  }
  qp.x = x;
  fill_optimal(r, sp, cost, qp);
  return r;
}

std::size_t InstantonSpectrum::optimal_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const SpectrumEntry& e) {
    return e.result.status == FacetStatus::Optimal;
  }));
}

const SpectrumEntry& InstantonSpectrum::top() const {
  if (entries.empty() || entries.front().result.status != FacetStatus::Optimal)
    throw AllInfeasible("spectrum has no optimal facet");
  return entries.front();
}

InstantonSpectrum rank_results(std::vector<FacetResult> results,
                               std::vector<std::size_t> skipped, std::size_t facet_count) {
  InstantonSpectrum spec;
  spec.facet_count = facet_count;
  spec.skipped_facets = std::move(skipped);

  std::vector<FacetResult> optimal;
  std::vector<FacetResult> tail;
  for (auto& r : results) (r.status == FacetStatus::Optimal ? optimal : tail).push_back(std::move(r));
  std::sort(optimal.begin(), optimal.end(), [](const FacetResult& a, const FacetResult& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.facet < b.facet;
  });
  // Runs of costs within kTieTolerance are listed in facet-index order.
  for (std::size_t begin = 0; begin < optimal.size();) {
    std::size_t end = begin + 1;
    while (end < optimal.size() && optimal[end].cost - optimal[end - 1].cost <= kTieTolerance) ++end;
    std::sort(optimal.begin() + static_cast<std::ptrdiff_t>(begin),
              optimal.begin() + static_cast<std::ptrdiff_t>(end),
              [](const FacetResult& a, const FacetResult& b) { return a.facet < b.facet; });
    begin = end;
  }

  std::size_t rank = 0;
  for (auto& r : optimal) {
    auto same = std::find_if(spec.entries.begin(), spec.entries.end(), [&](const SpectrumEntry& e) {
      return (e.result.rho - r.rho).cwiseAbs().maxCoeff() < kDuplicateTolerance;
    });
    if (same != spec.entries.end()) {
      same->merged_facets.push_back(r.facet);
      continue;
    }
    SpectrumEntry e;
    e.rank = ++rank;
    e.tied_with_previous =
        !spec.entries.empty() && r.cost - spec.entries.back().result.cost <= kTieTolerance;
    e.result = std::move(r);
    spec.entries.push_back(std::move(e));
  }
  std::sort(tail.begin(), tail.end(),
            [](const FacetResult& a, const FacetResult& b) { return a.facet < b.facet; });
  for (auto& r : tail) {
    SpectrumEntry e;
    e.result = std::move(r);
    spec.entries.push_back(std::move(e));
  }
  return spec;
}

InstantonSpectrum scan(const Polytope& polytope, const CostModel& cost, const ScanOptions& options) {
  if (cost.dimension() != polytope.dimension())
    throw std::invalid_argument("cost dimension does not match the polytope");
  const Membership eq = contains(polytope, cost.equilibrium());
  if (!(eq.min_margin > 0.0))
    throw EquilibriumInfeasible("equilibrium is not strictly inside the feasibility polytope");

  std::vector<std::size_t> todo;
  std::vector<std::size_t> skipped;
  for (std::size_t a = 0; a < polytope.size(); ++a)
    (polytope.facet(a).zero_normal() ? skipped : todo).push_back(a);

  std::vector<FacetResult> results(todo.size());
  std::vector<std::exception_ptr> failures(todo.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < todo.size(); i += stride) {
      try {
        results[i] = solve_facet(make_subproblem(polytope, todo[i]), cost);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(todo.size(), 1));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  InstantonSpectrum spec = rank_results(std::move(results), std::move(skipped), polytope.size());
  if (spec.optimal_count() == 0) throw AllInfeasible("every facet subproblem is infeasible");
  return spec;
}

}  // namespace instanton
