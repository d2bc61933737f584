#pragma once

#include <cstddef>
#include <vector>

#include "instanton/dc_flow.hpp"

namespace instanton {

/// Strictly convex QP
///   minimize   0.5 x' H x + g' x
///   subject to E x = e,  A x <= b.
struct QpProblem {
  Matrix hessian;
  Vector linear;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

/// Multipliers follow H x + g + E' lambda + A' mu = 0 with mu >= 0.
struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Vector x;
  Vector eq_multipliers;
  Vector ineq_multipliers;        // one per inequality row, zero when inactive
  std::vector<std::size_t> active;  // inequality rows in the final working set
  std::size_t iterations = 0;
};

/// Dual active-set method (Goldfarb-Idnani). Starts at the unconstrained
/// minimizer, adds the equalities, then repeatedly adds the most violated
/// inequality and drops working constraints whose multiplier would turn
/// negative. Finite for strictly convex H; an empty feasible set is detected
/// when a violated row cannot be satisfied by any step. Ties between equally
/// violated rows go to the lowest index.
QpResult solve_qp(const QpProblem& problem, std::size_t max_iterations);

}  // namespace instanton
