#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "instanton/grid_model.hpp"

namespace instanton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bus-by-bus imbalance bound accepted by solve_phases, relative to sum |P_i|.
inline constexpr double kBalanceTolerance = 1e-9;

/// Weighted graph Laplacian built from line susceptances 1/x.
///
/// Each diagonal entry is the negated sum of its row's off-diagonal entries,
/// accumulated in ascending column order, so row_sum() is exactly zero.
struct Laplacian {
  Matrix matrix;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  /// Off-diagonal entries summed in ascending column order, then the diagonal.
  double row_sum(std::size_t row) const;
};

Laplacian build_laplacian(const GridModel& grid);

/// Cholesky factor of the Laplacian with the slack row and column removed.
/// Immutable once built; concurrent solve() calls are safe.
class ReducedFactorization {
 public:
  ReducedFactorization(const Laplacian& laplacian, std::size_t slack_index);

  std::size_t dimension() const { return dimension_; }
  std::size_t slack_index() const { return slack_; }
  const Matrix& reduced_matrix() const { return reduced_; }

  /// Phases with phi[slack] = 0 solving B phi = P. No balance check.
  Vector solve(const Vector& injection) const;

 private:
  std::size_t dimension_;
  std::size_t slack_;
  Matrix reduced_;
  Eigen::LLT<Matrix> llt_;
};

/// Throws SingularMatrix if the reduced Laplacian is not positive definite.
ReducedFactorization factorize(const Laplacian& laplacian, std::size_t slack_index);
ReducedFactorization factorize(const GridModel& grid);

/// Solves the DC flow equations. Throws UnbalancedInjection when
/// |sum P| > kBalanceTolerance * sum |P|.
Vector solve_phases(const ReducedFactorization& factorization, const Vector& injection);

/// flow_l = (phi_from - phi_to) / x_l, one entry per line in grid order.
Vector line_flows(const GridModel& grid, const Vector& phases);

/// Generation scaling factor of the proportional control law.
double control_alpha(const GridModel& grid, const Vector& rho);

/// Nodal injections: -d at demand, rho at renewables, alpha * p - d at
/// generators, zero at junctions.
Vector assemble_injection(const GridModel& grid, const Vector& rho);

}  // namespace instanton
