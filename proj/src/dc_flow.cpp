#include "instanton/dc_flow.hpp"

#include <cmath>
#include <string>

#include "instanton/errors.hpp"

namespace instanton {

double Laplacian::row_sum(std::size_t row) const {
  const auto r = static_cast<Eigen::Index>(row);
  double s = 0.0;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j)
    if (j != r) s += matrix(r, j);
  return s + matrix(r, r);
}

Laplacian build_laplacian(const GridModel& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  Laplacian lap{Matrix::Zero(n, n)};
  for (const Line& l : grid.lines()) {
    const auto i = static_cast<Eigen::Index>(grid.index_of(l.from));
    const auto j = static_cast<Eigen::Index>(grid.index_of(l.to));
    lap.matrix(i, j) -= 1.0 / l.reactance;
    lap.matrix(j, i) -= 1.0 / l.reactance;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += lap.matrix(i, j);
    lap.matrix(i, i) = -s;
  }
  return lap;
}

ReducedFactorization::ReducedFactorization(const Laplacian& laplacian,
                                           std::size_t slack_index)
    : dimension_(laplacian.dimension()), slack_(slack_index) {
  if (slack_ >= dimension_) throw SingularMatrix("slack index out of range");
  const auto n = static_cast<Eigen::Index>(dimension_);
  const auto s = static_cast<Eigen::Index>(slack_);
  reduced_.resize(n - 1, n - 1);
  for (Eigen::Index i = 0, ri = 0; i < n; ++i) {
    if (i == s) continue;
    for (Eigen::Index j = 0, rj = 0; j < n; ++j) {
      if (j == s) continue;
      reduced_(ri, rj++) = laplacian.matrix(i, j);
    }
    ++ri;
  }
  if (n > 1) {
    llt_.compute(reduced_);
    if (llt_.info() != Eigen::Success)
      throw SingularMatrix("reduced Laplacian is not positive definite");
    // A disconnected component leaves a (numerically) zero pivot.
    const Vector pivots = llt_.matrixL().toDenseMatrix().diagonal();
    const double largest = reduced_.diagonal().cwiseAbs().maxCoeff();
    if (pivots.minCoeff() <= 1e-12 * std::sqrt(largest))
      throw SingularMatrix("reduced Laplacian is numerically singular");
  }
}

Vector ReducedFactorization::solve(const Vector& injection) const {
  const auto n = static_cast<Eigen::Index>(dimension_);
  const auto s = static_cast<Eigen::Index>(slack_);
  Vector phases = Vector::Zero(n);
  if (n == 1) return phases;
  Vector rhs(n - 1);
  for (Eigen::Index i = 0, r = 0; i < n; ++i)
    if (i != s) rhs(r++) = injection(i);
  const Vector reduced = llt_.solve(rhs);
  for (Eigen::Index i = 0, r = 0; i < n; ++i)
    if (i != s) phases(i) = reduced(r++);
  return phases;
}

ReducedFactorization factorize(const Laplacian& laplacian, std::size_t slack_index) {
  return ReducedFactorization(laplacian, slack_index);
}

ReducedFactorization factorize(const GridModel& grid) {
  return ReducedFactorization(build_laplacian(grid), grid.slack_index());
}

Vector solve_phases(const ReducedFactorization& factorization, const Vector& injection) {
  if (static_cast<std::size_t>(injection.size()) != factorization.dimension())
    throw UnbalancedInjection("injection vector has wrong length");
  const double imbalance = injection.sum();
  const double scale = injection.cwiseAbs().sum();
  if (std::abs(imbalance) > kBalanceTolerance * scale)
    throw UnbalancedInjection("injections do not balance: sum = " + std::to_string(imbalance));
  return factorization.solve(injection);
}

Vector line_flows(const GridModel& grid, const Vector& phases) {
  Vector flows(static_cast<Eigen::Index>(grid.line_count()));
  Eigen::Index k = 0;
  for (const Line& l : grid.lines()) {
    const auto i = static_cast<Eigen::Index>(grid.index_of(l.from));
    const auto j = static_cast<Eigen::Index>(grid.index_of(l.to));
    flows(k++) = (phases(i) - phases(j)) / l.reactance;
  }
  return flows;
}

double control_alpha(const GridModel& grid, const Vector& rho) {
  return (total_demand(grid) - rho.sum()) / total_nominal_generation(grid);
}

Vector assemble_injection(const GridModel& grid, const Vector& rho) {
  const double alpha = control_alpha(grid, rho);
  Vector p = Vector::Zero(static_cast<Eigen::Index>(grid.bus_count()));
  const auto& sites = grid.renewable_buses();
  for (std::size_t k = 0; k < sites.size(); ++k)
    p(static_cast<Eigen::Index>(sites[k])) = rho(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < grid.bus_count(); ++i) {
    const Bus& b = grid.buses()[i];
    const auto ii = static_cast<Eigen::Index>(i);
    if (b.role == BusRole::Demand) p(ii) = -b.demand;
    if (b.role == BusRole::Generator) p(ii) = alpha * b.nominal_output - b.demand;
  }
  return p;
}

}  // namespace instanton
