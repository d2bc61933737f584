#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "instanton/dc_flow.hpp"
#include "instanton/grid_model.hpp"

namespace instanton {

/// Convex negative log-likelihood S(rho) of the renewable forecast.
///
/// value/gradient/hessian throw DomainError outside in_domain(). Implementations
/// are immutable and safe to evaluate concurrently. The domain is always a
/// subset of the nonnegative orthant and equilibrium() is the minimizer rho0.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
  virtual Vector equilibrium() const = 0;
  virtual bool in_domain(const Vector& rho) const;

  /// True when the Hessian is constant; the exact solver then needs a single QP.
  virtual bool is_quadratic() const { return false; }

  double value(const Vector& rho) const;
  Vector gradient(const Vector& rho) const;
  Matrix hessian(const Vector& rho) const;

 protected:
  virtual double evaluate(const Vector& rho) const = 0;
  virtual Vector evaluate_gradient(const Vector& rho) const = 0;
  virtual Matrix evaluate_hessian(const Vector& rho) const = 0;

 private:
  void require_domain(const Vector& rho) const;
};

/// Site-uncorrelated positive Gaussian: S = sum_i (rho_i / rho_bar_i - 1)^2
/// on rho >= 0.
class WhiteGaussianCost final : public CostModel {
 public:
  explicit WhiteGaussianCost(Vector typical);

  std::size_t dimension() const override { return static_cast<std::size_t>(typical_.size()); }
  std::string name() const override { return "white-gaussian"; }
  Vector equilibrium() const override { return typical_; }
  bool is_quadratic() const override { return true; }
  const Vector& typical() const { return typical_; }

 protected:
  double evaluate(const Vector& rho) const override;
  Vector evaluate_gradient(const Vector& rho) const override;
  Matrix evaluate_hessian(const Vector& rho) const override;

 private:
  Vector typical_;
};

/// Cost factory keyed by the CLI name. Only "white-gaussian" is shipped;
/// it takes rho_bar from the grid's renewable buses.
std::unique_ptr<CostModel> make_cost(std::string_view kind, const GridModel& grid);

/// exp(-S): likelihood relative to the equilibrium (no normalization).
inline double relative_likelihood(double cost) { return std::exp(-cost); }

Vector typical_vector(const GridModel& grid);

}  // namespace instanton
