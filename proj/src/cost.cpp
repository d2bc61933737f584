#include "instanton/cost.hpp"

#include "instanton/errors.hpp"

namespace instanton {

bool CostModel::in_domain(const Vector& rho) const {
  if (static_cast<std::size_t>(rho.size()) != dimension()) return false;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (!std::isfinite(rho(i)) || rho(i) < 0.0) return false;
  return true;
}

void CostModel::require_domain(const Vector& rho) const {
  if (!in_domain(rho)) throw DomainError(name() + " cost evaluated outside its domain");
}

double CostModel::value(const Vector& rho) const {
  require_domain(rho);
  return evaluate(rho);
}

Vector CostModel::gradient(const Vector& rho) const {
  require_domain(rho);
  return evaluate_gradient(rho);
}

Matrix CostModel::hessian(const Vector& rho) const {
  require_domain(rho);
  return evaluate_hessian(rho);
}

WhiteGaussianCost::WhiteGaussianCost(Vector typical) : typical_(std::move(typical)) {
  for (Eigen::Index i = 0; i < typical_.size(); ++i)
    if (!(typical_(i) > 0.0) || !std::isfinite(typical_(i)))
      throw ValidationError("white-gaussian cost needs positive typical outputs");
}

double WhiteGaussianCost::evaluate(const Vector& rho) const {
  return (rho.cwiseQuotient(typical_).array() - 1.0).square().sum();
}

Vector WhiteGaussianCost::evaluate_gradient(const Vector& rho) const {
  return (2.0 * (rho.cwiseQuotient(typical_).array() - 1.0) / typical_.array()).matrix();
}

Matrix WhiteGaussianCost::evaluate_hessian(const Vector&) const {
  return (2.0 / typical_.array().square()).matrix().asDiagonal();
}

Vector typical_vector(const GridModel& grid) {
  const auto outputs = grid.typical_outputs();
  return Eigen::Map<const Vector>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
}

std::unique_ptr<CostModel> make_cost(std::string_view kind, const GridModel& grid) {
  if (kind == "white-gaussian") {
    if (grid.renewable_count() == 0)
      throw ValidationError("grid has no renewable buses to build a cost over");
    return std::make_unique<WhiteGaussianCost>(typical_vector(grid));
  }
  throw ValidationError("unknown cost kind '" + std::string(kind) + "'");
}

}  // namespace instanton
