#include "instanton/active_set_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace instanton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints are handled internally as n' x >= beta. Rows [0, p) are the
// equalities (their sign may be flipped once when added), rows [p, p + m)
// the inequalities negated from A x <= b.
class DualActiveSet {
 public:
  explicit DualActiveSet(const QpProblem& qp)
      : n_(qp.hessian.rows()),
        p_(qp.eq_matrix.rows()),
        m_(qp.ineq_matrix.rows()),
        llt_(qp.hessian) {
    if (llt_.info() != Eigen::Success)
      throw std::invalid_argument("QP Hessian is not positive definite");
    normals_.resize(n_, p_ + m_);
    rhs_.resize(p_ + m_);
    if (p_ > 0) {
      normals_.leftCols(p_) = qp.eq_matrix.transpose();
      rhs_.head(p_) = qp.eq_rhs;
    }
    if (m_ > 0) {
      normals_.rightCols(m_) = -qp.ineq_matrix.transpose();
      rhs_.tail(m_) = -qp.ineq_rhs;
    }
    sign_ = Vector::Ones(p_);
    linear_ = qp.linear;
    x_ = -llt_.solve(linear_);
  }

  QpResult run(std::size_t max_iterations) {
    QpResult result;
    for (Eigen::Index j = 0; j < p_; ++j) {
      if (slack(j) > 0.0) {
        normals_.col(j) *= -1.0;
        rhs_(j) *= -1.0;
        sign_(j) = -1.0;
      }
      if (!add(j, max_iterations, result.iterations)) {
        result.status = stalled_ ? QpStatus::MaxIterations : QpStatus::Infeasible;
        return finish(result);
      }
    }
    while (true) {
      if (result.iterations >= max_iterations) {
        result.status = QpStatus::MaxIterations;
        return finish(result);
      }
      Eigen::Index worst = -1;
      double worst_score = 0.0;
      for (Eigen::Index j = p_; j < p_ + m_; ++j) {
        if (is_active(j)) continue;
        const double s = slack(j);
        if (s >= -tolerance(j)) continue;
        const double score = s / normals_.col(j).norm();
        if (worst < 0 || score < worst_score) {
          worst = j;
          worst_score = score;
        }
      }
      if (worst < 0) break;
      if (!add(worst, max_iterations, result.iterations)) {
        result.status = stalled_ ? QpStatus::MaxIterations : QpStatus::Infeasible;
        return finish(result);
      }
    }
    polish();
    result.status = QpStatus::Optimal;
    return finish(result);
  }

 private:
  double slack(Eigen::Index j) const { return normals_.col(j).dot(x_) - rhs_(j); }

  double tolerance(Eigen::Index j) const {
    const double scale =
        std::abs(rhs_(j)) + normals_.col(j).cwiseAbs().dot(x_.cwiseAbs());
    return 1e-13 * std::max(1.0, scale);
  }

  bool is_active(Eigen::Index j) const {
    return std::find(active_.begin(), active_.end(), j) != active_.end();
  }

  Matrix active_normals() const {
    Matrix N(n_, static_cast<Eigen::Index>(active_.size()));
    for (std::size_t i = 0; i < active_.size(); ++i)
      N.col(static_cast<Eigen::Index>(i)) = normals_.col(active_[i]);
    return N;
  }

  // Primal step z = H^-1 (I - N N*) np and dual step r = N* np with
  // N* = (N' H^-1 N)^-1 N' H^-1.
  void directions(const Vector& np, Vector& z, Vector& r) const {
    const Vector hinv_np = llt_.solve(np);
    if (active_.empty()) {
      z = hinv_np;
      r.resize(0);
      return;
    }
    const Matrix N = active_normals();
    const Matrix hinv_n = llt_.solve(N);
    const Matrix M = N.transpose() * hinv_n;
    r = M.ldlt().solve(hinv_n.transpose() * np);
    z = hinv_np - hinv_n * r;
  }

  // Adds constraint q to the working set, dropping blocking constraints.
  bool add(Eigen::Index q, std::size_t max_iterations, std::size_t& iterations) {
    const Vector np = normals_.col(q);
    const double np_metric = np.dot(llt_.solve(np));
    double uq = 0.0;
    while (true) {
      if (++iterations > max_iterations) {
        stalled_ = true;
        return false;
      }
      Vector z;
      Vector r;
      directions(np, z, r);

      // Partial step: the first working inequality whose multiplier hits zero.
      double t1 = kInf;
      std::size_t block = active_.size();
      const double r_scale = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
      for (std::size_t i = 0; i < active_.size(); ++i) {
        if (active_[i] < p_) continue;
        const double ri = r(static_cast<Eigen::Index>(i));
        if (ri <= 1e-12 * r_scale) continue;
        const double ratio = u_[i] / ri;
        if (ratio < t1 || (ratio == t1 && active_[i] < active_[block])) {
          t1 = ratio;
          block = i;
        }
      }
      // Full step: makes constraint q tight.
      const double zn = z.dot(np);
      // With n working rows the normals already span the space.
      const bool dependent = static_cast<Eigen::Index>(active_.size()) >= n_ ||
                             !(zn > 1e-10 * np_metric);
      const double t2 = dependent ? kInf : -slack(q) / zn;

      if (dependent && t1 == kInf) {
        // A consistent, linearly dependent equality is already satisfied.
        if (q < p_ && std::abs(slack(q)) <= tolerance(q)) return true;
        return false;
      }
      if (dependent) {
        for (std::size_t i = 0; i < active_.size(); ++i)
          u_[i] -= t1 * r(static_cast<Eigen::Index>(i));
        uq += t1;
        drop(block);
        continue;
      }
      const double t = std::min(t1, t2);
      x_ += t * z;
      for (std::size_t i = 0; i < active_.size(); ++i)
        u_[i] -= t * r(static_cast<Eigen::Index>(i));
      uq += t;
      if (t2 <= t1) {
        active_.push_back(q);
        u_.push_back(uq);
        return true;
      }
      drop(block);
    }
  }

  void drop(std::size_t i) {
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(i));
    u_.erase(u_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  // Re-solves the KKT system of the final working set so the active rows hold
  // to machine precision.
  void polish() {
    if (active_.empty()) {
      x_ = -llt_.solve(linear_);
      return;
    }
    const Matrix N = active_normals();
    const Matrix hinv_n = llt_.solve(N);
    const Matrix M = N.transpose() * hinv_n;
    Vector beta(static_cast<Eigen::Index>(active_.size()));
    for (std::size_t i = 0; i < active_.size(); ++i)
      beta(static_cast<Eigen::Index>(i)) = rhs_(active_[i]);
    const Vector hinv_g = llt_.solve(linear_);
    const Vector u = M.ldlt().solve(beta + N.transpose() * hinv_g);
    const Vector x = hinv_n * u - hinv_g;
    // Keep the refinement only if it does not break the inactive rows.
    for (Eigen::Index j = p_; j < p_ + m_; ++j) {
      if (is_active(j)) continue;
      if (normals_.col(j).dot(x) - rhs_(j) < -tolerance(j)) return;
    }
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i] >= p_ && u(static_cast<Eigen::Index>(i)) < 0.0) return;
    }
    x_ = x;
    for (std::size_t i = 0; i < active_.size(); ++i) u_[i] = u(static_cast<Eigen::Index>(i));
  }

  QpResult& finish(QpResult& result) const {
    result.x = x_;
    result.eq_multipliers = Vector::Zero(p_);
    result.ineq_multipliers = Vector::Zero(m_);
    result.active.clear();
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const Eigen::Index j = active_[i];
      if (j < p_) {
        result.eq_multipliers(j) = -sign_(j) * u_[i];
      } else {
        result.ineq_multipliers(j - p_) = u_[i];
        result.active.push_back(static_cast<std::size_t>(j - p_));
      }
    }
    std::sort(result.active.begin(), result.active.end());
    return result;
  }

  Eigen::Index n_;
  Eigen::Index p_;
  Eigen::Index m_;
  Eigen::LLT<Matrix> llt_;
  Matrix normals_;
  Vector rhs_;
  Vector sign_;
  Vector linear_;
  Vector x_;
  std::vector<Eigen::Index> active_;
  std::vector<double> u_;
  bool stalled_ = false;
};

}  // namespace

QpResult solve_qp(const QpProblem& problem, std::size_t max_iterations) {
  const Eigen::Index n = problem.hessian.rows();
  if (problem.hessian.cols() != n || problem.linear.size() != n ||
      (problem.eq_matrix.rows() > 0 && problem.eq_matrix.cols() != n) ||
      (problem.ineq_matrix.rows() > 0 && problem.ineq_matrix.cols() != n) ||
      problem.eq_matrix.rows() != problem.eq_rhs.size() ||
      problem.ineq_matrix.rows() != problem.ineq_rhs.size())
    throw std::invalid_argument("inconsistent QP dimensions");
  DualActiveSet solver(problem);
  return solver.run(max_iterations);
}

}  // namespace instanton
