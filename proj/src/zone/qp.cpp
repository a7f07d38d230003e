// Copyright 2026 The ezdeepc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ezdeepc/zone/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace ezdeepc::zone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Active constraint: equality rows are encoded as -(i + 1).
using ConstraintId = Eigen::Index;

class GoldfarbIdnani {
 public:
  GoldfarbIdnani(const QpProblem& p, const QpOptions& o) : p_(p), o_(o) {}

  QpResult run();

 private:
  Vector row(ConstraintId id) const {
    return id < 0 ? p_.eq_matrix.row(-id - 1).transpose()
                  : p_.ineq_matrix.row(id).transpose();
  }
  double rhs(ConstraintId id) const {
    return id < 0 ? p_.eq_rhs[-id - 1] : p_.ineq_rhs[id];
  }

  // d = J' n, z = J2 d2, r = R^-1 d1.
  void directions(const Vector& normal) {
    d_.noalias() = j_.transpose() * normal;
    const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
    z_.noalias() = j_.rightCols(n_ - q) * d_.tail(n_ - q);
    r_ = r_mat_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(
        d_.head(q));
  }

  // Append the constraint whose d = J' n is in d_. Returns false when the
  // constraint is numerically dependent on the active set.
  bool add_constraint(ConstraintId id) {
    const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
    for (Eigen::Index j = n_ - 1; j > q; --j) {
      const double a = d_[j - 1];
      const double b = d_[j];
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double c = a / h;
      const double s = b / h;
      d_[j - 1] = h;
      d_[j] = 0.0;
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = j_(k, j - 1);
        const double t2 = j_(k, j);
        j_(k, j - 1) = c * t1 + s * t2;
        j_(k, j) = -s * t1 + c * t2;
      }
    }
    if (std::abs(d_[q]) <= kEps * r_norm_) return false;
    r_mat_.col(q).head(q + 1) = d_.head(q + 1);
    r_norm_ = std::max(r_norm_, std::abs(d_[q]));
    active_.push_back(id);
    return true;
  }

  void drop_constraint(std::size_t pos) {
    const auto q = static_cast<Eigen::Index>(active_.size());
    for (Eigen::Index c = static_cast<Eigen::Index>(pos); c + 1 < q; ++c) {
      r_mat_.col(c).head(c + 2) = r_mat_.col(c + 1).head(c + 2);
    }
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pos));
    u_.erase(u_.begin() + static_cast<std::ptrdiff_t>(pos));
    const Eigen::Index nq = q - 1;
    for (Eigen::Index j = static_cast<Eigen::Index>(pos); j < nq; ++j) {
      const double a = r_mat_(j, j);
      const double b = r_mat_(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double c = a / h;
      const double s = b / h;
      for (Eigen::Index k = j; k < nq; ++k) {
        const double t1 = r_mat_(j, k);
        const double t2 = r_mat_(j + 1, k);
        r_mat_(j, k) = c * t1 + s * t2;
        r_mat_(j + 1, k) = -s * t1 + c * t2;
      }
      r_mat_(j + 1, j) = 0.0;
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = j_(k, j);
        const double t2 = j_(k, j + 1);
        j_(k, j) = c * t1 + s * t2;
        j_(k, j + 1) = -s * t1 + c * t2;
      }
    }
  }

  double slack(ConstraintId id) const { return row(id).dot(x_) - rhs(id); }

  double feas_tol(ConstraintId id) const {
    return o_.feasibility_tol * std::max(1.0, std::abs(rhs(id)));
  }

  QpResult finish(QpStatus status);

  const QpProblem& p_;
  const QpOptions& o_;
  Eigen::Index n_ = 0;
  Matrix j_, r_mat_;
  Vector x_, d_, z_, r_;
  double r_norm_ = 1.0;
  std::vector<ConstraintId> active_;
  std::vector<double> u_;
  int iterations_ = 0;
};

QpResult GoldfarbIdnani::run() {
  n_ = p_.num_variables();
  const Eigen::Index n_eq = p_.eq_matrix.rows();
  const Eigen::Index n_in = p_.ineq_matrix.rows();
  if (p_.hessian.cols() != n_ || p_.linear.size() != n_ ||
      (n_eq > 0 && p_.eq_matrix.cols() != n_) || p_.eq_rhs.size() != n_eq ||
      (n_in > 0 && p_.ineq_matrix.cols() != n_) || p_.ineq_rhs.size() != n_in) {
    throw DimensionMismatch("QP matrices have inconsistent dimensions");
  }

  Eigen::LLT<Matrix> llt(p_.hessian);
  if (llt.info() != Eigen::Success) return finish(QpStatus::kNotConvex);
  const Matrix l = llt.matrixL();
  const double diag_min = l.diagonal().minCoeff();
  const double diag_max = l.diagonal().maxCoeff();
  if (!(diag_min > 1e-12 * diag_max)) return finish(QpStatus::kNotConvex);

  // J = L^-T.
  j_ = l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n_, n_));
  r_mat_ = Matrix::Zero(n_, n_);
  x_ = -llt.solve(p_.linear);
  d_.resize(n_);
  z_.resize(n_);

  for (Eigen::Index i = 0; i < n_eq; ++i) {
    const ConstraintId id = -(i + 1);
    const Vector normal = row(id);
    directions(normal);
    const double zn = z_.dot(normal);
    if (z_.squaredNorm() <= kEps * kEps * std::max(1.0, normal.squaredNorm())) {
      // Dependent equality: consistent or infeasible.
      if (std::abs(slack(id)) > feas_tol(id) * 1e3) {
        return finish(QpStatus::kInfeasible);
      }
      continue;
    }
    const double t = -slack(id) / zn;
    x_ += t * z_;
    for (std::size_t k = 0; k < u_.size(); ++k) u_[k] -= t * r_[static_cast<Eigen::Index>(k)];
    u_.push_back(t);
    if (!add_constraint(id)) {
      u_.pop_back();
      return finish(QpStatus::kInfeasible);
    }
  }

  std::vector<bool> is_active(static_cast<std::size_t>(n_in), false);
  for (;;) {
    if (++iterations_ > o_.max_iterations) return finish(QpStatus::kMaxIterations);
    // Most violated inactive inequality; ties go to the lowest index.
    ConstraintId p = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n_in; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = slack(i);
      if (s < -feas_tol(i) && (p < 0 || s < worst)) {
        p = i;
        worst = s;
      }
    }
    if (p < 0) return finish(QpStatus::kOptimal);

    const Vector normal = row(p);
    double u_plus = 0.0;
    for (;;) {
      if (++iterations_ > o_.max_iterations) return finish(QpStatus::kMaxIterations);
      directions(normal);
      // Partial step: largest dual step keeping active multipliers >= 0.
      double t1 = kInf;
      std::size_t drop = 0;
      for (std::size_t k = 0; k < active_.size(); ++k) {
        const double rk = r_[static_cast<Eigen::Index>(k)];
        if (active_[k] < 0 || rk <= 0.0) continue;
        const double ratio = u_[k] / rk;
        if (ratio < t1 || (ratio == t1 && active_[k] < active_[drop])) {
          t1 = ratio;
          drop = k;
        }
      }
      // Full step: makes constraint p active.
      const double zn = z_.dot(normal);
      double t2 = kInf;
      if (z_.squaredNorm() > kEps * kEps * std::max(1.0, normal.squaredNorm()) &&
          zn > 0.0) {
        t2 = -slack(p) / zn;
      }
      const double t = std::min(t1, t2);
      if (t == kInf) return finish(QpStatus::kInfeasible);

      if (t2 == kInf) {
        for (std::size_t k = 0; k < u_.size(); ++k) u_[k] -= t * r_[static_cast<Eigen::Index>(k)];
        u_plus += t;
        is_active[static_cast<std::size_t>(active_[drop])] = false;
        drop_constraint(drop);
        continue;
      }
      x_ += t * z_;
      for (std::size_t k = 0; k < u_.size(); ++k) u_[k] -= t * r_[static_cast<Eigen::Index>(k)];
      u_plus += t;
      if (t == t2) {
        u_.push_back(u_plus);
        if (!add_constraint(p)) {
          u_.pop_back();
          return finish(QpStatus::kInfeasible);
        }
        is_active[static_cast<std::size_t>(p)] = true;
        break;
      }
      is_active[static_cast<std::size_t>(active_[drop])] = false;
      drop_constraint(drop);
    }
  }
}

QpResult GoldfarbIdnani::finish(QpStatus status) {
  QpResult res;
  res.status = status;
  res.iterations = iterations_;
  if (status == QpStatus::kNotConvex) return res;
  res.x = x_;
  res.objective = 0.5 * x_.dot(p_.hessian * x_) + p_.linear.dot(x_);
  res.eq_multipliers = Vector::Zero(p_.eq_matrix.rows());
  res.ineq_multipliers = Vector::Zero(p_.ineq_matrix.rows());
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const ConstraintId id = active_[k];
    if (id < 0) {
      res.eq_multipliers[-id - 1] = u_[k];
    } else {
      res.ineq_multipliers[id] = std::max(0.0, u_[k]);
      res.active_set.push_back(id);
    }
  }
  std::sort(res.active_set.begin(), res.active_set.end());
  res.kkt_residual =
      kkt_residual(p_, res.x, res.eq_multipliers, res.ineq_multipliers);
  if (status == QpStatus::kOptimal && !(res.kkt_residual <= o_.kkt_tol)) {
    res.status = QpStatus::kMaxIterations;
  }
  return res;
}

}  // namespace

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kNotConvex: return "not_convex";
    case QpStatus::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

double kkt_residual(const QpProblem& p, const Vector& x,
                    const Vector& eq_multipliers,
                    const Vector& ineq_multipliers) {
  // Stationarity is measured relative to the magnitude of the gradient terms.
  const Vector hx = p.hessian * x;
  Vector at_u = Vector::Zero(x.size());
  if (p.eq_matrix.rows() > 0) at_u += p.eq_matrix.transpose() * eq_multipliers;
  if (p.ineq_matrix.rows() > 0) at_u += p.ineq_matrix.transpose() * ineq_multipliers;
  const double scale = std::max({1.0, hx.lpNorm<Eigen::Infinity>(),
                                 p.linear.lpNorm<Eigen::Infinity>(),
                                 at_u.lpNorm<Eigen::Infinity>()});
  double res = (hx + p.linear - at_u).lpNorm<Eigen::Infinity>() / scale;
  for (Eigen::Index i = 0; i < p.eq_matrix.rows(); ++i) {
    const double s = p.eq_matrix.row(i).dot(x) - p.eq_rhs[i];
    res = std::max(res, std::abs(s) / std::max(1.0, std::abs(p.eq_rhs[i])));
  }
  for (Eigen::Index i = 0; i < p.ineq_matrix.rows(); ++i) {
    const double s = p.ineq_matrix.row(i).dot(x) - p.ineq_rhs[i];
    const double rel = std::max(1.0, std::abs(p.ineq_rhs[i]));
    res = std::max(res, std::max(0.0, -s) / rel);
    res = std::max(res, std::max(0.0, -ineq_multipliers[i]));
    res = std::max(res, std::abs(ineq_multipliers[i] * s) / (rel * scale));
  }
  return res;
}

QpResult solve_qp(const QpProblem& problem, const QpOptions& options) {
  return GoldfarbIdnani(problem, options).run();
}

}  // namespace ezdeepc::zone
