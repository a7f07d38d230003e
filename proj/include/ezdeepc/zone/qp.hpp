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

#ifndef EZDEEPC_ZONE_QP_HPP
#define EZDEEPC_ZONE_QP_HPP

#include <string_view>
#include <vector>

#include "ezdeepc/common.hpp"

namespace ezdeepc::zone {

/// Strictly convex dense QP
///
///   minimize    0.5 x' H x + g' x
///   subject to  A_eq x  = b_eq
///               A_in x >= b_in
struct QpProblem {
  Matrix hessian;
  Vector linear;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;

  [[nodiscard]] Eigen::Index num_variables() const { return hessian.rows(); }
};

enum class QpStatus { kOptimal, kInfeasible, kNotConvex, kMaxIterations };
std::string_view to_string(QpStatus s);

struct QpOptions {
  /// Primal feasibility tolerance on constraint slacks.
  double feasibility_tol = 1e-9;
  /// Maximum allowed KKT residual for kOptimal.
  double kkt_tol = 1e-6;
  int max_iterations = 1000;
};

struct QpResult {
  QpStatus status = QpStatus::kInfeasible;
  Vector x;
  double objective = 0.0;
  /// Multipliers for equalities (free sign) then inequalities (>= 0).
  Vector eq_multipliers;
  Vector ineq_multipliers;
  /// Max of stationarity, primal infeasibility and complementarity.
  double kkt_residual = 0.0;
  int iterations = 0;
  /// Indices of active inequality constraints at the solution.
  std::vector<Eigen::Index> active_set;

  [[nodiscard]] bool ok() const { return status == QpStatus::kOptimal; }
};

/// Dual active-set method of Goldfarb and Idnani. Starts from the
/// unconstrained minimizer and adds the most violated constraint at each
/// major iteration; ties are broken by lowest index.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// KKT residual of a candidate primal/dual pair.
double kkt_residual(const QpProblem& problem, const Vector& x,
                    const Vector& eq_multipliers,
                    const Vector& ineq_multipliers);

}  // namespace ezdeepc::zone

#endif  // EZDEEPC_ZONE_QP_HPP
