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

// Random discrete-time state-space systems used as a ground-truth oracle.

#ifndef EZDEEPC_TESTS_SUPPORT_LTI_HPP
#define EZDEEPC_TESTS_SUPPORT_LTI_HPP

#include <random>

#include <Eigen/Dense>

namespace ezdeepc::testing {

struct Lti {
  Eigen::MatrixXd a, b, c, d;

  [[nodiscard]] int order() const { return static_cast<int>(a.rows()); }

  /// Simulate from x0 with inputs as rows; returns outputs as rows and the
  /// final state in `x_end` when non-null.
  Eigen::MatrixXd simulate(const Eigen::VectorXd& x0, const Eigen::MatrixXd& u,
                           Eigen::VectorXd* x_end = nullptr) const {
    Eigen::MatrixXd y(u.rows(), c.rows());
    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
      const Eigen::VectorXd uk = u.row(k).transpose();
      y.row(k) = (c * x + d * uk).transpose();
      x = a * x + b * uk;
    }
    if (x_end) *x_end = x;
    return y;
  }
};

/// Random stable system with a controllable and observable realization.
inline Lti random_lti(std::mt19937_64& rng, int n, int m, int p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto randn = [&](int r, int c) {
    Eigen::MatrixXd x(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) x(i, j) = normal(rng);
    return x;
  };
  auto rank_of = [](const Eigen::MatrixXd& x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) r += s[i] > 1e-6 * s[0];
    return r;
  };
  for (;;) {
    Lti sys;
    sys.a = randn(n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.a);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    sys.a *= 0.9 / radius;
    sys.b = randn(n, m);
    sys.c = randn(p, n);
    sys.d = randn(p, m);
    Eigen::MatrixXd ctrb(n, n * m), obsv(n * p, n);
    Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      ctrb.middleCols(i * m, m) = ak * sys.b;
      obsv.middleRows(i * p, p) = sys.c * ak;
      ak = ak * sys.a;
    }
    if (rank_of(ctrb) == n && rank_of(obsv) == n) return sys;
  }
}

inline Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index r,
                                      Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) x(i, j) = u(rng);
  return x;
}

}  // namespace ezdeepc::testing

#endif  // EZDEEPC_TESTS_SUPPORT_LTI_HPP
