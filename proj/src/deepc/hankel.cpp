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

#include "ezdeepc/deepc/hankel.hpp"

#include <string>

#include <Eigen/SVD>

namespace ezdeepc::deepc {

Matrix build_hankel(const Matrix& seq, Eigen::Index depth) {
  const Eigen::Index t = seq.rows();
  const Eigen::Index dim = seq.cols();
  if (depth < 1 || t < depth) {
    throw TooShort("sequence of length " + std::to_string(t) +
                   " is too short for Hankel depth " + std::to_string(depth));
  }
  const Eigen::Index cols = t - depth + 1;
  Matrix h(dim * depth, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < depth; ++i) {
      h.block(i * dim, j, dim, 1) = seq.row(j + i).transpose();
    }
  }
  return h;
}

ExcitationReport check_persistent_excitation(const Matrix& seq,
                                             Eigen::Index order) {
  ExcitationReport r;
  r.rows = seq.cols() * order;
  if (order < 1 || seq.rows() < order) return r;
  const Matrix h = build_hankel(seq, order);
  Eigen::BDCSVD<Matrix> svd(h);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return r;
  r.largest_singular_value = s[0];
  r.smallest_singular_value = s.size() < r.rows ? 0.0 : s[s.size() - 1];
  if (s[0] > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > kRankTolerance * s[0]) ++r.rank;
    }
  }
  r.persistently_exciting = r.rank == r.rows;
  return r;
}

Matrix pseudo_inverse(const Matrix& a, double rel_tol) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0 && s[0] > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > rel_tol * s[0]) inv[i] = 1.0 / s[i];
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace ezdeepc::deepc
