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

#include "ezdeepc/deepc/predictor.hpp"

#include <string>

#include <Eigen/QR>
#include <spdlog/spdlog.h>

namespace ezdeepc::deepc {

namespace {

std::string dims(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace

GammaPredictor build_predictor(const TrajectoryData& data, Eigen::Index t_ini,
                               Eigen::Index n_c) {
  data.check();
  if (t_ini < 1 || n_c < 1) {
    throw DimensionMismatch("T_ini and N_c must both be >= 1");
  }
  const Eigen::Index m = data.input_dim();
  const Eigen::Index p = data.output_dim();
  const Eigen::Index depth = t_ini + n_c;
  if (data.length() < depth) {
    throw DimensionMismatch("trajectory of length " +
                            std::to_string(data.length()) +
                            " is shorter than T_ini + N_c");
  }

  const Matrix hu = build_hankel(data.inputs, depth);
  const Matrix hy = build_hankel(data.outputs, depth);
  const Eigen::Index cols = hu.cols();
  const Eigen::Index zr = (m + p) * t_ini;
  const Eigen::Index ur = m * n_c;
  const Eigen::Index yr = p * n_c;
  const Eigen::Index rows = zr + ur + yr;
  if (cols < rows) {
    throw DimensionMismatch("stacked Hankel matrix is " + std::to_string(rows) +
                            "x" + std::to_string(cols) +
                            "; it needs at least as many columns as rows");
  }

  Matrix h(rows, cols);
  h.topRows(m * t_ini) = hu.topRows(m * t_ini);
  h.middleRows(m * t_ini, p * t_ini) = hy.topRows(p * t_ini);
  h.middleRows(zr, ur) = hu.bottomRows(ur);
  h.bottomRows(yr) = hy.bottomRows(yr);

  // LQ of H from the QR of H^T: H^T = Q R  =>  H = R^T Q^T.
  Eigen::HouseholderQR<Matrix> qr(h.transpose());
  const Matrix l = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>().transpose();
  const Matrix q = (qr.householderQ() * Matrix::Identity(cols, rows)).transpose();

  GammaPredictor g;
  g.m_ = m;
  g.p_ = p;
  g.t_ini_ = t_ini;
  g.n_c_ = n_c;
  g.columns_ = cols;

  const double h_norm = h.norm();
  g.diagnostics_.reconstruction_error =
      h_norm > 0.0 ? (h - l * q).norm() / h_norm : 0.0;
  g.diagnostics_.orthogonality_error =
      (q * q.transpose() - Matrix::Identity(rows, rows)).cwiseAbs().maxCoeff();
  if (!(g.diagnostics_.reconstruction_error <= kReconstructionTol) ||
      !(g.diagnostics_.orthogonality_error <= kReconstructionTol)) {
    throw ReconstructionFailure(
        "LQ factorization residual " +
        std::to_string(g.diagnostics_.reconstruction_error) +
        ", orthogonality error " +
        std::to_string(g.diagnostics_.orthogonality_error));
  }

  g.l11_ = l.topLeftCorner(zr, zr);
  g.l21_ = l.block(zr, 0, ur, zr);
  g.l22_ = l.block(zr, zr, ur, ur);
  g.l31_ = l.block(zr + ur, 0, yr, zr);
  g.l32_ = l.block(zr + ur, zr, yr, ur);
  g.l33_ = l.block(zr + ur, zr + ur, yr, yr);
  g.pinv_l11_ = pseudo_inverse(g.l11_);

  Eigen::JacobiSVD<Matrix> svd(g.l11_);
  const Vector& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > kRankTolerance * s[0]) ++g.diagnostics_.l11_rank;
  }

  g.diagnostics_.input_excitation = check_persistent_excitation(data.inputs, depth);
  if (!g.diagnostics_.input_excitation.persistently_exciting) {
    spdlog::warn(
        "input data is not persistently exciting of order {} (rank {} of {}, "
        "smallest singular value {:.3g})",
        depth, g.diagnostics_.input_excitation.rank,
        g.diagnostics_.input_excitation.rows,
        g.diagnostics_.input_excitation.smallest_singular_value);
  }
  spdlog::debug("gamma predictor built: L11 {} rank {}, {} data columns",
                dims(g.l11_), g.diagnostics_.l11_rank, cols);
  return g;
}

Vector GammaPredictor::gamma1(const Vector& z_ini) const {
  if (z_ini.size() != z_ini_dim()) {
    throw DimensionMismatch("z_ini has length " + std::to_string(z_ini.size()) +
                            ", expected " + std::to_string(z_ini_dim()));
  }
  return pinv_l11_ * z_ini;
}

GammaPredictor::Prediction GammaPredictor::predict(const Vector& gamma2,
                                                   const Vector& gamma3,
                                                   const Vector& gamma1) const {
  if (gamma2.size() != gamma2_dim() || gamma3.size() != gamma3_dim() ||
      gamma1.size() != z_ini_dim()) {
    throw DimensionMismatch("gamma vector lengths do not match the predictor");
  }
  return {l21_ * gamma1 + l22_ * gamma2,
          l31_ * gamma1 + l32_ * gamma2 + l33_ * gamma3};
}

Vector stack_z_ini(const Matrix& past_inputs, const Matrix& past_outputs) {
  const Eigen::Index t = past_inputs.rows();
  if (past_outputs.rows() != t) {
    throw DimensionMismatch("past input and output windows differ in length");
  }
  const Eigen::Index m = past_inputs.cols();
  const Eigen::Index p = past_outputs.cols();
  Vector z(t * (m + p));
  for (Eigen::Index k = 0; k < t; ++k) {
    z.segment(k * m, m) = past_inputs.row(k).transpose();
    z.segment(t * m + k * p, p) = past_outputs.row(k).transpose();
  }
  return z;
}

}  // namespace ezdeepc::deepc
