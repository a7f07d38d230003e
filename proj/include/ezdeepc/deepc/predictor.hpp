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

#ifndef EZDEEPC_DEEPC_PREDICTOR_HPP
#define EZDEEPC_DEEPC_PREDICTOR_HPP

#include "ezdeepc/deepc/hankel.hpp"
#include "ezdeepc/deepc/trajectory.hpp"

namespace ezdeepc::deepc {

class ReconstructionFailure : public Error {
 public:
  using Error::Error;
};

/// Tolerance on the build-time LQ reconstruction and row orthogonality.
inline constexpr double kReconstructionTol = 1e-9;

/// Affine predictor obtained from the LQ factorization of the stacked data
/// matrix [U_P; Y_P; U_F; Y_F] = L * Q.
///
/// With z_ini = [u_ini; y_ini] and gamma1 = pinv(L11) * z_ini, every
/// predicted pair satisfies
///
///   u_hat = L21 * gamma1 + L22 * gamma2
///   y_hat = L31 * gamma1 + L32 * gamma2 + L33 * gamma3
///
/// so the decision variables (gamma2, gamma3) have dimension (m + p) * N_c
/// regardless of the data length. Immutable once built.
class GammaPredictor {
 public:
  struct Diagnostics {
    double reconstruction_error = 0.0;  // ||H - L Q|| / ||H||
    double orthogonality_error = 0.0;   // ||Q Q^T - I||_max
    Eigen::Index l11_rank = 0;
    ExcitationReport input_excitation;
  };

  GammaPredictor() = default;

  [[nodiscard]] Eigen::Index input_dim() const { return m_; }
  [[nodiscard]] Eigen::Index output_dim() const { return p_; }
  [[nodiscard]] Eigen::Index past_horizon() const { return t_ini_; }
  [[nodiscard]] Eigen::Index horizon() const { return n_c_; }
  [[nodiscard]] Eigen::Index data_columns() const { return columns_; }
  [[nodiscard]] Eigen::Index z_ini_dim() const { return (m_ + p_) * t_ini_; }
  [[nodiscard]] Eigen::Index gamma2_dim() const { return m_ * n_c_; }
  [[nodiscard]] Eigen::Index gamma3_dim() const { return p_ * n_c_; }

  const Matrix& l11() const { return l11_; }
  const Matrix& l21() const { return l21_; }
  const Matrix& l22() const { return l22_; }
  const Matrix& l31() const { return l31_; }
  const Matrix& l32() const { return l32_; }
  const Matrix& l33() const { return l33_; }
  const Matrix& pinv_l11() const { return pinv_l11_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }

  /// gamma1 = pinv(L11) * z_ini; the minimum-norm solution when L11 is
  /// rank-deficient.
  [[nodiscard]] Vector gamma1(const Vector& z_ini) const;

  struct Prediction {
    Vector inputs;   // m * N_c, time-major
    Vector outputs;  // p * N_c, time-major
  };
  [[nodiscard]] Prediction predict(const Vector& gamma2, const Vector& gamma3,
                                   const Vector& gamma1) const;

 private:
  friend GammaPredictor build_predictor(const TrajectoryData&, Eigen::Index,
                                        Eigen::Index);
  Eigen::Index m_ = 0, p_ = 0, t_ini_ = 0, n_c_ = 0, columns_ = 0;
  Matrix l11_, l21_, l22_, l31_, l32_, l33_, pinv_l11_;
  Diagnostics diagnostics_;
};

/// Build the predictor from offline data. Throws DimensionMismatch when the
/// stacked Hankel matrix has fewer columns than rows and
/// ReconstructionFailure when the factorization misses its tolerances.
/// Insufficient persistent excitation of the inputs is logged, not fatal.
GammaPredictor build_predictor(const TrajectoryData& data, Eigen::Index t_ini,
                               Eigen::Index n_c);

/// Stack past samples (rows, oldest first) into z_ini = [u_ini; y_ini].
Vector stack_z_ini(const Matrix& past_inputs, const Matrix& past_outputs);

}  // namespace ezdeepc::deepc

#endif  // EZDEEPC_DEEPC_PREDICTOR_HPP
