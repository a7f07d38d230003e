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

#ifndef EZDEEPC_BO_GP_HPP
#define EZDEEPC_BO_GP_HPP

#include <vector>

#include <Eigen/Cholesky>

#include "json.hpp"

#include "ezdeepc/common.hpp"

namespace ezdeepc::bo {

class SingularKernel : public Error {
 public:
  using Error::Error;
};

/// Matern covariance; smoothness must be 0.5, 1.5 or 2.5.
struct KernelParams {
  double variance = 1.0;
  double length_scale = 0.2;
  double smoothness = 2.5;

  void validate() const;
};

double matern_kernel(double a, double b, const KernelParams& params);

struct Posterior {
  double mean = 0.0;
  double stddev = 0.0;
};

/// One-dimensional Gaussian process on standardized observations. The noise
/// variance is expressed in standardized units.
class GpSurrogate {
 public:
  explicit GpSurrogate(KernelParams kernel = {}, double noise_variance = 0.35 * 0.35);

  void add(double alpha, double phi);
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const std::vector<double>& samples() const { return samples_; }
  [[nodiscard]] const std::vector<double>& observations() const { return observations_; }
  [[nodiscard]] const KernelParams& kernel() const { return kernel_; }
  [[nodiscard]] double noise_variance() const { return noise_variance_; }
  [[nodiscard]] double obs_mean() const { return mean_; }
  [[nodiscard]] double obs_scale() const { return scale_; }
  /// Jitter added to the diagonal by the last factorization.
  [[nodiscard]] double jitter() const { return jitter_; }

  /// De-standardized posterior at `alpha`. Throws Error when empty.
  [[nodiscard]] Posterior posterior(double alpha) const;

  [[nodiscard]] nlohmann::json to_json() const;

 private:
  void refit();

  KernelParams kernel_;
  double noise_variance_;
  std::vector<double> samples_;
  std::vector<double> observations_;
  double mean_ = 0.0;
  double scale_ = 1.0;
  double jitter_ = 0.0;
  Eigen::LLT<Matrix> chol_;
  Vector weights_;  // (K + s I)^{-1} z
};

/// Uniform grid of `points` values on [0, 1].
std::vector<double> alpha_grid(int points);

/// Index of the largest value; ties go to the smallest index.
std::size_t argmax_first(const std::vector<double>& values);

}  // namespace ezdeepc::bo

#endif  // EZDEEPC_BO_GP_HPP
