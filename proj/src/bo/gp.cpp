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

#include "ezdeepc/bo/gp.hpp"

#include <cmath>
#include <numeric>

namespace ezdeepc::bo {

void KernelParams::validate() const {
  if (!(variance > 0.0) || !(length_scale > 0.0)) {
    throw ConfigError("kernel variance and length scale must be positive");
  }
  if (smoothness != 0.5 && smoothness != 1.5 && smoothness != 2.5) {
    throw ConfigError("Matern smoothness must be 0.5, 1.5 or 2.5");
  }
}

double matern_kernel(double a, double b, const KernelParams& p) {
  const double r = std::abs(a - b) / p.length_scale;
  if (p.smoothness == 0.5) return p.variance * std::exp(-r);
  if (p.smoothness == 1.5) {
    const double s = std::sqrt(3.0) * r;
    return p.variance * (1.0 + s) * std::exp(-s);
  }
  const double s = std::sqrt(5.0) * r;
  return p.variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GpSurrogate::GpSurrogate(KernelParams kernel, double noise_variance)
    : kernel_(kernel), noise_variance_(noise_variance) {
  kernel_.validate();
  if (noise_variance_ < 0.0) throw ConfigError("noise variance must be >= 0");
}

void GpSurrogate::add(double alpha, double phi) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("samples must lie in [0, 1]");
  if (!std::isfinite(phi)) throw Error("non-finite observation");
  samples_.push_back(alpha);
  observations_.push_back(phi);
  refit();
}

void GpSurrogate::refit() {
  const auto n = static_cast<Eigen::Index>(samples_.size());
  mean_ = std::accumulate(observations_.begin(), observations_.end(), 0.0) / n;
  double var = 0.0;
  for (double v : observations_) var += (v - mean_) * (v - mean_);
  var /= n;
  scale_ = var > 0.0 ? std::sqrt(var) : 1.0;

  Matrix k(n, n);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = (observations_[static_cast<std::size_t>(i)] - mean_) / scale_;
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = matern_kernel(samples_[static_cast<std::size_t>(i)],
                              samples_[static_cast<std::size_t>(j)], kernel_);
    }
  }
  k.diagonal().array() += noise_variance_;
  jitter_ = 0.0;
  for (double jitter = 0.0; jitter <= 1e-4 * kernel_.variance;
       jitter = jitter == 0.0 ? 1e-12 * kernel_.variance : jitter * 10.0) {
    Matrix kj = k;
    kj.diagonal().array() += jitter;
    chol_.compute(kj);
    if (chol_.info() == Eigen::Success) {
      // LLT does not detect semi-definiteness; require a positive pivot.
      const Vector d = chol_.matrixLLT().diagonal();
      if (d.minCoeff() > 1e-10 * std::sqrt(kernel_.variance)) {
        jitter_ = jitter;
        weights_ = chol_.solve(z);
        return;
      }
    }
  }
  throw SingularKernel("kernel matrix is singular after jitter escalation");
}

Posterior GpSurrogate::posterior(double alpha) const {
  if (samples_.empty()) throw Error("posterior query on an empty surrogate");
  const auto n = static_cast<Eigen::Index>(samples_.size());
  Vector ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ks[i] = matern_kernel(alpha, samples_[static_cast<std::size_t>(i)], kernel_);
  }
  const double mean = ks.dot(weights_);
  const Vector v = chol_.matrixL().solve(ks);
  const double var = std::max(0.0, matern_kernel(alpha, alpha, kernel_) - v.squaredNorm());
  return {mean * scale_ + mean_, std::sqrt(var) * scale_};
}

nlohmann::json GpSurrogate::to_json() const {
  return {{"samples", samples_},
          {"observations", observations_},
          {"kernel",
           {{"family", "matern"},
            {"variance", kernel_.variance},
            {"length_scale", kernel_.length_scale},
            {"smoothness", kernel_.smoothness}}},
          {"noise_variance", noise_variance_},
          {"standardization", {{"mean", mean_}, {"scale", scale_}}},
          {"jitter", jitter_}};
}

std::vector<double> alpha_grid(int points) {
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
  return g;
}

std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace ezdeepc::bo
