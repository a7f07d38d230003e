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

#ifndef EZDEEPC_BO_TUNER_HPP
#define EZDEEPC_BO_TUNER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ezdeepc/bo/gp.hpp"
#include "ezdeepc/harness/experiment.hpp"

namespace ezdeepc::bo {

struct BoConfig {
  int w_ini = 3;
  int w_max = 16;
  std::vector<double> initial_alphas{1.0, 0.5, 0.0};
  double kappa = 2.576;
  /// Closed-loop evaluation horizon (steps).
  int horizon = 200;
  /// Weight of the pump energy (kWh) against the zone distance (m).
  double energy_weight = 2.5e-4;
  int grid_points = 1001;
  KernelParams kernel;
  double noise_variance = 0.35 * 0.35;
  /// Half-width of the uniform initial-level range (m).
  double initial_spread = 0.05;
  std::uint64_t seed = 1;
  int max_retries = 3;

  void validate() const;
};

BoConfig parse_bo(const nlohmann::json& j);
nlohmann::json to_json(const BoConfig& c);

/// argmax of mean + kappa * std over the grid, ties toward smaller alpha.
double propose_next(const GpSurrogate& gp, const BoConfig& config);

/// Posterior means over `grid` and the grid argmax.
struct MeanCurve {
  std::vector<double> grid;
  std::vector<double> mean;
  double argmax = 0.0;
};
MeanCurve posterior_mean_curve(const GpSurrogate& gp, int grid_points);

struct AuditEntry {
  int iter = 0;
  double alpha = 0.0;
  double phi = 0.0;
  double posterior_argmax = 0.0;
};

struct BoResult {
  double alpha_star = 0.0;
  GpSurrogate surrogate;
  std::vector<AuditEntry> audit;
};

/// Objective callback: (alpha, evaluation index, attempt) -> phi. Throwing
/// ezdeepc::Error discards the attempt; it is retried up to max_retries times.
using Objective = std::function<double(double alpha, int index, int attempt)>;

BoResult run_bo(const Objective& objective, const BoConfig& config);

/// Average the posterior means of several surrogates on a shared grid.
MeanCurve aggregate_runs(const std::vector<GpSurrogate>& surrogates, int grid_points);

/// -sum_k (dist_1(y_k, desired zone) + energy_weight * energy_k) over k in
/// [t_ini, t_ini + n).
double bo_objective(const Matrix& levels, const Vector& energy_kwh,
                    const zone::ZoneSpec& zone, double energy_weight, int n, int t_ini);

/// Closed-loop score of `alpha` on a fixed disturbance trajectory.
double evaluate_candidate(const harness::Experiment& exp, const deepc::TrajectoryData& data,
                          double alpha, const BoConfig& config,
                          const std::vector<hydro::Disturbance>& disturbances,
                          const Vector& initial_levels);

/// BO on the experiment scenario with a per-evaluation random initial state.
BoResult tune_alpha(const harness::Experiment& exp, const deepc::TrajectoryData& data,
                    const BoConfig& config);

void write_audit_csv(const std::string& path, const std::vector<AuditEntry>& audit);
void write_curve_csv(const std::string& path, const MeanCurve& curve);

}  // namespace ezdeepc::bo

#endif  // EZDEEPC_BO_TUNER_HPP
