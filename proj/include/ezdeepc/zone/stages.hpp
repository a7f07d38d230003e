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

#ifndef EZDEEPC_ZONE_STAGES_HPP
#define EZDEEPC_ZONE_STAGES_HPP

#include <string>
#include <vector>

#include "ezdeepc/deepc/predictor.hpp"
#include "ezdeepc/zone/bounds.hpp"
#include "ezdeepc/zone/config.hpp"

namespace ezdeepc::zone {

/// Raised when no binary pattern admits a prediction inside the output set.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, int branch) : Error(what), branch_(branch) {}
  /// Output with the largest violation of the output set, or -1.
  [[nodiscard]] int branch() const { return branch_; }

 private:
  int branch_;
};

/// Affine maps between physical signals and the coordinates the predictor was
/// trained in: inputs are centered and scaled per channel, outputs are
/// deviations from the zone center in meters.
struct Normalization {
  Vector input_mean;
  Vector input_scale;
  Vector output_center;

  /// Per-channel mean and standard deviation (1 where the deviation is 0).
  static Normalization from_data(const Matrix& inputs, const Vector& output_center);

  [[nodiscard]] Vector to_model_input(const Vector& u) const;
  [[nodiscard]] Vector to_physical_input(const Vector& u) const;
  [[nodiscard]] Matrix to_model_inputs(const Matrix& rows) const;
  [[nodiscard]] Matrix to_model_outputs(const Matrix& rows) const;
};

/// Everything held constant while solving one control step.
struct StageProblem {
  const deepc::GammaPredictor* predictor = nullptr;
  Vector gamma1;
  const TimeVaryingInputSet* bounds = nullptr;
  ZoneSpec zone;
  const ControllerConfig* config = nullptr;
  Normalization norm;
  std::vector<PumpSurrogate> surrogates;
  double dt_hours = 0.5;
  /// On/off state of each pump at the previous step; enumeration starts here.
  std::vector<bool> current_pattern;
};

/// Pump on/off pattern over the horizon, time-major (step j, pump k at
/// j * num_pumps + k).
using BinaryPattern = std::vector<bool>;

struct StageSolution {
  Vector gamma2;
  Vector gamma3;
  /// Physical predicted inputs, outputs and zone reference, one row per step.
  Matrix inputs;
  Matrix outputs;
  Matrix zone_ref;
  BinaryPattern binaries;
  double objective = 0.0;
  double zone_cost = 0.0;
  /// Surrogate pump energy over the horizon (kWh).
  double energy_kwh = 0.0;
  QpStatus status = QpStatus::kInfeasible;
  double kkt_residual = 0.0;
  int combos_explored = 0;
  bool budget_exhausted = false;
  int iterations = 0;

  /// Decision vector [gamma2; gamma3; y^z] in model coordinates.
  Vector x;

  [[nodiscard]] bool ok() const { return status == QpStatus::kOptimal; }
};

struct ZoneStageResult {
  StageSolution best;
  /// Optimal solution of every explored feasible pattern.
  std::vector<StageSolution> patterns;
};

/// Binary patterns in exploration order: `current` first, then increasing
/// Hamming distance with lowest-index-first ordering within a distance.
/// Only pumps allowed to run are toggled. Returns at most `budget` patterns;
/// `exhausted` is set when more existed.
std::vector<BinaryPattern> enumerate_patterns(const TimeVaryingInputSet& bounds,
                                              const BinaryPattern& current,
                                              BinaryMode mode, int horizon,
                                              int budget, bool* exhausted);

/// Zone-tracking QP for a fixed binary pattern.
StageSolution solve_zone_pattern(const StageProblem& problem,
                                 const BinaryPattern& pattern);

/// Zone stage: best regularized zone-tracking solution over the explored
/// patterns. Throws Infeasible when no pattern admits a feasible point.
ZoneStageResult solve_zone_stage(const StageProblem& problem);

/// Energy stage: minimizes surrogate pump energy plus regularization subject
/// to the stage constraints and the zone cost bound
/// zc <= zc* + max(1e-8, 1e-6 zc*). Never returns a point worse than the
/// stage-1 optimum under the energy objective.
StageSolution solve_energy_stage(const StageProblem& problem,
                                 const ZoneStageResult& zone_result);

/// Zone cost bound used by the energy stage.
double zone_cost_bound(double zc_star);

/// Energy-stage objective (surrogate energy plus regularization) of a
/// decision vector under `pattern`.
double energy_objective(const StageProblem& problem, const BinaryPattern& pattern,
                        const Vector& x, double* energy_kwh = nullptr);

}  // namespace ezdeepc::zone

#endif  // EZDEEPC_ZONE_STAGES_HPP
