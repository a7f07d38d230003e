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

#ifndef EZDEEPC_ZONE_CONTROLLER_HPP
#define EZDEEPC_ZONE_CONTROLLER_HPP

#include <deque>
#include <string>
#include <vector>

#include "json.hpp"

#include "ezdeepc/deepc/predictor.hpp"
#include "ezdeepc/deepc/trajectory.hpp"
#include "ezdeepc/zone/stages.hpp"

namespace ezdeepc::zone {

/// Rule-based pump/gate operation with hysteresis. Weirs sit at the lower
/// bound of the upstream branch zone. A station starts draining (filling)
/// when its branch rises above (falls below) the desired zone and stops once
/// the level crosses the zone center. While active it opens the gate when
/// the gate may open, otherwise it runs the matching pumps.
class PassiveController {
 public:
  enum class Mode { kIdle, kFilling, kDraining };

  PassiveController(const hydro::WaterSystemConfig& plant, ZoneSpec zone,
                    PassiveSettings settings = {});

  Vector step(const Vector& levels, const hydro::Disturbance& disturbance);

  /// Station devices only (weir entries left at their passive heights).
  [[nodiscard]] Mode mode(std::size_t station) const { return modes_[station]; }
  void reset();

 private:
  const hydro::WaterSystemConfig* plant_;
  ZoneSpec zone_;
  PassiveSettings settings_;
  std::vector<Mode> modes_;
};

/// PI action on each weir's upstream level; stations follow the passive
/// rules.
class PidBootstrap {
 public:
  PidBootstrap(const hydro::WaterSystemConfig& plant, ZoneSpec zone,
               PidGains gains = {}, PassiveSettings passive = {});

  Vector step(const Vector& levels, const hydro::Disturbance& disturbance);

 private:
  const hydro::WaterSystemConfig* plant_;
  ZoneSpec zone_;
  PidGains gains_;
  PassiveController passive_;
  Vector integral_;
};

/// Per-step audit record, serialized as one JSON line.
struct StepLog {
  int t = 0;
  Vector y;
  Vector u;
  Vector d;
  double zc_star = 0.0;
  double stage2_zone_cost = 0.0;
  double stage2_cost = 0.0;
  double energy_kwh = 0.0;
  std::vector<int> binaries;
  std::string solver_status;
  int combos_explored = 0;
  bool fallback = false;
  bool budget_exhausted = false;
  /// Pump on-intervals used at this step ([lo, hi], or [0, 0] when off-only).
  std::vector<Interval> pump_domains;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Economic zone DeePC controller. Offline data rows pair the input applied
/// over step t with the levels at the end of that step; the rolling history
/// follows the same convention.
class ZoneController {
 public:
  ZoneController(const hydro::WaterSystemConfig& plant, ZoneSpec zone,
                 ControllerConfig config, const deepc::TrajectoryData& data,
                 PassiveSettings passive = {});

  /// Replace the rolling history with the last T_ini (input, next level)
  /// pairs; rows are oldest first.
  void reset_history(const Matrix& inputs, const Matrix& outputs);

  /// Solve both stages at the measured levels and return the input to apply.
  /// Falls back to the passive rules (and flags the log) if the zone stage is
  /// infeasible.
  Vector control_step(const Vector& levels, const hydro::Disturbance& disturbance,
                      StepLog* log = nullptr);

  /// Append the applied input and the resulting levels to the history.
  void observe(const Vector& applied_input, const Vector& next_levels);

  [[nodiscard]] const deepc::GammaPredictor& predictor() const { return predictor_; }
  [[nodiscard]] const Normalization& normalization() const { return norm_; }
  [[nodiscard]] const ZoneSpec& zone() const { return zone_; }
  [[nodiscard]] const ControllerConfig& config() const { return config_; }
  [[nodiscard]] std::size_t history_length() const { return u_hist_.size(); }

  /// Build the stage problem for the current history (exposed for audits).
  [[nodiscard]] StageProblem stage_problem(const TimeVaryingInputSet& bounds,
                                           const std::vector<PumpSurrogate>& surrogates) const;

 private:
  const hydro::WaterSystemConfig* plant_;
  ZoneSpec zone_;
  ControllerConfig config_;
  Normalization norm_;
  deepc::GammaPredictor predictor_;
  PassiveController passive_;
  std::deque<Vector> u_hist_;
  std::deque<Vector> y_hist_;
  std::vector<bool> pump_state_;
};

}  // namespace ezdeepc::zone

#endif  // EZDEEPC_ZONE_CONTROLLER_HPP
