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

#ifndef EZDEEPC_HARNESS_EXPERIMENT_HPP
#define EZDEEPC_HARNESS_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ezdeepc/deepc/trajectory.hpp"
#include "ezdeepc/harness/collect.hpp"
#include "ezdeepc/harness/metrics.hpp"
#include "ezdeepc/harness/scenario.hpp"
#include "ezdeepc/zone/controller.hpp"

namespace ezdeepc::harness {

class SimulationFailed : public Error {
 public:
  using Error::Error;
};

/// Everything a closed-loop experiment needs, parsed from one document.
struct Experiment {
  hydro::WaterSystemConfig plant;
  zone::ZoneSpec zone;
  zone::ControllerConfig controller;
  zone::PidGains pid;
  zone::PassiveSettings passive;
  DisturbanceScenario scenario;
  CollectionSettings collection;
  /// Length of the excitation record collected when no data file is given.
  int data_length = 1500;
  /// Tuned contraction rate, if the document carries one.
  std::optional<double> tuned_alpha;
  /// The "bo" section, parsed by the tuner.
  nlohmann::json bo = nlohmann::json::object();
};

Experiment parse_experiment(const nlohmann::json& doc);
Experiment load_experiment(const std::string& path);
/// Replace the scenario by the "scenario" section of `doc`.
void apply_scenario(Experiment& exp, const nlohmann::json& doc);

enum class ControlMode { kEz, kEs, kEzRaw, kPassive };
std::string_view to_string(ControlMode m);
ControlMode control_mode_from_string(std::string_view s);

struct ClosedLoopRun {
  ControlMode mode = ControlMode::kPassive;
  double alpha = 1.0;
  int t_ini = 0;
  /// Rows y_0 .. y_{t_ini + steps}.
  Matrix levels;
  /// Rows u_0 .. u_{t_ini + steps - 1}.
  Matrix inputs;
  Matrix disturbances;
  Vector energy_kwh;
  /// One entry per controlled step (bootstrap excluded).
  std::vector<zone::StepLog> logs;
  MetricsReport metrics;
  int fallbacks = 0;
};

/// Bootstrap t_ini steps with the PI controller, then run `steps` steps of
/// the selected controller from `initial_levels` under `disturbances`
/// (at least t_ini + steps samples). `data` is required unless the mode is
/// passive. `alpha` is used by kEz only.
ClosedLoopRun run_closed_loop(const Experiment& exp, const deepc::TrajectoryData* data,
                              ControlMode mode, double alpha, int steps,
                              const Vector& initial_levels,
                              const std::vector<hydro::Disturbance>& disturbances);

/// Convenience overload drawing disturbances and the initial state from the
/// experiment scenario.
ClosedLoopRun run_closed_loop(const Experiment& exp, const deepc::TrajectoryData* data,
                              ControlMode mode, double alpha, int steps);

struct ComparisonEntry {
  NamedReport report;
  std::optional<ClosedLoopRun> run;
};

/// Tuned EZ, EZ with alpha = 1, set-point tracking (alpha = 0) and passive
/// control on the same scenario and initial state.
std::vector<ComparisonEntry> run_comparison(const Experiment& exp,
                                            const deepc::TrajectoryData& data,
                                            double tuned_alpha, int steps);

/// Dump the step logs as JSON lines.
void write_step_log(const std::string& path, const ClosedLoopRun& run);

}  // namespace ezdeepc::harness

#endif  // EZDEEPC_HARNESS_EXPERIMENT_HPP
