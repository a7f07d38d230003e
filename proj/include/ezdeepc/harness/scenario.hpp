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

#ifndef EZDEEPC_HARNESS_SCENARIO_HPP
#define EZDEEPC_HARNESS_SCENARIO_HPP

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "ezdeepc/hydro/types.hpp"

namespace ezdeepc::harness {

/// River level mean + amplitude * sin(2 pi t / period + phase), t in steps.
struct TidalComponent {
  double mean = 0.0;
  double amplitude = 0.0;
  double period_steps = 24.84;
  double phase = 0.0;
};

/// Rain-driven inflow events: each step an event starts on a branch with
/// probability `event_rate`; its peak is `peak_per_area` times the branch
/// backwater area, reached by a linear rise over `rise_steps` steps and
/// followed by exponential decay with half-life `half_life_steps`.
/// `base_per_area` adds a constant (possibly negative) inflow.
struct InflowModel {
  double event_rate = 0.0;
  double peak_per_area = 0.0;
  int rise_steps = 3;
  double half_life_steps = 5.0;
  double base_per_area = 0.0;
  /// Optional per-branch override of base_per_area.
  std::vector<double> base_per_area_by_branch;
};

struct DisturbanceScenario {
  std::uint64_t seed = 1;
  int horizon = 200;
  std::vector<TidalComponent> rivers;
  InflowModel inflow;
  /// Half-width of the uniform initial-level range around the zone center.
  double initial_spread = 0.05;

  void validate(const hydro::WaterSystemConfig& plant) const;
};

DisturbanceScenario parse_scenario(const nlohmann::json& j);
nlohmann::json to_json(const DisturbanceScenario& s);

/// Disturbance sequence of `steps` samples (the scenario horizon when
/// steps < 0). Deterministic in the scenario seed.
std::vector<hydro::Disturbance> generate_disturbances(
    const DisturbanceScenario& scenario, const hydro::WaterSystemConfig& plant,
    int steps = -1);

/// Initial levels drawn uniformly within +/- initial_spread of `center`.
Vector sample_initial_levels(const DisturbanceScenario& scenario,
                             const Vector& center, std::uint64_t seed);

}  // namespace ezdeepc::harness

#endif  // EZDEEPC_HARNESS_SCENARIO_HPP
