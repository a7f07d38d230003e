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

#ifndef EZDEEPC_HYDRO_SIMULATOR_HPP
#define EZDEEPC_HYDRO_SIMULATOR_HPP

#include <vector>

#include "ezdeepc/hydro/types.hpp"

namespace ezdeepc::hydro {

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Volumes (m^3) moved by each device over one sampling period, integrated
/// with the same RK4 weights as the levels. Signs are "into the branch" for
/// gates, pumps and inflows; weirs are positive from `upstream` to
/// `downstream`.
struct StepFlows {
  Vector weir_volume;
  Vector gate_volume;
  Vector pump_volume;
  Vector inflow_volume;
  Vector branch_net_volume;
  Vector pump_mean_power_kw;
};

struct StepResult {
  Vector next_levels;
  double energy_kwh = 0.0;
  StepFlows flows;
  /// Input actually applied after clamping to the physical set and the
  /// free-flow weir ordering.
  Vector applied_input;
  /// Indices into the input vector that were clamped.
  std::vector<std::size_t> clamped_inputs;
};

/// Admissible crest heights of weir `w` at `levels`: the physical bounds
/// intersected with the free-flow ordering between the adjacent levels.
Interval weir_height_interval(const Vector& levels, std::size_t w,
                              const WaterSystemConfig& config);

/// Clamp a requested input to the physical set and the weir free-flow
/// ordering at `levels`; records clamped indices in `clamped` when non-null.
Vector clamp_input(const Vector& levels, const Vector& input,
                   const WaterSystemConfig& config,
                   std::vector<std::size_t>* clamped = nullptr);

/// Net inflow rate (m^3/s) of every branch at `levels`, with per-device
/// rates written to `device_rates` when non-null (same layout as StepFlows,
/// rates instead of volumes).
Vector branch_net_flow(const Vector& levels, const Vector& input,
                       const Disturbance& disturbance,
                       const WaterSystemConfig& config,
                       StepFlows* device_rates = nullptr);

/// Advance the plant by one sampling period with fixed-sub-step RK4.
/// Throws NonFiniteState if the integration produces a non-finite level.
StepResult step(const Vector& levels, const Vector& input,
                const Disturbance& disturbance,
                const WaterSystemConfig& config);

}  // namespace ezdeepc::hydro

#endif  // EZDEEPC_HYDRO_SIMULATOR_HPP
