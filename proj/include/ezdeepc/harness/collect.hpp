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

#ifndef EZDEEPC_HARNESS_COLLECT_HPP
#define EZDEEPC_HARNESS_COLLECT_HPP

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "ezdeepc/deepc/trajectory.hpp"
#include "ezdeepc/harness/scenario.hpp"
#include "ezdeepc/zone/config.hpp"

namespace ezdeepc::harness {

class CollectionFailed : public Error {
 public:
  CollectionFailed(const std::string& what, int step, int branch)
      : Error(what), step_(step), branch_(branch) {}
  [[nodiscard]] int step() const { return step_; }
  [[nodiscard]] int branch() const { return branch_; }

 private:
  int step_;
  int branch_;
};

struct CollectionSettings {
  /// Random step inputs are redrawn every hold_steps samples.
  int hold_steps = 10;
  /// Deviation from the center that starts a corrective intervention (m).
  double trigger = 0.35;
  /// Deviation below which an intervention ends (m).
  double release = 0.15;
  /// Allowed excursion beyond the output set before giving up (m).
  double failure_margin = 0.2;
  /// Crest height change per step during an intervention (m).
  double weir_step = 0.03;
  double pump_on_probability = 0.5;
  /// Random crest heights are drawn in [c - weir_depth, c + weir_lift] with c
  /// the upstream center, then clipped to the physical bounds.
  double weir_depth = 0.3;
  double weir_lift = 0.05;
  std::uint64_t seed = 7;
};

CollectionSettings parse_collection(const nlohmann::json& j);

struct InterventionInterval {
  int branch = 0;
  int begin = 0;  // first step with the intervention active
  int end = 0;    // one past the last step
  bool high = true;
};

struct CollectionResult {
  deepc::TrajectoryData data;
  Vector initial_levels;
  std::vector<InterventionInterval> interventions;
  /// Per row: true when an intervention modified the random input.
  std::vector<bool> intervened;
  /// Per row: true when the random input was redrawn at this row.
  std::vector<bool> redrawn;
};

/// Open-loop excitation run of `length` steps starting at the zone centers.
/// Row t holds the applied input u_t, the levels after the step and d_t.
CollectionResult collect_excitation_data(const hydro::WaterSystemConfig& plant,
                                         const zone::ZoneSpec& zone,
                                         const DisturbanceScenario& scenario,
                                         int length,
                                         const CollectionSettings& settings = {});

}  // namespace ezdeepc::harness

#endif  // EZDEEPC_HARNESS_COLLECT_HPP
