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

// Discharge and power characteristics of the hydraulic structures.

#ifndef EZDEEPC_HYDRO_STRUCTURES_HPP
#define EZDEEPC_HYDRO_STRUCTURES_HPP

#include <optional>

#include "ezdeepc/hydro/types.hpp"

namespace ezdeepc::hydro {

/// Raised when a configured H-Q curve yields more than one intersection with
/// the demand curve.
class NonUniqueRoot : public Error {
 public:
  using Error::Error;
};

/// Head tolerance (m) of the operating-point root search.
inline constexpr double kOperatingPointHeadTol = 1e-9;

/// Free-flow weir discharge (m^3/s) for the level on the higher side.
/// Zero at or below the crest.
double weir_discharge(double h_high, double crest_height, const Weir& weir,
                      double gravity = kStandardGravity);

/// Submerged sluice-gate discharge magnitude (m^3/s). Returns 0 when the
/// check-valve condition for the gate's direction does not hold.
double gate_discharge(double h_branch, double h_river, double opening_ratio,
                      const SluiceGate& gate, double gravity = kStandardGravity);

/// True when the gate may open: river above branch for inflow gates, branch
/// above river for outflow gates.
bool gate_may_open(double h_branch, double h_river, FlowDirection direction);

/// Nominal H-Q curve evaluated at `q`.
double nominal_head(double q, const Pump& pump);

/// Head the pump delivers at discharge `q` and normalized speed `nbar` via
/// the affinity laws: nbar^2 * H_nominal(q / nbar).
double pump_head_capacity(double q, double nbar, const Pump& pump);

/// System demand head for discharge `q` against static head `h_static`.
double demand_head(double q, double h_static, const PipeSection& pipe);

/// Level difference the pump must lift across.
double static_head(double h_branch, double h_river, FlowDirection direction);

/// Discharge where the pump's H-Q curve meets the demand curve, or nullopt
/// when the curves do not intersect at a non-negative discharge. `nbar == 0`
/// means the pump is off and yields 0. Throws NonUniqueRoot for a curve that
/// crosses the demand curve more than once.
std::optional<double> solve_pump_operating_point(double nbar, double h_static,
                                                 const Pump& pump,
                                                 const PipeSection& pipe);

/// Shaft power (kW); exactly 0 at shutdown.
double pump_power(double q, double nbar, const Pump& pump);

/// Whether speed `speed_rpm` yields an operating point inside the pump's
/// operating region at static head `h_static`.
bool operating_point_feasible(double speed_rpm, double h_static,
                              const Pump& pump, const PipeSection& pipe);

/// On-speed interval (rpm) whose operating points lie in the operating
/// region, intersected with the pump's speed bounds. nullopt when the pump
/// must stay off.
std::optional<Interval> feasible_speed_interval(double h_static,
                                                const Pump& pump,
                                                const PipeSection& pipe);

}  // namespace ezdeepc::hydro

#endif  // EZDEEPC_HYDRO_STRUCTURES_HPP
