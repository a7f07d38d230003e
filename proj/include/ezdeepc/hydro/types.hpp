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

#ifndef EZDEEPC_HYDRO_TYPES_HPP
#define EZDEEPC_HYDRO_TYPES_HPP

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "ezdeepc/common.hpp"

namespace ezdeepc::hydro {

inline constexpr double kStandardGravity = 9.81;

/// Flow direction relative to the branch a gate or pump is attached to.
enum class FlowDirection { kInflow, kOutflow };

std::string_view to_string(FlowDirection d);
FlowDirection flow_direction_from_string(std::string_view s);

struct Branch {
  int id = 0;
  double backwater_area = 0.0;  // m^2
  double level_center = 0.0;    // m
};

/// Free-flow weir between two adjacent branches. Water crosses from the
/// higher side to the lower side.
struct Weir {
  int id = 0;
  int upstream = 0;
  int downstream = 1;
  double discharge_coeff = 0.61;
  double crest_width = 6.0;  // m
  Interval height_bounds{0.0, 1.0};
};

struct SluiceGate {
  int id = 0;
  int branch = 0;
  int river = 0;
  double discharge_coeff = 0.61;
  double width = 5.0;        // m
  double max_opening = 0.6;  // m
  FlowDirection direction = FlowDirection::kInflow;
};

/// Bounds on an active pump's operating point.
struct PumpOperatingRegion {
  double q_min_on = 0.5;       // m^3/s
  double p_max_kw = 600.0;     // kW
  double p_min_kw = 1.0;       // kW
  Interval head_range{0.0, 12.0};  // m
};

struct Pump {
  int id = 0;
  int branch = 0;
  int river = 0;
  FlowDirection direction = FlowDirection::kOutflow;
  double nominal_speed = 250.0;        // rpm
  Interval speed_bounds{120.0, 250.0};  // rpm, when running
  /// H_nominal(Q) = sum_k c_k Q^k, head in m for discharge in m^3/s.
  std::vector<double> nominal_hq_curve{12.0, 0.0, -0.12};
  /// a1..a4 of P = a1 Q^3 + a2 n Q^2 + a3 n^2 Q + a4 n^3 (kW).
  std::array<double, 4> power_coeffs{-1.81, 19.72, -83.06, 506.15};
  PumpOperatingRegion region;

  [[nodiscard]] double normalized(double speed_rpm) const {
    return speed_rpm / nominal_speed;
  }
};

struct PipeSection {
  double darcy_friction = 0.013;
  double length = 50.0;          // m
  double inner_diameter = 1.8288;  // m
  double minor_loss_sum = 1.0;
  double gravity = kStandardGravity;

  /// Coefficient k of the friction term k * Q^2 in the demand curve.
  [[nodiscard]] double friction_coefficient() const;
};

/// A pumping station: one sluice gate plus zero or more pumps sharing a pipe,
/// all connecting `branch` to the external river with the station's index.
struct Station {
  int branch = 0;
  SluiceGate gate;
  std::vector<Pump> pumps;
  PipeSection pipe;
};

/// Reference to one pump inside the station list.
struct PumpRef {
  std::size_t station = 0;
  std::size_t index = 0;
};

/// Full plant description. The control input vector is laid out as
/// [weir heights | gate opening ratios | pump speeds (rpm)], with gates in
/// station order and pumps flattened in station order.
struct WaterSystemConfig {
  std::vector<Branch> branches;
  std::vector<Weir> weirs;
  std::vector<Station> stations;
  double sampling_period = 1800.0;  // s
  double substep = 60.0;            // s
  double gravity = kStandardGravity;

  [[nodiscard]] std::size_t num_branches() const { return branches.size(); }
  [[nodiscard]] std::size_t num_weirs() const { return weirs.size(); }
  [[nodiscard]] std::size_t num_gates() const { return stations.size(); }
  [[nodiscard]] std::size_t num_pumps() const;
  [[nodiscard]] std::size_t num_inputs() const {
    return num_weirs() + num_gates() + num_pumps();
  }
  [[nodiscard]] std::size_t num_disturbances() const {
    return stations.size() + branches.size();
  }

  [[nodiscard]] std::size_t weir_input(std::size_t w) const { return w; }
  [[nodiscard]] std::size_t gate_input(std::size_t s) const {
    return num_weirs() + s;
  }
  [[nodiscard]] std::size_t pump_input(std::size_t flat_pump) const {
    return num_weirs() + num_gates() + flat_pump;
  }

  /// Flattened pump list in input order.
  [[nodiscard]] std::vector<PumpRef> pump_refs() const;
  [[nodiscard]] const Pump& pump(const PumpRef& r) const {
    return stations[r.station].pumps[r.index];
  }

  [[nodiscard]] Vector level_centers() const;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

/// Known disturbances for one sampling period.
struct Disturbance {
  Vector river_levels;  // m, one per station
  Vector inflows;       // m^3/s, one per branch

  /// Stacked as [river levels | inflows].
  [[nodiscard]] Vector stacked() const;
  static Disturbance unstack(const Vector& d, std::size_t num_stations);
};

}  // namespace ezdeepc::hydro

#endif  // EZDEEPC_HYDRO_TYPES_HPP
