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

#ifndef EZDEEPC_ZONE_BOUNDS_HPP
#define EZDEEPC_ZONE_BOUNDS_HPP

#include <array>
#include <vector>

#include "ezdeepc/hydro/types.hpp"

namespace ezdeepc::zone {

/// Input set held constant over one control horizon. Continuous inputs lie
/// in [lower, upper]; pump k (flattened station order) is either exactly 0 or,
/// when `pump_can_run[k]`, inside its on-interval [lower, upper].
struct TimeVaryingInputSet {
  Vector lower;
  Vector upper;
  std::vector<bool> pump_can_run;
  std::vector<std::size_t> pump_inputs;
  /// Static head seen by each pump when the set was built (m).
  std::vector<double> pump_static_head;

  [[nodiscard]] std::size_t num_pumps() const { return pump_inputs.size(); }
  [[nodiscard]] bool is_pump_input(std::size_t i) const;

  /// True when `u` lies in the set; pump entries must be exactly 0 or inside
  /// the on-interval, continuous entries may exceed the bounds by `tol`.
  [[nodiscard]] bool contains(const Vector& u, double tol = 0.0) const;

  /// Project `u` onto the set: continuous entries are clipped, pump entries
  /// <= 0 (or not allowed to run) become 0, others are clipped into the
  /// on-interval.
  [[nodiscard]] Vector project(const Vector& u) const;
};

TimeVaryingInputSet build_input_bounds(const Vector& levels,
                                       const hydro::Disturbance& disturbance,
                                       const hydro::WaterSystemConfig& plant);

/// Least-squares cubic P(nbar) ~ c0 + c1 nbar + c2 nbar^2 + c3 nbar^3 of the
/// true pump power on its on-interval at a fixed static head.
struct PumpSurrogate {
  bool available = false;
  Interval speed{0.0, 0.0};  // rpm
  double nominal_speed = 1.0;
  std::array<double, 4> coeffs{};
  /// Max relative error of the fit at the sample points.
  double max_rel_error = 0.0;

  [[nodiscard]] double power_kw(double speed_rpm) const;
  /// Derivatives with respect to speed in rpm.
  [[nodiscard]] double d_power(double speed_rpm) const;
  [[nodiscard]] double d2_power(double speed_rpm) const;
};

PumpSurrogate fit_pump_surrogate(const hydro::Pump& pump,
                                 const hydro::PipeSection& pipe,
                                 double static_head, const Interval& on_interval,
                                 int samples);

/// One surrogate per pump for the set `bounds`.
std::vector<PumpSurrogate> fit_pump_surrogates(
    const TimeVaryingInputSet& bounds, const hydro::WaterSystemConfig& plant,
    int samples);

/// True pump power (kW) at `speed_rpm` and static head, 0 when off or when
/// the operating point does not exist.
double true_pump_power(const hydro::Pump& pump, const hydro::PipeSection& pipe,
                       double static_head, double speed_rpm);

}  // namespace ezdeepc::zone

#endif  // EZDEEPC_ZONE_BOUNDS_HPP
