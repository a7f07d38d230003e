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

#include "ezdeepc/zone/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "ezdeepc/hydro/simulator.hpp"
#include "ezdeepc/hydro/structures.hpp"

namespace ezdeepc::zone {

bool TimeVaryingInputSet::is_pump_input(std::size_t i) const {
  return std::find(pump_inputs.begin(), pump_inputs.end(), i) != pump_inputs.end();
}

bool TimeVaryingInputSet::contains(const Vector& u, double tol) const {
  if (u.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (is_pump_input(static_cast<std::size_t>(i))) continue;
    if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
  }
  for (std::size_t k = 0; k < pump_inputs.size(); ++k) {
    const double v = u[static_cast<Eigen::Index>(pump_inputs[k])];
    const auto i = static_cast<Eigen::Index>(pump_inputs[k]);
    if (v == 0.0) continue;
    if (!pump_can_run[k] || v < lower[i] || v > upper[i]) return false;
  }
  return true;
}

Vector TimeVaryingInputSet::project(const Vector& u) const {
  Vector out = u.cwiseMax(lower).cwiseMin(upper);
  for (std::size_t k = 0; k < pump_inputs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pump_inputs[k]);
    out[i] = (!pump_can_run[k] || u[i] <= 0.0)
                 ? 0.0
                 : std::clamp(u[i], lower[i], upper[i]);
  }
  return out;
}

TimeVaryingInputSet build_input_bounds(const Vector& levels,
                                       const hydro::Disturbance& disturbance,
                                       const hydro::WaterSystemConfig& plant) {
  const auto n = static_cast<Eigen::Index>(plant.num_inputs());
  TimeVaryingInputSet set;
  set.lower = Vector::Zero(n);
  set.upper = Vector::Zero(n);
  for (std::size_t w = 0; w < plant.num_weirs(); ++w) {
    const Interval iv = hydro::weir_height_interval(levels, w, plant);
    set.lower[static_cast<Eigen::Index>(plant.weir_input(w))] = iv.lo;
    set.upper[static_cast<Eigen::Index>(plant.weir_input(w))] = iv.hi;
  }
  std::size_t flat = 0;
  for (std::size_t s = 0; s < plant.stations.size(); ++s) {
    const auto& st = plant.stations[s];
    const double h = levels[st.branch];
    const double river = disturbance.river_levels[static_cast<Eigen::Index>(s)];
    const auto gi = static_cast<Eigen::Index>(plant.gate_input(s));
    set.upper[gi] = hydro::gate_may_open(h, river, st.gate.direction) ? 1.0 : 0.0;
    for (const auto& pump : st.pumps) {
      const std::size_t idx = plant.pump_input(flat++);
      const double hs = hydro::static_head(h, river, pump.direction);
      const auto on = hydro::feasible_speed_interval(hs, pump, st.pipe);
      set.pump_inputs.push_back(idx);
      set.pump_static_head.push_back(hs);
      set.pump_can_run.push_back(on.has_value());
      if (on) {
        set.lower[static_cast<Eigen::Index>(idx)] = on->lo;
        set.upper[static_cast<Eigen::Index>(idx)] = on->hi;
      }
    }
  }
  return set;
}

double true_pump_power(const hydro::Pump& pump, const hydro::PipeSection& pipe,
                       double static_head, double speed_rpm) {
  if (speed_rpm <= 0.0) return 0.0;
  const double nbar = pump.normalized(speed_rpm);
  const auto q = hydro::solve_pump_operating_point(nbar, static_head, pump, pipe);
  return q ? hydro::pump_power(*q, nbar, pump) : 0.0;
}

double PumpSurrogate::power_kw(double speed_rpm) const {
  const double x = speed_rpm / nominal_speed;
  return coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]));
}

double PumpSurrogate::d_power(double speed_rpm) const {
  const double x = speed_rpm / nominal_speed;
  return (coeffs[1] + x * (2.0 * coeffs[2] + 3.0 * x * coeffs[3])) / nominal_speed;
}

double PumpSurrogate::d2_power(double speed_rpm) const {
  const double x = speed_rpm / nominal_speed;
  return (2.0 * coeffs[2] + 6.0 * x * coeffs[3]) / (nominal_speed * nominal_speed);
}

PumpSurrogate fit_pump_surrogate(const hydro::Pump& pump,
                                 const hydro::PipeSection& pipe,
                                 double static_head, const Interval& on_interval,
                                 int samples) {
  PumpSurrogate s;
  s.available = true;
  s.speed = on_interval;
  s.nominal_speed = pump.nominal_speed;
  Matrix a(samples, 4);
  Vector b(samples);
  for (int i = 0; i < samples; ++i) {
    const double n = samples == 1 ? on_interval.lo
                                  : on_interval.lo + on_interval.width() * i / (samples - 1);
    const double x = n / pump.nominal_speed;
    a.row(i) << 1.0, x, x * x, x * x * x;
    b[i] = true_pump_power(pump, pipe, static_head, n);
  }
  // A degenerate interval cannot identify a cubic; fall back to a constant.
  Vector c = Vector::Zero(4);
  if (on_interval.width() > 1e-9) {
    c = a.colPivHouseholderQr().solve(b);
  } else {
    c[0] = b.mean();
  }
  for (int i = 0; i < 4; ++i) s.coeffs[static_cast<std::size_t>(i)] = c[i];
  const Vector fit = a * c;
  for (int i = 0; i < samples; ++i) {
    s.max_rel_error = std::max(s.max_rel_error,
                               std::abs(fit[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return s;
}

std::vector<PumpSurrogate> fit_pump_surrogates(
    const TimeVaryingInputSet& bounds, const hydro::WaterSystemConfig& plant,
    int samples) {
  std::vector<PumpSurrogate> out;
  const auto refs = plant.pump_refs();
  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (!bounds.pump_can_run[k]) {
      out.emplace_back();
      continue;
    }
    const auto i = static_cast<Eigen::Index>(bounds.pump_inputs[k]);
    out.push_back(fit_pump_surrogate(plant.pump(refs[k]),
                                     plant.stations[refs[k].station].pipe,
                                     bounds.pump_static_head[k],
                                     {bounds.lower[i], bounds.upper[i]}, samples));
  }
  return out;
}

}  // namespace ezdeepc::zone
