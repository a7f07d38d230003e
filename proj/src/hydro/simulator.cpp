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

#include "ezdeepc/hydro/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "ezdeepc/hydro/structures.hpp"

namespace ezdeepc::hydro {

namespace {

StepFlows zero_flows(const WaterSystemConfig& config) {
  StepFlows f;
  f.weir_volume = Vector::Zero(config.num_weirs());
  f.gate_volume = Vector::Zero(config.num_gates());
  f.pump_volume = Vector::Zero(config.num_pumps());
  f.inflow_volume = Vector::Zero(config.num_branches());
  f.branch_net_volume = Vector::Zero(config.num_branches());
  f.pump_mean_power_kw = Vector::Zero(config.num_pumps());
  return f;
}

void accumulate(StepFlows& acc, const StepFlows& rate, double w) {
  acc.weir_volume += w * rate.weir_volume;
  acc.gate_volume += w * rate.gate_volume;
  acc.pump_volume += w * rate.pump_volume;
  acc.inflow_volume += w * rate.inflow_volume;
  acc.branch_net_volume += w * rate.branch_net_volume;
  acc.pump_mean_power_kw += w * rate.pump_mean_power_kw;
}

}  // namespace

Interval weir_height_interval(const Vector& levels, std::size_t w,
                              const WaterSystemConfig& config) {
  const Weir& weir = config.weirs[w];
  const double a = levels[weir.upstream];
  const double b = levels[weir.downstream];
  const Interval ordering{std::min(a, b), std::max(a, b)};
  const Interval allowed{std::max(ordering.lo, weir.height_bounds.lo),
                         std::min(ordering.hi, weir.height_bounds.hi)};
  if (allowed.lo <= allowed.hi) return allowed;
  // Physical range and ordering do not overlap; pin to the physical bound
  // closest to the ordering interval.
  const double v = ordering.hi < weir.height_bounds.lo ? weir.height_bounds.lo
                                                       : weir.height_bounds.hi;
  return {v, v};
}

Vector clamp_input(const Vector& levels, const Vector& input,
                   const WaterSystemConfig& config,
                   std::vector<std::size_t>* clamped) {
  if (static_cast<std::size_t>(input.size()) != config.num_inputs()) {
    throw DimensionMismatch("input has " + std::to_string(input.size()) +
                            " entries, plant expects " +
                            std::to_string(config.num_inputs()));
  }
  Vector u = input;
  auto set = [&](std::size_t i, double v) {
    if (v != u[i]) {
      u[i] = v;
      if (clamped) clamped->push_back(i);
    }
  };

  for (std::size_t w = 0; w < config.num_weirs(); ++w) {
    const std::size_t i = config.weir_input(w);
    set(i, weir_height_interval(levels, w, config).clamp(u[i]));
  }
  for (std::size_t s = 0; s < config.num_gates(); ++s) {
    const std::size_t i = config.gate_input(s);
    set(i, std::clamp(u[i], 0.0, 1.0));
  }
  const auto refs = config.pump_refs();
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const Pump& pump = config.pump(refs[k]);
    const std::size_t i = config.pump_input(k);
    set(i, u[i] <= 0.0 ? 0.0 : pump.speed_bounds.clamp(u[i]));
  }
  return u;
}

Vector branch_net_flow(const Vector& levels, const Vector& input,
                       const Disturbance& disturbance,
                       const WaterSystemConfig& config,
                       StepFlows* device_rates) {
  StepFlows r = zero_flows(config);
  const double g = config.gravity;

  for (std::size_t w = 0; w < config.num_weirs(); ++w) {
    const Weir& weir = config.weirs[w];
    const double a = levels[weir.upstream];
    const double b = levels[weir.downstream];
    const double q = weir_discharge(std::max(a, b), input[config.weir_input(w)],
                                    weir, g);
    const double signed_q = a >= b ? q : -q;
    r.weir_volume[w] = signed_q;
    r.branch_net_volume[weir.upstream] -= signed_q;
    r.branch_net_volume[weir.downstream] += signed_q;
  }

  std::size_t flat = 0;
  for (std::size_t s = 0; s < config.stations.size(); ++s) {
    const Station& st = config.stations[s];
    const double h = levels[st.branch];
    const double h_river = disturbance.river_levels[s];

    const double qg =
        gate_discharge(h, h_river, input[config.gate_input(s)], st.gate, g);
    const double signed_qg =
        st.gate.direction == FlowDirection::kInflow ? qg : -qg;
    r.gate_volume[s] = signed_qg;
    r.branch_net_volume[st.branch] += signed_qg;

    for (const Pump& pump : st.pumps) {
      const double nbar = pump.normalized(input[config.pump_input(flat)]);
      double q = 0.0;
      if (nbar > 0.0) {
        const double hs = static_head(h, h_river, pump.direction);
        q = solve_pump_operating_point(nbar, hs, pump, st.pipe).value_or(0.0);
      }
      const double signed_qp =
          pump.direction == FlowDirection::kInflow ? q : -q;
      r.pump_volume[flat] = signed_qp;
      r.pump_mean_power_kw[flat] = pump_power(q, nbar, pump);
      r.branch_net_volume[st.branch] += signed_qp;
      ++flat;
    }
  }

  for (std::size_t b = 0; b < config.num_branches(); ++b) {
    r.inflow_volume[b] = disturbance.inflows[b];
    r.branch_net_volume[b] += disturbance.inflows[b];
  }

  Vector net = r.branch_net_volume;
  if (device_rates) *device_rates = std::move(r);
  return net;
}

StepResult step(const Vector& levels, const Vector& input,
                const Disturbance& disturbance,
                const WaterSystemConfig& config) {
  const std::size_t nb = config.num_branches();
  if (static_cast<std::size_t>(levels.size()) != nb) {
    throw DimensionMismatch("level vector does not match branch count");
  }
  if (static_cast<std::size_t>(disturbance.river_levels.size()) !=
          config.stations.size() ||
      static_cast<std::size_t>(disturbance.inflows.size()) != nb) {
    throw DimensionMismatch("disturbance does not match plant dimensions");
  }

  StepResult out;
  out.applied_input = clamp_input(levels, input, config, &out.clamped_inputs);

  Vector area(nb);
  for (std::size_t b = 0; b < nb; ++b) area[b] = config.branches[b].backwater_area;

  const int substeps =
      static_cast<int>(std::lround(config.sampling_period / config.substep));
  const double h = config.sampling_period / substeps;

  StepFlows total = zero_flows(config);
  Vector y = levels;
  StepFlows k1, k2, k3, k4;
  for (int s = 0; s < substeps; ++s) {
    const Vector f1 = branch_net_flow(y, out.applied_input, disturbance, config, &k1);
    const Vector y2 = y + 0.5 * h * f1.cwiseQuotient(area);
    const Vector f2 = branch_net_flow(y2, out.applied_input, disturbance, config, &k2);
    const Vector y3 = y + 0.5 * h * f2.cwiseQuotient(area);
    const Vector f3 = branch_net_flow(y3, out.applied_input, disturbance, config, &k3);
    const Vector y4 = y + h * f3.cwiseQuotient(area);
    const Vector f4 = branch_net_flow(y4, out.applied_input, disturbance, config, &k4);

    StepFlows sub = zero_flows(config);
    accumulate(sub, k1, h / 6.0);
    accumulate(sub, k2, h / 3.0);
    accumulate(sub, k3, h / 3.0);
    accumulate(sub, k4, h / 6.0);
    y += sub.branch_net_volume.cwiseQuotient(area);
    accumulate(total, sub, 1.0);

    if (!y.allFinite()) {
      throw NonFiniteState("non-finite level after sub-step " +
                           std::to_string(s));
    }
  }

  out.next_levels = y;
  // Accumulated power * seconds -> kWh, mean power -> kW.
  out.energy_kwh = total.pump_mean_power_kw.sum() / 3600.0;
  total.pump_mean_power_kw /= config.sampling_period;
  out.flows = std::move(total);
  return out;
}

}  // namespace ezdeepc::hydro
