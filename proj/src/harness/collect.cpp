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

#include "ezdeepc/harness/collect.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ezdeepc/hydro/simulator.hpp"
#include "ezdeepc/hydro/structures.hpp"
#include "ezdeepc/zone/bounds.hpp"

namespace ezdeepc::harness {

CollectionSettings parse_collection(const nlohmann::json& j) {
  CollectionSettings s;
  try {
    s.hold_steps = j.value("hold_steps", s.hold_steps);
    s.trigger = j.value("trigger", s.trigger);
    s.release = j.value("release", s.release);
    s.failure_margin = j.value("failure_margin", s.failure_margin);
    s.weir_step = j.value("weir_step", s.weir_step);
    s.pump_on_probability = j.value("pump_on_probability", s.pump_on_probability);
    s.weir_depth = j.value("weir_depth", s.weir_depth);
    s.weir_lift = j.value("weir_lift", s.weir_lift);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("collection config: ") + e.what());
  }
  if (s.hold_steps < 1 || s.release < 0.0 || s.release > s.trigger ||
      s.weir_step <= 0.0 || s.weir_depth < 0.0 || s.weir_lift < 0.0 || s.pump_on_probability < 0.0 || s.pump_on_probability > 1.0) {
    throw ConfigError("collection settings are inconsistent");
  }
  return s;
}

namespace {

Vector random_input(const hydro::WaterSystemConfig& plant, const CollectionSettings& settings,
                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector u(static_cast<Eigen::Index>(plant.num_inputs()));
  for (std::size_t w = 0; w < plant.num_weirs(); ++w) {
    const auto& weir = plant.weirs[w];
    const double c = plant.branches[static_cast<std::size_t>(weir.upstream)].level_center;
    const double h = c - settings.weir_depth + unif(rng) * (settings.weir_depth + settings.weir_lift);
    u[static_cast<Eigen::Index>(w)] = weir.height_bounds.clamp(h);
  }
  for (std::size_t s = 0; s < plant.num_gates(); ++s) {
    u[static_cast<Eigen::Index>(plant.gate_input(s))] = unif(rng);
  }
  const auto refs = plant.pump_refs();
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const auto& pump = plant.pump(refs[k]);
    const bool on = unif(rng) < settings.pump_on_probability;
    const double speed = pump.speed_bounds.lo + unif(rng) * pump.speed_bounds.width();
    u[static_cast<Eigen::Index>(plant.pump_input(k))] = on ? speed : 0.0;
  }
  return u;
}

}  // namespace

CollectionResult collect_excitation_data(const hydro::WaterSystemConfig& plant,
                                         const zone::ZoneSpec& zone,
                                         const DisturbanceScenario& scenario,
                                         int length,
                                         const CollectionSettings& settings) {
  if (length < 1) throw ConfigError("collection length must be >= 1");
  const auto dist = generate_disturbances(scenario, plant, length);
  const auto nb = plant.num_branches();
  const auto nu = static_cast<Eigen::Index>(plant.num_inputs());
  const auto refs = plant.pump_refs();

  CollectionResult out;
  out.initial_levels = zone.center;
  out.data.inputs.resize(length, nu);
  out.data.outputs.resize(length, static_cast<Eigen::Index>(nb));
  out.data.disturbances.resize(length, static_cast<Eigen::Index>(plant.num_disturbances()));
  out.intervened.assign(static_cast<std::size_t>(length), false);
  out.redrawn.assign(static_cast<std::size_t>(length), false);

  std::mt19937_64 rng(settings.seed);
  Vector levels = zone.center;
  Vector held = Vector::Zero(nu);
  // +1 draining a high branch, -1 filling a low one, 0 inactive.
  std::vector<int> state(nb, 0);
  std::vector<int> since(nb, 0);
  Vector weir_offset = Vector::Zero(static_cast<Eigen::Index>(plant.num_weirs()));

  for (int t = 0; t < length; ++t) {
    if (t % settings.hold_steps == 0) {
      held = random_input(plant, settings, rng);
      out.redrawn[static_cast<std::size_t>(t)] = true;
    }
    const auto& d = dist[static_cast<std::size_t>(t)];

    for (std::size_t b = 0; b < nb; ++b) {
      const double dev = levels[static_cast<Eigen::Index>(b)] - zone.center[static_cast<Eigen::Index>(b)];
      const int next = std::abs(dev) > settings.trigger
                           ? (dev > 0.0 ? 1 : -1)
                           : (std::abs(dev) < settings.release ? 0 : state[b]);
      if (next != state[b]) {
        if (state[b] != 0) {
          out.interventions.push_back({static_cast<int>(b), since[b], t, state[b] > 0});
        }
        state[b] = next;
        since[b] = t;
      }
    }

    Vector u = held;
    bool touched = false;
    for (std::size_t w = 0; w < plant.num_weirs(); ++w) {
      const auto& weir = plant.weirs[w];
      // Protect the upstream branch first: raise the crest when it is low,
      // lower it when it is high. Serve the downstream branch only while the
      // upstream branch can spare (or hold) the water.
      const int up = state[static_cast<std::size_t>(weir.upstream)];
      const int dn = state[static_cast<std::size_t>(weir.downstream)];
      const auto wi = static_cast<Eigen::Index>(w);
      const auto ui = static_cast<Eigen::Index>(weir.upstream);
      const double up_dev = levels[ui] - zone.center[ui];
      double dir = 0.0;
      if (up != 0) {
        dir = -static_cast<double>(up);
      } else if (dn < 0 && up_dev > -settings.release) {
        dir = -1.0;
      } else if (dn > 0 && up_dev < settings.release) {
        dir = 1.0;
      }
      if (dir == 0.0) {
        weir_offset[wi] = 0.0;
        continue;
      }
      if (dir * weir_offset[wi] < 0.0) weir_offset[wi] = 0.0;
      weir_offset[wi] += dir * settings.weir_step;
      weir_offset[wi] = std::clamp(weir_offset[wi], weir.height_bounds.lo - held[wi],
                                   weir.height_bounds.hi - held[wi]);
      u[wi] = held[wi] + weir_offset[wi];
      touched = true;
    }
    std::size_t flat = 0;
    for (std::size_t s = 0; s < plant.stations.size(); ++s) {
      const auto& st = plant.stations[s];
      const int mode = state[static_cast<std::size_t>(st.branch)];
      if (mode == 0) {
        flat += st.pumps.size();
        continue;
      }
      touched = true;
      const auto want = mode > 0 ? hydro::FlowDirection::kOutflow : hydro::FlowDirection::kInflow;
      u[static_cast<Eigen::Index>(plant.gate_input(s))] = st.gate.direction == want ? 1.0 : 0.0;
      for (const auto& pump : st.pumps) {
        u[static_cast<Eigen::Index>(plant.pump_input(flat++))] =
            pump.direction == want ? pump.speed_bounds.hi : 0.0;
      }
    }
    if (touched) out.intervened[static_cast<std::size_t>(t)] = true;

    u = zone::build_input_bounds(levels, d, plant).project(u);
    const auto r = hydro::step(levels, u, d, plant);
    levels = r.next_levels;
    out.data.inputs.row(t) = r.applied_input.transpose();
    out.data.outputs.row(t) = levels.transpose();
    out.data.disturbances.row(t) = d.stacked().transpose();

    for (std::size_t b = 0; b < nb; ++b) {
      const auto bi = static_cast<Eigen::Index>(b);
      if (std::abs(levels[bi] - zone.center[bi]) > zone.output_band + settings.failure_margin) {
        throw CollectionFailed("branch " + std::to_string(b) + " left the output set by more than " +
                                   std::to_string(settings.failure_margin) + " m at step " +
                                   std::to_string(t),
                               t, static_cast<int>(b));
      }
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (state[b] != 0) {
      out.interventions.push_back({static_cast<int>(b), since[b], length, state[b] > 0});
    }
  }
  out.data.check();
  return out;
}

}  // namespace ezdeepc::harness
