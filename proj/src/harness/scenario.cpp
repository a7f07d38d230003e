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

#include "ezdeepc/harness/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ezdeepc::harness {

void DisturbanceScenario::validate(const hydro::WaterSystemConfig& plant) const {
  if (rivers.size() != plant.stations.size()) {
    throw ConfigError("scenario needs one river per station (" +
                      std::to_string(plant.stations.size()) + ")");
  }
  for (const auto& r : rivers) {
    if (r.amplitude < 0.0 || !(r.period_steps > 0.0)) {
      throw ConfigError("tidal amplitude must be >= 0 and period > 0");
    }
  }
  if (inflow.event_rate < 0.0 || inflow.event_rate > 1.0) {
    throw ConfigError("inflow event rate must lie in [0, 1]");
  }
  if (inflow.peak_per_area < 0.0 || inflow.rise_steps < 1 ||
      !(inflow.half_life_steps > 0.0)) {
    throw ConfigError("inflow event shape parameters are invalid");
  }
  if (!inflow.base_per_area_by_branch.empty() &&
      inflow.base_per_area_by_branch.size() != plant.num_branches()) {
    throw ConfigError("base_per_area_by_branch needs one entry per branch");
  }
  if (horizon < 1) throw ConfigError("scenario horizon must be >= 1");
  if (initial_spread < 0.0) throw ConfigError("initial spread must be >= 0");
}

DisturbanceScenario parse_scenario(const nlohmann::json& j) {
  DisturbanceScenario s;
  try {
    s.seed = j.value("seed", s.seed);
    s.horizon = j.value("horizon", s.horizon);
    s.initial_spread = j.value("initial_spread", s.initial_spread);
    for (const auto& r : j.value("rivers", nlohmann::json::array())) {
      TidalComponent t;
      t.mean = r.at("mean").get<double>();
      t.amplitude = r.value("amplitude", 0.0);
      t.period_steps = r.value("period_steps", t.period_steps);
      t.phase = r.value("phase", 0.0);
      s.rivers.push_back(t);
    }
    if (j.contains("inflow")) {
      const auto& f = j["inflow"];
      s.inflow.event_rate = f.value("event_rate", 0.0);
      s.inflow.peak_per_area = f.value("peak_per_area", 0.0);
      s.inflow.rise_steps = f.value("rise_steps", s.inflow.rise_steps);
      s.inflow.half_life_steps = f.value("half_life_steps", s.inflow.half_life_steps);
      s.inflow.base_per_area = f.value("base_per_area", 0.0);
      if (f.contains("base_per_area_by_branch")) {
        s.inflow.base_per_area_by_branch =
            f["base_per_area_by_branch"].get<std::vector<double>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const DisturbanceScenario& s) {
  nlohmann::json rivers = nlohmann::json::array();
  for (const auto& r : s.rivers) {
    rivers.push_back({{"mean", r.mean},
                      {"amplitude", r.amplitude},
                      {"period_steps", r.period_steps},
                      {"phase", r.phase}});
  }
  nlohmann::json inflow = {{"event_rate", s.inflow.event_rate},
                           {"peak_per_area", s.inflow.peak_per_area},
                           {"rise_steps", s.inflow.rise_steps},
                           {"half_life_steps", s.inflow.half_life_steps},
                           {"base_per_area", s.inflow.base_per_area}};
  if (!s.inflow.base_per_area_by_branch.empty()) {
    inflow["base_per_area_by_branch"] = s.inflow.base_per_area_by_branch;
  }
  return {{"seed", s.seed},
          {"horizon", s.horizon},
          {"initial_spread", s.initial_spread},
          {"rivers", rivers},
          {"inflow", inflow}};
}

std::vector<hydro::Disturbance> generate_disturbances(
    const DisturbanceScenario& scenario, const hydro::WaterSystemConfig& plant,
    int steps) {
  scenario.validate(plant);
  const int n = steps < 0 ? scenario.horizon : steps;
  const auto ns = static_cast<Eigen::Index>(plant.stations.size());
  const auto nb = static_cast<Eigen::Index>(plant.num_branches());
  const auto& f = scenario.inflow;

  Matrix inflow = Matrix::Zero(n, nb);
  std::mt19937_64 rng(scenario.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Events are drawn branch-major so each branch has its own stream position.
  for (Eigen::Index b = 0; b < nb; ++b) {
    const double area = plant.branches[static_cast<std::size_t>(b)].backwater_area;
    const double base = f.base_per_area_by_branch.empty()
                            ? f.base_per_area
                            : f.base_per_area_by_branch[static_cast<std::size_t>(b)];
    inflow.col(b).array() += base * area;
    const double peak = f.peak_per_area * area;
    for (int start = 0; start < n; ++start) {
      if (!(unif(rng) < f.event_rate)) continue;
      for (int t = start; t < n; ++t) {
        const int tau = t - start;
        double v;
        if (tau < f.rise_steps) {
          v = peak * (tau + 1) / f.rise_steps;
        } else {
          v = peak * std::pow(0.5, (tau - f.rise_steps + 1) / f.half_life_steps);
          if (v < 1e-4 * peak) break;
        }
        inflow(t, b) += v;
      }
    }
  }

  std::vector<hydro::Disturbance> out(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    auto& d = out[static_cast<std::size_t>(t)];
    d.river_levels.resize(ns);
    for (Eigen::Index s = 0; s < ns; ++s) {
      const auto& r = scenario.rivers[static_cast<std::size_t>(s)];
      d.river_levels[s] =
          r.mean + r.amplitude * std::sin(2.0 * std::numbers::pi * t / r.period_steps + r.phase);
    }
    d.inflows = inflow.row(t).transpose();
  }
  return out;
}

Vector sample_initial_levels(const DisturbanceScenario& scenario,
                             const Vector& center, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-scenario.initial_spread,
                                              scenario.initial_spread);
  Vector y = center;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += unif(rng);
  return y;
}

}  // namespace ezdeepc::harness
