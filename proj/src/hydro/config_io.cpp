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

#include "ezdeepc/hydro/config_io.hpp"

#include <fstream>

namespace ezdeepc {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file '" + path + "': " + e.what());
  }
}

Interval parse_interval(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("expected a [min, max] pair, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace ezdeepc

namespace ezdeepc::hydro {

namespace {

Interval interval_from(const nlohmann::json& j) { return parse_interval(j); }

nlohmann::json interval_to(const Interval& i) { return {i.lo, i.hi}; }

Pump pump_from(const nlohmann::json& j, Pump p) {
  if (j.is_string()) {
    p.direction = flow_direction_from_string(j.get<std::string>());
    return p;
  }
  if (j.contains("direction")) {
    p.direction = flow_direction_from_string(j["direction"].get<std::string>());
  }
  p.nominal_speed = j.value("nominal_speed", p.nominal_speed);
  if (j.contains("speed_bounds")) p.speed_bounds = interval_from(j["speed_bounds"]);
  if (j.contains("hq_curve")) {
    p.nominal_hq_curve = j["hq_curve"].get<std::vector<double>>();
  }
  if (j.contains("power_coeffs")) {
    const auto a = j["power_coeffs"].get<std::vector<double>>();
    if (a.size() != 4) throw ConfigError("power_coeffs needs 4 entries");
    std::copy(a.begin(), a.end(), p.power_coeffs.begin());
  }
  p.region.q_min_on = j.value("q_min_on", p.region.q_min_on);
  p.region.p_max_kw = j.value("p_max_kw", p.region.p_max_kw);
  p.region.p_min_kw = j.value("p_min_kw", p.region.p_min_kw);
  if (j.contains("head_range")) p.region.head_range = interval_from(j["head_range"]);
  return p;
}

PipeSection pipe_from(const nlohmann::json& j, PipeSection p) {
  p.darcy_friction = j.value("darcy_friction", p.darcy_friction);
  p.length = j.value("length", p.length);
  p.inner_diameter = j.value("inner_diameter", p.inner_diameter);
  p.minor_loss_sum = j.value("minor_loss_sum", p.minor_loss_sum);
  return p;
}

}  // namespace

WaterSystemConfig parse_water_system(const nlohmann::json& plant) {
  WaterSystemConfig c;
  try {
    c.gravity = plant.value("gravity", kStandardGravity);
    c.sampling_period = plant.value("sampling_period_s", 1800.0);
    c.substep = plant.value("substep_s", 60.0);

    int id = 0;
    for (const auto& b : plant.at("branches")) {
      c.branches.push_back({id++, b.at("area").get<double>(),
                            b.at("center").get<double>()});
    }
    id = 0;
    for (const auto& w : plant.value("weirs", nlohmann::json::array())) {
      Weir weir;
      weir.id = id++;
      weir.upstream = w.at("upstream").get<int>();
      weir.downstream = w.at("downstream").get<int>();
      weir.discharge_coeff = w.value("discharge_coeff", 0.61);
      weir.crest_width = w.at("crest_width").get<double>();
      weir.height_bounds = interval_from(w.at("height_bounds"));
      c.weirs.push_back(weir);
    }

    Pump pump_defaults;
    pump_defaults.nominal_speed = 250.0;
    if (plant.contains("pump")) pump_defaults = pump_from(plant["pump"], pump_defaults);
    PipeSection pipe_defaults;
    pipe_defaults.gravity = c.gravity;
    if (plant.contains("pipe")) pipe_defaults = pipe_from(plant["pipe"], pipe_defaults);

    int pump_id = 0;
    const auto stations = plant.value("stations", nlohmann::json::array());
    for (std::size_t s = 0; s < stations.size(); ++s) {
      const auto& sj = stations[s];
      Station st;
      st.branch = sj.at("branch").get<int>();
      const auto& gj = sj.at("gate");
      st.gate.id = static_cast<int>(s);
      st.gate.branch = st.branch;
      st.gate.river = static_cast<int>(s);
      st.gate.discharge_coeff = gj.value("discharge_coeff", 0.61);
      st.gate.width = gj.at("width").get<double>();
      st.gate.max_opening = gj.value("max_opening", 0.6);
      st.gate.direction = flow_direction_from_string(gj.at("direction").get<std::string>());
      st.pipe = sj.contains("pipe") ? pipe_from(sj["pipe"], pipe_defaults) : pipe_defaults;
      for (const auto& pj : sj.value("pumps", nlohmann::json::array())) {
        Pump p = pump_from(pj, pump_defaults);
        p.id = pump_id++;
        p.branch = st.branch;
        p.river = static_cast<int>(s);
        st.pumps.push_back(p);
      }
      c.stations.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("plant config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const WaterSystemConfig& c) {
  nlohmann::json j;
  j["gravity"] = c.gravity;
  j["sampling_period_s"] = c.sampling_period;
  j["substep_s"] = c.substep;
  for (const auto& b : c.branches) {
    j["branches"].push_back({{"area", b.backwater_area}, {"center", b.level_center}});
  }
  j["weirs"] = nlohmann::json::array();
  for (const auto& w : c.weirs) {
    j["weirs"].push_back({{"upstream", w.upstream},
                          {"downstream", w.downstream},
                          {"discharge_coeff", w.discharge_coeff},
                          {"crest_width", w.crest_width},
                          {"height_bounds", interval_to(w.height_bounds)}});
  }
  j["stations"] = nlohmann::json::array();
  for (const auto& s : c.stations) {
    nlohmann::json sj;
    sj["branch"] = s.branch;
    sj["gate"] = {{"discharge_coeff", s.gate.discharge_coeff},
                  {"width", s.gate.width},
                  {"max_opening", s.gate.max_opening},
                  {"direction", to_string(s.gate.direction)}};
    sj["pipe"] = {{"darcy_friction", s.pipe.darcy_friction},
                  {"length", s.pipe.length},
                  {"inner_diameter", s.pipe.inner_diameter},
                  {"minor_loss_sum", s.pipe.minor_loss_sum}};
    sj["pumps"] = nlohmann::json::array();
    for (const auto& p : s.pumps) {
      sj["pumps"].push_back(
          {{"direction", to_string(p.direction)},
           {"nominal_speed", p.nominal_speed},
           {"speed_bounds", interval_to(p.speed_bounds)},
           {"hq_curve", p.nominal_hq_curve},
           {"power_coeffs", p.power_coeffs},
           {"q_min_on", p.region.q_min_on},
           {"p_max_kw", p.region.p_max_kw},
           {"p_min_kw", p.region.p_min_kw},
           {"head_range", interval_to(p.region.head_range)}});
    }
    j["stations"].push_back(sj);
  }
  return j;
}

}  // namespace ezdeepc::hydro
