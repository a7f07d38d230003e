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

#include "ezdeepc/zone/config.hpp"

#include <string>

namespace ezdeepc::zone {

Vector ZoneSpec::desired_lower() const { return center.array() - half_width; }
Vector ZoneSpec::desired_upper() const { return center.array() + half_width; }
Vector ZoneSpec::target_lower() const { return center.array() - alpha * half_width; }
Vector ZoneSpec::target_upper() const { return center.array() + alpha * half_width; }
Vector ZoneSpec::output_lower() const { return center.array() - output_band; }
Vector ZoneSpec::output_upper() const { return center.array() + output_band; }

ZoneSpec ZoneSpec::with_alpha(double a) const {
  ZoneSpec z = *this;
  z.alpha = a;
  z.validate();
  return z;
}

void ZoneSpec::validate() const {
  if (center.size() == 0) throw ConfigError("zone center is empty");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("zone contraction rate must lie in [0, 1], got " +
                      std::to_string(alpha));
  }
  if (!(half_width > 0.0)) throw ConfigError("zone half width must be > 0");
  if (!(output_band >= half_width)) {
    throw ConfigError("output band must contain the desired zone");
  }
}

double box_distance_l1(const Vector& y, const Vector& lo, const Vector& hi) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < lo[i]) d += lo[i] - y[i];
    else if (y[i] > hi[i]) d += y[i] - hi[i];
  }
  return d;
}

std::string_view to_string(BinaryMode m) {
  return m == BinaryMode::kPerStep ? "per_step" : "constant_over_horizon";
}

BinaryMode binary_mode_from_string(std::string_view s) {
  if (s == "constant_over_horizon") return BinaryMode::kConstantOverHorizon;
  if (s == "per_step") return BinaryMode::kPerStep;
  throw ConfigError("unknown binary mode '" + std::string(s) + "'");
}

Vector ControllerConfig::q_diagonal(Eigen::Index p) const {
  if (q_weight.size() == 1) return Vector::Constant(p, q_weight[0]);
  if (q_weight.size() != p) {
    throw DimensionMismatch("Q weight has " + std::to_string(q_weight.size()) +
                            " entries for " + std::to_string(p) + " outputs");
  }
  return q_weight;
}

void ControllerConfig::validate() const {
  if (t_ini < 1 || n_c < 1) throw ConfigError("T_ini and N_c must be >= 1");
  if ((q_weight.array() < 0.0).any() || q_weight.size() == 0) {
    throw ConfigError("Q weight must be non-negative");
  }
  if (beta2_zone < 0.0 || beta3_zone < 0.0 || beta2_energy < 0.0 ||
      beta3_energy < 0.0 || r_weight < 0.0) {
    throw ConfigError("regularization weights must be >= 0");
  }
  if (max_binary_combos < 1) throw ConfigError("max_binary_combos must be >= 1");
  if (surrogate_samples < 4) throw ConfigError("surrogate_samples must be >= 4");
  if (sqp_max_iterations < 1) throw ConfigError("sqp_max_iterations must be >= 1");
}

ZoneSpec parse_zone(const nlohmann::json& j, const hydro::WaterSystemConfig& plant) {
  ZoneSpec z;
  z.center = plant.level_centers();
  try {
    if (j.contains("center")) {
      const auto c = j["center"].get<std::vector<double>>();
      z.center = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    z.half_width = j.value("half_width", z.half_width);
    z.alpha = j.value("alpha", z.alpha);
    z.output_band = j.value("output_band", z.output_band);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("zone config: ") + e.what());
  }
  if (static_cast<std::size_t>(z.center.size()) != plant.num_branches()) {
    throw ConfigError("zone center must have one entry per branch");
  }
  z.validate();
  return z;
}

ControllerConfig parse_controller(const nlohmann::json& j) {
  ControllerConfig c;
  try {
    c.t_ini = j.value("t_ini", c.t_ini);
    c.n_c = j.value("n_c", c.n_c);
    if (j.contains("q_weight")) {
      const auto& q = j["q_weight"];
      if (q.is_number()) {
        c.q_weight = Vector::Constant(1, q.get<double>());
      } else {
        const auto v = q.get<std::vector<double>>();
        c.q_weight = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
    }
    c.r_weight = j.value("r_weight", c.r_weight);
    c.beta2_zone = j.value("beta2_zone", c.beta2_zone);
    c.beta3_zone = j.value("beta3_zone", c.beta3_zone);
    c.beta2_energy = j.value("beta2_energy", c.beta2_energy);
    c.beta3_energy = j.value("beta3_energy", c.beta3_energy);
    if (j.contains("binary_mode")) {
      c.binary_mode = binary_mode_from_string(j["binary_mode"].get<std::string>());
    }
    c.max_binary_combos = j.value("max_binary_combos", c.max_binary_combos);
    c.surrogate_samples = j.value("surrogate_samples", c.surrogate_samples);
    c.sqp_max_iterations = j.value("sqp_max_iterations", c.sqp_max_iterations);
    c.sqp_step_tol = j.value("sqp_step_tol", c.sqp_step_tol);
    c.qp.kkt_tol = j.value("kkt_tol", c.qp.kkt_tol);
    c.qp.max_iterations = j.value("qp_max_iterations", c.qp.max_iterations);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("controller config: ") + e.what());
  }
  c.validate();
  return c;
}

PidGains parse_pid(const nlohmann::json& j) {
  PidGains g;
  g.kp = j.value("kp", g.kp);
  g.ki = j.value("ki", g.ki);
  return g;
}

PassiveSettings parse_passive(const nlohmann::json& j) {
  PassiveSettings s;
  s.pump_speed = j.value("pump_speed", s.pump_speed);
  s.gate_ratio = j.value("gate_ratio", s.gate_ratio);
  return s;
}

nlohmann::json to_json(const ZoneSpec& z) {
  return {{"center", std::vector<double>(z.center.data(), z.center.data() + z.center.size())},
          {"half_width", z.half_width},
          {"alpha", z.alpha},
          {"output_band", z.output_band}};
}

nlohmann::json to_json(const ControllerConfig& c) {
  return {{"t_ini", c.t_ini},
          {"n_c", c.n_c},
          {"q_weight", std::vector<double>(c.q_weight.data(), c.q_weight.data() + c.q_weight.size())},
          {"r_weight", c.r_weight},
          {"beta2_zone", c.beta2_zone},
          {"beta3_zone", c.beta3_zone},
          {"beta2_energy", c.beta2_energy},
          {"beta3_energy", c.beta3_energy},
          {"binary_mode", to_string(c.binary_mode)},
          {"max_binary_combos", c.max_binary_combos},
          {"surrogate_samples", c.surrogate_samples},
          {"sqp_max_iterations", c.sqp_max_iterations},
          {"sqp_step_tol", c.sqp_step_tol},
          {"kkt_tol", c.qp.kkt_tol},
          {"qp_max_iterations", c.qp.max_iterations}};
}

}  // namespace ezdeepc::zone
