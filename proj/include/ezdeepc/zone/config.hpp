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

#ifndef EZDEEPC_ZONE_CONFIG_HPP
#define EZDEEPC_ZONE_CONFIG_HPP

#include <string_view>

#include "json.hpp"

#include "ezdeepc/hydro/types.hpp"
#include "ezdeepc/zone/qp.hpp"

namespace ezdeepc::zone {

/// Desired zone y_c +/- half_width, target zone y_c +/- alpha * half_width and
/// output set y_c +/- output_band, per branch.
struct ZoneSpec {
  Vector center;
  double half_width = 0.1;
  double alpha = 1.0;
  double output_band = 0.3;

  [[nodiscard]] Vector desired_lower() const;
  [[nodiscard]] Vector desired_upper() const;
  [[nodiscard]] Vector target_lower() const;
  [[nodiscard]] Vector target_upper() const;
  [[nodiscard]] Vector output_lower() const;
  [[nodiscard]] Vector output_upper() const;

  [[nodiscard]] ZoneSpec with_alpha(double a) const;
  void validate() const;
};

/// 1-norm distance of `y` to the box [lo, hi]; zero inside.
double box_distance_l1(const Vector& y, const Vector& lo, const Vector& hi);

enum class BinaryMode { kConstantOverHorizon, kPerStep };
std::string_view to_string(BinaryMode m);
BinaryMode binary_mode_from_string(std::string_view s);

struct ControllerConfig {
  int t_ini = 15;
  int n_c = 5;
  /// Diagonal of the per-step output weight Q; a single entry is broadcast.
  Vector q_weight = Vector::Constant(1, 5.0);
  /// Input weight of the textbook set-point formulation; unused by the zone
  /// controller.
  double r_weight = 0.0;
  double beta2_zone = 0.5;
  double beta3_zone = 100.0;
  double beta2_energy = 5e3;
  double beta3_energy = 1e6;
  BinaryMode binary_mode = BinaryMode::kConstantOverHorizon;
  int max_binary_combos = 64;
  int surrogate_samples = 20;
  int sqp_max_iterations = 50;
  double sqp_step_tol = 1e-6;
  QpOptions qp;

  /// Q diagonal expanded to `p` outputs.
  [[nodiscard]] Vector q_diagonal(Eigen::Index p) const;
  void validate() const;
};

/// Proportional-integral gains of the bootstrap controller.
struct PidGains {
  double kp = 0.5;
  double ki = 0.05;
};

/// Settings of the rule-based passive controller.
struct PassiveSettings {
  double pump_speed = 120.0;
  double gate_ratio = 0.5;
};

/// Parse the "zone" section; the center defaults to the plant branch centers.
ZoneSpec parse_zone(const nlohmann::json& j, const hydro::WaterSystemConfig& plant);
ControllerConfig parse_controller(const nlohmann::json& j);
PidGains parse_pid(const nlohmann::json& j);
PassiveSettings parse_passive(const nlohmann::json& j);

nlohmann::json to_json(const ZoneSpec& z);
nlohmann::json to_json(const ControllerConfig& c);

}  // namespace ezdeepc::zone

#endif  // EZDEEPC_ZONE_CONFIG_HPP
