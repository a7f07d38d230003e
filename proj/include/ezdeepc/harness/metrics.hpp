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

#ifndef EZDEEPC_HARNESS_METRICS_HPP
#define EZDEEPC_HARNESS_METRICS_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "ezdeepc/zone/config.hpp"

namespace ezdeepc::harness {

class WindowTooShort : public Error {
 public:
  using Error::Error;
};

struct MetricsReport {
  /// Mean 1-norm distance of the level vector to the desired zone (m).
  double mae = 0.0;
  /// Largest per-branch distance to the desired zone (m).
  double max_deviation = 0.0;
  /// Percentage of instants with any branch outside the desired zone.
  double violation_pct = 0.0;
  /// Mean pump energy per sampling period (kWh).
  double avg_energy = 0.0;
  int steps = 0;
  std::vector<double> branch_mae;
  std::vector<double> branch_max_deviation;
  std::vector<double> branch_violation_pct;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Metrics over instants k = t_ini .. t_ini + n - 1. `levels` row k holds y_k
/// and `energy_kwh[k]` the pump energy spent during step k.
MetricsReport compute_metrics(const Matrix& levels, const Vector& energy_kwh,
                              const zone::ZoneSpec& zone, int n, int t_ini);

struct NamedReport {
  std::string name;
  MetricsReport metrics;
  bool ok = true;
  std::string error;
};

/// Plain-text comparison table, one row per report.
std::string format_table(const std::vector<NamedReport>& rows);

}  // namespace ezdeepc::harness

#endif  // EZDEEPC_HARNESS_METRICS_HPP
