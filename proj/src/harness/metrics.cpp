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

#include "ezdeepc/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ezdeepc::harness {

namespace {

// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + carry; }
};

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  return {{"mae_m", mae},
          {"max_deviation_m", max_deviation},
          {"violation_pct", violation_pct},
          {"avg_energy_kwh", avg_energy},
          {"steps", steps},
          {"branch_mae_m", branch_mae},
          {"branch_max_deviation_m", branch_max_deviation},
          {"branch_violation_pct", branch_violation_pct}};
}

MetricsReport compute_metrics(const Matrix& levels, const Vector& energy_kwh,
                              const zone::ZoneSpec& zone, int n, int t_ini) {
  if (n < 1 || t_ini < 0 || levels.rows() < t_ini + n || energy_kwh.size() < t_ini + n) {
    throw WindowTooShort("metrics window [" + std::to_string(t_ini) + ", " +
                         std::to_string(t_ini + n) + ") exceeds the trajectory (" +
                         std::to_string(levels.rows()) + " levels, " +
                         std::to_string(energy_kwh.size()) + " energy samples)");
  }
  if (levels.cols() != zone.center.size()) {
    throw DimensionMismatch("levels have " + std::to_string(levels.cols()) +
                            " columns, zone has " + std::to_string(zone.center.size()));
  }
  const Vector lo = zone.desired_lower();
  const Vector hi = zone.desired_upper();
  const auto p = static_cast<std::size_t>(levels.cols());
  MetricsReport r;
  r.steps = n;
  r.branch_mae.assign(p, 0.0);
  r.branch_max_deviation.assign(p, 0.0);
  r.branch_violation_pct.assign(p, 0.0);
  int violations = 0;
  Accumulator total;
  Accumulator energy;
  std::vector<Accumulator> branch(p);
  for (int k = t_ini; k < t_ini + n; ++k) {
    bool outside = false;
    for (std::size_t b = 0; b < p; ++b) {
      const auto bi = static_cast<Eigen::Index>(b);
      const double y = levels(k, bi);
      const double dist = std::max({lo[bi] - y, y - hi[bi], 0.0});
      total.add(dist);
      branch[b].add(dist);
      r.branch_max_deviation[b] = std::max(r.branch_max_deviation[b], dist);
      if (dist > 0.0) {
        outside = true;
        r.branch_violation_pct[b] += 1.0;
      }
    }
    if (outside) ++violations;
    energy.add(energy_kwh[k]);
  }
  r.mae = total.value() / n;
  r.violation_pct = 100.0 * violations / n;
  r.avg_energy = energy.value() / n;
  for (std::size_t b = 0; b < p; ++b) {
    r.branch_mae[b] = branch[b].value() / n;
    r.branch_violation_pct[b] = 100.0 * r.branch_violation_pct[b] / n;
    r.max_deviation = std::max(r.max_deviation, r.branch_max_deviation[b]);
  }
  return r;
}

std::string format_table(const std::vector<NamedReport>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %12s %12s %12s %14s\n", "controller", "MAE [m]",
                "max dev [m]", "violation %", "energy [kWh]");
  out += line;
  for (const auto& row : rows) {
    if (!row.ok) {
      std::snprintf(line, sizeof line, "%-26s failed: %s\n", row.name.c_str(), row.error.c_str());
    } else {
      const auto& m = row.metrics;
      std::snprintf(line, sizeof line, "%-26s %12.4e %12.4f %12.2f %14.3f\n", row.name.c_str(),
                    m.mae, m.max_deviation, m.violation_pct, m.avg_energy);
    }
    out += line;
  }
  return out;
}

}  // namespace ezdeepc::harness
