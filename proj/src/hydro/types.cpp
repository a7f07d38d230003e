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

#include "ezdeepc/hydro/types.hpp"

#include <cmath>
#include <string>

#include "ezdeepc/hydro/structures.hpp"

namespace ezdeepc::hydro {

std::string_view to_string(FlowDirection d) {
  return d == FlowDirection::kInflow ? "inflow" : "outflow";
}

FlowDirection flow_direction_from_string(std::string_view s) {
  if (s == "inflow") return FlowDirection::kInflow;
  if (s == "outflow") return FlowDirection::kOutflow;
  throw ConfigError("unknown flow direction '" + std::string(s) + "'");
}

std::size_t WaterSystemConfig::num_pumps() const {
  std::size_t n = 0;
  for (const auto& s : stations) n += s.pumps.size();
  return n;
}

std::vector<PumpRef> WaterSystemConfig::pump_refs() const {
  std::vector<PumpRef> refs;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    for (std::size_t p = 0; p < stations[s].pumps.size(); ++p) {
      refs.push_back({s, p});
    }
  }
  return refs;
}

Vector WaterSystemConfig::level_centers() const {
  Vector c(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i) {
    c[i] = branches[i].level_center;
  }
  return c;
}

void WaterSystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const int nb = static_cast<int>(branches.size());
  if (nb == 0) fail("plant has no branches");
  for (const auto& b : branches) {
    if (!(b.backwater_area > 0.0)) {
      fail("branch " + std::to_string(b.id) + ": backwater area must be > 0");
    }
  }
  for (const auto& w : weirs) {
    const std::string tag = "weir " + std::to_string(w.id) + ": ";
    if (w.upstream < 0 || w.upstream >= nb || w.downstream < 0 ||
        w.downstream >= nb || w.upstream == w.downstream) {
      fail(tag + "branch ids out of range");
    }
    if (!(w.discharge_coeff > 0.0 && w.discharge_coeff <= 1.0)) {
      fail(tag + "discharge coefficient must lie in (0, 1]");
    }
    if (!(w.crest_width > 0.0)) fail(tag + "crest width must be > 0");
    if (!(w.height_bounds.lo < w.height_bounds.hi)) {
      fail(tag + "height bounds must satisfy min < max");
    }
  }
  // Weirs must form a forest over the branches (no cycles).
  std::vector<int> parent(nb);
  for (int i = 0; i < nb; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& w : weirs) {
    const int a = find(w.upstream);
    const int b = find(w.downstream);
    if (a == b) fail("weir graph contains a cycle at weir " + std::to_string(w.id));
    parent[a] = b;
  }
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const Station& st = stations[s];
    const std::string tag = "station " + std::to_string(s) + ": ";
    if (st.branch < 0 || st.branch >= nb) fail(tag + "branch out of range");
    const auto& g = st.gate;
    if (g.branch != st.branch || g.river != static_cast<int>(s)) {
      fail(tag + "gate must reference the station branch and river");
    }
    if (!(g.discharge_coeff > 0.0 && g.discharge_coeff <= 1.0)) {
      fail(tag + "gate discharge coefficient must lie in (0, 1]");
    }
    if (!(g.width > 0.0) || !(g.max_opening > 0.0)) {
      fail(tag + "gate width and max opening must be > 0");
    }
    const auto& pipe = st.pipe;
    if (!(pipe.darcy_friction > 0.0 && pipe.length > 0.0 &&
          pipe.inner_diameter > 0.0 && pipe.gravity > 0.0) ||
        pipe.minor_loss_sum < 0.0) {
      fail(tag + "pipe parameters must be positive");
    }
    for (const auto& p : st.pumps) {
      const std::string ptag = tag + "pump " + std::to_string(p.id) + ": ";
      if (p.branch != st.branch || p.river != static_cast<int>(s)) {
        fail(ptag + "must reference the station branch and river");
      }
      if (!(p.speed_bounds.lo > 0.0 && p.speed_bounds.lo < p.speed_bounds.hi &&
            p.speed_bounds.hi <= p.nominal_speed)) {
        fail(ptag + "speed bounds must satisfy 0 < N_min < N_max <= nominal");
      }
      if (p.region.q_min_on < 0.0) fail(ptag + "Q_min_on must be >= 0");
      if (p.nominal_hq_curve.empty()) fail(ptag + "empty H-Q curve");
      // Strictly decreasing nominal curve on the normalized discharge range
      // reachable inside the operating region.
      double prev = nominal_head(0.0, p);
      for (int i = 1; i <= 256; ++i) {
        const double q = 64.0 * i / 256.0;
        const double h = nominal_head(q, p);
        if (prev < p.region.head_range.lo) break;
        if (!(h < prev)) fail(ptag + "nominal H-Q curve must be strictly decreasing");
        prev = h;
      }
    }
  }
  if (!(substep > 0.0 && sampling_period > 0.0)) {
    fail("sampling period and sub-step must be > 0");
  }
  const double ratio = sampling_period / substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    fail("sampling period must be an integer multiple of the sub-step");
  }
}

Vector Disturbance::stacked() const {
  Vector d(river_levels.size() + inflows.size());
  d << river_levels, inflows;
  return d;
}

Disturbance Disturbance::unstack(const Vector& d, std::size_t num_stations) {
  const auto ns = static_cast<Eigen::Index>(num_stations);
  return {d.head(ns), d.tail(d.size() - ns)};
}

}  // namespace ezdeepc::hydro
