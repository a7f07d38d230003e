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

#include <cmath>
#include <random>

#include "doctest.h"

#include "ezdeepc/hydro/config_io.hpp"
#include "ezdeepc/hydro/simulator.hpp"
#include "ezdeepc/hydro/structures.hpp"

using namespace ezdeepc;
using namespace ezdeepc::hydro;

namespace {

Weir table_weir() {
  Weir w;
  w.discharge_coeff = 0.61;
  w.crest_width = 6.0;
  w.height_bounds = {7.8, 11.5};
  return w;
}

SluiceGate table_gate(FlowDirection dir) {
  SluiceGate g;
  g.discharge_coeff = 0.61;
  g.width = 5.0;
  g.max_opening = 0.6;
  g.direction = dir;
  return g;
}

// Single branch with no structures.
WaterSystemConfig lone_branch() {
  WaterSystemConfig c;
  c.branches.push_back({0, 50000.0, 5.0});
  return c;
}

// Two branches joined by one weir plus an outflow station on branch 1.
WaterSystemConfig two_branch_plant() {
  WaterSystemConfig c;
  c.branches = {{0, 40000.0, 9.0}, {1, 60000.0, 8.0}};
  Weir w = table_weir();
  w.upstream = 0;
  w.downstream = 1;
  c.weirs.push_back(w);
  Station st;
  st.branch = 1;
  st.gate = table_gate(FlowDirection::kOutflow);
  st.gate.branch = 1;
  st.gate.river = 0;
  Pump p;
  p.branch = 1;
  p.river = 0;
  p.direction = FlowDirection::kOutflow;
  st.pumps.push_back(p);
  c.stations.push_back(st);
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("weir discharge") {
  const Weir w = table_weir();
  CHECK(weir_discharge(8.0, 8.0, w) == 0.0);
  CHECK(weir_discharge(7.9, 8.0, w) == 0.0);
  // Direct evaluation of the weir formula with the default coefficients.
  CHECK(weir_discharge(8.5, 8.0, w) == doctest::Approx(3.821152182261261).epsilon(1e-12));

  Weir wide = w;
  wide.crest_width *= 2.0;
  CHECK(weir_discharge(8.5, 8.0, wide) == doctest::Approx(2.0 * weir_discharge(8.5, 8.0, w)));

  double prev = 0.0;
  for (double head = 0.0; head < 2.0; head += 0.01) {
    const double q = weir_discharge(8.0 + head, 8.0, w);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("gate discharge and check valve") {
  const auto in = table_gate(FlowDirection::kInflow);
  const auto out = table_gate(FlowDirection::kOutflow);
  CHECK(gate_discharge(8.0, 9.0, 0.0, in) == 0.0);
  // Inflow gate with the river below the branch stays shut.
  CHECK(gate_discharge(9.0, 8.0, 1.0, in) == 0.0);
  CHECK(gate_discharge(8.0, 9.0, 0.5, in) == doctest::Approx(4.052943930034068).epsilon(1e-12));
  CHECK(gate_discharge(9.0, 8.0, 0.5, out) == doctest::Approx(4.052943930034068).epsilon(1e-12));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lvl(5.0, 10.0), ratio(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double hb = lvl(rng), hr = lvl(rng), r = ratio(rng);
    if (hr < hb) CHECK(gate_discharge(hb, hr, r, in) == 0.0);
    if (hb < hr) CHECK(gate_discharge(hb, hr, r, out) == 0.0);
    CHECK(gate_discharge(hb, hr, r, in) >= 0.0);
  }
}

TEST_CASE("pump head capacity follows the affinity laws") {
  const Pump p;
  for (double q : {0.0, 1.0, 3.5, 7.0}) {
    CHECK(pump_head_capacity(q, 1.0, p) == nominal_head(q, p));
  }
  // Spot values of the default quadratic curve 12 - 0.12 Q^2.
  CHECK(pump_head_capacity(2.0, 0.6, p) == doctest::Approx(3.84).epsilon(1e-12));
  CHECK(pump_head_capacity(4.0, 0.6, p) == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(pump_head_capacity(4.0, 1.0, p) == doctest::Approx(10.08).epsilon(1e-12));
  CHECK(pump_head_capacity(6.0, 1.0, p) == doctest::Approx(7.68).epsilon(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> qd(0.0, 8.0), nd(0.48, 1.0), sd(0.1, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double q = qd(rng), n = nd(rng), s = sd(rng);
    const double base = pump_head_capacity(q, n, p);
    const double scaled = pump_head_capacity(s * q, s * n, p);
    CHECK(std::abs(scaled - s * s * base) <= 1e-12 * std::abs(s * s * base) + 1e-300);
  }
}

TEST_CASE("demand and static head") {
  const PipeSection pipe;
  CHECK(demand_head(0.0, 2.0, pipe) == 2.0);
  CHECK(demand_head(5.0, 2.0, pipe) == doctest::Approx(2.250306233456242).epsilon(1e-12));
  CHECK(demand_head(-3.0, 1.0, pipe) == demand_head(3.0, 1.0, pipe));
  for (double q = 0.0; q < 10.0; q += 0.5) {
    CHECK(demand_head(q + 0.5, 1.0, pipe) > demand_head(q, 1.0, pipe));
  }

  CHECK(static_head(9.0, 9.0, FlowDirection::kInflow) == 0.0);
  CHECK(static_head(9.0, 8.5, FlowDirection::kInflow) == doctest::Approx(0.5));
  CHECK(static_head(9.0, 8.5, FlowDirection::kOutflow) == doctest::Approx(-0.5));
}

TEST_CASE("pump operating point") {
  const Pump p;
  const PipeSection pipe;
  CHECK(solve_pump_operating_point(0.0, 1.0, p, pipe).value() == 0.0);

  // Bisection oracle run to 1e-12 m^3/s.
  const auto q = solve_pump_operating_point(1.0, 1.0, p, pipe);
  REQUIRE(q.has_value());
  CHECK(*q == doctest::Approx(9.198228765610992).epsilon(1e-10));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> nd(0.48, 1.0), hd(-1.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double n = nd(rng), hs = hd(rng);
    const auto qi = solve_pump_operating_point(n, hs, p, pipe);
    if (!qi) continue;
    CHECK(std::abs(pump_head_capacity(*qi, n, p) - demand_head(*qi, hs, pipe)) <=
          kOperatingPointHeadTol);
  }

  // Shutoff head below the static head: no intersection.
  CHECK_FALSE(solve_pump_operating_point(0.5, 5.0, p, pipe).has_value());

  // Rising-then-falling curve meets the demand curve twice.
  Pump bad;
  bad.nominal_hq_curve = {1.0, 2.0, -0.5};
  CHECK_THROWS_AS(solve_pump_operating_point(1.0, 2.0, bad, pipe), NonUniqueRoot);
}

TEST_CASE("pump power") {
  const Pump p;
  CHECK(pump_power(3.0, 0.0, p) == 0.0);
  CHECK(pump_power(0.0, 1.0, p) == doctest::Approx(506.15));
  CHECK(pump_power(2.0, 1.0, p) == doctest::Approx(404.43).epsilon(1e-12));
  // Continuity on the on-region.
  for (double n = 0.48; n < 1.0; n += 0.01) {
    CHECK(std::abs(pump_power(4.0, n + 1e-7, p) - pump_power(4.0, n, p)) < 1e-3);
  }
}

TEST_CASE("feasible speed interval") {
  const Pump p;
  const PipeSection pipe;
  // Demand curve above the operating region at every speed.
  CHECK_FALSE(feasible_speed_interval(12.5, p, pipe).has_value());

  const auto full = feasible_speed_interval(1.5, p, pipe);
  REQUIRE(full.has_value());
  CHECK(full->lo == 120.0);
  CHECK(full->hi == 250.0);

  // Dense 0.1 rpm sweep oracle: [120.0, 224.5] at H_s = 0.8 and
  // [121.5, 250.0] at H_s = 2.8 (first/last feasible sweep points).
  const auto upper_cut = feasible_speed_interval(0.8, p, pipe);
  REQUIRE(upper_cut.has_value());
  CHECK(upper_cut->lo == 120.0);
  CHECK(upper_cut->hi >= 224.5);
  CHECK(upper_cut->hi < 224.6);
  const auto lower_cut = feasible_speed_interval(2.8, p, pipe);
  REQUIRE(lower_cut.has_value());
  CHECK(lower_cut->lo > 121.4);
  CHECK(lower_cut->lo <= 121.5);
  CHECK(lower_cut->hi == 250.0);

  for (double n : {upper_cut->lo, upper_cut->hi}) {
    CHECK(operating_point_feasible(n, 0.8, p, pipe));
  }
}

TEST_CASE("step: quiescent plant stays put") {
  WaterSystemConfig c = two_branch_plant();
  Vector h(2);
  h << 8.0, 8.0;
  Vector u = Vector::Zero(c.num_inputs());
  u[0] = 8.0;
  Disturbance d{Vector::Constant(1, 8.0), Vector::Zero(2)};
  const auto r = step(h, u, d, c);
  CHECK(r.next_levels[0] == 8.0);
  CHECK(r.next_levels[1] == 8.0);
  CHECK(r.energy_kwh == 0.0);
}

TEST_CASE("step: linear storage under constant inflow") {
  const WaterSystemConfig c = lone_branch();
  Vector h = Vector::Constant(1, 5.0);
  Disturbance d{Vector(0), Vector::Constant(1, 2.5)};
  const auto r = step(h, Vector(0), d, c);
  CHECK(r.next_levels[0] - 5.0 == doctest::Approx(2.5 * 1800.0 / 50000.0).epsilon(1e-12));
}

TEST_CASE("step: weir inputs are clamped to the free-flow ordering") {
  WaterSystemConfig c = two_branch_plant();
  Vector h(2);
  h << 9.0, 8.2;
  Vector u = Vector::Zero(c.num_inputs());
  u[0] = 10.0;  // above both levels
  Disturbance d{Vector::Constant(1, 9.0), Vector::Zero(2)};
  const auto r = step(h, u, d, c);
  CHECK(r.applied_input[0] == 9.0);
  REQUIRE(r.clamped_inputs.size() == 1);
  CHECK(r.clamped_inputs[0] == 0);
}

TEST_CASE("step: mass balance closes per branch") {
  WaterSystemConfig c = two_branch_plant();
  Vector h(2);
  h << 9.0, 8.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vector u(c.num_inputs());
    u[0] = h.minCoeff() + uni(rng) * (h.maxCoeff() - h.minCoeff());
    u[1] = uni(rng);
    u[2] = uni(rng) < 0.5 ? 0.0 : 120.0 + 130.0 * uni(rng);
    Disturbance d{Vector::Constant(1, 7.0 + 2.0 * uni(rng)),
                  Vector::Constant(2, 0.5 * uni(rng))};
    const auto r = step(h, u, d, c);
    for (int b = 0; b < 2; ++b) {
      const double stored = c.branches[b].backwater_area * (r.next_levels[b] - h[b]);
      CHECK(std::abs(stored - r.flows.branch_net_volume[b]) <= 1e-6);
    }
    // Weir volume leaves branch 0 and enters branch 1.
    const double b1 = r.flows.weir_volume[0] + r.flows.gate_volume[0] +
                      r.flows.pump_volume[0] + r.flows.inflow_volume[1];
    CHECK(std::abs(b1 - r.flows.branch_net_volume[1]) <= 1e-6);
    h = r.next_levels;
  }
}

TEST_CASE("step: non-finite state is reported") {
  const WaterSystemConfig c = lone_branch();
  Disturbance d{Vector(0), Vector::Constant(1, std::nan(""))};
  CHECK_THROWS_AS(step(Vector::Constant(1, 5.0), Vector(0), d, c), NonFiniteState);
}

TEST_CASE("config validation") {
  WaterSystemConfig c = two_branch_plant();
  c.branches[0].backwater_area = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = two_branch_plant();
  c.weirs[0].discharge_coeff = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = two_branch_plant();
  c.substep = 70.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = two_branch_plant();
  c.stations[0].pumps[0].nominal_hq_curve = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  const auto round_trip = parse_water_system(to_json(two_branch_plant()));
  CHECK(round_trip.num_inputs() == 3);
  CHECK(round_trip.stations[0].pumps[0].direction == FlowDirection::kOutflow);
}
