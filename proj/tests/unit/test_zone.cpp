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

#include <random>

#include "doctest.h"

#include "ezdeepc/harness/collect.hpp"
#include "ezdeepc/harness/experiment.hpp"
#include "ezdeepc/hydro/simulator.hpp"
#include "ezdeepc/zone/bounds.hpp"
#include "ezdeepc/zone/controller.hpp"
#include "ezdeepc/zone/stages.hpp"
#include "lti.hpp"
#include "mi_oracle.hpp"

using namespace ezdeepc;
using namespace ezdeepc::zone;

namespace {

harness::Experiment desk() {
  return harness::load_experiment(std::string(EZDEEPC_CONFIG_DIR) + "/desk.json");
}

hydro::Disturbance rivers(double r0, double r1) {
  hydro::Disturbance d;
  d.river_levels = Vector(2);
  d.river_levels << r0, r1;
  d.inflows = Vector::Zero(4);
  return d;
}

// Scalar system with one unconstrained-sign continuous input.
struct ScalarInstance {
  testing::Lti sys;
  ControllerConfig config;
  ZoneSpec zone;
  Normalization norm;
  std::unique_ptr<deepc::GammaPredictor> predictor;
  TimeVaryingInputSet bounds;
  Vector gamma1;

  [[nodiscard]] StageProblem problem() const {
    StageProblem pr;
    pr.predictor = predictor.get();
    pr.gamma1 = gamma1;
    pr.bounds = &bounds;
    pr.zone = zone;
    pr.config = &config;
    pr.norm = norm;
    return pr;
  }
};

ScalarInstance scalar_instance(std::uint64_t seed, double y_shift) {
  std::mt19937_64 rng(seed);
  ScalarInstance in;
  in.sys = testing::random_lti(rng, 2, 1, 1);
  in.config.t_ini = 2;
  in.config.n_c = 2;
  in.zone.center = Vector::Zero(1);
  in.zone.half_width = 0.1;
  in.zone.output_band = 50.0;
  const Matrix u = testing::uniform_matrix(rng, 80, 1);
  in.norm = Normalization::from_data(u, in.zone.center);
  const Matrix un = in.norm.to_model_inputs(u);
  const Matrix y = in.sys.simulate(Vector::Zero(2), un);
  in.predictor = std::make_unique<deepc::GammaPredictor>(
      deepc::build_predictor({un, y, Matrix()}, 2, 2));
  in.bounds.lower = Vector::Constant(1, -1.0);
  in.bounds.upper = Vector::Constant(1, 1.0);
  Matrix ui = un.bottomRows(2);
  Matrix yi = y.bottomRows(2);
  yi.array() += y_shift;
  in.gamma1 = in.predictor->gamma1(deepc::stack_z_ini(ui, yi));
  return in;
}

}  // namespace

TEST_CASE("inflow gate may only open when the river is above the branch") {
  const auto e = desk();
  const Vector y = e.plant.level_centers();
  const auto gate = static_cast<Eigen::Index>(e.plant.gate_input(0));
  CHECK(build_input_bounds(y, rivers(8.0, 6.35), e.plant).upper[gate] == 0.0);
  CHECK(build_input_bounds(y, rivers(9.3, 6.35), e.plant).upper[gate] == 1.0);
}

TEST_CASE("pump on-interval follows the static head") {
  const auto e = desk();
  const Vector y = e.plant.level_centers();
  // Outflow pumps at branch 3 (center 5.85).
  const auto below = build_input_bounds(y, rivers(8.6, 5.5), e.plant);
  CHECK_FALSE(below.pump_can_run[1]);
  CHECK_FALSE(below.pump_can_run[2]);
  const auto nominal = build_input_bounds(y, rivers(8.6, 7.35), e.plant);
  REQUIRE(nominal.pump_can_run[1]);
  const auto i = static_cast<Eigen::Index>(nominal.pump_inputs[1]);
  CHECK(nominal.lower[i] == doctest::Approx(120.0));
  CHECK(nominal.upper[i] == doctest::Approx(250.0));
  Vector u = nominal.project(Vector::Constant(y.size() + 4, 60.0));
  CHECK(u[i] == doctest::Approx(120.0));
  CHECK(nominal.contains(u, 1e-12));
}

TEST_CASE("pump power surrogate tracks the true power") {
  const auto e = desk();
  const auto& st = e.plant.stations[1];
  const auto s = fit_pump_surrogate(st.pumps[0], st.pipe, 1.5, {120.0, 250.0}, 20);
  REQUIRE(s.available);
  CHECK(s.max_rel_error < 0.02);
  for (double n = 125.0; n < 250.0; n += 10.0) {
    const double truth = true_pump_power(st.pumps[0], st.pipe, 1.5, n);
    CHECK(std::abs(s.power_kw(n) - truth) <= 0.02 * truth);
  }
}

TEST_CASE("patterns start at the current state and grow in Hamming distance") {
  TimeVaryingInputSet b;
  b.lower = Vector::Zero(3);
  b.upper = Vector::Constant(3, 250.0);
  b.pump_inputs = {0, 1, 2};
  b.pump_can_run = {true, true, false};
  bool exhausted = true;
  const auto p = enumerate_patterns(b, {true, false, false}, BinaryMode::kConstantOverHorizon,
                                    2, 64, &exhausted);
  CHECK_FALSE(exhausted);
  REQUIRE(p.size() == 4);
  using P = BinaryPattern;
  CHECK(p[0] == P{true, false, false, true, false, false});
  CHECK(p[1] == P{false, false, false, false, false, false});
  CHECK(p[2] == P{true, true, false, true, true, false});
  CHECK(p[3] == P{false, true, false, false, true, false});

  const auto capped = enumerate_patterns(b, {true, false, false},
                                         BinaryMode::kConstantOverHorizon, 2, 3, &exhausted);
  CHECK(capped.size() == 3);
  CHECK(exhausted);

  const auto per_step = enumerate_patterns(b, {false, false, false}, BinaryMode::kPerStep, 2,
                                           100, &exhausted);
  CHECK(per_step.size() == 16);
  for (const auto& q : per_step) {
    CHECK_FALSE(q[2]);
    CHECK_FALSE(q[5]);
  }
}

TEST_CASE("zone cost vanishes at equilibrium") {
  auto in = scalar_instance(3, 0.0);
  in.gamma1 = Vector::Zero(in.gamma1.size());
  const auto r = solve_zone_stage(in.problem());
  CHECK(r.best.zone_cost <= 1e-6);
  CHECK(r.best.outputs.cwiseAbs().maxCoeff() <= 0.1 + 1e-6);
}

TEST_CASE("zone stage matches a dense grid over the future inputs") {
  for (std::uint64_t seed : {1u, 2u, 5u}) {
    auto in = scalar_instance(seed, 0.8);
    const auto pr = in.problem();
    const auto r = solve_zone_stage(pr);
    const auto& g = *in.predictor;
    const Vector cu = g.l21() * in.gamma1;
    const Vector cy = g.l31() * in.gamma1;
    const double q = in.config.q_weight[0];
    const double b2 = in.config.beta2_zone;
    // gamma3 = 0 is optimal for exact LTI data; the reference is the
    // projection of the prediction onto the target zone.
    auto f = [&](double u0, double u1) {
      Vector u(2);
      u << u0, u1;
      const Vector g2 = g.l22().triangularView<Eigen::Lower>().solve(u - cu);
      const Vector y = cy + g.l32() * g2;
      double t = 0.0;
      for (Eigen::Index j = 0; j < 2; ++j) {
        const double e = y[j] - std::clamp(y[j], -0.1, 0.1);
        t += q * e * e;
      }
      return t + b2 * g2.squaredNorm();
    };
    double best = std::numeric_limits<double>::infinity();
    const int n = 801;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double u0 = (-1.0 - in.norm.input_mean[0]) / in.norm.input_scale[0] +
                          2.0 * a / (n - 1) / in.norm.input_scale[0];
        const double u1 = (-1.0 - in.norm.input_mean[0]) / in.norm.input_scale[0] +
                          2.0 * b / (n - 1) / in.norm.input_scale[0];
        best = std::min(best, f(u0, u1));
      }
    }
    CAPTURE(seed);
    CHECK(r.best.objective <= best + 1e-9);
    CHECK(r.best.objective >= best * (1.0 - 1e-3) - 1e-9);
  }
}

TEST_CASE("zone cost does not increase with the contraction rate") {
  auto in = scalar_instance(2, 0.8);
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    in.zone.alpha = a;
    const double zc = solve_zone_stage(in.problem()).best.objective;
    CAPTURE(a);
    CHECK(zc <= prev + 1e-9);
    prev = zc;
  }
}

TEST_CASE("energy stage respects the zone bound and never loses to stage one") {
  for (std::uint64_t seed : {2u, 7u}) {
    const auto in = testing::make_pump_instance(seed, 3, 0.5, 0.6);
    const auto pr = in.problem();
    const auto z = solve_zone_stage(pr);
    const auto e = solve_energy_stage(pr, z);
    CAPTURE(seed);
    CHECK(e.zone_cost <= zone_cost_bound(z.best.zone_cost));
    CHECK(e.objective <= energy_objective(pr, z.best.binaries, z.best.x) + 1e-9);
    for (Eigen::Index j = 0; j < 3; ++j) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        const bool on = e.binaries[static_cast<std::size_t>(j * 2 + k)];
        if (on) {
          CHECK(e.inputs(j, k) >= 120.0 - 1e-6);
          CHECK(e.inputs(j, k) <= 250.0 + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("energy stage matches the brute-force mixed-integer optimum") {
  const auto in = testing::make_pump_instance(7, 3, 0.5, 0.6);
  const auto pr = in.problem();
  const auto z = solve_zone_stage(pr);
  const auto e = solve_energy_stage(pr, z);
  const auto bf = testing::brute_force_pumps(in, zone_cost_bound(z.best.zone_cost), 11);
  REQUIRE(std::isfinite(bf.objective));
  CHECK(std::abs(e.objective - bf.objective) <= 0.01 * bf.objective);
}

TEST_CASE("energy stage keeps idle pumps off") {
  auto in = testing::make_pump_instance(2, 3, 5.0, 0.0);
  in.bounds.pump_can_run = {false, false};
  const auto pr = in.problem();
  const auto z = solve_zone_stage(pr);
  const auto e = solve_energy_stage(pr, z);
  CHECK(e.energy_kwh == 0.0);
  for (bool b : e.binaries) CHECK_FALSE(b);
  CHECK(e.inputs.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("passive stations drain with hysteresis") {
  const auto e = desk();
  PassiveController pc(e.plant, e.zone, e.passive);
  Vector y = e.plant.level_centers();
  const auto gate = static_cast<Eigen::Index>(e.plant.gate_input(1));
  const auto p1 = static_cast<Eigen::Index>(e.plant.pump_input(1));
  const auto p2 = static_cast<Eigen::Index>(e.plant.pump_input(2));

  y[3] = 6.0;  // above the desired zone, low tide: the gate drains
  Vector u = pc.step(y, rivers(8.6, 5.4));
  CHECK(pc.mode(1) == PassiveController::Mode::kDraining);
  CHECK(u[gate] == doctest::Approx(0.5));
  CHECK(u[p1] == 0.0);

  y[3] = 5.9;  // inside the zone, above the center, high tide: pumps drain
  u = pc.step(y, rivers(8.6, 7.35));
  CHECK(pc.mode(1) == PassiveController::Mode::kDraining);
  CHECK(u[gate] == 0.0);
  CHECK(u[p1] == doctest::Approx(120.0));
  CHECK(u[p2] == doctest::Approx(120.0));

  y[3] = 5.84;  // below the center: back to idle
  u = pc.step(y, rivers(8.6, 7.35));
  CHECK(pc.mode(1) == PassiveController::Mode::kIdle);
  CHECK(u[p1] == 0.0);
  for (std::size_t w = 0; w < e.plant.num_weirs(); ++w) {
    const auto b = static_cast<Eigen::Index>(e.plant.weirs[w].upstream);
    CHECK(u[static_cast<Eigen::Index>(w)] == doctest::Approx(e.zone.desired_lower()[b]));
  }
}

TEST_CASE("PI bootstrap lowers the weir when the upstream level is high") {
  const auto e = desk();
  const auto d = rivers(8.6, 6.35);
  Vector y = e.plant.level_centers();
  PidBootstrap at_center(e.plant, e.zone, e.pid, e.passive);
  const Vector u0 = at_center.step(y, d);
  y[0] += 0.05;
  PidBootstrap high(e.plant, e.zone, e.pid, e.passive);
  const Vector u1 = high.step(y, d);
  CHECK(u1[0] < u0[0]);
  CHECK(u0[0] == doctest::Approx(e.zone.desired_lower()[0]));
}

TEST_CASE("zone controller keeps a rolling history and applies admissible inputs") {
  const auto e = desk();
  const auto col = harness::collect_excitation_data(e.plant, e.zone, e.scenario, 400, e.collection);
  ZoneController ctrl(e.plant, e.zone.with_alpha(0.7), e.controller, col.data, e.passive);
  const int t = e.controller.t_ini;
  CHECK_THROWS_AS((void)ctrl.stage_problem({}, {}), DimensionMismatch);
  ctrl.reset_history(col.data.inputs.topRows(t + 3), col.data.outputs.topRows(t + 3));
  CHECK(ctrl.history_length() == static_cast<std::size_t>(t));

  const auto dist = harness::generate_disturbances(e.scenario, e.plant, 3);
  Vector y = col.data.outputs.row(t + 2).transpose();
  for (int k = 0; k < 3; ++k) {
    StepLog log;
    const Vector u = ctrl.control_step(y, dist[static_cast<std::size_t>(k)], &log);
    const auto set = build_input_bounds(y, dist[static_cast<std::size_t>(k)], e.plant);
    CHECK(set.contains(u, 1e-9));
    CHECK(log.stage2_zone_cost <= zone_cost_bound(log.zc_star));
    const auto r = hydro::step(y, u, dist[static_cast<std::size_t>(k)], e.plant);
    ctrl.observe(r.applied_input, r.next_levels);
    y = r.next_levels;
    CHECK(ctrl.history_length() == static_cast<std::size_t>(t));
  }
}
