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

#include "ezdeepc/harness/experiment.hpp"

#include <fstream>

#include "ezdeepc/hydro/config_io.hpp"
#include "ezdeepc/hydro/simulator.hpp"

namespace ezdeepc::harness {

Experiment parse_experiment(const nlohmann::json& doc) {
  Experiment e;
  if (!doc.contains("plant")) throw ConfigError("config has no \"plant\" section");
  e.plant = hydro::parse_water_system(doc["plant"]);
  const auto section = [&](const char* key) {
    return doc.contains(key) ? doc[key] : nlohmann::json::object();
  };
  e.zone = zone::parse_zone(section("zone"), e.plant);
  e.controller = zone::parse_controller(section("controller"));
  e.pid = zone::parse_pid(section("pid"));
  e.passive = zone::parse_passive(section("passive"));
  e.collection = parse_collection(section("collection"));
  e.data_length = section("collection").value("length", e.data_length);
  e.bo = section("bo");
  if (e.bo.contains("tuned_alpha")) {
    e.tuned_alpha = e.bo["tuned_alpha"].get<double>();
    if (*e.tuned_alpha < 0.0 || *e.tuned_alpha > 1.0) {
      throw ConfigError("bo.tuned_alpha must lie in [0, 1]");
    }
  }
  if (doc.contains("scenario")) {
    e.scenario = parse_scenario(doc["scenario"]);
  } else {
    for (const auto& st : e.plant.stations) {
      e.scenario.rivers.push_back({e.plant.branches[static_cast<std::size_t>(st.branch)].level_center});
    }
  }
  e.scenario.validate(e.plant);
  return e;
}

Experiment load_experiment(const std::string& path) {
  return parse_experiment(read_json_file(path));
}

void apply_scenario(Experiment& exp, const nlohmann::json& doc) {
  const auto& s = doc.contains("scenario") ? doc["scenario"] : doc;
  exp.scenario = parse_scenario(s);
  exp.scenario.validate(exp.plant);
}

std::string_view to_string(ControlMode m) {
  switch (m) {
    case ControlMode::kEz: return "ez";
    case ControlMode::kEs: return "es";
    case ControlMode::kEzRaw: return "ez-raw";
    case ControlMode::kPassive: return "passive";
  }
  return "?";
}

ControlMode control_mode_from_string(std::string_view s) {
  if (s == "ez") return ControlMode::kEz;
  if (s == "es") return ControlMode::kEs;
  if (s == "ez-raw") return ControlMode::kEzRaw;
  if (s == "passive") return ControlMode::kPassive;
  throw ConfigError("unknown control mode '" + std::string(s) + "'");
}

namespace {

double mode_alpha(ControlMode mode, double alpha) {
  switch (mode) {
    case ControlMode::kEz: return alpha;
    case ControlMode::kEs: return 0.0;
    default: return 1.0;
  }
}

}  // namespace

ClosedLoopRun run_closed_loop(const Experiment& exp, const deepc::TrajectoryData* data,
                              ControlMode mode, double alpha, int steps,
                              const Vector& initial_levels,
                              const std::vector<hydro::Disturbance>& disturbances) {
  const int t_ini = exp.controller.t_ini;
  const int total = t_ini + steps;
  if (steps < 1) throw ConfigError("closed-loop run needs at least one step");
  if (static_cast<int>(disturbances.size()) < total) {
    throw ConfigError("disturbance sequence shorter than t_ini + steps");
  }
  if (mode != ControlMode::kPassive && data == nullptr) {
    throw ConfigError("mode '" + std::string(to_string(mode)) + "' needs a data file");
  }
  const auto nb = static_cast<Eigen::Index>(exp.plant.num_branches());
  const auto nu = static_cast<Eigen::Index>(exp.plant.num_inputs());

  ClosedLoopRun run;
  run.mode = mode;
  run.alpha = mode_alpha(mode, alpha);
  run.t_ini = t_ini;
  run.levels.resize(total + 1, nb);
  run.inputs.resize(total, nu);
  run.disturbances.resize(total, static_cast<Eigen::Index>(exp.plant.num_disturbances()));
  run.energy_kwh = Vector::Zero(total);
  const zone::ZoneSpec zone = exp.zone.with_alpha(run.alpha);

  Vector y = initial_levels;
  run.levels.row(0) = y.transpose();
  const auto advance = [&](int k, const Vector& u) {
    const auto& d = disturbances[static_cast<std::size_t>(k)];
    hydro::StepResult r;
    try {
      r = hydro::step(y, u, d, exp.plant);
    } catch (const hydro::NonFiniteState& e) {
      throw SimulationFailed("step " + std::to_string(k) + ": " + e.what());
    }
    y = r.next_levels;
    run.levels.row(k + 1) = y.transpose();
    run.inputs.row(k) = r.applied_input.transpose();
    run.disturbances.row(k) = d.stacked().transpose();
    run.energy_kwh[k] = r.energy_kwh;
    return r;
  };

  zone::PidBootstrap pid(exp.plant, zone, exp.pid, exp.passive);
  for (int k = 0; k < t_ini; ++k) {
    advance(k, pid.step(y, disturbances[static_cast<std::size_t>(k)]));
  }

  std::optional<zone::ZoneController> ctrl;
  std::optional<zone::PassiveController> passive;
  if (mode == ControlMode::kPassive) {
    passive.emplace(exp.plant, zone, exp.passive);
  } else {
    ctrl.emplace(exp.plant, zone, exp.controller, *data, exp.passive);
    ctrl->reset_history(run.inputs.topRows(t_ini), run.levels.middleRows(1, t_ini));
  }

  run.logs.reserve(static_cast<std::size_t>(steps));
  for (int k = t_ini; k < total; ++k) {
    const auto& d = disturbances[static_cast<std::size_t>(k)];
    zone::StepLog log;
    log.t = k;
    Vector u;
    if (ctrl) {
      u = ctrl->control_step(y, d, &log);
    } else {
      u = passive->step(y, d);
      log.y = y;
      log.d = d.stacked();
      log.solver_status = "passive";
      for (std::size_t p = 0; p < exp.plant.num_pumps(); ++p) {
        log.binaries.push_back(u[static_cast<Eigen::Index>(exp.plant.pump_input(p))] > 0.0);
      }
    }
    const auto r = advance(k, u);
    log.u = r.applied_input;
    log.energy_kwh = r.energy_kwh;
    if (log.fallback) ++run.fallbacks;
    if (ctrl) ctrl->observe(r.applied_input, r.next_levels);
    run.logs.push_back(std::move(log));
  }
  run.metrics = compute_metrics(run.levels, run.energy_kwh, exp.zone, steps, t_ini);
  return run;
}

ClosedLoopRun run_closed_loop(const Experiment& exp, const deepc::TrajectoryData* data,
                              ControlMode mode, double alpha, int steps) {
  const auto d = generate_disturbances(exp.scenario, exp.plant, exp.controller.t_ini + steps);
  const Vector y0 = sample_initial_levels(exp.scenario, exp.zone.center, exp.scenario.seed);
  return run_closed_loop(exp, data, mode, alpha, steps, y0, d);
}

std::vector<ComparisonEntry> run_comparison(const Experiment& exp,
                                            const deepc::TrajectoryData& data,
                                            double tuned_alpha, int steps) {
  struct Spec {
    std::string name;
    ControlMode mode;
  };
  const std::vector<Spec> specs = {{"EZ-DeePC (tuned alpha)", ControlMode::kEz},
                                   {"EZ-DeePC (alpha = 1)", ControlMode::kEzRaw},
                                   {"ES-DeePC", ControlMode::kEs},
                                   {"Passive", ControlMode::kPassive}};
  const auto d = generate_disturbances(exp.scenario, exp.plant, exp.controller.t_ini + steps);
  const Vector y0 = sample_initial_levels(exp.scenario, exp.zone.center, exp.scenario.seed);
  std::vector<ComparisonEntry> out;
  for (const auto& s : specs) {
    ComparisonEntry e;
    e.report.name = s.name;
    try {
      e.run = run_closed_loop(exp, &data, s.mode, tuned_alpha, steps, y0, d);
      e.report.metrics = e.run->metrics;
    } catch (const Error& err) {
      e.report.ok = false;
      e.report.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_step_log(const std::string& path, const ClosedLoopRun& run) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& log : run.logs) out << log.to_json().dump() << '\n';
}

}  // namespace ezdeepc::harness
