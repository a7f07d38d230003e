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

#include "ezdeepc/zone/controller.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "ezdeepc/hydro/simulator.hpp"
#include "ezdeepc/hydro/structures.hpp"

namespace ezdeepc::zone {

namespace {

std::vector<double> to_vec(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

PassiveController::PassiveController(const hydro::WaterSystemConfig& plant,
                                     ZoneSpec zone, PassiveSettings settings)
    : plant_(&plant), zone_(std::move(zone)), settings_(settings),
      modes_(plant.stations.size(), Mode::kIdle) {}

void PassiveController::reset() { std::fill(modes_.begin(), modes_.end(), Mode::kIdle); }

Vector PassiveController::step(const Vector& levels,
                               const hydro::Disturbance& disturbance) {
  const auto& plant = *plant_;
  const auto set = build_input_bounds(levels, disturbance, plant);
  Vector u = Vector::Zero(static_cast<Eigen::Index>(plant.num_inputs()));
  const Vector lo = zone_.desired_lower();
  const Vector hi = zone_.desired_upper();

  for (std::size_t w = 0; w < plant.num_weirs(); ++w) {
    u[static_cast<Eigen::Index>(plant.weir_input(w))] = lo[plant.weirs[w].upstream];
  }
  std::size_t flat = 0;
  for (std::size_t s = 0; s < plant.stations.size(); ++s) {
    const auto& st = plant.stations[s];
    const double h = levels[st.branch];
    const double c = zone_.center[st.branch];
    Mode& mode = modes_[s];
    if (mode == Mode::kIdle) {
      if (h < lo[st.branch]) mode = Mode::kFilling;
      else if (h > hi[st.branch]) mode = Mode::kDraining;
    } else if (mode == Mode::kFilling && h > c) {
      mode = Mode::kIdle;
    } else if (mode == Mode::kDraining && h < c) {
      mode = Mode::kIdle;
    }
    const auto want = mode == Mode::kFilling ? hydro::FlowDirection::kInflow
                                             : hydro::FlowDirection::kOutflow;
    const auto gi = static_cast<Eigen::Index>(plant.gate_input(s));
    const bool gate_ok = mode != Mode::kIdle && st.gate.direction == want &&
                         set.upper[gi] > 0.0;
    if (gate_ok) u[gi] = settings_.gate_ratio;
    for (const auto& pump : st.pumps) {
      const std::size_t k = flat++;
      const auto i = static_cast<Eigen::Index>(plant.pump_input(k));
      if (mode != Mode::kIdle && !gate_ok && pump.direction == want &&
          set.pump_can_run[k]) {
        u[i] = settings_.pump_speed;
      }
    }
  }
  return set.project(u);
}

PidBootstrap::PidBootstrap(const hydro::WaterSystemConfig& plant, ZoneSpec zone,
                           PidGains gains, PassiveSettings passive)
    : plant_(&plant), zone_(zone), gains_(gains),
      passive_(plant, std::move(zone), passive),
      integral_(Vector::Zero(static_cast<Eigen::Index>(plant.num_branches()))) {}

Vector PidBootstrap::step(const Vector& levels, const hydro::Disturbance& disturbance) {
  const auto& plant = *plant_;
  Vector u = passive_.step(levels, disturbance);
  const Vector err = zone_.center - levels;
  integral_ += err;
  if (gains_.ki > 0.0) {
    const double cap = zone_.output_band / gains_.ki;
    integral_ = integral_.cwiseMax(-cap).cwiseMin(cap);
  }
  const Vector lo = zone_.desired_lower();
  for (std::size_t w = 0; w < plant.num_weirs(); ++w) {
    const int b = plant.weirs[w].upstream;
    const double v = lo[b] + gains_.kp * err[b] + gains_.ki * integral_[b];
    u[static_cast<Eigen::Index>(plant.weir_input(w))] =
        hydro::weir_height_interval(levels, w, plant).clamp(v);
  }
  return u;
}

nlohmann::json StepLog::to_json() const {
  nlohmann::json domains = nlohmann::json::array();
  for (const auto& iv : pump_domains) domains.push_back({iv.lo, iv.hi});
  return {{"t", t},
          {"y", to_vec(y)},
          {"u", to_vec(u)},
          {"d", to_vec(d)},
          {"zc_star", zc_star},
          {"stage2_zone_cost", stage2_zone_cost},
          {"stage2_cost", stage2_cost},
          {"energy_kwh", energy_kwh},
          {"binaries", binaries},
          {"solver_status", solver_status},
          {"combos_explored", combos_explored},
          {"fallback", fallback},
          {"budget_exhausted", budget_exhausted},
          {"pump_domains", domains}};
}

ZoneController::ZoneController(const hydro::WaterSystemConfig& plant, ZoneSpec zone,
                               ControllerConfig config,
                               const deepc::TrajectoryData& data,
                               PassiveSettings passive)
    : plant_(&plant), zone_(std::move(zone)), config_(std::move(config)),
      passive_(plant, zone_, passive),
      pump_state_(plant.num_pumps(), false) {
  zone_.validate();
  config_.validate();
  data.check();
  if (static_cast<std::size_t>(data.input_dim()) != plant.num_inputs() ||
      static_cast<std::size_t>(data.output_dim()) != plant.num_branches()) {
    throw DimensionMismatch("offline data does not match the plant dimensions");
  }
  norm_ = Normalization::from_data(data.inputs, zone_.center);
  deepc::TrajectoryData model_data{norm_.to_model_inputs(data.inputs),
                                   norm_.to_model_outputs(data.outputs), Matrix()};
  predictor_ = deepc::build_predictor(model_data, config_.t_ini, config_.n_c);
  const auto& diag = predictor_.diagnostics();
  spdlog::info("predictor: {} data columns, L11 rank {}/{}, input excitation rank {}/{}",
               predictor_.data_columns(), diag.l11_rank, predictor_.z_ini_dim(),
               diag.input_excitation.rank, diag.input_excitation.rows);
}

void ZoneController::reset_history(const Matrix& inputs, const Matrix& outputs) {
  if (inputs.rows() < config_.t_ini || outputs.rows() < config_.t_ini) {
    throw DimensionMismatch("history shorter than T_ini");
  }
  u_hist_.clear();
  y_hist_.clear();
  for (Eigen::Index k = inputs.rows() - config_.t_ini; k < inputs.rows(); ++k) {
    u_hist_.push_back(inputs.row(k).transpose());
  }
  for (Eigen::Index k = outputs.rows() - config_.t_ini; k < outputs.rows(); ++k) {
    y_hist_.push_back(outputs.row(k).transpose());
  }
  const Vector& last = u_hist_.back();
  for (std::size_t k = 0; k < plant_->num_pumps(); ++k) {
    pump_state_[k] = last[static_cast<Eigen::Index>(plant_->pump_input(k))] > 0.0;
  }
}

void ZoneController::observe(const Vector& applied_input, const Vector& next_levels) {
  u_hist_.push_back(applied_input);
  y_hist_.push_back(next_levels);
  while (u_hist_.size() > static_cast<std::size_t>(config_.t_ini)) u_hist_.pop_front();
  while (y_hist_.size() > static_cast<std::size_t>(config_.t_ini)) y_hist_.pop_front();
  for (std::size_t k = 0; k < plant_->num_pumps(); ++k) {
    pump_state_[k] = applied_input[static_cast<Eigen::Index>(plant_->pump_input(k))] > 0.0;
  }
}

StageProblem ZoneController::stage_problem(
    const TimeVaryingInputSet& bounds, const std::vector<PumpSurrogate>& surrogates) const {
  if (u_hist_.size() != static_cast<std::size_t>(config_.t_ini)) {
    throw DimensionMismatch("controller history is not initialized");
  }
  Matrix past_u(config_.t_ini, static_cast<Eigen::Index>(plant_->num_inputs()));
  Matrix past_y(config_.t_ini, static_cast<Eigen::Index>(plant_->num_branches()));
  for (int k = 0; k < config_.t_ini; ++k) {
    past_u.row(k) = norm_.to_model_input(u_hist_[static_cast<std::size_t>(k)]).transpose();
    past_y.row(k) = (y_hist_[static_cast<std::size_t>(k)] - norm_.output_center).transpose();
  }
  StageProblem pr;
  pr.predictor = &predictor_;
  pr.gamma1 = predictor_.gamma1(deepc::stack_z_ini(past_u, past_y));
  pr.bounds = &bounds;
  pr.zone = zone_;
  pr.config = &config_;
  pr.norm = norm_;
  pr.surrogates = surrogates;
  pr.dt_hours = plant_->sampling_period / 3600.0;
  pr.current_pattern = pump_state_;
  return pr;
}

Vector ZoneController::control_step(const Vector& levels,
                                    const hydro::Disturbance& disturbance,
                                    StepLog* log) {
  const auto bounds = build_input_bounds(levels, disturbance, *plant_);
  const auto surrogates = fit_pump_surrogates(bounds, *plant_, config_.surrogate_samples);
  const StageProblem pr = stage_problem(bounds, surrogates);

  if (log) {
    log->y = levels;
    log->d = disturbance.stacked();
    log->pump_domains.clear();
    for (std::size_t k = 0; k < bounds.num_pumps(); ++k) {
      const auto i = static_cast<Eigen::Index>(bounds.pump_inputs[k]);
      log->pump_domains.push_back(bounds.pump_can_run[k]
                                      ? Interval{bounds.lower[i], bounds.upper[i]}
                                      : Interval{0.0, 0.0});
    }
  }

  Vector u;
  try {
    const ZoneStageResult zone = solve_zone_stage(pr);
    const StageSolution energy = solve_energy_stage(pr, zone);
    u = energy.inputs.row(0).transpose();
    // Pump entries follow the chosen pattern exactly.
    for (std::size_t k = 0; k < bounds.num_pumps(); ++k) {
      const auto i = static_cast<Eigen::Index>(bounds.pump_inputs[k]);
      u[i] = energy.binaries[k] ? std::clamp(u[i], bounds.lower[i], bounds.upper[i]) : 0.0;
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (!bounds.is_pump_input(static_cast<std::size_t>(i))) {
        u[i] = std::clamp(u[i], bounds.lower[i], bounds.upper[i]);
      }
    }
    if (log) {
      log->zc_star = zone.best.zone_cost;
      log->stage2_zone_cost = energy.zone_cost;
      log->stage2_cost = energy.objective;
      log->binaries.assign(energy.binaries.begin(),
                           energy.binaries.begin() +
                               static_cast<std::ptrdiff_t>(bounds.num_pumps()));
      log->solver_status = std::string(to_string(energy.status));
      log->combos_explored = energy.combos_explored;
      log->budget_exhausted = energy.budget_exhausted;
      log->fallback = false;
    }
  } catch (const Infeasible& e) {
    spdlog::warn("{}; applying passive rules", e.what());
    u = passive_.step(levels, disturbance);
    if (log) {
      log->fallback = true;
      log->solver_status = "infeasible";
      log->zc_star = 0.0;
      log->stage2_zone_cost = 0.0;
      log->stage2_cost = 0.0;
      log->combos_explored = 0;
      log->binaries.clear();
      for (std::size_t k = 0; k < bounds.num_pumps(); ++k) {
        log->binaries.push_back(u[static_cast<Eigen::Index>(bounds.pump_inputs[k])] > 0.0);
      }
    }
  }
  if (log) log->u = u;
  return u;
}

}  // namespace ezdeepc::zone
