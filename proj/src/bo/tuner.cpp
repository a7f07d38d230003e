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

#include "ezdeepc/bo/tuner.hpp"

#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

namespace ezdeepc::bo {

void BoConfig::validate() const {
  if (w_ini < 1 || w_max < w_ini) throw ConfigError("BO needs 1 <= w_ini <= w_max");
  if (static_cast<int>(initial_alphas.size()) < w_ini) {
    throw ConfigError("BO needs at least w_ini initial alphas");
  }
  for (double a : initial_alphas) {
    if (a < 0.0 || a > 1.0) throw ConfigError("initial alphas must lie in [0, 1]");
  }
  if (kappa < 0.0 || energy_weight < 0.0) throw ConfigError("kappa and energy weight must be >= 0");
  if (horizon < 1) throw ConfigError("BO horizon must be >= 1");
  if (grid_points < 2) throw ConfigError("BO grid needs at least 2 points");
  if (noise_variance < 0.0 || initial_spread < 0.0 || max_retries < 0) {
    throw ConfigError("BO noise variance, spread and retries must be >= 0");
  }
  kernel.validate();
}

BoConfig parse_bo(const nlohmann::json& j) {
  BoConfig c;
  try {
    c.initial_alphas = j.value("initial_alphas", c.initial_alphas);
    c.w_ini = j.value("w_ini", static_cast<int>(c.initial_alphas.size()));
    c.w_max = j.value("w_max", c.w_max);
    c.kappa = j.value("kappa", c.kappa);
    c.horizon = j.value("horizon", c.horizon);
    c.energy_weight = j.value("energy_weight", c.energy_weight);
    c.grid_points = j.value("grid_points", c.grid_points);
    c.kernel.variance = j.value("kernel_variance", c.kernel.variance);
    c.kernel.length_scale = j.value("length_scale", c.kernel.length_scale);
    c.kernel.smoothness = j.value("smoothness", c.kernel.smoothness);
    c.noise_variance = j.value("noise_variance", c.noise_variance);
    c.initial_spread = j.value("initial_spread", c.initial_spread);
    c.seed = j.value("seed", c.seed);
    c.max_retries = j.value("max_retries", c.max_retries);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bo config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const BoConfig& c) {
  return {{"w_ini", c.w_ini},
          {"w_max", c.w_max},
          {"initial_alphas", c.initial_alphas},
          {"kappa", c.kappa},
          {"horizon", c.horizon},
          {"energy_weight", c.energy_weight},
          {"grid_points", c.grid_points},
          {"kernel_variance", c.kernel.variance},
          {"length_scale", c.kernel.length_scale},
          {"smoothness", c.kernel.smoothness},
          {"noise_variance", c.noise_variance},
          {"initial_spread", c.initial_spread},
          {"seed", c.seed},
          {"max_retries", c.max_retries}};
}

double propose_next(const GpSurrogate& gp, const BoConfig& config) {
  const auto grid = alpha_grid(config.grid_points);
  std::vector<double> ucb(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = gp.posterior(grid[i]);
    ucb[i] = p.mean + config.kappa * p.stddev;
  }
  return grid[argmax_first(ucb)];
}

MeanCurve posterior_mean_curve(const GpSurrogate& gp, int grid_points) {
  MeanCurve c;
  c.grid = alpha_grid(grid_points);
  c.mean.resize(c.grid.size());
  for (std::size_t i = 0; i < c.grid.size(); ++i) c.mean[i] = gp.posterior(c.grid[i]).mean;
  c.argmax = c.grid[argmax_first(c.mean)];
  return c;
}

BoResult run_bo(const Objective& objective, const BoConfig& config) {
  config.validate();
  BoResult r{0.0, GpSurrogate(config.kernel, config.noise_variance), {}};
  for (int w = 0; w < config.w_max; ++w) {
    const double alpha = w < config.w_ini ? config.initial_alphas[static_cast<std::size_t>(w)]
                                          : propose_next(r.surrogate, config);
    double phi = 0.0;
    for (int attempt = 0;; ++attempt) {
      try {
        phi = objective(alpha, w, attempt);
        break;
      } catch (const Error& e) {
        if (attempt >= config.max_retries) throw;
        spdlog::warn("evaluation {} at alpha {:.4f} failed ({}); resampling", w, alpha, e.what());
      }
    }
    r.surrogate.add(alpha, phi);
    const double best = posterior_mean_curve(r.surrogate, config.grid_points).argmax;
    r.audit.push_back({w + 1, alpha, phi, best});
    spdlog::info("bo iter {:2d}: alpha {:.4f} phi {:.6g} argmax {:.4f}", w + 1, alpha, phi, best);
  }
  r.alpha_star = r.audit.back().posterior_argmax;
  return r;
}

MeanCurve aggregate_runs(const std::vector<GpSurrogate>& surrogates, int grid_points) {
  if (surrogates.empty()) throw Error("aggregate_runs needs at least one surrogate");
  MeanCurve c;
  c.grid = alpha_grid(grid_points);
  c.mean.assign(c.grid.size(), 0.0);
  for (const auto& gp : surrogates) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) c.mean[i] += gp.posterior(c.grid[i]).mean;
  }
  for (double& m : c.mean) m /= static_cast<double>(surrogates.size());
  c.argmax = c.grid[argmax_first(c.mean)];
  return c;
}

double bo_objective(const Matrix& levels, const Vector& energy_kwh,
                    const zone::ZoneSpec& zone, double energy_weight, int n, int t_ini) {
  if (n < 1 || t_ini < 0 || levels.rows() < t_ini + n || energy_kwh.size() < t_ini + n) {
    throw harness::WindowTooShort("objective window exceeds the trajectory");
  }
  double phi = 0.0;
  const Vector lo = zone.desired_lower();
  const Vector hi = zone.desired_upper();
  for (int k = t_ini; k < t_ini + n; ++k) {
    phi -= zone::box_distance_l1(levels.row(k).transpose(), lo, hi) +
           energy_weight * energy_kwh[k];
  }
  return phi;
}

double evaluate_candidate(const harness::Experiment& exp, const deepc::TrajectoryData& data,
                          double alpha, const BoConfig& config,
                          const std::vector<hydro::Disturbance>& disturbances,
                          const Vector& initial_levels) {
  const auto run = harness::run_closed_loop(exp, &data, harness::ControlMode::kEz, alpha,
                                            config.horizon, initial_levels, disturbances);
  return bo_objective(run.levels, run.energy_kwh, exp.zone, config.energy_weight,
                      config.horizon, run.t_ini);
}

BoResult tune_alpha(const harness::Experiment& exp, const deepc::TrajectoryData& data,
                    const BoConfig& config) {
  const auto d = harness::generate_disturbances(exp.scenario, exp.plant,
                                                exp.controller.t_ini + config.horizon);
  harness::DisturbanceScenario spread = exp.scenario;
  spread.initial_spread = config.initial_spread;
  const Objective objective = [&](double alpha, int index, int attempt) {
    const std::uint64_t seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(index) * 101ULL +
                               static_cast<std::uint64_t>(attempt);
    const Vector y0 = harness::sample_initial_levels(spread, exp.zone.center, seed);
    return evaluate_candidate(exp, data, alpha, config, d, y0);
  };
  return run_bo(objective, config);
}

void write_audit_csv(const std::string& path, const std::vector<AuditEntry>& audit) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "iter,alpha,phi,posterior_argmax\n";
  char line[128];
  for (const auto& a : audit) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", a.iter, a.alpha, a.phi,
                  a.posterior_argmax);
    out << line;
  }
}

void write_curve_csv(const std::string& path, const MeanCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "alpha,mean\n";
  char line[96];
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", curve.grid[i], curve.mean[i]);
    out << line;
  }
}

}  // namespace ezdeepc::bo
