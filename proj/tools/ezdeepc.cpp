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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ezdeepc/bo/tuner.hpp"
#include "ezdeepc/deepc/hankel.hpp"
#include "ezdeepc/deepc/trajectory.hpp"
#include "ezdeepc/harness/experiment.hpp"
#include "ezdeepc/hydro/config_io.hpp"
#include "ezdeepc/hydro/simulator.hpp"

namespace fs = std::filesystem;
using namespace ezdeepc;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::vector<std::string> scenarios;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string mode = "ez";
  std::optional<double> alpha;
  std::optional<int> steps;
  std::string data;
  std::string inputs;
  bool synthetic = false;
};

std::string iso_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, const Options& o, int argc, char** argv)
      : command_(std::move(command)), out_(o.out), started_(iso_now()) {
    for (int i = 0; i < argc; ++i) argv_.emplace_back(argv[i]);
    configs_ = nlohmann::json::array();
    if (!o.config.empty()) configs_.push_back(o.config);
    for (const auto& s : o.scenarios) configs_.push_back(s);
    if (!o.data.empty()) configs_.push_back(o.data);
  }
  void seed(const std::string& key, std::uint64_t v) { seeds_[key] = v; }
  void extra(const std::string& key, nlohmann::json v) { extra_[key] = std::move(v); }
  void write() const {
    nlohmann::json j = {{"command", command_},
                        {"argv", argv_},
                        {"config_paths", configs_},
                        {"seeds", seeds_},
                        {"version", EZDEEPC_VERSION},
                        {"output_dir", out_},
                        {"started", started_},
                        {"finished", iso_now()}};
    if (!extra_.empty()) j["results"] = extra_;
    std::ofstream f(fs::path(out_) / "manifest.json");
    f << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::string out_;
  std::string started_;
  std::vector<std::string> argv_;
  nlohmann::json configs_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

harness::Experiment load(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  auto exp = harness::load_experiment(o.config);
  if (!o.scenarios.empty()) harness::apply_scenario(exp, read_json_file(o.scenarios.front()));
  if (o.seed) exp.scenario.seed = *o.seed;
  return exp;
}

void prepare_out(const Options& o) { fs::create_directories(o.out); }

void write_levels_csv(const fs::path& path, const harness::ClosedLoopRun& run) {
  deepc::TrajectoryData t;
  const auto n = run.inputs.rows();
  t.inputs = run.inputs;
  t.outputs = run.levels.bottomRows(n);
  t.disturbances = run.disturbances;
  deepc::write_csv(path.string(), t);
}

void print_excitation(const deepc::TrajectoryData& data, int t_ini, int n_c) {
  const auto pe = deepc::check_persistent_excitation(data.inputs, t_ini + n_c);
  std::cout << "input excitation (order " << t_ini + n_c << "): rank " << pe.rank << "/"
            << pe.rows << ", sigma_min " << pe.smallest_singular_value << ", sigma_max "
            << pe.largest_singular_value << (pe.persistently_exciting ? "" : "  [NOT PE]")
            << '\n';
}

deepc::TrajectoryData obtain_data(const Options& o, const harness::Experiment& exp) {
  if (!o.data.empty()) return deepc::read_csv(o.data);
  spdlog::warn("no --data given; collecting {} steps of excitation data", exp.data_length);
  return harness::collect_excitation_data(exp.plant, exp.zone, exp.scenario, exp.data_length,
                                          exp.collection)
      .data;
}

int cmd_simulate(const Options& o, Manifest& m) {
  const auto exp = load(o);
  prepare_out(o);
  const int steps = o.steps.value_or(exp.scenario.horizon);
  const auto d = harness::generate_disturbances(exp.scenario, exp.plant, steps);
  std::optional<deepc::TrajectoryData> given;
  if (!o.inputs.empty()) {
    given = deepc::read_csv(o.inputs);
    if (given->length() < steps) throw ConfigError("input file has fewer rows than --steps");
  }
  zone::PassiveController passive(exp.plant, exp.zone, exp.passive);
  Vector y = harness::sample_initial_levels(exp.scenario, exp.zone.center, exp.scenario.seed);
  deepc::TrajectoryData t;
  t.inputs.resize(steps, static_cast<Eigen::Index>(exp.plant.num_inputs()));
  t.outputs.resize(steps, static_cast<Eigen::Index>(exp.plant.num_branches()));
  t.disturbances.resize(steps, static_cast<Eigen::Index>(exp.plant.num_disturbances()));
  double energy = 0.0;
  for (int k = 0; k < steps; ++k) {
    const auto& dk = d[static_cast<std::size_t>(k)];
    const Vector u = given ? Vector(given->inputs.row(k).transpose()) : passive.step(y, dk);
    const auto r = hydro::step(y, u, dk, exp.plant);
    y = r.next_levels;
    energy += r.energy_kwh;
    t.inputs.row(k) = r.applied_input.transpose();
    t.outputs.row(k) = y.transpose();
    t.disturbances.row(k) = dk.stacked().transpose();
  }
  deepc::write_csv((fs::path(o.out) / "trajectory.csv").string(), t);
  m.seed("scenario", exp.scenario.seed);
  m.extra("total_energy_kwh", energy);
  std::cout << "simulated " << steps << " steps, pump energy " << energy << " kWh\n";
  return 0;
}

int cmd_collect(const Options& o, Manifest& m) {
  const auto exp = load(o);
  prepare_out(o);
  const int length = o.steps.value_or(exp.data_length);
  if (length < exp.controller.t_ini + exp.controller.n_c) {
    throw UsageError("--steps must be at least t_ini + n_c");
  }
  const auto r = harness::collect_excitation_data(exp.plant, exp.zone, exp.scenario, length,
                                                  exp.collection);
  deepc::write_csv((fs::path(o.out) / "data.csv").string(), r.data);
  std::ofstream iv(fs::path(o.out) / "interventions.csv");
  iv << "branch,begin,end,direction\n";
  for (const auto& i : r.interventions) {
    iv << i.branch << ',' << i.begin << ',' << i.end << ',' << (i.high ? "drain" : "fill") << '\n';
  }
  std::cout << "collected " << r.data.length() << " rows, " << r.interventions.size()
            << " intervention intervals\n";
  print_excitation(r.data, exp.controller.t_ini, exp.controller.n_c);
  m.seed("scenario", exp.scenario.seed);
  m.seed("collection", exp.collection.seed);
  m.extra("rows", r.data.length());
  m.extra("interventions", r.interventions.size());
  return 0;
}

int cmd_tune(const Options& o, Manifest& m) {
  prepare_out(o);
  if (o.synthetic) {
    bo::BoConfig cfg;
    if (!o.config.empty()) {
      const auto doc = read_json_file(o.config);
      if (doc.contains("bo")) cfg = bo::parse_bo(doc["bo"]);
    }
    if (o.seed) cfg.seed = *o.seed;
    const auto r = bo::run_bo([](double a, int, int) { return -(a - 0.6) * (a - 0.6); }, cfg);
    bo::write_audit_csv((fs::path(o.out) / "audit.csv").string(), r.audit);
    write_text(fs::path(o.out) / "surrogate.json", r.surrogate.to_json().dump(2) + "\n");
    std::cout << "alpha* = " << r.alpha_star << '\n';
    m.extra("alpha_star", r.alpha_star);
    return 0;
  }
  if (o.config.empty()) throw UsageError("--config is required");
  const auto doc = read_json_file(o.config);
  auto base = harness::parse_experiment(doc);
  auto cfg = bo::parse_bo(base.bo);
  if (o.steps) cfg.horizon = *o.steps;
  if (o.seed) cfg.seed = *o.seed;
  const auto data = obtain_data(o, base);

  std::vector<harness::Experiment> worlds;
  if (o.scenarios.empty()) {
    worlds.push_back(base);
  } else {
    for (const auto& s : o.scenarios) {
      auto e = base;
      harness::apply_scenario(e, read_json_file(s));
      worlds.push_back(std::move(e));
    }
  }
  std::vector<bo::GpSurrogate> surrogates;
  nlohmann::json per_run = nlohmann::json::array();
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    spdlog::info("tuning on scenario {} (seed {})", i, worlds[i].scenario.seed);
    const auto r = bo::tune_alpha(worlds[i], data, cfg);
    const auto tag = worlds.size() == 1 ? std::string() : "_" + std::to_string(i);
    bo::write_audit_csv((fs::path(o.out) / ("audit" + tag + ".csv")).string(), r.audit);
    write_text(fs::path(o.out) / ("surrogate" + tag + ".json"), r.surrogate.to_json().dump(2) + "\n");
    per_run.push_back({{"scenario_seed", worlds[i].scenario.seed}, {"alpha_star", r.alpha_star}});
    m.seed("scenario_" + std::to_string(i), worlds[i].scenario.seed);
    surrogates.push_back(r.surrogate);
  }
  const auto curve = bo::aggregate_runs(surrogates, cfg.grid_points);
  bo::write_curve_csv((fs::path(o.out) / "mean_curve.csv").string(), curve);
  write_text(fs::path(o.out) / "alpha_star.json",
             nlohmann::json({{"alpha_star", curve.argmax}, {"runs", per_run}}).dump(2) + "\n");
  m.seed("bo", cfg.seed);
  m.extra("alpha_star", curve.argmax);
  std::cout << "alpha* = " << curve.argmax << '\n';
  return 0;
}

int cmd_control(const Options& o, Manifest& m) {
  const auto exp = load(o);
  const auto mode = harness::control_mode_from_string(o.mode);
  prepare_out(o);
  const int steps = o.steps.value_or(200);
  const double alpha = o.alpha.value_or(exp.tuned_alpha.value_or(1.0));
  std::optional<deepc::TrajectoryData> data;
  if (mode != harness::ControlMode::kPassive) {
    if (o.data.empty()) throw UsageError("--data is required for mode " + o.mode);
    data = deepc::read_csv(o.data);
  }
  const auto run = harness::run_closed_loop(exp, data ? &*data : nullptr, mode, alpha, steps);
  harness::write_step_log((fs::path(o.out) / "steps.jsonl").string(), run);
  write_levels_csv(fs::path(o.out) / "trajectory.csv", run);
  nlohmann::json mj = run.metrics.to_json();
  mj["mode"] = o.mode;
  mj["alpha"] = run.alpha;
  mj["fallbacks"] = run.fallbacks;
  write_text(fs::path(o.out) / "metrics.json", mj.dump(2) + "\n");
  std::cout << harness::format_table({{o.mode, run.metrics, true, {}}});
  m.seed("scenario", exp.scenario.seed);
  m.extra("metrics", mj);
  return 0;
}

int cmd_compare(const Options& o, Manifest& m) {
  const auto exp = load(o);
  prepare_out(o);
  const int steps = o.steps.value_or(200);
  const double alpha = o.alpha.value_or(exp.tuned_alpha.value_or(1.0));
  const auto data = obtain_data(o, exp);
  const auto rows = harness::run_comparison(exp, data, alpha, steps);
  std::vector<harness::NamedReport> reports;
  nlohmann::json mj = nlohmann::json::array();
  const char* tags[] = {"ez_tuned", "ez_alpha1", "es", "passive"};
  bool all_ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    reports.push_back(rows[i].report);
    nlohmann::json e = {{"name", rows[i].report.name}, {"ok", rows[i].report.ok}};
    if (rows[i].run) {
      e["metrics"] = rows[i].report.metrics.to_json();
      e["alpha"] = rows[i].run->alpha;
      e["fallbacks"] = rows[i].run->fallbacks;
      harness::write_step_log((fs::path(o.out) / (std::string(tags[i]) + ".jsonl")).string(),
                              *rows[i].run);
    } else {
      e["error"] = rows[i].report.error;
      all_ok = false;
    }
    mj.push_back(e);
  }
  const auto table = harness::format_table(reports);
  write_text(fs::path(o.out) / "report.txt", table);
  write_text(fs::path(o.out) / "metrics.json", mj.dump(2) + "\n");
  std::cout << table;
  m.seed("scenario", exp.scenario.seed);
  m.extra("alpha", alpha);
  return all_ok ? 0 : 1;
}

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("EZDEEPC_LOG")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Economic zone DeePC for drainage networks"};
  app.require_subcommand(1);
  Options o;
  const auto common = [&](CLI::App* c, bool data) {
    c->add_option("--config", o.config, "experiment config (JSON)");
    c->add_option("--scenario", o.scenarios, "scenario file(s) overriding the config scenario");
    c->add_option("--seed", o.seed, "scenario seed override");
    c->add_option("--out", o.out, "output directory");
    c->add_option("--steps", o.steps, "number of steps");
    if (data) c->add_option("--data", o.data, "excitation data CSV");
  };
  auto* sim = app.add_subcommand("simulate", "open-loop simulation (passive or given inputs)");
  common(sim, false);
  sim->add_option("--inputs", o.inputs, "trajectory CSV whose inputs are replayed");
  auto* col = app.add_subcommand("collect", "collect excitation data");
  common(col, false);
  auto* tune = app.add_subcommand("tune", "tune the zone contraction rate");
  common(tune, true);
  tune->add_flag("--synthetic", o.synthetic, "tune the analytic test objective");
  auto* ctl = app.add_subcommand("control", "closed-loop control run");
  common(ctl, true);
  ctl->add_option("--mode", o.mode, "ez | es | ez-raw | passive")
      ->check(CLI::IsMember({"ez", "es", "ez-raw", "passive"}));
  ctl->add_option("--alpha", o.alpha, "zone contraction rate")->check(CLI::Range(0.0, 1.0));
  auto* cmp = app.add_subcommand("compare", "four-way controller comparison");
  common(cmp, true);
  cmp->add_option("--alpha", o.alpha, "tuned zone contraction rate")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name(), o, argc, argv);
  try {
    int rc = 0;
    if (sub == sim) rc = cmd_simulate(o, manifest);
    if (sub == col) rc = cmd_collect(o, manifest);
    if (sub == tune) rc = cmd_tune(o, manifest);
    if (sub == ctl) rc = cmd_control(o, manifest);
    if (sub == cmp) rc = cmd_compare(o, manifest);
    manifest.write();
    return rc;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
