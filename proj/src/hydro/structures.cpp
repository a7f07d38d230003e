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

#include "ezdeepc/hydro/structures.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/roots.hpp>

namespace ezdeepc::hydro {

namespace {

// Bracket search upper limit for pump discharge (m^3/s).
constexpr double kMaxPumpDischarge = 1024.0;
// Sample count used to detect extra sign changes of capacity - demand.
constexpr int kMonotonicitySamples = 128;
// Coarse scan step for the feasible speed interval (rpm).
constexpr double kSpeedScanStep = 1.0;
constexpr double kSpeedBoundaryTol = 1e-6;

}  // namespace

double weir_discharge(double h_high, double crest_height, const Weir& weir,
                      double gravity) {
  const double head = h_high - crest_height;
  if (!(head > 0.0)) return 0.0;
  return 2.0 / 3.0 * weir.discharge_coeff * weir.crest_width *
         std::sqrt(2.0 * gravity) * std::pow(head, 1.5);
}

bool gate_may_open(double h_branch, double h_river, FlowDirection direction) {
  return direction == FlowDirection::kInflow ? h_river - h_branch >= 0.0
                                             : h_branch - h_river >= 0.0;
}

double gate_discharge(double h_branch, double h_river, double opening_ratio,
                      const SluiceGate& gate, double gravity) {
  if (opening_ratio <= 0.0) return 0.0;
  if (!gate_may_open(h_branch, h_river, gate.direction)) return 0.0;
  const double ratio = std::min(opening_ratio, 1.0);
  return gate.discharge_coeff * gate.width * ratio * gate.max_opening *
         std::sqrt(2.0 * gravity * std::abs(h_branch - h_river));
}

double nominal_head(double q, const Pump& pump) {
  // Horner.
  double h = 0.0;
  for (auto it = pump.nominal_hq_curve.rbegin();
       it != pump.nominal_hq_curve.rend(); ++it) {
    h = h * q + *it;
  }
  return h;
}

double pump_head_capacity(double q, double nbar, const Pump& pump) {
  return nbar * nbar * nominal_head(q / nbar, pump);
}

double PipeSection::friction_coefficient() const {
  const double d2 = inner_diameter * inner_diameter;
  return (darcy_friction * length / inner_diameter + minor_loss_sum) * 8.0 /
         (gravity * std::numbers::pi * std::numbers::pi * d2 * d2);
}

double demand_head(double q, double h_static, const PipeSection& pipe) {
  return h_static + pipe.friction_coefficient() * q * q;
}

double static_head(double h_branch, double h_river, FlowDirection direction) {
  return direction == FlowDirection::kInflow ? h_branch - h_river
                                             : h_river - h_branch;
}

std::optional<double> solve_pump_operating_point(double nbar, double h_static,
                                                 const Pump& pump,
                                                 const PipeSection& pipe) {
  if (nbar == 0.0) return 0.0;
  const double k = pipe.friction_coefficient();
  auto residual = [&](double q) {
    return pump_head_capacity(q, nbar, pump) - (h_static + k * q * q);
  };

  const double f0 = residual(0.0);
  double hi = 1.0;
  while (hi < kMaxPumpDischarge && residual(hi) > 0.0) hi *= 2.0;
  const double f_hi = residual(hi);

  // Capacity minus demand must cross zero at most once on [0, hi].
  int sign_changes = 0;
  double prev = f0;
  for (int i = 1; i <= kMonotonicitySamples; ++i) {
    const double f = residual(hi * i / kMonotonicitySamples);
    if ((prev > 0.0 && f < 0.0) || (prev < 0.0 && f > 0.0)) ++sign_changes;
    if (f != 0.0) prev = f;
  }
  if (sign_changes > 1 || (f0 < 0.0 && sign_changes > 0)) {
    throw NonUniqueRoot("pump H-Q curve crosses the demand curve " +
                        std::to_string(sign_changes) + " times");
  }
  if (f0 < 0.0) return std::nullopt;
  if (f0 == 0.0) return 0.0;
  if (f_hi > 0.0) return std::nullopt;

  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, 0.0, hi, f0, f_hi, boost::math::tools::eps_tolerance<double>(52),
      max_iter);
  const double q = std::abs(residual(a)) <= std::abs(residual(b)) ? a : b;
  return q;
}

double pump_power(double q, double nbar, const Pump& pump) {
  if (nbar == 0.0) return 0.0;
  const auto& a = pump.power_coeffs;
  return a[0] * q * q * q + a[1] * nbar * q * q + a[2] * nbar * nbar * q +
         a[3] * nbar * nbar * nbar;
}

bool operating_point_feasible(double speed_rpm, double h_static,
                              const Pump& pump, const PipeSection& pipe) {
  if (!pump.speed_bounds.contains(speed_rpm)) return false;
  const double nbar = pump.normalized(speed_rpm);
  const auto q = solve_pump_operating_point(nbar, h_static, pump, pipe);
  if (!q) return false;
  const auto& region = pump.region;
  if (*q < region.q_min_on) return false;
  const double p = pump_power(*q, nbar, pump);
  if (p < region.p_min_kw || p > region.p_max_kw) return false;
  return region.head_range.contains(demand_head(*q, h_static, pipe));
}

std::optional<Interval> feasible_speed_interval(double h_static,
                                                const Pump& pump,
                                                const PipeSection& pipe) {
  const double n_min = pump.speed_bounds.lo;
  const double n_max = pump.speed_bounds.hi;
  auto feasible = [&](double n) {
    return operating_point_feasible(n, h_static, pump, pipe);
  };

  std::vector<double> grid;
  for (double n = n_min; n < n_max; n += kSpeedScanStep) grid.push_back(n);
  grid.push_back(n_max);

  // Widest run of feasible grid points; ties keep the slower run.
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t i = 0; i <= grid.size(); ++i) {
    const bool ok = i < grid.size() && feasible(grid[i]);
    if (ok && !in_run) {
      run_start = i;
      in_run = true;
    } else if (!ok && in_run) {
      in_run = false;
      const std::pair<std::size_t, std::size_t> run{run_start, i - 1};
      if (!best || grid[run.second] - grid[run.first] >
                       grid[best->second] - grid[best->first]) {
        best = run;
      }
    }
  }
  if (!best) return std::nullopt;

  // Bisection between an infeasible and a feasible speed; returns the
  // feasible end.
  auto refine = [&](double infeasible, double ok) {
    while (std::abs(ok - infeasible) > kSpeedBoundaryTol) {
      const double mid = 0.5 * (ok + infeasible);
      (feasible(mid) ? ok : infeasible) = mid;
    }
    return ok;
  };
  double lo = grid[best->first];
  double hi = grid[best->second];
  if (best->first > 0) lo = refine(grid[best->first - 1], lo);
  if (best->second + 1 < grid.size()) hi = refine(grid[best->second + 1], hi);
  return Interval{lo, hi};
}

}  // namespace ezdeepc::hydro
