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

#include "ezdeepc/zone/stages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <numeric>

#include <spdlog/spdlog.h>

namespace ezdeepc::zone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Interval widths below this are treated as a single admissible value.
constexpr double kPinnedWidth = 1e-12;
// Weight of the regularization terms when searching for the least zone cost
// attainable by a pattern.
constexpr double kPhaseOneRegularization = 1e-6;
constexpr double kMultiplierRatioTol = 1.001;
constexpr int kMultiplierSearchLimit = 60;

// Dense linear constraint set A_eq x = b_eq, A_in x >= b_in built row by row.
struct ConstraintSet {
  std::vector<Vector> eq_rows, in_rows;
  std::vector<double> eq_rhs, in_rhs;

  void bounds(const Vector& row, double offset, double lo, double hi) {
    // lo <= row.x + offset <= hi
    if (hi - lo <= kPinnedWidth * std::max(1.0, std::abs(lo))) {
      eq_rows.push_back(row);
      eq_rhs.push_back(0.5 * (lo + hi) - offset);
      return;
    }
    if (lo > -kInf) {
      in_rows.push_back(row);
      in_rhs.push_back(lo - offset);
    }
    if (hi < kInf) {
      in_rows.push_back(-row);
      in_rhs.push_back(offset - hi);
    }
  }
  void equal(const Vector& row, double offset, double value) {
    eq_rows.push_back(row);
    eq_rhs.push_back(value - offset);
  }

  void fill(QpProblem& qp, Eigen::Index n) const {
    auto stack = [n](const std::vector<Vector>& rows, const std::vector<double>& rhs,
                     Matrix& a, Vector& b) {
      a.resize(static_cast<Eigen::Index>(rows.size()), n);
      b.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        b[static_cast<Eigen::Index>(i)] = rhs[i];
      }
    };
    stack(eq_rows, eq_rhs, qp.eq_matrix, qp.eq_rhs);
    stack(in_rows, in_rhs, qp.ineq_matrix, qp.ineq_rhs);
  }
};

class StageModel {
 public:
  explicit StageModel(const StageProblem& pr) : pr_(pr) {
    if (!pr.predictor || !pr.bounds || !pr.config) {
      throw Error("stage problem is missing its predictor, bounds or config");
    }
    const auto& g = *pr.predictor;
    m_ = g.input_dim();
    p_ = g.output_dim();
    n_ = g.horizon();
    nu_ = m_ * n_;
    ny_ = p_ * n_;
    nx_ = nu_ + 2 * ny_;
    c_u_ = g.l21() * pr.gamma1;
    c_y_ = g.l31() * pr.gamma1;
    const Vector q = pr.config->q_diagonal(p_);
    qbar_ = q.replicate(n_, 1);
    mr_ = Matrix::Zero(ny_, nx_);
    mr_.leftCols(nu_) = g.l32();
    mr_.middleCols(nu_, ny_) = g.l33();
    mr_.rightCols(ny_) = -Matrix::Identity(ny_, ny_);
    w_ = mr_.transpose() * qbar_.asDiagonal() * mr_;
    w_lin_ = mr_.transpose() * qbar_.cwiseProduct(c_y_);
    if (pr.bounds->lower.size() != m_) {
      throw DimensionMismatch("input bounds do not match the predictor");
    }
  }

  [[nodiscard]] Eigen::Index nx() const { return nx_; }
  [[nodiscard]] std::size_t num_pumps() const { return pr_.bounds->num_pumps(); }

  [[nodiscard]] Vector model_inputs(const Vector& x) const {
    return c_u_ + pr_.predictor->l22() * x.head(nu_);
  }
  [[nodiscard]] Vector model_outputs(const Vector& x) const {
    return c_y_ + pr_.predictor->l32() * x.head(nu_) +
           pr_.predictor->l33() * x.segment(nu_, ny_);
  }
  [[nodiscard]] double tracking(const Vector& x) const {
    const Vector r = model_outputs(x) - x.tail(ny_);
    return r.dot(qbar_.cwiseProduct(r));
  }
  [[nodiscard]] double regularization(const Vector& x, double b2, double b3) const {
    return b2 * x.head(nu_).squaredNorm() + b3 * x.segment(nu_, ny_).squaredNorm();
  }

  [[nodiscard]] ConstraintSet constraints(const BinaryPattern& pattern,
                                          bool with_output_set = true) const {
    const auto& b = *pr_.bounds;
    const auto& nm = pr_.norm;
    const auto& l22 = pr_.predictor->l22();
    ConstraintSet cs;
    std::vector<int> pump_of(static_cast<std::size_t>(m_), -1);
    for (std::size_t k = 0; k < b.num_pumps(); ++k) {
      pump_of[b.pump_inputs[k]] = static_cast<int>(k);
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        const Eigen::Index r = j * m_ + i;
        Vector row = Vector::Zero(nx_);
        row.head(nu_) = l22.row(r).transpose();
        const double mu = nm.input_mean[i];
        const double sc = nm.input_scale[i];
        const int k = pump_of[static_cast<std::size_t>(i)];
        if (k >= 0 && !pattern[static_cast<std::size_t>(j) * num_pumps() +
                               static_cast<std::size_t>(k)]) {
          cs.equal(row, c_u_[r], (0.0 - mu) / sc);
        } else {
          cs.bounds(row, c_u_[r], (b.lower[i] - mu) / sc, (b.upper[i] - mu) / sc);
        }
      }
    }
    const Vector& center = nm.output_center;
    const Vector y_lo = pr_.zone.output_lower() - center;
    const Vector y_hi = pr_.zone.output_upper() - center;
    const Vector z_lo = pr_.zone.target_lower() - center;
    const Vector z_hi = pr_.zone.target_upper() - center;
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (Eigen::Index i = 0; i < p_; ++i) {
        const Eigen::Index r = j * p_ + i;
        if (with_output_set) {
          Vector row = Vector::Zero(nx_);
          row.head(nu_) = pr_.predictor->l32().row(r).transpose();
          row.segment(nu_, ny_) = pr_.predictor->l33().row(r).transpose();
          cs.bounds(row, c_y_[r], y_lo[i], y_hi[i]);
        }
        Vector zrow = Vector::Zero(nx_);
        zrow[nu_ + ny_ + r] = 1.0;
        cs.bounds(zrow, 0.0, z_lo[i], z_hi[i]);
      }
    }
    return cs;
  }

  // 0.5 x'Hx + g'x for tracking + b2 |g2|^2 + b3 |g3|^2.
  void zone_objective(double b2, double b3, double tracking_weight, QpProblem& qp) const {
    qp.hessian = 2.0 * tracking_weight * w_;
    qp.hessian.diagonal().head(nu_).array() += 2.0 * b2;
    qp.hessian.diagonal().segment(nu_, ny_).array() += 2.0 * b3;
    add_ridge(qp.hessian);
    qp.linear = 2.0 * tracking_weight * w_lin_;
  }

  static void add_ridge(Matrix& h) {
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    h.diagonal().array() += 1e-10 * scale;
  }

  // Surrogate energy (kWh), gradient and convexified Hessian w.r.t. x.
  double energy(const BinaryPattern& pattern, const Vector& x, Vector* grad,
                Matrix* hess) const {
    const auto& b = *pr_.bounds;
    const Vector u = model_inputs(x);
    const auto& l22 = pr_.predictor->l22();
    double e = 0.0;
    if (grad) *grad = Vector::Zero(nx_);
    if (hess) *hess = Matrix::Zero(nx_, nx_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (std::size_t k = 0; k < b.num_pumps(); ++k) {
        if (!pattern[static_cast<std::size_t>(j) * b.num_pumps() + k]) continue;
        const auto& s = pr_.surrogates[k];
        if (!s.available) continue;
        const auto i = static_cast<Eigen::Index>(b.pump_inputs[k]);
        const Eigen::Index r = j * m_ + i;
        const double sc = pr_.norm.input_scale[i];
        const double speed = pr_.norm.input_mean[i] + sc * u[r];
        e += s.power_kw(speed) * pr_.dt_hours;
        if (grad) {
          grad->head(nu_) += s.d_power(speed) * sc * pr_.dt_hours * l22.row(r).transpose();
        }
        if (hess) {
          const double curv = std::max(0.0, s.d2_power(speed)) * sc * sc * pr_.dt_hours;
          if (curv > 0.0) {
            hess->topLeftCorner(nu_, nu_) +=
                curv * l22.row(r).transpose() * l22.row(r);
          }
        }
      }
    }
    return e;
  }

  [[nodiscard]] double energy_lower_bound(const BinaryPattern& pattern) const {
    const auto& b = *pr_.bounds;
    double lb = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (std::size_t k = 0; k < b.num_pumps(); ++k) {
        if (!pattern[static_cast<std::size_t>(j) * b.num_pumps() + k]) continue;
        const auto& s = pr_.surrogates[k];
        if (!s.available) continue;
        lb += cubic_min(s) * pr_.dt_hours;
      }
    }
    return lb;
  }

  [[nodiscard]] StageSolution make_solution(const BinaryPattern& pattern,
                                            const Vector& x) const {
    StageSolution s;
    s.x = x;
    s.gamma2 = x.head(nu_);
    s.gamma3 = x.segment(nu_, ny_);
    s.binaries = pattern;
    const Vector u = model_inputs(x);
    const Vector y = model_outputs(x);
    s.inputs.resize(n_, m_);
    s.outputs.resize(n_, p_);
    s.zone_ref.resize(n_, p_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      s.inputs.row(j) = pr_.norm.to_physical_input(u.segment(j * m_, m_)).transpose();
      s.outputs.row(j) = (y.segment(j * p_, p_) + pr_.norm.output_center).transpose();
      s.zone_ref.row(j) =
          (x.segment(nu_ + ny_ + j * p_, p_) + pr_.norm.output_center).transpose();
    }
    s.zone_cost = tracking(x);
    s.energy_kwh = energy(pattern, x, nullptr, nullptr);
    return s;
  }

  [[nodiscard]] const Matrix& tracking_hessian() const { return w_; }
  [[nodiscard]] const Vector& tracking_linear() const { return w_lin_; }
  [[nodiscard]] Eigen::Index nu() const { return nu_; }
  [[nodiscard]] Eigen::Index ny() const { return ny_; }
  [[nodiscard]] Eigen::Index p() const { return p_; }
  [[nodiscard]] const Vector& c_y() const { return c_y_; }

 private:
  static double cubic_min(const PumpSurrogate& s) {
    double best = std::min(s.power_kw(s.speed.lo), s.power_kw(s.speed.hi));
    // Stationary points of the cubic in normalized speed.
    const double a = 3.0 * s.coeffs[3];
    const double b = 2.0 * s.coeffs[2];
    const double c = s.coeffs[1];
    std::vector<double> roots;
    if (std::abs(a) > 1e-300) {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        roots.push_back((-b + std::sqrt(disc)) / (2.0 * a));
        roots.push_back((-b - std::sqrt(disc)) / (2.0 * a));
      }
    } else if (std::abs(b) > 1e-300) {
      roots.push_back(-c / b);
    }
    for (double r : roots) {
      const double n = r * s.nominal_speed;
      if (s.speed.contains(n)) best = std::min(best, s.power_kw(n));
    }
    return best;
  }

  const StageProblem& pr_;
  Eigen::Index m_ = 0, p_ = 0, n_ = 0, nu_ = 0, ny_ = 0, nx_ = 0;
  Vector c_u_, c_y_, qbar_, w_lin_;
  Matrix mr_, w_;
};

QpResult solve_with(const StageModel& model, const ConstraintSet& cs,
                    QpProblem qp, const QpOptions& options) {
  cs.fill(qp, model.nx());
  return solve_qp(qp, options);
}

void combinations(int n, int k, int start, std::vector<int>& cur,
                  const std::function<bool(const std::vector<int>&)>& visit,
                  bool& stop) {
  if (stop) return;
  if (static_cast<int>(cur.size()) == k) {
    stop = !visit(cur);
    return;
  }
  for (int i = start; i < n && !stop; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, visit, stop);
    cur.pop_back();
  }
}

}  // namespace

Normalization Normalization::from_data(const Matrix& inputs, const Vector& output_center) {
  Normalization n;
  n.output_center = output_center;
  n.input_mean = inputs.colwise().mean().transpose();
  n.input_scale.resize(inputs.cols());
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
    const double var = inputs.rows() > 1
        ? (inputs.col(i).array() - n.input_mean[i]).square().sum() /
              static_cast<double>(inputs.rows() - 1)
        : 0.0;
    n.input_scale[i] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return n;
}

Vector Normalization::to_model_input(const Vector& u) const {
  return (u - input_mean).cwiseQuotient(input_scale);
}

Vector Normalization::to_physical_input(const Vector& u) const {
  return input_mean + u.cwiseProduct(input_scale);
}

Matrix Normalization::to_model_inputs(const Matrix& rows) const {
  return (rows.rowwise() - input_mean.transpose()).array().rowwise() /
         input_scale.transpose().array();
}

Matrix Normalization::to_model_outputs(const Matrix& rows) const {
  return rows.rowwise() - output_center.transpose();
}

double zone_cost_bound(double zc_star) {
  return zc_star + std::max(1e-8, 1e-6 * zc_star);
}

std::vector<BinaryPattern> enumerate_patterns(const TimeVaryingInputSet& bounds,
                                              const BinaryPattern& current,
                                              BinaryMode mode, int horizon,
                                              int budget, bool* exhausted) {
  const std::size_t mp = bounds.num_pumps();
  const std::size_t steps =
      mode == BinaryMode::kPerStep ? static_cast<std::size_t>(horizon) : 1;
  // Free bits: pumps allowed to run, per step in per-step mode.
  std::vector<std::size_t> free_bits;
  BinaryPattern base(steps * mp, false);
  for (std::size_t j = 0; j < steps; ++j) {
    for (std::size_t k = 0; k < mp; ++k) {
      if (!bounds.pump_can_run[k]) continue;
      free_bits.push_back(j * mp + k);
      base[j * mp + k] = k < current.size() && current[k];
    }
  }
  std::vector<BinaryPattern> out;
  bool stop = false;
  const int nf = static_cast<int>(free_bits.size());
  for (int d = 0; d <= nf && !stop; ++d) {
    std::vector<int> cur;
    combinations(nf, d, 0, cur,
                 [&](const std::vector<int>& flips) {
                   if (static_cast<int>(out.size()) >= budget) return false;
                   BinaryPattern p = base;
                   for (int f : flips) {
                     p[free_bits[static_cast<std::size_t>(f)]] =
                         !p[free_bits[static_cast<std::size_t>(f)]];
                   }
                   out.push_back(std::move(p));
                   return true;
                 },
                 stop);
  }
  if (exhausted) *exhausted = stop;
  // Expand to the full horizon in constant mode.
  if (mode == BinaryMode::kConstantOverHorizon) {
    for (auto& p : out) {
      BinaryPattern full(static_cast<std::size_t>(horizon) * mp);
      for (int j = 0; j < horizon; ++j) {
        std::copy(p.begin(), p.end(), full.begin() + static_cast<std::ptrdiff_t>(j * mp));
      }
      p = std::move(full);
    }
  }
  return out;
}

StageSolution solve_zone_pattern(const StageProblem& problem,
                                 const BinaryPattern& pattern) {
  const StageModel model(problem);
  const auto& cfg = *problem.config;
  QpProblem qp;
  model.zone_objective(cfg.beta2_zone, cfg.beta3_zone, 1.0, qp);
  const auto res = solve_with(model, model.constraints(pattern), qp, cfg.qp);
  StageSolution s;
  if (res.status == QpStatus::kOptimal) {
    s = model.make_solution(pattern, res.x);
    s.objective = s.zone_cost +
                  model.regularization(res.x, cfg.beta2_zone, cfg.beta3_zone);
  } else {
    s.binaries = pattern;
  }
  s.status = res.status;
  s.kkt_residual = res.kkt_residual;
  s.iterations = res.iterations;
  return s;
}

ZoneStageResult solve_zone_stage(const StageProblem& problem) {
  const auto& cfg = *problem.config;
  bool exhausted = false;
  const auto patterns =
      enumerate_patterns(*problem.bounds, problem.current_pattern, cfg.binary_mode,
                         cfg.n_c, cfg.max_binary_combos, &exhausted);
  ZoneStageResult result;
  double best = kInf;
  for (const auto& pat : patterns) {
    auto sol = solve_zone_pattern(problem, pat);
    if (!sol.ok()) continue;
    if (sol.objective < best) {
      best = sol.objective;
      result.best = sol;
    }
    result.patterns.push_back(std::move(sol));
  }
  if (result.patterns.empty()) {
    // Locate the output that cannot be kept inside the output set.
    const StageModel model(problem);
    QpProblem qp;
    model.zone_objective(cfg.beta2_zone, cfg.beta3_zone, 1.0, qp);
    const auto relaxed =
        solve_with(model, model.constraints(patterns.front(), false), qp, cfg.qp);
    int branch = -1;
    if (relaxed.status == QpStatus::kOptimal) {
      const Vector y = model.model_outputs(relaxed.x);
      const Vector lo = problem.zone.output_lower() - problem.norm.output_center;
      const Vector hi = problem.zone.output_upper() - problem.norm.output_center;
      double worst = 0.0;
      for (Eigen::Index r = 0; r < y.size(); ++r) {
        const Eigen::Index i = r % model.p();
        const double v = std::max(lo[i] - y[r], y[r] - hi[i]);
        if (v > worst) {
          worst = v;
          branch = static_cast<int>(i);
        }
      }
    }
    throw Infeasible("zone stage is infeasible for every explored pump pattern" +
                         (branch >= 0 ? " (branch " + std::to_string(branch) + ")"
                                      : std::string()),
                     branch);
  }
  result.best.combos_explored = static_cast<int>(patterns.size());
  result.best.budget_exhausted = exhausted;
  return result;
}

double energy_objective(const StageProblem& problem, const BinaryPattern& pattern,
                        const Vector& x, double* energy_kwh) {
  const StageModel model(problem);
  const double e = model.energy(pattern, x, nullptr, nullptr);
  if (energy_kwh) *energy_kwh = e;
  return e + model.regularization(x, problem.config->beta2_energy,
                                  problem.config->beta3_energy);
}

namespace {

// Largest t in [0, 1] with tracking(x0 + t (x1 - x0)) <= bound, given that
// x0 satisfies the bound.
double restore_fraction(const StageModel& model, const Vector& x0, const Vector& x1,
                        double bound) {
  const double f0 = model.tracking(x0);
  const double f1 = model.tracking(x1);
  if (f1 <= bound) return 1.0;
  const double fh = model.tracking(0.5 * (x0 + x1));
  // Quadratic a t^2 + b t + c through t = 0, 0.5, 1.
  const double c = f0 - bound;
  const double a = 2.0 * (f1 - 2.0 * fh + f0);
  const double b = f1 - f0 - a;
  double t = 0.0;
  if (std::abs(a) > 1e-300) {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) t = (-b + std::sqrt(disc)) / (2.0 * a);
  } else if (std::abs(b) > 1e-300) {
    t = -c / b;
  }
  t = std::clamp(t, 0.0, 1.0);
  while (t > 0.0 && model.tracking(x0 + t * (x1 - x0)) > bound) t *= 0.999;
  return t;
}

struct EnergyRun {
  Vector x;
  double objective = kInf;
  int iterations = 0;
};

EnergyRun minimize_energy(const StageProblem& problem, const StageModel& model,
                          const BinaryPattern& pattern, const ConstraintSet& cs,
                          const Vector& x0, double bound) {
  const auto& cfg = *problem.config;
  const double b2 = cfg.beta2_energy;
  const double b3 = cfg.beta3_energy;
  auto objective = [&](const Vector& x) {
    return model.energy(pattern, x, nullptr, nullptr) + model.regularization(x, b2, b3);
  };

  EnergyRun run;
  run.x = x0;
  run.objective = objective(x0);
  double mu_hint = 1.0;
  const Eigen::Index nu = model.nu();
  const Eigen::Index ny = model.ny();

  for (int it = 0; it < cfg.sqp_max_iterations; ++it) {
    run.iterations = it + 1;
    Vector grad;
    Matrix hess;
    model.energy(pattern, run.x, &grad, &hess);
    QpProblem base;
    base.hessian = hess;
    base.hessian.diagonal().head(nu).array() += 2.0 * b2;
    base.hessian.diagonal().segment(nu, ny).array() += 2.0 * b3;
    const double prox = 1e-8 * std::max(1.0, base.hessian.diagonal().maxCoeff());
    base.hessian.diagonal().array() += 2.0 * prox;
    base.linear = grad - hess * run.x - 2.0 * prox * run.x;

    auto solve_mu = [&](double mu) {
      QpProblem qp = base;
      qp.hessian += 2.0 * mu * model.tracking_hessian();
      qp.linear += 2.0 * mu * model.tracking_linear();
      return solve_with(model, cs, std::move(qp), cfg.qp);
    };
    auto feasible = [&](const QpResult& r) {
      return r.status == QpStatus::kOptimal && model.tracking(r.x) <= bound;
    };

    QpResult cand = solve_mu(0.0);
    if (!feasible(cand)) {
      double lo = 0.0;
      double hi = mu_hint;
      QpResult at_hi = solve_mu(hi);
      int guard = 0;
      while (!feasible(at_hi) && guard++ < kMultiplierSearchLimit) {
        lo = hi;
        hi *= 10.0;
        at_hi = solve_mu(hi);
      }
      if (!feasible(at_hi)) break;
      guard = 0;
      while (guard++ < kMultiplierSearchLimit &&
             (lo == 0.0 ? hi > 1e-12 : hi / lo > kMultiplierRatioTol)) {
        const double mid = lo == 0.0 ? hi / 10.0 : std::sqrt(lo * hi);
        QpResult at_mid = solve_mu(mid);
        if (feasible(at_mid)) {
          hi = mid;
          at_hi = std::move(at_mid);
        } else {
          lo = mid;
          if (lo == 0.0) break;
        }
      }
      mu_hint = hi;
      cand = std::move(at_hi);
    }

    const Vector d = cand.x - run.x;
    double a = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
      const Vector xn = run.x + a * d;
      const double fn = objective(xn);
      if (fn <= run.objective && model.tracking(xn) <= bound) {
        run.x = xn;
        run.objective = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted || a * d.norm() <= cfg.sqp_step_tol) break;
  }
  return run;
}

}  // namespace

StageSolution solve_energy_stage(const StageProblem& problem,
                                 const ZoneStageResult& zone_result) {
  const StageModel model(problem);
  const auto& cfg = *problem.config;
  const double zc_star = zone_result.best.zone_cost;
  const double bound = zone_cost_bound(zc_star);

  struct Candidate {
    const StageSolution* zone;
    double lower_bound;
  };
  std::vector<Candidate> candidates;
  for (const auto& s : zone_result.patterns) {
    candidates.push_back({&s, model.energy_lower_bound(s.binaries)});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.lower_bound < b.lower_bound;
                   });

  // The stage-1 optimum is the incumbent.
  const StageSolution& first = zone_result.best;
  Vector best_x = first.x;
  BinaryPattern best_pattern = first.binaries;
  double best_obj = energy_objective(problem, first.binaries, first.x);
  int best_iters = 0;

  for (const auto& c : candidates) {
    if (c.lower_bound >= best_obj) break;
    const BinaryPattern& pat = c.zone->binaries;
    const ConstraintSet cs = model.constraints(pat);
    Vector start = c.zone->x;
    if (model.tracking(start) > bound) {
      // Least zone cost attainable with this pattern.
      QpProblem qp;
      model.zone_objective(kPhaseOneRegularization * cfg.beta2_zone,
                           kPhaseOneRegularization * cfg.beta3_zone, 1.0, qp);
      const auto r = solve_with(model, cs, qp, cfg.qp);
      if (r.status != QpStatus::kOptimal || model.tracking(r.x) > bound) continue;
      start = r.x;
    }
    auto run = minimize_energy(problem, model, pat, cs, start, bound);
    if (model.tracking(run.x) > bound) {
      run.x = start + restore_fraction(model, start, run.x, bound) * (run.x - start);
      run.objective = energy_objective(problem, pat, run.x);
    }
    if (run.objective < best_obj) {
      best_obj = run.objective;
      best_x = run.x;
      best_pattern = pat;
      best_iters = run.iterations;
    }
  }

  StageSolution out = model.make_solution(best_pattern, best_x);
  out.objective = best_obj;
  out.status = QpStatus::kOptimal;
  out.iterations = best_iters;
  out.combos_explored = zone_result.best.combos_explored;
  out.budget_exhausted = zone_result.best.budget_exhausted;
  if (out.zone_cost > bound) {
    spdlog::warn("energy stage violated the zone cost bound; using the zone-stage optimum");
    out = zone_result.best;
    out.objective = energy_objective(problem, out.binaries, out.x, &out.energy_kwh);
  }
  return out;
}

}  // namespace ezdeepc::zone
