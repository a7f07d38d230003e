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

#include <Eigen/LU>

#include "doctest.h"

#include "ezdeepc/bo/gp.hpp"
#include "ezdeepc/bo/tuner.hpp"

using namespace ezdeepc;
using namespace ezdeepc::bo;

namespace {

// Posterior through an explicit inverse of the kernel matrix.
Posterior dense_posterior(const std::vector<double>& x, const std::vector<double>& y,
                          double q, const KernelParams& kp, double noise) {
  const auto n = static_cast<Eigen::Index>(x.size());
  double mu = 0.0;
  for (double v : y) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mu) * (v - mu);
  const double sd = var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 1.0;
  Matrix k(n, n);
  Vector z(n), ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto is = static_cast<std::size_t>(i);
    z[i] = (y[is] - mu) / sd;
    ks[i] = matern_kernel(q, x[is], kp);
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = matern_kernel(x[is], x[static_cast<std::size_t>(j)], kp);
  }
  k.diagonal().array() += noise;
  const Matrix inv = k.inverse();
  const double m = ks.dot(inv * z);
  const double v = kp.variance - ks.dot(inv * ks);
  return {m * sd + mu, std::sqrt(std::max(0.0, v)) * sd};
}

double quadratic(double a) { return -(a - 0.6) * (a - 0.6); }

}  // namespace

TEST_CASE("Matern 5/2 kernel matches its closed form") {
  const KernelParams kp;
  CHECK(matern_kernel(0.3, 0.3, kp) == 1.0);
  for (double r : {0.01, 0.1, 0.2, 0.5, 1.0}) {
    const double s = std::sqrt(5.0) * r / 0.2;
    const double expected = (1.0 + s + s * s / 3.0) * std::exp(-s);
    CHECK(matern_kernel(0.0, r, kp) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(matern_kernel(r, 0.0, kp) == matern_kernel(0.0, r, kp));
  }
  double prev = 1.0;
  for (int i = 1; i <= 100; ++i) {
    const double k = matern_kernel(0.0, i / 100.0, kp);
    CHECK(k < prev);
    prev = k;
  }
  KernelParams bad;
  bad.smoothness = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("posterior agrees with a dense-inverse oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 3.0);
  const KernelParams kp;
  for (int trial = 0; trial < 20; ++trial) {
    GpSurrogate gp(kp, 0.1225);
    std::vector<double> x, y;
    for (int i = 0; i < 5; ++i) {
      x.push_back(unif(rng));
      y.push_back(gauss(rng));
      gp.add(x.back(), y.back());
    }
    for (int i = 0; i <= 20; ++i) {
      const double q = i / 20.0;
      const auto a = gp.posterior(q);
      const auto b = dense_posterior(x, y, q, kp, 0.1225);
      CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-10));
      CHECK(a.stddev == doctest::Approx(b.stddev).epsilon(1e-10));
    }
  }
}

TEST_CASE("noiseless surrogate interpolates its samples") {
  GpSurrogate gp(KernelParams{}, 0.0);
  const std::vector<double> x{0.0, 0.3, 0.55, 0.9};
  const std::vector<double> y{-2.0, 1.0, 0.5, 4.0};
  for (std::size_t i = 0; i < x.size(); ++i) gp.add(x[i], y[i]);
  CHECK(gp.jitter() == 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = gp.posterior(x[i]);
    CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-9));
    CHECK(p.stddev < 1e-6);
  }
}

TEST_CASE("duplicate noiseless samples trigger jitter") {
  GpSurrogate gp(KernelParams{}, 0.0);
  gp.add(0.4, 1.0);
  gp.add(0.4, 1.0);
  CHECK(gp.jitter() > 0.0);
  CHECK(gp.posterior(0.4).mean == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("posterior variance shrinks as samples arrive") {
  GpSurrogate gp;
  CHECK_THROWS_AS((void)gp.posterior(0.5), Error);
  gp.add(0.0, 1.0);
  gp.add(1.0, 2.0);
  const double before = gp.posterior(0.5).stddev;
  gp.add(0.5, 1.5);
  CHECK(gp.posterior(0.5).stddev < before);
  // Far from every sample the standardized variance returns to the prior.
  GpSurrogate far(KernelParams{1.0, 0.01, 2.5}, 0.1225);
  far.add(0.0, 1.0);
  far.add(0.02, 3.0);
  const auto p = far.posterior(1.0);
  CHECK(p.mean == doctest::Approx(far.obs_mean()).epsilon(1e-12));
  CHECK(p.stddev == doctest::Approx(far.obs_scale()).epsilon(1e-12));
}

TEST_CASE("acquisition picks the first maximizer of the UCB") {
  CHECK(argmax_first({1.0, 3.0, 3.0, 2.0}) == 1);
  CHECK(alpha_grid(5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  GpSurrogate gp;
  for (double a : {1.0, 0.5, 0.0}) gp.add(a, quadratic(a));
  BoConfig cfg;
  cfg.kappa = 0.0;
  CHECK(propose_next(gp, cfg) == posterior_mean_curve(gp, cfg.grid_points).argmax);

  cfg.kappa = 2.576;
  const auto grid = alpha_grid(cfg.grid_points);
  std::vector<double> ucb;
  for (double a : grid) {
    const auto p = gp.posterior(a);
    ucb.push_back(p.mean + cfg.kappa * p.stddev);
    CHECK(ucb.back() >= p.mean);
  }
  CHECK(propose_next(gp, cfg) == grid[argmax_first(ucb)]);
}

TEST_CASE("BO finds the maximizer of a synthetic quadratic") {
  BoConfig cfg;
  int calls = 0;
  const auto r = run_bo(
      [&](double a, int, int) {
        ++calls;
        return quadratic(a);
      },
      cfg);
  CHECK(calls == cfg.w_max);
  REQUIRE(r.audit.size() == static_cast<std::size_t>(cfg.w_max));
  CHECK(r.audit[0].alpha == 1.0);
  CHECK(r.audit[1].alpha == 0.5);
  CHECK(r.audit[2].alpha == 0.0);
  CHECK(r.alpha_star >= 0.55);
  CHECK(r.alpha_star <= 0.65);
  CHECK(r.alpha_star == r.audit.back().posterior_argmax);
}

TEST_CASE("failed evaluations are retried with a new attempt") {
  BoConfig cfg;
  cfg.w_max = 4;
  std::vector<int> attempts;
  const auto r = run_bo(
      [&](double a, int index, int attempt) {
        attempts.push_back(attempt);
        if (index == 1 && attempt == 0) throw Error("transient");
        return quadratic(a);
      },
      cfg);
  CHECK(r.surrogate.size() == 4);
  CHECK(attempts == std::vector<int>{0, 0, 1, 0, 0});

  cfg.max_retries = 1;
  CHECK_THROWS_AS(run_bo([](double, int, int) -> double { throw Error("always"); }, cfg), Error);
}

TEST_CASE("aggregated curve averages posterior means") {
  GpSurrogate a, b;
  for (double x : {0.0, 0.5, 1.0}) {
    a.add(x, quadratic(x));
    b.add(x, 2.0 * quadratic(x) + 1.0);
  }
  const auto c = aggregate_runs({a, b}, 101);
  REQUIRE(c.mean.size() == 101);
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double expected = 0.5 * (a.posterior(c.grid[i]).mean + b.posterior(c.grid[i]).mean);
    CHECK(c.mean[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(c.argmax == c.grid[argmax_first(c.mean)]);
}

TEST_CASE("closed-loop objective combines zone distance and energy") {
  zone::ZoneSpec z;
  z.center = Vector::Zero(2);
  z.half_width = 0.1;
  Matrix y = Matrix::Zero(205, 2);
  Vector e = Vector::Constant(205, 1.0);
  CHECK(bo_objective(y, e, z, 2.5e-4, 200, 5) == doctest::Approx(-0.05).epsilon(1e-12));
  y(10, 0) = 0.3;
  y(11, 1) = -0.2;
  CHECK(bo_objective(y, e, z, 2.5e-4, 200, 5) == doctest::Approx(-0.05 - 0.2 - 0.1).epsilon(1e-12));
  // Rows before the window do not count.
  y(2, 0) = 9.0;
  CHECK(bo_objective(y, e, z, 2.5e-4, 200, 5) == doctest::Approx(-0.35).epsilon(1e-12));
}

TEST_CASE("BO settings parse and validate") {
  const auto c = parse_bo(nlohmann::json{{"w_max", 8}, {"length_scale", 0.3}, {"kappa", 1.0}});
  CHECK(c.w_max == 8);
  CHECK(c.kernel.length_scale == 0.3);
  CHECK(c.kappa == 1.0);
  CHECK(parse_bo(to_json(c)).w_max == 8);
  CHECK_THROWS_AS(parse_bo(nlohmann::json{{"w_ini", 5}, {"w_max", 4}}), ConfigError);
}
