#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sid/errors.hpp"
#include "sid/ga.hpp"
#include "sid/rng.hpp"

using namespace sid;
using namespace sid::ga;

TEST_CASE("a smooth unimodal fitness is maximized") {
  GaConfig cfg;
  cfg.seed = 42;
  const GaResult r = run_ga(
      [](const Chromosome& c) { return -(c[0] - 3.0) * (c[0] - 3.0); },
      {{0.0, 10.0, false}}, cfg);
  CHECK(std::abs(r.best[0] - 3.0) < 0.1);
  CHECK(r.best_fitness > -0.01);
}

TEST_CASE("per-generation best never decreases") {
  GaConfig cfg;
  cfg.seed = 7;
  cfg.generations = 30;
  const GaResult r = run_ga(
      [](const Chromosome& c) {
        return std::sin(c[0]) + 0.5 * std::cos(3.0 * c[1]);
      },
      {{-5.0, 5.0, false}, {-5.0, 5.0, false}}, cfg);
  REQUIRE(r.per_generation_best.size() == 30);
  for (std::size_t g = 1; g < r.per_generation_best.size(); ++g)
    CHECK(r.per_generation_best[g] >= r.per_generation_best[g - 1]);
}

TEST_CASE("a 64-point discrete space is solved exactly") {
  // three integer genes in [0, 3]: 64 combinations, separable optimum
  auto fitness = [](const Chromosome& c) {
    return -((c[0] - 2) * (c[0] - 2) + (c[1] - 1) * (c[1] - 1) +
             (c[2] - 3) * (c[2] - 3));
  };
  // exhaustive oracle
  double best = -1e300;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        best = std::max(best, fitness({double(a), double(b), double(c)}));

  GaConfig cfg;
  cfg.seed = 11;
  const GaResult r = run_ga(
      fitness, {{0, 3, true}, {0, 3, true}, {0, 3, true}}, cfg);
  CHECK(r.best_fitness == doctest::Approx(best));
  CHECK(r.best[0] == doctest::Approx(2.0));
  CHECK(r.best[1] == doctest::Approx(1.0));
  CHECK(r.best[2] == doctest::Approx(3.0));
}

TEST_CASE("identical seeds give identical runs; bounds always hold") {
  GaConfig cfg;
  cfg.seed = 99;
  std::vector<Chromosome> seen;
  auto fitness = [&](const Chromosome& c) {
    seen.push_back(c);
    return -(c[0] * c[0]) - std::abs(c[1]);
  };
  const std::vector<GeneSpec> genes = {{-2.0, 2.0, false}, {0.0, 5.0, true}};
  const GaResult a = run_ga(fitness, genes, cfg);
  for (const Chromosome& c : seen) {
    CHECK(c[0] >= -2.0);
    CHECK(c[0] <= 2.0);
    CHECK(c[1] >= 0.0);
    CHECK(c[1] <= 5.0);
    CHECK(c[1] == std::round(c[1]));
  }
  const GaResult b = run_ga(fitness, genes, cfg);
  CHECK(a.best_fitness == b.best_fitness);
  REQUIRE(a.best.size() == b.best.size());
  for (std::size_t g = 0; g < a.best.size(); ++g) CHECK(a.best[g] == b.best[g]);
}

TEST_CASE("config validation") {
  GaConfig bad;
  bad.population_size = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = GaConfig{};
  bad.elitism_count = bad.population_size;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = GaConfig{};
  bad.mutation_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(run_ga([](const Chromosome&) { return 0.0; },
                         {{2.0, 1.0, false}}, GaConfig{}),
                  ConfigError);
}

TEST_CASE("threshold fitness is the decision gap") {
  const std::vector<double> genuine = {4.0, 5.0, 6.0};
  const std::vector<double> impostor = {0.0, 1.0};
  CHECK(threshold_fitness(2.0, genuine, impostor) == doctest::Approx(100.0));
  CHECK(threshold_fitness(-5.0, genuine, impostor) == doctest::Approx(0.0));
  CHECK(threshold_fitness(4.5, genuine, impostor) ==
        doctest::Approx(200.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("tuned threshold lands strictly between separated populations") {
  std::vector<double> genuine, impostor;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    genuine.push_back(10.0 + rng.uniform(0.0, 5.0));
    impostor.push_back(rng.uniform(0.0, 5.0));
  }
  GaConfig cfg;
  cfg.seed = 3;
  const ThresholdResult r = tune_threshold(genuine, impostor, cfg);
  CHECK(r.fitness == doctest::Approx(200.0 - 100.0));  // plateau value 100
  CHECK(r.tau > 5.0);
  CHECK(r.tau <= 10.0);
}

TEST_CASE("ga threshold dominates a 100-point uniform grid") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Rng r = rng.fork(trial);
    std::vector<double> genuine(60), impostor(60);
    for (double& v : genuine) v = 2.0 + 1.5 * r.gauss();
    for (double& v : impostor) v = -1.0 + 1.5 * r.gauss();

    double lo = genuine[0], hi = genuine[0];
    for (double v : genuine) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : impostor) { lo = std::min(lo, v); hi = std::max(hi, v); }
    double grid_best = -1e300;
    for (int i = 0; i < 100; ++i) {
      const double tau = lo + (hi - lo) * i / 99.0;
      grid_best = std::max(grid_best, threshold_fitness(tau, genuine, impostor));
    }

    GaConfig cfg;  // published defaults: population 50, 25 generations
    cfg.seed = 1000 + trial;
    const ThresholdResult res = tune_threshold(genuine, impostor, cfg);
    CHECK(res.fitness >= grid_best - 1e-9);
  }
}

TEST_CASE("architecture fitness is total and penalizes failures") {
  Rng rng(41);
  ga::BandData data;
  const int speakers = 3;
  data.train.resize(speakers);
  data.validation.resize(speakers);
  for (int s = 0; s < speakers; ++s) {
    for (int u = 0; u < 6; ++u) {
      Rng r = rng.fork(s * 100 + u);
      Matrix X(24, 3);
      for (std::size_t t = 0; t < X.rows(); ++t)
        for (int d = 0; d < 3; ++d)
          X(t, d) = 2.0 * s + (t < 12 ? -0.5 : 0.5) + 0.3 * r.gauss();
      if (u < 4)
        data.train[s].push_back(std::move(X));
      else
        data.validation[s].push_back(std::move(X));
    }
  }
  const double ir = architecture_fitness(1, 1, data);
  CHECK(ir >= 0.0);
  CHECK(ir <= 100.0);
  CHECK(architecture_fitness(2, 2, data) == doctest::Approx(100.0));

  // far more mixtures than frames: training fails, fitness pinned at zero
  CHECK(architecture_fitness(8, 32, data) == doctest::Approx(0.0));
  ga::BandData empty;
  CHECK(architecture_fitness(2, 2, empty) == doctest::Approx(0.0));
}

TEST_CASE("richer dynamics prefer two states over one (majority of seeds)") {
  int wins = 0;
  for (int seed = 0; seed < 5; ++seed) {
    Rng rng(500 + seed);
    ga::BandData data;
    const int speakers = 3;
    data.train.resize(speakers);
    data.validation.resize(speakers);
    for (int s = 0; s < speakers; ++s) {
      for (int u = 0; u < 8; ++u) {
        Rng r = rng.fork(s * 100 + u);
        Matrix X(20, 2);
        // two-phase sequences whose phases overlap across speakers; a
        // single state blurs them together
        for (std::size_t t = 0; t < X.rows(); ++t) {
          const double phase = t < 10 ? -1.0 : 1.0;
          X(t, 0) = phase * (1.0 + 0.6 * s) + 0.25 * r.gauss();
          X(t, 1) = phase * (0.5 - 0.4 * s) + 0.25 * r.gauss();
        }
        if (u < 5)
          data.train[s].push_back(std::move(X));
        else
          data.validation[s].push_back(std::move(X));
      }
    }
    if (architecture_fitness(2, 1, data) >= architecture_fitness(1, 1, data))
      ++wins;
  }
  CHECK(wins >= 3);
}
