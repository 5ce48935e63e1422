#include <doctest.h>

#include "dsf/learning.hpp"
#include "helpers.hpp"

using namespace dsf;
using namespace dsf::testing;

namespace {

FieldTopology solo3() {
  return FieldTopology({{"s", 3, NodeKind::acting}}, {});
}

// Signal on the 0 -> 1 jump only.
ObjectiveOperator jump01(std::size_t dim) {
  return build_objective(dim, {{1, 0, 1.0}});
}

}  // namespace

TEST_CASE("build_random_search validates its inputs") {
  FieldTopology t = solo3();
  LocalGeneratorTable base(t, 0, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0},
                                  {2, 1, 1.0}});
  StrategySet empty{0, {}, 0.5};
  CHECK_THROWS_AS(build_random_search(t, empty, jump01(3), {base}),
                  DomainError);

  StrategySet one{0, {base}, 0.0};
  CHECK_THROWS_AS(build_random_search(t, one, jump01(3), {base}), DomainError);
  one.switch_rate = 1.0;
  CHECK_THROWS_AS(build_random_search(t, one, jump01(3), {base}), DomainError);
  one.switch_rate = 0.5;
  CHECK_THROWS_AS(build_random_search(t, one, jump01(4), {base}), DomainError);
  CHECK_THROWS_AS(
      build_random_search(t, one, build_objective(3, {{1, 0, -1.0}}), {base}),
      DomainError);
}

TEST_CASE("a single strategy reduces to the plain system") {
  FieldTopology t = solo3();
  LocalGeneratorTable base(t, 0, {{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, 0.5},
                                  {2, 0, 1.5}});
  const RandomSearchSystem system =
      build_random_search(t, {0, {base}, 0.5}, jump01(3), {base});
  CHECK(system.n_labels == 1);
  CHECK(system.base_dim == 3);
  // With one label the split outflow recombines into the original rates.
  CHECK((system.generator - assemble_system(t, {base}))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK(system.gamma.at(1, 0) == 1.0);
}

TEST_CASE("random search abandons signal-carrying strategies") {
  FieldTopology t = solo3();
  // Strategy 0 keeps triggering the 0 -> 1 signal; strategy 1 routes through
  // state 2 and never emits it.
  LocalGeneratorTable noisy(t, 0, {{0, 1, 1.0}, {1, 0, 2.0}, {2, 0, 1.0}});
  LocalGeneratorTable silent(t, 0, {{0, 2, 1.0}, {2, 0, 1.0}, {1, 0, 1.0}});
  const RandomSearchSystem system = build_random_search(
      t, {0, {noisy, silent}, 0.5}, jump01(3), {noisy});
  CHECK(is_valid_generator(system.generator));
  CHECK(system.generator.rows() == 6);

  // The silent label emits no signal, so it never re-draws: long-run signal
  // rate tends to zero from every starting label and configuration.
  for (std::size_t label = 0; label < 2; ++label)
    for (std::size_t w = 0; w < 3; ++w) {
      const Vector phi0 = delta(6, static_cast<Eigen::Index>(
                                       system.augmented(w, label)));
      const Vector phibar = stationary(system.generator, phi0).stationary;
      const double value =
          system.gamma.signal_rate(system.generator).dot(phibar);
      CHECK(std::abs(value) < 1e-6);
    }
}

TEST_CASE("random search keeps a positive value when no strategy is silent") {
  FieldTopology t = solo3();
  LocalGeneratorTable fast(t, 0, {{0, 1, 2.0}, {1, 0, 2.0}, {2, 0, 1.0}});
  LocalGeneratorTable slow(t, 0, {{0, 1, 0.2}, {1, 0, 2.0}, {2, 0, 1.0}});
  const RandomSearchSystem system =
      build_random_search(t, {0, {fast, slow}, 0.3}, jump01(3), {fast});
  const StationaryReport report =
      stationary(system.generator, uniform(6));
  CHECK(report.ergodic);
  const double value =
      system.gamma.signal_rate(system.generator).dot(report.stationary);
  CHECK(value > 0.0);
  // The slow strategy emits less signal, so search should not do worse
  // than the noisier strategy alone.
  const double fast_value =
      objective_value(jump01(3), assemble_system(t, {fast}), uniform(3));
  CHECK(value < fast_value);
}

TEST_CASE("project_to_generator clips into the feasible set") {
  FieldTopology t = solo3();
  Matrix raw(3, 3);
  raw << 5.0, 0.3, -2.0,
         1.0, 7.0, 0.0,
         -0.5, 0.9, 3.0;
  const LocalGeneratorTable projected = project_to_generator(t, 0, raw, 1e-6);
  const Matrix& rates = projected.rates();
  for (Eigen::Index u = 0; u < 3; ++u)
    for (Eigen::Index o = 0; o < 3; ++o) {
      if (o == u) continue;  // derived diagonal, not a parameter
      CHECK(rates(o, u) == std::max(1e-6, raw(o, u)));
    }
  CHECK(is_valid_generator(assemble_system(t, {projected})));

  // Zero floor leaves negative entries at zero instead.
  const LocalGeneratorTable loose = project_to_generator(t, 0, raw, 0.0);
  CHECK(loose.rates()(2, 0) == 0.0);

  CHECK_THROWS_AS(project_to_generator(t, 0, Matrix::Zero(2, 2), 1e-6),
                  DomainError);
  CHECK_THROWS_AS(project_to_generator(t, 0, raw, -1.0), DomainError);
}

TEST_CASE("zero learning rate leaves the tables and the trace flat") {
  FieldTopology t({{"s", 2, NodeKind::acting}}, {});
  std::vector<LocalGeneratorTable> tables{
      LocalGeneratorTable(t, 0, {{0, 1, 1.0}, {1, 0, 2.0}})};
  TrainerConfig config;
  config.learning_rate = 0.0;
  config.n_steps = 3;
  const TrainingTrace trace =
      train_gradient_descent(t, tables, jump01(2), {0}, config);
  REQUIRE(trace.size() == 4);
  for (const TrainStep& step : trace) {
    CHECK(step.values[0] == trace[0].values[0]);
    CHECK(step.step_scale == 0.0);
  }
  CHECK(tables[0].rates()(1, 0) == 1.0);
  CHECK(tables[0].rates()(0, 1) == 2.0);
}

TEST_CASE("descent drives a single noisy node to the rate floor") {
  FieldTopology t({{"s", 2, NodeKind::acting}}, {});
  std::vector<LocalGeneratorTable> tables{
      LocalGeneratorTable(t, 0, {{0, 1, 1.0}, {1, 0, 2.0}})};
  TrainerConfig config;
  config.learning_rate = 0.5;
  config.n_steps = 200;
  const TrainingTrace trace =
      train_gradient_descent(t, tables, jump01(2), {0}, config);
  REQUIRE(!trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].values[0] <=
          trace[i - 1].values[0] + config.monotonicity_slack + 1e-12);
  // gammabar(a, b) = a b / (a + b) bottoms out when both rates hit the floor.
  CHECK(trace.back().values[0] < 1e-4);
  CHECK(tables[0].rates()(1, 0) >= config.rate_floor);
  CHECK(tables[0].rates()(0, 1) >= config.rate_floor);
  CHECK(tables[0].rates()(1, 0) < 1e-3);
}

TEST_CASE("network training lowers the shared objective value") {
  FieldTopology t({{"x0", 2, NodeKind::environmental},
                   {"x1", 2, NodeKind::acting},
                   {"x2", 2, NodeKind::acting}},
                  {{"x0", "x1", 1}, {"x1", "x2", 1}, {"x2", "x1", 1}});
  Rng rng(5);
  std::vector<LocalGeneratorTable> tables;
  for (std::size_t x = 0; x < 3; ++x) {
    const std::size_t act_rank = t.act_region(x).factor_indices.size();
    std::vector<LocalRate> rates;
    for (std::size_t u = 0; u < t.obs_space(x).total(); ++u) {
      std::vector<int> digits = t.obs_space(x).decode(u);
      digits.resize(act_rank);
      const std::size_t diag = t.act_space(x).encode(digits);
      for (std::size_t o = 0; o < t.act_space(x).total(); ++o)
        if (o != diag) rates.push_back({u, o, 0.5 + rng.uniform()});
    }
    tables.emplace_back(t, x, rates);
  }

  // Signal on every jump that rewrites x1's actionable digits to 1.
  const IndexSpace& omega = t.omega();
  std::vector<ObjectiveEntry> entries;
  for (std::size_t w = 0; w < omega.total(); ++w) {
    const Configuration cfg = omega.decode(w);
    if (t.act_space(1).encode(restrict_to(cfg, t.act_region(1))) != 0)
      continue;
    entries.push_back(
        {omega.encode(replace_in(cfg, t.act_region(1),
                                 t.act_space(1).decode(1))),
         w, 1.0});
  }
  const ObjectiveOperator env(omega.total(), entries);

  AdjacencyWeights weights{Matrix::Zero(3, 3)};
  weights.lambda(0, 1) = 0.5;
  weights.lambda(2, 1) = 0.5;
  weights.lambda(1, 2) = 1.0;
  const Matrix g0 = assemble_system(t, tables);
  const PropagationNetwork network = build_network(
      t, weights, {{{0, 1}, env}},
      {{{1, 2}, make_pq(g0, Matrix::Identity(g0.rows(), g0.cols()))},
       {{2, 1}, Propagator{}}});

  TrainerConfig config;
  config.n_steps = 25;
  config.learning_rate = 0.3;
  const TrainingTrace trace =
      train_gradient_descent(t, tables, network, {1, 2}, config);
  REQUIRE(trace.size() >= 2);
  const auto total = [](const TrainStep& s) {
    double acc = 0.0;
    for (double v : s.values) acc += v;
    return acc;
  };
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(total(trace[i]) <= total(trace[i - 1]) + 1e-9);
  CHECK(total(trace.back()) < total(trace.front()));
  CHECK(trace.front().step_scale > 0.0);
}
