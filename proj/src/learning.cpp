#include "dsf/learning.hpp"

#include <cmath>
#include <functional>

namespace dsf {

RandomSearchSystem build_random_search(
    const FieldTopology& topology, const StrategySet& strategies,
    const ObjectiveOperator& gamma,
    const std::vector<LocalGeneratorTable>& environment) {
  if (strategies.strategies.empty())
    throw DomainError("build_random_search: empty strategy set");
  if (!(strategies.switch_rate > 0.0 && strategies.switch_rate < 1.0))
    throw DomainError("build_random_search: switch_rate must be in (0, 1)");
  const std::size_t n = topology.omega().total();
  if (gamma.dim() != n)
    throw DomainError("build_random_search: signal on a different space");
  for (const auto& [key, value] : gamma.entries()) {
    (void)key;
    if (value < 0.0)
      throw DomainError("build_random_search: signal must be nonnegative");
  }

  const std::size_t m = strategies.strategies.size();
  const double p = strategies.switch_rate;
  RandomSearchSystem system;
  system.base_dim = n;
  system.n_labels = m;
  const Eigen::Index total = static_cast<Eigen::Index>(n * m);
  system.generator = Matrix::Zero(total, total);

  for (std::size_t label = 0; label < m; ++label) {
    std::vector<LocalGeneratorTable> tables = environment;
    tables[strategies.node] = strategies.strategies[label];
    const Matrix g = assemble_system(topology, tables);
    for (std::size_t from = 0; from < n; ++from) {
      const Eigen::Index src =
          static_cast<Eigen::Index>(system.augmented(from, label));
      for (std::size_t to = 0; to < n; ++to) {
        if (to == from) continue;
        const double rate = g(static_cast<Eigen::Index>(to),
                              static_cast<Eigen::Index>(from));
        if (rate <= 0.0) continue;
        if (gamma.at(to, from) > 0.0) {
          // The signal-carrying jump re-draws the label with probability p,
          // uniformly over all labels; total outflow is still `rate`.
          system.generator(
              static_cast<Eigen::Index>(system.augmented(to, label)), src) +=
              rate * (1.0 - p);
          for (std::size_t j = 0; j < m; ++j)
            system.generator(
                static_cast<Eigen::Index>(system.augmented(to, j)), src) +=
                rate * p / static_cast<double>(m);
        } else {
          system.generator(
              static_cast<Eigen::Index>(system.augmented(to, label)), src) +=
              rate;
        }
      }
      system.generator(src, src) = -system.generator.col(src).sum();
    }
  }

  std::vector<ObjectiveEntry> lifted;
  for (const auto& [key, value] : gamma.entries())
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t to = system.augmented(key.first, j);
        const std::size_t from = system.augmented(key.second, i);
        if (to != from) lifted.push_back({to, from, value});
      }
  system.gamma = ObjectiveOperator(n * m, lifted);
  return system;
}

LocalGeneratorTable project_to_generator(const FieldTopology& topology,
                                         std::size_t node, const Matrix& raw,
                                         double rate_floor) {
  if (rate_floor < 0.0)
    throw DomainError("project_to_generator: negative rate floor");
  const IndexSpace& act = topology.act_space(node);
  const IndexSpace& obs = topology.obs_space(node);
  if (raw.rows() != static_cast<Eigen::Index>(act.total()) ||
      raw.cols() != static_cast<Eigen::Index>(obs.total()))
    throw DomainError("project_to_generator: table shape mismatch");
  const std::size_t act_rank = topology.act_region(node).factor_indices.size();
  std::vector<LocalRate> entries;
  for (std::size_t u = 0; u < obs.total(); ++u) {
    std::vector<int> digits = obs.decode(u);
    digits.resize(act_rank);
    const std::size_t diag = act.encode(digits);
    for (std::size_t o = 0; o < act.total(); ++o) {
      if (o == diag) continue;
      const double rate = std::max(rate_floor,
                                   raw(static_cast<Eigen::Index>(o),
                                       static_cast<Eigen::Index>(u)));
      if (rate != 0.0) entries.push_back({u, o, rate});
    }
  }
  return LocalGeneratorTable(topology, node, entries);
}

namespace {

using EffectiveFn =
    std::function<std::map<std::size_t, ObjectiveOperator>(const Matrix&)>;
using ValueFn = std::function<double(const Matrix&)>;

TrainingTrace run_descent(const FieldTopology& topology,
                          std::vector<LocalGeneratorTable>& tables,
                          const std::vector<std::size_t>& trained,
                          const TrainerConfig& config,
                          const EffectiveFn& effective_of,
                          const ValueFn& value_of) {
  if (config.learning_rate < 0.0)
    throw DomainError("train_gradient_descent: negative learning rate");
  for (std::size_t x : trained)
    if (x >= topology.num_nodes())
      throw DomainError("train_gradient_descent: bad node");

  TrainingTrace trace;
  for (int step = 0; step <= config.n_steps; ++step) {
    const Matrix g = assemble_system(topology, tables);
    if (null_space_dim(g) != 1) break;  // ergodicity lost

    std::map<std::size_t, ObjectiveOperator> effective;
    std::map<std::size_t, GradientTable> grads;
    double value = 0.0;
    try {
      effective = effective_of(g);
      value = value_of(g);
      for (std::size_t x : trained)
        grads.emplace(x, grad_local(effective.at(x), topology, g, x));
    } catch (const NumericError&) {
      break;  // propagation or solve failure: halt with the trace so far
    }

    TrainStep record;
    record.step = step;
    const Eigen::Index n = g.rows();
    const Vector phi0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const Vector phibar = averaged_state(g, phi0);
    for (std::size_t x : trained)
      record.values.push_back(effective.at(x).signal_rate(g).dot(phibar));
    for (std::size_t x : trained)
      record.grad_norm = std::max(
          record.grad_norm, grads.at(x).values.cwiseAbs().maxCoeff());
    if (step == config.n_steps) {
      trace.push_back(record);
      break;
    }

    // Backtracking: halve the step until the value does not increase.
    bool accepted = false;
    double scale = config.learning_rate;
    for (int attempt = 0; attempt <= config.max_halvings; ++attempt) {
      bool moved = false;
      std::vector<LocalGeneratorTable> candidate = tables;
      for (std::size_t x : trained) {
        const Matrix raw =
            tables[x].rates() - scale * grads.at(x).values;
        if (scale > 0.0 &&
            (scale * grads.at(x).values).cwiseAbs().maxCoeff() > 0.0)
          moved = true;
        candidate[x] = project_to_generator(topology, x, raw,
                                            config.rate_floor);
      }
      if (!moved) {
        // Zero step: leave the tables untouched rather than re-projecting.
        record.step_scale = 0.0;
        accepted = true;
        break;
      }
      double candidate_value;
      try {
        candidate_value = value_of(assemble_system(topology, candidate));
      } catch (const NumericError&) {
        scale *= 0.5;
        continue;
      }
      if (candidate_value <= value + config.monotonicity_slack) {
        tables = candidate;
        record.step_scale = scale;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    trace.push_back(record);
    if (!accepted) break;  // no feasible descent step remains
  }
  return trace;
}

}  // namespace

TrainingTrace train_gradient_descent(const FieldTopology& topology,
                                     std::vector<LocalGeneratorTable>& tables,
                                     const ObjectiveOperator& gamma,
                                     const std::vector<std::size_t>& trained,
                                     const TrainerConfig& config) {
  EffectiveFn effective_of = [&](const Matrix&) {
    std::map<std::size_t, ObjectiveOperator> out;
    for (std::size_t x : trained) out.emplace(x, gamma);
    return out;
  };
  ValueFn value_of = [&](const Matrix& g) {
    const Eigen::Index n = g.rows();
    const Vector phi0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
    return objective_value(gamma, g, phi0);
  };
  return run_descent(topology, tables, trained, config, effective_of,
                     value_of);
}

TrainingTrace train_gradient_descent(const FieldTopology& topology,
                                     std::vector<LocalGeneratorTable>& tables,
                                     const PropagationNetwork& network,
                                     const std::vector<std::size_t>& trained,
                                     const TrainerConfig& config) {
  EffectiveFn effective_of = [&](const Matrix& g) {
    return solve_effective_objectives(network, g);
  };
  ValueFn value_of = [&](const Matrix& g) {
    const UniformValueReport report = check_uniform_value(network, g);
    return report.values.size() > 0 ? report.values.mean() : 0.0;
  };
  return run_descent(topology, tables, trained, config, effective_of,
                     value_of);
}

}  // namespace dsf
