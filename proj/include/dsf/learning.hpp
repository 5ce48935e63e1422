#ifndef DSF_LEARNING_HPP
#define DSF_LEARNING_HPP

#include "dsf/propagation.hpp"

namespace dsf {

/// A finite menu of rate tables one node can play, plus the probability
/// mass each positive-signal jump diverts into re-drawing the active entry.
struct StrategySet {
  std::size_t node = 0;
  std::vector<LocalGeneratorTable> strategies;
  double switch_rate = 0.5;  // in (0, 1)
};

/// The strategy-switching chain on the augmented space (configurations x
/// strategy labels): within a label the dynamics follow that strategy, and
/// every jump carrying a positive signal re-draws the label uniformly with
/// probability switch_rate. Long-run signal concentrates on the labels of
/// minimal objective value.
struct RandomSearchSystem {
  Matrix generator;         // on the augmented space, label varying slowest
  ObjectiveOperator gamma;  // the signal, lifted label-blindly
  std::size_t base_dim = 0;
  std::size_t n_labels = 0;

  std::size_t augmented(std::size_t omega, std::size_t label) const {
    return label * base_dim + omega;
  }
};

/// Builds the augmented chain. The signal must be nonnegative: negative
/// signals would turn the re-draw mechanism into an attractor of bad
/// strategies. `environment` supplies every node's table; the entry at the
/// searching node is replaced by each strategy in turn.
RandomSearchSystem build_random_search(
    const FieldTopology& topology, const StrategySet& strategies,
    const ObjectiveOperator& gamma,
    const std::vector<LocalGeneratorTable>& environment);

/// Clips a raw rate table into the feasible set: off-diagonal entries at
/// least rate_floor, diagonal re-derived.
LocalGeneratorTable project_to_generator(const FieldTopology& topology,
                                         std::size_t node, const Matrix& raw,
                                         double rate_floor);

struct TrainerConfig {
  double learning_rate = 0.1;
  int n_steps = 100;
  double rate_floor = 1e-6;
  int max_halvings = 40;
  double monotonicity_slack = 1e-12;
};

struct TrainStep {
  int step = 0;
  std::vector<double> values;  // objective value per trained node
  double grad_norm = 0.0;      // largest gradient entry magnitude
  double step_scale = 0.0;     // accepted backtracking scale
};
using TrainingTrace = std::vector<TrainStep>;

/// Projected gradient descent on the trained nodes' rate tables, with
/// backtracking (halve the step until the objective value does not
/// increase). Tables are updated in place. Halts early, returning the trace
/// so far, if ergodicity is lost or no feasible step remains.
TrainingTrace train_gradient_descent(const FieldTopology& topology,
                                     std::vector<LocalGeneratorTable>& tables,
                                     const ObjectiveOperator& gamma,
                                     const std::vector<std::size_t>& trained,
                                     const TrainerConfig& config);

/// Same loop, with each node's objective functional re-solved from the
/// propagation network at every step.
TrainingTrace train_gradient_descent(const FieldTopology& topology,
                                     std::vector<LocalGeneratorTable>& tables,
                                     const PropagationNetwork& network,
                                     const std::vector<std::size_t>& trained,
                                     const TrainerConfig& config);

}  // namespace dsf

#endif  // DSF_LEARNING_HPP
