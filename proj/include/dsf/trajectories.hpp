#ifndef DSF_TRAJECTORIES_HPP
#define DSF_TRAJECTORIES_HPP

#include <cstdint>
#include <vector>

#include "dsf/objective.hpp"

namespace dsf {

/// Splittable counter-seeded generator (splitmix64). Every sampled path owns
/// an independent stream derived from (seed, path index), so estimates are
/// reproducible bitwise regardless of how the paths are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform draw in (0, 1]; never 0, so logs stay finite.
  double uniform();
  /// Exponential draw with the given rate.
  double exponential(double rate);

  static std::uint64_t stream(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t state_;
};

struct Jump {
  double time;
  std::size_t dest;
};

/// One realization of the jump process on [0, horizon].
struct Path {
  std::size_t start = 0;
  std::vector<Jump> jumps;
  double horizon = 0.0;

  std::size_t final_state() const {
    return jumps.empty() ? start : jumps.back().dest;
  }
};

struct PathStats {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Gillespie sampling: exponential holding times at rate -G^w_w, jump
/// destinations proportional to the off-diagonal column. Absorbing states
/// end the jump sequence.
Path sample_path(const Matrix& g, std::size_t omega0, double t_max,
                 std::uint64_t seed);

/// Log of the path density: sum of G^w_w over holding intervals plus
/// log G^{w'}_w per jump. -inf when a recorded jump has zero rate.
double path_log_weight(const Matrix& g, const Path& path);

/// Per-node split of the negated log weight: each node pays its own
/// survival integral plus the log rates of the jumps it made. Sums to
/// -path_log_weight. A jump touching more than one node's own factors is
/// a zero-probability event and rejected.
std::vector<double> field_lagrangian_terms(
    const FieldTopology& topology,
    const std::vector<LocalGeneratorTable>& tables, const Path& path);

/// Monte-Carlo estimate of the transition probability p_T(w'|w): fraction
/// of sampled paths from w that end at w', with binomial standard error.
PathStats mc_transition_prob(const Matrix& g, std::size_t omega0,
                             std::size_t omega1, double t_max, std::int64_t n,
                             std::uint64_t seed, Exec exec = Exec::parallel);

/// Monte-Carlo estimate of the expected accumulated signal: mean over paths
/// of the summed per-jump signals.
PathStats mc_expected_signal(const Matrix& g, const ObjectiveOperator& gamma,
                             std::size_t omega0, double t_max, std::int64_t n,
                             std::uint64_t seed, Exec exec = Exec::parallel);

struct EntropyReport {
  double mc_mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  Vector entropies;  // per-source Shannon entropy of the jump distribution
};

/// For a constant-frequency generator (all |G^w_w| == K): Monte-Carlo mean
/// of the integrated path cost against the analytic lower bound KT(1-log K),
/// met with equality exactly when every jump distribution is deterministic.
EntropyReport entropy_bound_check(const Matrix& g, double t_max,
                                  std::size_t omega0, std::int64_t n,
                                  std::uint64_t seed,
                                  Exec exec = Exec::parallel);

}  // namespace dsf

#endif  // DSF_TRAJECTORIES_HPP
