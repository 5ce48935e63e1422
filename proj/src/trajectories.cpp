#include "dsf/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsf {

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw DomainError("exponential: rate must be positive");
  return -std::log(uniform()) / rate;
}

std::uint64_t Rng::stream(std::uint64_t seed, std::uint64_t index) {
  // One mixing round separates the streams; splitmix64's finalizer keeps
  // adjacent (seed, index) pairs statistically independent.
  Rng mixer(seed ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  return mixer.next();
}

Path sample_path(const Matrix& g, std::size_t omega0, double t_max,
                 std::uint64_t seed) {
  if (!is_valid_generator(g))
    throw DomainError("sample_path: not a valid generator");
  const Eigen::Index n = g.rows();
  if (omega0 >= static_cast<std::size_t>(n))
    throw DomainError("sample_path: start out of range");
  if (t_max < 0.0) throw DomainError("sample_path: negative horizon");

  Path path;
  path.start = omega0;
  path.horizon = t_max;
  Rng rng(seed);
  std::size_t w = omega0;
  double t = 0.0;
  while (true) {
    const double hold = -g(static_cast<Eigen::Index>(w),
                           static_cast<Eigen::Index>(w));
    if (hold <= 0.0) break;  // absorbing
    t += rng.exponential(hold);
    if (t > t_max) break;
    // Inverse-CDF over the off-diagonal column.
    double target = rng.uniform() * hold;
    std::size_t dest = w;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (static_cast<std::size_t>(j) == w) continue;
      const double rate = g(j, static_cast<Eigen::Index>(w));
      if (rate <= 0.0) continue;
      target -= rate;
      dest = static_cast<std::size_t>(j);
      if (target <= 0.0) break;
    }
    if (dest == w) break;  // numerically empty column
    path.jumps.push_back({t, dest});
    w = dest;
  }
  return path;
}

double path_log_weight(const Matrix& g, const Path& path) {
  const Eigen::Index n = g.rows();
  if (path.start >= static_cast<std::size_t>(n))
    throw DomainError("path_log_weight: start out of range");
  double log_weight = 0.0;
  std::size_t w = path.start;
  double t = 0.0;
  for (const Jump& jump : path.jumps) {
    if (jump.dest >= static_cast<std::size_t>(n) || jump.dest == w ||
        jump.time <= t || jump.time > path.horizon)
      throw DomainError("path_log_weight: malformed path");
    const Eigen::Index wi = static_cast<Eigen::Index>(w);
    log_weight += g(wi, wi) * (jump.time - t);
    const double rate = g(static_cast<Eigen::Index>(jump.dest), wi);
    if (rate <= 0.0) return -std::numeric_limits<double>::infinity();
    log_weight += std::log(rate);
    w = jump.dest;
    t = jump.time;
  }
  const Eigen::Index wi = static_cast<Eigen::Index>(w);
  log_weight += g(wi, wi) * (path.horizon - t);
  return log_weight;
}

std::vector<double> field_lagrangian_terms(
    const FieldTopology& topology,
    const std::vector<LocalGeneratorTable>& tables, const Path& path) {
  const IndexSpace& omega = topology.omega();
  const std::size_t num_nodes = topology.num_nodes();
  if (tables.size() != num_nodes)
    throw DomainError("field_lagrangian_terms: one table per node required");
  if (path.start >= omega.total())
    throw DomainError("field_lagrangian_terms: start out of range");

  std::vector<double> terms(num_nodes, 0.0);
  Configuration cfg = omega.decode(path.start);
  double t = 0.0;
  auto accumulate_survival = [&](double dt) {
    for (std::size_t x = 0; x < num_nodes; ++x) {
      const std::vector<int> obs = restrict_to(cfg, topology.obs_region(x));
      const std::size_t u = topology.obs_space(x).encode(obs);
      const std::size_t o = tables[x].act_of_obs(u);
      terms[x] -= tables[x].rates()(static_cast<Eigen::Index>(o),
                                    static_cast<Eigen::Index>(u)) *
                  dt;
    }
  };
  for (const Jump& jump : path.jumps) {
    if (jump.dest >= omega.total() || jump.time <= t ||
        jump.time > path.horizon)
      throw DomainError("field_lagrangian_terms: malformed path");
    accumulate_survival(jump.time - t);
    const Configuration next = omega.decode(jump.dest);
    // Exactly one node's own factors may change per jump.
    std::size_t mover = num_nodes;
    for (std::size_t x = 0; x < num_nodes; ++x) {
      if (agree_on(cfg, next, topology.act_region(x))) continue;
      if (mover != num_nodes)
        throw DomainError(
            "field_lagrangian_terms: jump changes more than one node");
      mover = x;
    }
    if (mover == num_nodes)
      throw DomainError("field_lagrangian_terms: jump changes nothing");
    const std::vector<int> obs = restrict_to(cfg, topology.obs_region(mover));
    const std::size_t u = topology.obs_space(mover).encode(obs);
    const std::size_t o = topology.act_space(mover).encode(
        restrict_to(next, topology.act_region(mover)));
    const double rate = tables[mover].rates()(static_cast<Eigen::Index>(o),
                                              static_cast<Eigen::Index>(u));
    terms[mover] += (rate > 0.0)
                        ? -std::log(rate)
                        : std::numeric_limits<double>::infinity();
    cfg = next;
    t = jump.time;
  }
  accumulate_survival(path.horizon - t);
  return terms;
}

namespace {

// Runs one independent path per index and reduces the per-path values in
// index order, so the estimate does not depend on the worker count.
template <class PerPath>
PathStats mc_estimate(std::int64_t n, std::uint64_t seed, Exec exec,
                      PerPath&& per_path) {
  if (n < 1) throw DomainError("monte carlo: need at least one sample");
  std::vector<double> values(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
  for (std::int64_t i = 0; i < n; ++i)
    values[static_cast<std::size_t>(i)] =
        per_path(Rng::stream(seed, static_cast<std::uint64_t>(i)));
  (void)exec;

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = (n > 1) ? var / static_cast<double>(n - 1) : 0.0;

  PathStats stats;
  stats.estimate = mean;
  stats.std_error = std::sqrt(var / static_cast<double>(n));
  stats.n_samples = n;
  stats.seed = seed;
  return stats;
}

}  // namespace

PathStats mc_transition_prob(const Matrix& g, std::size_t omega0,
                             std::size_t omega1, double t_max, std::int64_t n,
                             std::uint64_t seed, Exec exec) {
  if (omega1 >= static_cast<std::size_t>(g.rows()))
    throw DomainError("mc_transition_prob: destination out of range");
  return mc_estimate(n, seed, exec, [&](std::uint64_t stream) {
    return sample_path(g, omega0, t_max, stream).final_state() == omega1
               ? 1.0
               : 0.0;
  });
}

PathStats mc_expected_signal(const Matrix& g, const ObjectiveOperator& gamma,
                             std::size_t omega0, double t_max, std::int64_t n,
                             std::uint64_t seed, Exec exec) {
  if (gamma.dim() != static_cast<std::size_t>(g.rows()))
    throw DomainError("mc_expected_signal: objective on a different space");
  return mc_estimate(n, seed, exec, [&](std::uint64_t stream) {
    const Path path = sample_path(g, omega0, t_max, stream);
    double total = 0.0;
    std::size_t w = path.start;
    for (const Jump& jump : path.jumps) {
      total += gamma.at(jump.dest, w);
      w = jump.dest;
    }
    return total;
  });
}

EntropyReport entropy_bound_check(const Matrix& g, double t_max,
                                  std::size_t omega0, std::int64_t n,
                                  std::uint64_t seed, Exec exec) {
  if (!is_valid_generator(g))
    throw DomainError("entropy_bound_check: not a valid generator");
  const Eigen::Index dim = g.rows();
  const double freq = -g(0, 0);
  for (Eigen::Index w = 0; w < dim; ++w)
    if (std::abs(-g(w, w) - freq) > 1e-12)
      throw DomainError("entropy_bound_check: frequency is not constant");

  EntropyReport report;
  report.entropies = Vector::Zero(dim);
  if (freq > 0.0) {
    for (Eigen::Index w = 0; w < dim; ++w) {
      double h = 0.0;
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == w) continue;
        const double p = g(j, w) / freq;
        if (p > 0.0) h -= p * std::log(p);
      }
      report.entropies(w) = h;
    }
  }
  report.bound = (freq > 0.0) ? freq * t_max * (1.0 - std::log(freq)) : 0.0;

  const PathStats stats =
      mc_estimate(n, seed, exec, [&](std::uint64_t stream) {
        return -path_log_weight(g, sample_path(g, omega0, t_max, stream));
      });
  report.mc_mean = stats.estimate;
  report.std_error = stats.std_error;
  return report;
}

}  // namespace dsf
