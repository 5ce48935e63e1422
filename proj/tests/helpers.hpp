#ifndef DSF_TEST_HELPERS_HPP
#define DSF_TEST_HELPERS_HPP

#include "dsf/trajectories.hpp"

namespace dsf::testing {

// Two-state chain with rates a: 0 -> 1 and b: 1 -> 0. The analytic
// stationary state is (b, a) / (a + b).
inline Matrix two_state(double a, double b) {
  Matrix g(2, 2);
  g << -a, b, a, -b;
  return g;
}

// Fully supported random generator with off-diagonal rates in (lo, lo + 1);
// ergodic by construction.
inline Matrix random_generator(Eigen::Index n, std::uint64_t seed,
                               double lo = 0.1) {
  Rng rng(seed);
  Matrix g = Matrix::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      g(r, c) = lo + rng.uniform();
    }
    g(c, c) = -g.col(c).sum();
  }
  return g;
}

inline Vector delta(Eigen::Index n, Eigen::Index at) {
  Vector v = Vector::Zero(n);
  v(at) = 1.0;
  return v;
}

inline Vector uniform(Eigen::Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

// Sparse random objective with zero diagonal, entries in (-1, 1).
inline ObjectiveOperator random_objective(std::size_t dim, std::uint64_t seed,
                                          bool nonnegative = false) {
  Rng rng(seed);
  std::vector<ObjectiveEntry> entries;
  for (std::size_t to = 0; to < dim; ++to)
    for (std::size_t from = 0; from < dim; ++from) {
      if (to == from || rng.uniform() < 0.5) continue;
      const double v = 2.0 * rng.uniform() - 1.0;
      entries.push_back({to, from, nonnegative ? std::abs(v) : v});
    }
  return ObjectiveOperator(dim, entries);
}

// Random two-node field: env (private 2) -> agent (private 2) channel 2,
// fully supported random local rates. |Omega| = 8.
struct RandomField {
  FieldTopology topology;
  std::vector<LocalGeneratorTable> tables;
};

inline RandomField random_two_node_field(std::uint64_t seed) {
  FieldTopology topology(
      {{"env", 2, NodeKind::environmental}, {"agent", 2, NodeKind::acting}},
      {{"env", "agent", 2}});
  Rng rng(seed);
  std::vector<LocalGeneratorTable> tables;
  for (std::size_t x = 0; x < 2; ++x) {
    const std::size_t act = topology.act_space(x).total();
    const std::size_t obs = topology.obs_space(x).total();
    const std::size_t act_rank = topology.act_region(x).factor_indices.size();
    std::vector<LocalRate> rates;
    for (std::size_t u = 0; u < obs; ++u) {
      std::vector<int> digits = topology.obs_space(x).decode(u);
      digits.resize(act_rank);
      const std::size_t diag = topology.act_space(x).encode(digits);
      for (std::size_t o = 0; o < act; ++o)
        if (o != diag) rates.push_back({u, o, 0.1 + rng.uniform()});
    }
    tables.emplace_back(topology, x, rates);
  }
  return {topology, tables};
}

}  // namespace dsf::testing

#endif  // DSF_TEST_HELPERS_HPP
