#include "dsf/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace dsf {

namespace {

// Pair-space vectorization: functional entry (to, from) lives at to*n + from.
Vector vectorize(const ObjectiveOperator& gamma, std::size_t n) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n * n));
  for (const auto& [key, value] : gamma.entries())
    v(static_cast<Eigen::Index>(key.first * n + key.second)) = value;
  return v;
}

ObjectiveOperator unvectorize(const Vector& v, std::size_t n) {
  std::vector<ObjectiveEntry> entries;
  for (std::size_t to = 0; to < n; ++to)
    for (std::size_t from = 0; from < n; ++from) {
      if (to == from) continue;  // diagonal components are solver noise
      const double value = v(static_cast<Eigen::Index>(to * n + from));
      if (value != 0.0) entries.push_back({to, from, value});
    }
  return ObjectiveOperator(n * n == 0 ? 0 : n, entries);
}

bool q_closed_on_delta(const Matrix& q, double tolerance) {
  // Q preserves sum-zero vectors iff all its column sums coincide.
  const Vector colsums = q.colwise().sum();
  return (colsums.array() - colsums(0)).abs().maxCoeff() <= tolerance;
}

}  // namespace

Propagator make_pq(const Matrix& g, const Matrix& q) {
  if (!is_valid_generator(g))
    throw DomainError("make_pq: not a valid generator");
  if (q.rows() != g.rows() || q.cols() != g.cols())
    throw DomainError("make_pq: filter shape mismatch");
  GeneratorSolver solver(g);
  if (!solver.ergodic())
    throw NumericError("make_pq: generator is not ergodic");
  if (!q_closed_on_delta(q, tol::solve_residual))
    throw DomainError("make_pq: filter does not preserve the sum-zero space");
  Propagator p;
  p.form = PropagatorForm::pq;
  p.q = q;
  return p;
}

Matrix compose_q(const Matrix& q, const Matrix& qp) {
  if (q.rows() != qp.rows() || q.cols() != qp.cols() || q.rows() != q.cols())
    throw DomainError("compose_q: shape mismatch");
  return q + qp - q * qp;
}

Matrix propagator_matrix(const Matrix& g, const Propagator& p) {
  const std::size_t n = static_cast<std::size_t>(g.rows());
  const Eigen::Index pairs = static_cast<Eigen::Index>(n * n);
  switch (p.form) {
    case PropagatorForm::identity:
      return Matrix::Identity(pairs, pairs);
    case PropagatorForm::explicit_table:
      if (p.table.rows() != pairs || p.table.cols() != pairs)
        throw DomainError("propagator_matrix: explicit table shape mismatch");
      return p.table;
    case PropagatorForm::pq:
      break;
  }
  GeneratorSolver solver(g);
  // sq[w] = S Q (delta_w - delta_0); the pair column (w', w) then adds the
  // lifted image of sq[w'] - sq[w] on top of the identity.
  std::vector<Vector> sq(n);
  for (std::size_t w = 0; w < n; ++w) {
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(n));
    rhs(static_cast<Eigen::Index>(w)) += 1.0;
    rhs(0) -= 1.0;
    sq[w] = solver.solve_on_delta(p.q * rhs);
  }
  Matrix pm = Matrix::Identity(pairs, pairs);
  for (std::size_t to = 0; to < n; ++to)
    for (std::size_t from = 0; from < n; ++from) {
      if (to == from) continue;
      const Vector v = sq[to] - sq[from];
      const Eigen::Index col = static_cast<Eigen::Index>(to * n + from);
      for (std::size_t b = 0; b < n; ++b) {
        const double vb = v(static_cast<Eigen::Index>(b));
        if (vb == 0.0) continue;
        for (std::size_t a = 0; a < n; ++a)
          pm(static_cast<Eigen::Index>(a * n + b), col) +=
              g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
              vb;
      }
    }
  return pm;
}

namespace {

bool acting_strongly_connected(const FieldTopology& topology,
                               const Matrix& lambda) {
  const std::vector<std::size_t> acting = topology.acting_nodes();
  if (acting.size() <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<bool> seen(topology.num_nodes(), false);
    std::vector<std::size_t> stack{acting[0]};
    seen[acting[0]] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : acting) {
        if (seen[w]) continue;
        const double weight =
            forward ? lambda(static_cast<Eigen::Index>(v),
                             static_cast<Eigen::Index>(w))
                    : lambda(static_cast<Eigen::Index>(w),
                             static_cast<Eigen::Index>(v));
        if (weight > 0.0) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  const std::vector<bool> fwd = reach(true), bwd = reach(false);
  for (std::size_t w : acting)
    if (!fwd[w] || !bwd[w]) return false;
  return true;
}

}  // namespace

PropagationNetwork build_network(
    const FieldTopology& topology, const AdjacencyWeights& weights,
    const std::map<NodePair, ObjectiveOperator>& env_signals,
    const std::map<NodePair, Propagator>& propagators) {
  const std::size_t num_nodes = topology.num_nodes();
  const Matrix& lambda = weights.lambda;
  if (lambda.rows() != static_cast<Eigen::Index>(num_nodes) ||
      lambda.cols() != static_cast<Eigen::Index>(num_nodes))
    throw DomainError("build_network: weight table shape mismatch");

  for (std::size_t src = 0; src < num_nodes; ++src)
    for (std::size_t dst = 0; dst < num_nodes; ++dst) {
      const double w = lambda(static_cast<Eigen::Index>(src),
                              static_cast<Eigen::Index>(dst));
      if (w < 0.0 || w > 1.0)
        throw DomainError("build_network: weight outside [0, 1]");
      if (w == 0.0) continue;
      if (!topology.has_edge(src, dst))
        throw DomainError("build_network: weight on a non-edge " +
                          topology.node(src).name + " -> " +
                          topology.node(dst).name);
      if (topology.node(dst).kind == NodeKind::environmental)
        throw DomainError(
            "build_network: environmental nodes do not receive signals");
      if (topology.node(src).kind == NodeKind::environmental) {
        if (!env_signals.count({src, dst}))
          throw DomainError("build_network: weighted edge " +
                            topology.node(src).name + " -> " +
                            topology.node(dst).name + " has no signal");
      } else if (!propagators.count({src, dst})) {
        throw DomainError("build_network: weighted edge " +
                          topology.node(src).name + " -> " +
                          topology.node(dst).name + " has no propagator");
      }
    }

  for (std::size_t dst : topology.acting_nodes()) {
    const double row = lambda.col(static_cast<Eigen::Index>(dst)).sum();
    if (std::abs(row - 1.0) > 1e-9)
      throw DomainError("build_network: weights into " +
                        topology.node(dst).name + " sum to " +
                        std::to_string(row) + ", expected 1");
  }

  const std::size_t dim = topology.omega().total();
  for (const auto& [edge, signal] : env_signals) {
    if (!topology.has_edge(edge.first, edge.second) ||
        topology.node(edge.first).kind != NodeKind::environmental ||
        topology.node(edge.second).kind != NodeKind::acting)
      throw DomainError(
          "build_network: signals must sit on environment-to-acting edges");
    if (signal.dim() != dim)
      throw DomainError("build_network: signal on a different space");
  }
  for (const auto& [edge, p] : propagators) {
    (void)p;
    if (!topology.has_edge(edge.first, edge.second))
      throw DomainError("build_network: propagator on a non-edge");
    if (topology.node(edge.first).kind != NodeKind::acting ||
        topology.node(edge.second).kind != NodeKind::acting)
      throw DomainError(
          "build_network: propagators belong to acting-to-acting edges");
  }

  PropagationNetwork network;
  network.topology = &topology;
  network.weights = weights;
  network.env_signals = env_signals;
  network.propagators = propagators;
  network.strongly_connected = acting_strongly_connected(topology, lambda);
  return network;
}

std::map<std::size_t, ObjectiveOperator> solve_effective_objectives(
    const PropagationNetwork& network, const Matrix& g) {
  const FieldTopology& topology = *network.topology;
  const std::size_t n = topology.omega().total();
  if (static_cast<std::size_t>(g.rows()) != n || g.rows() != g.cols())
    throw DomainError("solve_effective_objectives: generator shape mismatch");
  if (n > kMaxPropagationStates)
    throw DomainError(
        "solve_effective_objectives: configuration space too large for the "
        "dense fixed-point solve");

  const std::vector<std::size_t> acting = topology.acting_nodes();
  const std::size_t k = acting.size();
  if (k == 0) return {};
  const Eigen::Index block = static_cast<Eigen::Index>(n * n);
  const Eigen::Index total = static_cast<Eigen::Index>(k) * block;
  const Matrix& lambda = network.weights.lambda;

  Matrix system = Matrix::Identity(total, total);
  Vector b = Vector::Zero(total);
  for (std::size_t ti = 0; ti < k; ++ti) {
    const std::size_t x = acting[ti];
    for (std::size_t src = 0; src < topology.num_nodes(); ++src) {
      const double w = lambda(static_cast<Eigen::Index>(src),
                              static_cast<Eigen::Index>(x));
      if (w == 0.0) continue;
      if (topology.node(src).kind == NodeKind::environmental) {
        b.segment(static_cast<Eigen::Index>(ti) * block, block) +=
            w * vectorize(network.env_signals.at({src, x}), n);
      } else {
        const auto si = static_cast<Eigen::Index>(
            std::find(acting.begin(), acting.end(), src) - acting.begin());
        const Matrix pm =
            propagator_matrix(g, network.propagators.at({src, x}));
        system.block(static_cast<Eigen::Index>(ti) * block, si * block, block,
                     block) -= w * pm.transpose();
      }
    }
  }

  const Vector solution = system.partialPivLu().solve(b);
  const double residual = (system * solution - b).norm();
  if (!std::isfinite(residual) ||
      residual > tol::solve_residual * std::max(1.0, b.norm()))
    throw NumericError(
        "solve_effective_objectives: fixed-point system is singular (acting "
        "subgraph not strongly connected, or no environmental input)");

  std::map<std::size_t, ObjectiveOperator> effective;
  for (std::size_t ti = 0; ti < k; ++ti)
    effective.emplace(
        acting[ti],
        unvectorize(
            solution.segment(static_cast<Eigen::Index>(ti) * block, block),
            n));
  return effective;
}

UniformValueReport check_uniform_value(const PropagationNetwork& network,
                                       const Matrix& g) {
  UniformValueReport report;
  report.nodes = network.topology->acting_nodes();
  report.values = Vector::Zero(static_cast<Eigen::Index>(report.nodes.size()));
  if (report.nodes.empty()) return report;

  const auto effective = solve_effective_objectives(network, g);
  const Eigen::Index n = g.rows();
  const Vector phi0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const Vector phibar = averaged_state(g, phi0);
  for (std::size_t i = 0; i < report.nodes.size(); ++i)
    report.values(static_cast<Eigen::Index>(i)) =
        effective.at(report.nodes[i]).signal_rate(g).dot(phibar);
  report.spread =
      report.values.maxCoeff() - report.values.minCoeff();
  return report;
}

GradientTable propagated_local_gradient(const PropagationNetwork& network,
                                        const Matrix& g, std::size_t x,
                                        Exec exec) {
  for (const auto& [edge, p] : network.propagators) {
    (void)edge;
    if (p.form == PropagatorForm::explicit_table)
      throw DomainError(
          "propagated_local_gradient: explicit propagators are unsupported; "
          "their response to a generator change is undefined");
  }
  const auto effective = solve_effective_objectives(network, g);
  const auto it = effective.find(x);
  if (it == effective.end())
    throw DomainError("propagated_local_gradient: node is not acting");
  return grad_local(it->second, *network.topology, g, x, exec);
}

}  // namespace dsf
