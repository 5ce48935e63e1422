#ifndef DSF_PROPAGATION_HPP
#define DSF_PROPAGATION_HPP

#include <map>

#include "dsf/gradient.hpp"

namespace dsf {

/// Dense fixed-point propagation solves scale as |Omega|^2 unknowns per
/// acting node; above this dimension the vectorized system is declined.
inline constexpr std::size_t kMaxPropagationStates = 32;

/// Connection strengths: lambda(source, target) is how much of the target's
/// objective signal arrives from that source. Rows over sources of each
/// acting target sum to 1.
struct AdjacencyWeights {
  Matrix lambda;
};

enum class PropagatorForm { identity, pq, explicit_table };

/// How one acting node's objective functional is seen by a downstream node.
/// The pq form carries a sum-zero-preserving filter Q and realizes
/// P[Q] = 1 + (lifted G) S Q Pi; explicit tables act directly on the
/// transition-pair space.
struct Propagator {
  PropagatorForm form = PropagatorForm::identity;
  Matrix q;      // pq form only
  Matrix table;  // explicit form only, indexed by pair = to * n + from
};

/// Builds a pq propagator after checking ergodicity of G and that Q maps
/// the sum-zero subspace into itself (checked on a full basis of it).
Propagator make_pq(const Matrix& g, const Matrix& q);

/// The filter composition (Q, Q') = Q + Q' - Q Q', chosen so that applying
/// P[Q] then P[Q'] equals P[(Q, Q')].
Matrix compose_q(const Matrix& q, const Matrix& qp);

/// The propagator as a dense operator on the transition-pair space.
Matrix propagator_matrix(const Matrix& g, const Propagator& p);

using NodePair = std::pair<std::size_t, std::size_t>;  // (source, target)

struct PropagationNetwork {
  const FieldTopology* topology = nullptr;
  AdjacencyWeights weights;
  /// Raw signals on edges from environmental sources to acting targets.
  std::map<NodePair, ObjectiveOperator> env_signals;
  /// Propagators on edges between acting nodes.
  std::map<NodePair, Propagator> propagators;
  bool strongly_connected = false;
};

/// Validates weights, signal sources, and propagator placement; records
/// whether the positively-weighted acting subgraph is strongly connected.
PropagationNetwork build_network(
    const FieldTopology& topology, const AdjacencyWeights& weights,
    const std::map<NodePair, ObjectiveOperator>& env_signals,
    const std::map<NodePair, Propagator>& propagators);

/// Solves the propagation fixed point: each acting node's effective
/// objective functional is the weighted sum of its sources' signals, with
/// acting sources contributing through their propagators. Exact dense
/// linear solve; throws NumericError when the system is singular.
std::map<std::size_t, ObjectiveOperator> solve_effective_objectives(
    const PropagationNetwork& network, const Matrix& g);

struct UniformValueReport {
  std::vector<std::size_t> nodes;  // acting nodes, in id order
  Vector values;                   // objective value per node
  double spread = 0.0;             // max - min
};

/// Objective value of every acting node under its effective functional.
/// With conforming propagators all values coincide; the spread is reported
/// either way.
UniformValueReport check_uniform_value(const PropagationNetwork& network,
                                       const Matrix& g);

/// Local gradient of node x's effective objective. Requires every
/// acting-to-acting propagator to be identity or pq form; the value an
/// explicit table assigns to a perturbed system is unknowable here.
GradientTable propagated_local_gradient(const PropagationNetwork& network,
                                        const Matrix& g, std::size_t x,
                                        Exec exec = Exec::parallel);

}  // namespace dsf

#endif  // DSF_PROPAGATION_HPP
