#ifndef DSF_GENERATORS_HPP
#define DSF_GENERATORS_HPP

#include <vector>

#include "dsf/topology.hpp"

namespace dsf {

/// One rate entry of a local generator: from observable configuration u
/// (index into obs_space) to actionable configuration o (index into
/// act_space), with o != u restricted to the actionable factors.
struct LocalRate {
  std::size_t from_obs;
  std::size_t to_act;
  double rate;
};

/// Rates at which one entity rewrites its own factors, conditioned on what
/// it observes. Stored dense (act x obs); the diagonal column sums are
/// derived, never user supplied, so columns sum to zero by construction.
class LocalGeneratorTable {
 public:
  LocalGeneratorTable(const FieldTopology& topology, std::size_t node,
                      const std::vector<LocalRate>& rates);

  std::size_t node() const { return node_; }
  const Matrix& rates() const { return rates_; }
  /// Actionable part of observable configuration u (its leading digits).
  std::size_t act_of_obs(std::size_t u) const { return act_of_obs_[u]; }

 private:
  std::size_t node_;
  Matrix rates_;  // rows: act_space destinations, cols: obs_space sources
  std::vector<std::size_t> act_of_obs_;
};

/// Throws DomainError naming the first violated constraint: a negative
/// off-diagonal rate or a column sum away from zero.
void validate_local(const FieldTopology& topology,
                    const LocalGeneratorTable& table);

/// Embeds a local generator into the full configuration space: it acts on
/// the node's own factors, conditioned on the observed ones, and leaves
/// everything else untouched.
Matrix embed_local(const FieldTopology& topology,
                   const LocalGeneratorTable& table);

/// Sum of all embedded local generators; the system generator.
Matrix assemble_system(const FieldTopology& topology,
                       const std::vector<LocalGeneratorTable>& tables);

/// Max-abs entry of the commutator of two embedded local generators.
double commutator_norm(const FieldTopology& topology, std::size_t x,
                       std::size_t y,
                       const std::vector<LocalGeneratorTable>& tables);

/// Sparse vector on the transition-pair space H(Omega x Omega).
struct TildeEntry {
  std::size_t to;
  std::size_t from;
  double value;
};
using TildeVector = std::vector<TildeEntry>;

/// Sparse operator from H(Omega) to the transition-pair space: one entry
/// list per source column.
struct LiftedOperator {
  std::size_t dim = 0;  // |Omega|
  std::vector<TildeVector> columns;

  TildeVector apply(const Vector& v) const;
};

/// Records a generator at transition-pair resolution: column w holds an
/// entry (w', w) for every rate G^{w'}_w.
LiftedOperator lift(const Matrix& generator);

/// The pair-creation operator for one local parameter: maps |w''> to
/// |w+ w''> when w'' observes u, where w+ rewrites the node's own factors
/// to o. Zero columns elsewhere.
LiftedOperator action_operator(const FieldTopology& topology, std::size_t x,
                               std::size_t from_obs, std::size_t to_act);

/// Difference projection |w'w> -> |w'> - |w>; lands in the sum-zero subspace.
Vector project_pi(const TildeVector& v, std::size_t dim);
Matrix project_pi(const LiftedOperator& op);

}  // namespace dsf

#endif  // DSF_GENERATORS_HPP
