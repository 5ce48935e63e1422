#ifndef DSF_GRADIENT_HPP
#define DSF_GRADIENT_HPP

#include "dsf/objective.hpp"

namespace dsf {

inline constexpr double kDefaultFdStep = 1e-5;

/// Dense table of partial derivatives of the long-run signal rate. System
/// flavor: values(w', w) for global parameters G^{w'}_w. Local flavor:
/// values(o', u) for one node's rates, u an observable source and o' an
/// actionable destination. Diagonal parameters do not exist; their slots
/// stay zero.
struct GradientTable {
  Matrix values;

  double at(std::size_t to, std::size_t from) const {
    return values(static_cast<Eigen::Index>(to),
                  static_cast<Eigen::Index>(from));
  }
};

/// Exact gradient of the objective value with respect to every off-diagonal
/// generator entry: d/dG^{w'}_w = phibar^w (gamma_{w'w} + c_{w'} - c_w),
/// where c_w is the integrated transient signal response to a point mass
/// at w. One constrained solve per configuration, reused across the whole
/// parameter sweep.
GradientTable grad_system(const ObjectiveOperator& gamma, const Matrix& g,
                          Exec exec = Exec::parallel);

/// Exact gradient of node x's objective value with respect to its own rate
/// table: the system formula summed over global configurations that present
/// the same observable source u to x.
GradientTable grad_local(const ObjectiveOperator& gamma_x,
                         const FieldTopology& topology,
                         const std::vector<LocalGeneratorTable>& tables,
                         std::size_t x, Exec exec = Exec::parallel);

/// Same, with the system generator already assembled.
GradientTable grad_local(const ObjectiveOperator& gamma_x,
                         const FieldTopology& topology, const Matrix& g,
                         std::size_t x, Exec exec = Exec::parallel);

/// Central finite difference of the objective value in one off-diagonal
/// parameter, re-deriving the diagonal so both stencil points stay valid
/// generators. A parameter at rate exactly 0 falls back to the forward
/// difference; a positive rate smaller than h is a step error.
double fd_gradient(const ObjectiveOperator& gamma, const Matrix& g,
                   std::size_t to, std::size_t from,
                   double h = kDefaultFdStep);

/// Finite difference in one local rate of node x's table.
double fd_gradient(const ObjectiveOperator& gamma_x,
                   const FieldTopology& topology,
                   const std::vector<LocalGeneratorTable>& tables,
                   std::size_t x, std::size_t to_act, std::size_t from_obs,
                   double h = kDefaultFdStep);

}  // namespace dsf

#endif  // DSF_GRADIENT_HPP
