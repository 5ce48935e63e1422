#ifndef DSF_OBJECTIVE_HPP
#define DSF_OBJECTIVE_HPP

#include <map>
#include <utility>
#include <vector>

#include "dsf/dynamics.hpp"
#include "dsf/generators.hpp"

namespace dsf {

struct ObjectiveEntry {
  std::size_t to;    // destination configuration
  std::size_t from;  // source configuration
  double value;
};

/// A linear functional on transition pairs: each jump from -> to carries a
/// signal. The diagonal is identically zero and cannot be populated. Stored
/// sparsely; applied as a dot product against lifted images.
class ObjectiveOperator {
 public:
  ObjectiveOperator() = default;
  ObjectiveOperator(std::size_t dim, const std::vector<ObjectiveEntry>& entries);

  std::size_t dim() const { return dim_; }
  double at(std::size_t to, std::size_t from) const;
  const std::map<std::pair<std::size_t, std::size_t>, double>& entries() const {
    return entries_;
  }
  bool empty() const { return entries_.empty(); }

  double operator()(const TildeVector& v) const;

  /// Signal functional composed with the lifted generator: the per-source
  /// expected signal rate, (Gamma G~)_w = sum_w' gamma_{w'w} G^{w'}_w.
  Vector signal_rate(const Matrix& generator) const;

  ObjectiveOperator scaled(double c) const;

 private:
  std::size_t dim_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, double> entries_;
};

ObjectiveOperator build_objective(std::size_t dim,
                                  const std::vector<ObjectiveEntry>& entries);

/// True iff every nonzero signal corresponds to a jump visible to node x,
/// i.e. the jump changes the digits x can observe.
bool check_locality(const FieldTopology& topology, std::size_t x,
                    const ObjectiveOperator& gamma);

/// Long-run average signal rate: sum of gamma_{w'w} G^{w'}_w phibar^w at the
/// stationary state reached from phi0.
double objective_value(const ObjectiveOperator& gamma, const Matrix& g,
                       const Vector& phi0);
double objective_value(const ObjectiveOperator& gamma, const Matrix& g,
                       const Vector& phibar, bool phibar_is_stationary);

/// Expected accumulated signal over [0, T] starting from the point mass at
/// w: adaptive quadrature of the signal rate along the evolution.
double expected_signal_quadrature(const ObjectiveOperator& gamma,
                                  const Matrix& g, std::size_t omega0,
                                  double t_max);

}  // namespace dsf

#endif  // DSF_OBJECTIVE_HPP
