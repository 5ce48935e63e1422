#ifndef DSF_DYNAMICS_HPP
#define DSF_DYNAMICS_HPP

#include <memory>
#include <optional>

#include "dsf/algebra.hpp"

namespace dsf {

struct StationaryReport {
  Vector stationary;
  bool ergodic = false;
  int null_dim = 0;
  double residual = 0.0;  // ||G stationary||
};

/// e^{Gt} applied to a normalized state.
Vector evolve(const Matrix& g, const Vector& phi0, double t);

/// The long-time limit reached from phi0. For an ergodic generator this is
/// the unique solution of G phi = 0 with sum 1, independent of phi0; for a
/// non-ergodic one it is the limit of the evolution seeded at phi0 polished
/// onto the kernel of G.
StationaryReport stationary(const Matrix& g, const Vector& phi0);

/// Same limit as `stationary`, exposed under its time-average reading.
Vector averaged_state(const Matrix& g, const Vector& phi0);

/// The infinite-time evolution operator: column w is the stationary state
/// reached from the point mass at w. All columns coincide when ergodic.
Matrix phi_operator(const Matrix& g);

/// Integrated transient response: y -> integral of e^{Gt} y over [0, inf)
/// for sum-zero y; finite exactly when the generator is ergodic.
Vector apply_S(const GeneratorSolver& solver, const Vector& y);
Vector apply_S(const Matrix& g, const Vector& y);

}  // namespace dsf

#endif  // DSF_DYNAMICS_HPP
