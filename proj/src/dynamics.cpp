#include "dsf/dynamics.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace dsf {

Vector evolve(const Matrix& g, const Vector& phi0, double t) {
  if (!is_valid_generator(g))
    throw DomainError("evolve: not a valid generator");
  return expm_apply(g, phi0, t);
}

namespace {

// Long-horizon evolution with doubling time steps until G phi settles.
Vector evolve_to_limit(const Matrix& g, const Vector& phi0) {
  Vector phi = phi0;
  double t = 1.0;
  for (int iter = 0; iter < 48; ++iter) {
    phi = expm_apply(g, phi, t);
    if ((g * phi).cwiseAbs().maxCoeff() <= 1e-13) break;
    t *= 2.0;
  }
  return phi;
}

}  // namespace

StationaryReport stationary(const Matrix& g, const Vector& phi0) {
  if (!is_valid_generator(g))
    throw DomainError("stationary: not a valid generator");
  if (!is_normalized(phi0))
    throw DomainError("stationary: initial state not normalized");

  StationaryReport report;
  GeneratorSolver solver(g);
  report.null_dim = solver.null_dim();
  report.ergodic = solver.ergodic();

  const Eigen::Index n = g.rows();
  if (report.ergodic) {
    // Constrained solve [G; 1^T] phi = [0; 1] via the same bordered system:
    // solve on the shifted variable phi = phi0 + z with z sum-zero.
    Vector z = solver.solve_on_delta(g * phi0);
    report.stationary = phi0 + z;
  } else {
    // Seed with a long evolution, then polish onto the kernel of G.
    Vector seed = evolve_to_limit(g, phi0);
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff =
        (sv.size() > 0 && sv(0) > 0.0) ? tol::rank_relative * sv(0) : 1.0;
    Matrix kernel(n, 0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= cutoff) {
        kernel.conservativeResize(n, kernel.cols() + 1);
        kernel.col(kernel.cols() - 1) = svd.matrixV().col(i);
      }
    if (kernel.cols() == 0) kernel = Matrix::Identity(n, n);
    Vector polished = kernel * (kernel.transpose() * seed);
    const double total = polished.sum();
    report.stationary = (std::abs(total) > 1e-8) ? Vector(polished / total)
                                                 : seed;
  }

  // Clip solver noise below zero and renormalize.
  for (Eigen::Index i = 0; i < n; ++i)
    if (report.stationary(i) < 0.0 && report.stationary(i) > -1e-12)
      report.stationary(i) = 0.0;
  report.stationary /= report.stationary.sum();
  report.residual = (g * report.stationary).norm();
  return report;
}

Vector averaged_state(const Matrix& g, const Vector& phi0) {
  return stationary(g, phi0).stationary;
}

Matrix phi_operator(const Matrix& g) {
  const Eigen::Index n = g.rows();
  GeneratorSolver solver(g);
  Matrix phi(n, n);
  if (solver.ergodic()) {
    Vector e0 = Vector::Zero(n);
    e0(0) = 1.0;
    const Vector pi = stationary(g, e0).stationary;
    for (Eigen::Index j = 0; j < n; ++j) phi.col(j) = pi;
    return phi;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector ej = Vector::Zero(n);
    ej(j) = 1.0;
    phi.col(j) = stationary(g, ej).stationary;
  }
  return phi;
}

Vector apply_S(const GeneratorSolver& solver, const Vector& y) {
  if (!solver.ergodic())
    throw NumericError("apply_S: generator is not ergodic");
  if (!is_sum_zero(y)) throw DomainError("apply_S: input is not sum-zero");
  // d/dt e^{Gt} y integrates to Phi y - y = -y on the sum-zero subspace,
  // so the integral z satisfies G z = -y with sum(z) = 0.
  return solver.solve_on_delta(y);
}

Vector apply_S(const Matrix& g, const Vector& y) {
  GeneratorSolver solver(g);
  return apply_S(solver, y);
}

}  // namespace dsf
