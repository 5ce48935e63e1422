#include "dsf/algebra.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

namespace dsf {

bool is_normalized(const Vector& v, double tolerance) {
  if (v.minCoeff() < -tolerance) return false;
  return std::abs(v.sum() - 1.0) <= tolerance;
}

bool is_sum_zero(const Vector& v, double tolerance) {
  return std::abs(v.sum()) <= tolerance * std::max(1.0, v.cwiseAbs().sum());
}

bool is_valid_generator(const Matrix& g, double tolerance) {
  if (g.rows() != g.cols()) return false;
  const auto n = g.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double col_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && g(i, j) < -tolerance) return false;
      col_sum += g(i, j);
    }
    if (std::abs(col_sum) > tolerance * std::max(1.0, g.col(j).cwiseAbs().sum()))
      return false;
  }
  return true;
}

Matrix expm_full(const Matrix& g, double t) {
  if (g.rows() != g.cols()) throw DomainError("expm_full: matrix not square");
  const Eigen::Index n = g.rows();
  Matrix a = g * t;
  // Scaling and squaring with a Taylor core; adequate at the small
  // dimensions this path is used for.
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  a /= std::pow(2.0, squarings);
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 24; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

namespace {

// One uniformization substep: e^{G dt} v with K dt moderate.
Vector uniformization_step(const Matrix& g, const Vector& v, double dt,
                           double rate) {
  const double a = rate * dt;
  Vector u = v;
  double coeff = std::exp(-a);
  Vector acc = coeff * u;
  // Tail bound: remaining Poisson mass times max |u| along the series;
  // the L1 norm of P^j u is bounded by that of u for stochastic P.
  double cumulative = coeff;
  const double scale = v.cwiseAbs().sum();
  for (int j = 1; j < 100000; ++j) {
    // P u = u + G u / K
    u = u + g * u / rate;
    coeff *= a / static_cast<double>(j);
    acc += coeff * u;
    cumulative += coeff;
    if (j > static_cast<int>(a) && (1.0 - cumulative) * scale < 1e-16) break;
  }
  return acc;
}

}  // namespace

Vector expm_apply(const Matrix& g, const Vector& v, double t) {
  if (g.rows() != g.cols()) throw DomainError("expm_apply: matrix not square");
  if (g.rows() != v.size()) throw DomainError("expm_apply: shape mismatch");
  if (t < 0.0) throw DomainError("expm_apply: negative time");
  if (t == 0.0) return v;

  double rate = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    rate = std::max(rate, std::abs(g(i, i)));
  if (rate == 0.0) {
    // Zero diagonal with a valid generator means the zero matrix.
    return v + t * (g * v);
  }

  const double a = rate * t;
  if (a > 256.0 && static_cast<std::size_t>(g.rows()) <= kSmallDenseDim)
    return expm_full(g, t) * v;

  // Substep so each Poisson series stays short and exp(-K dt) stays in range.
  const int steps = std::max(1, static_cast<int>(std::ceil(a / 64.0)));
  const double dt = t / static_cast<double>(steps);
  Vector result = v;
  for (int s = 0; s < steps; ++s)
    result = uniformization_step(g, result, dt, rate);
  return result;
}

int null_space_dim(const Matrix& g, double tolerance) {
  if (g.rows() != g.cols())
    throw DomainError("null_space_dim: matrix not square");
  Eigen::JacobiSVD<Matrix> svd(g);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = tolerance * sv(0);
  int count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= cutoff) ++count;
  // All-zero matrix: every singular value is zero, including the largest.
  if (sv(0) == 0.0) return static_cast<int>(g.rows());
  return count;
}

struct GeneratorSolver::Impl {
  Matrix g;
  Eigen::PartialPivLU<Matrix> bordered_lu;
  int null_dim = 0;
};

GeneratorSolver::GeneratorSolver(const Matrix& g) : impl_(new Impl) {
  if (g.rows() != g.cols())
    throw DomainError("GeneratorSolver: matrix not square");
  impl_->g = g;
  impl_->null_dim = null_space_dim(g);
  const Eigen::Index n = g.rows();
  // Bordered system [[G, 1], [1^T, 0]]: nonsingular when the zero eigenvalue
  // is simple, and its solve enforces the sum-zero constraint exactly.
  Matrix bordered(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = g;
  bordered.topRightCorner(n, 1).setOnes();
  bordered.bottomLeftCorner(1, n).setOnes();
  bordered(n, n) = 0.0;
  impl_->bordered_lu.compute(bordered);
}

GeneratorSolver::~GeneratorSolver() = default;
GeneratorSolver::GeneratorSolver(GeneratorSolver&&) noexcept = default;
GeneratorSolver& GeneratorSolver::operator=(GeneratorSolver&&) noexcept =
    default;

std::size_t GeneratorSolver::dim() const {
  return static_cast<std::size_t>(impl_->g.rows());
}

int GeneratorSolver::null_dim() const { return impl_->null_dim; }

const Matrix& GeneratorSolver::generator() const { return impl_->g; }

Vector GeneratorSolver::solve_on_delta(const Vector& rhs) const {
  const Eigen::Index n = impl_->g.rows();
  if (rhs.size() != n) throw DomainError("solve_on_delta: shape mismatch");
  if (!is_sum_zero(rhs))
    throw DomainError("solve_on_delta: rhs is not sum-zero");
  if (impl_->null_dim != 1)
    throw NumericError("solve_on_delta: generator is not ergodic (null space dim " +
                       std::to_string(impl_->null_dim) + ")");
  Vector b(n + 1);
  b.head(n) = -rhs;
  b(n) = 0.0;
  Vector z = impl_->bordered_lu.solve(b).head(n);
  const double residual = (impl_->g * z + rhs).norm();
  const double bound = tol::solve_residual * std::max(1.0, rhs.norm());
  if (residual > bound)
    throw NumericError("solve_on_delta: residual " + std::to_string(residual) +
                       " exceeds tolerance");
  return z;
}

Vector solve_on_delta(const Matrix& g, const Vector& rhs) {
  return GeneratorSolver(g).solve_on_delta(rhs);
}

}  // namespace dsf
