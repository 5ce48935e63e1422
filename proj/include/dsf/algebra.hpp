#ifndef DSF_ALGEBRA_HPP
#define DSF_ALGEBRA_HPP

#include <memory>

#include "dsf/core.hpp"

namespace dsf {

/// True iff every entry is >= -tol and the entries sum to 1 within tol.
bool is_normalized(const Vector& v, double tolerance = tol::normalization);

/// True iff the entries sum to 0 within tol (member of the sum-zero subspace).
bool is_sum_zero(const Vector& v, double tolerance = tol::normalization);

/// True iff off-diagonal entries are >= -tol and every column sums to 0
/// within tol, i.e. G is a valid transition-rate matrix.
bool is_valid_generator(const Matrix& g, double tolerance = tol::column_sum);

/// Applies e^{Gt} to v. Uniformization (Poisson-weighted power series with
/// G = K(P - I), K = max |G_ww|) with time substepping; for small dense
/// matrices with a large rate-time product it switches to a full matrix
/// exponential via scaling and squaring.
Vector expm_apply(const Matrix& g, const Vector& v, double t);

/// Full matrix exponential e^{Gt} (dense, scaling-and-squaring).
Matrix expm_full(const Matrix& g, double t);

/// Number of singular values below tolerance * max singular value.
int null_space_dim(const Matrix& g, double tolerance = tol::rank_relative);

/// Cached factorizations for one generator: a bordered LU for sum-zero
/// constrained solves and the singular values for rank diagnostics.
/// Immutable after construction; safe for concurrent solves.
class GeneratorSolver {
 public:
  explicit GeneratorSolver(const Matrix& g);
  ~GeneratorSolver();
  GeneratorSolver(GeneratorSolver&&) noexcept;
  GeneratorSolver& operator=(GeneratorSolver&&) noexcept;

  std::size_t dim() const;
  int null_dim() const;
  bool ergodic() const { return null_dim() == 1; }

  /// Solves G z = -rhs with sum(z) = 0 for sum-zero rhs; unique when the
  /// generator is ergodic. Throws NumericError otherwise.
  Vector solve_on_delta(const Vector& rhs) const;

  const Matrix& generator() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot form of GeneratorSolver::solve_on_delta.
Vector solve_on_delta(const Matrix& g, const Vector& rhs);

}  // namespace dsf

#endif  // DSF_ALGEBRA_HPP
