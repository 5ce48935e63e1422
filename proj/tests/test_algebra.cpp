#include <doctest.h>

#include "dsf/index_space.hpp"
#include "helpers.hpp"

using namespace dsf;
using namespace dsf::testing;

TEST_CASE("index space mixed-radix codec") {
  IndexSpace space({2, 3});
  CHECK(space.total() == 6);
  CHECK(space.encode({1, 2}) == 5);
  CHECK(space.decode(5) == std::vector<int>{1, 2});

  IndexSpace degenerate({1});
  CHECK(degenerate.total() == 1);
  CHECK(degenerate.encode({0}) == 0);

  IndexSpace cube({2, 2, 2});
  CHECK(cube.total() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(cube.encode(cube.decode(i)) == i);

  CHECK_THROWS_AS(IndexSpace({0}), DomainError);
  CHECK_THROWS_AS(IndexSpace({2, -1}), DomainError);
  CHECK_THROWS_AS(space.encode({2, 0}), DomainError);
  CHECK_THROWS_AS(space.decode(6), DomainError);
}

TEST_CASE("expm_apply on the zero generator is the identity") {
  const Matrix g = Matrix::Zero(3, 3);
  const Vector v = delta(3, 1);
  CHECK((expm_apply(g, v, 7.0) - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expm_apply matches the analytic two-state solution") {
  const Matrix g = two_state(1.0, 2.0);
  const Vector phi = expm_apply(g, delta(2, 0), 1.0);
  const double expected = 2.0 / 3.0 + std::exp(-3.0) / 3.0;
  CHECK(std::abs(phi(0) - expected) < 1e-12);
  CHECK(std::abs(phi(0) - 0.683262) < 1e-6);
}

TEST_CASE("expm_apply matches a truncated power series") {
  const Matrix g = random_generator(4, 42);
  const Vector v = uniform(4);
  const double t = 0.5;
  // Independent oracle: plain Taylor series of e^{Gt} v.
  Vector series = v, term = v;
  for (int k = 1; k <= 30; ++k) {
    term = (g * term) * (t / k);
    series += term;
  }
  CHECK((expm_apply(g, v, t) - series).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("expm_apply preserves normalization, rejects bad input") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix g = random_generator(5, seed);
    const Vector phi = expm_apply(g, delta(5, 0), 3.0);
    CHECK(std::abs(phi.sum() - 1.0) <= tol::normalization);
    CHECK(phi.minCoeff() >= -tol::normalization);
  }
  const Matrix g = random_generator(3, 9);
  CHECK_THROWS_AS(expm_apply(g, delta(4, 0), 1.0), DomainError);
  CHECK_THROWS_AS(expm_apply(g, delta(3, 0), -1.0), DomainError);
}

TEST_CASE("expm_full agrees with expm_apply and handles stiff cases") {
  const Matrix g = random_generator(5, 7, 10.0);  // rates around 10
  const Matrix full = expm_full(g, 2.0);
  for (Eigen::Index j = 0; j < 5; ++j)
    CHECK((full.col(j) - expm_apply(g, delta(5, j), 2.0)).cwiseAbs().maxCoeff()
          < 1e-9);
  // Large rate-time product exercises the dense fallback path.
  const Vector phi = expm_apply(g, delta(5, 0), 100.0);
  CHECK(std::abs(phi.sum() - 1.0) <= 1e-9);
}

TEST_CASE("solve_on_delta basics") {
  const Matrix g = two_state(1.0, 2.0);
  CHECK(solve_on_delta(g, Vector::Zero(2)).cwiseAbs().maxCoeff() == 0.0);

  // delta_1 - delta_0 is an eigenvector with eigenvalue -(a+b) = -3.
  Vector rhs(2);
  rhs << -1.0, 1.0;
  const Vector z = solve_on_delta(g, rhs);
  CHECK((z - rhs / 3.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_on_delta matches the integrated-evolution oracle") {
  const Matrix g = random_generator(5, 11);
  Rng rng(3);
  Vector rhs(5);
  for (Eigen::Index i = 0; i < 5; ++i) rhs(i) = rng.uniform();
  rhs.array() -= rhs.mean();

  // Oracle: composite Simpson quadrature of e^{Gt} rhs over [0, T*], with
  // T* far past the decay tail.
  const double h = 0.01, t_star = 60.0;
  Vector v = rhs;
  Vector integral = Vector::Zero(5);
  const Matrix step = expm_full(g, h);
  const int n_steps = static_cast<int>(t_star / h);
  for (int k = 0; k <= n_steps; ++k) {
    double w = (k == 0 || k == n_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    integral += (w * h / 3.0) * v;
    v = step * v;
  }
  CHECK((solve_on_delta(g, rhs) - integral).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solve_on_delta rejects bad inputs") {
  Matrix blocks = Matrix::Zero(4, 4);
  blocks.topLeftCorner(2, 2) = two_state(1.0, 2.0);
  blocks.bottomRightCorner(2, 2) = two_state(3.0, 4.0);
  Vector rhs(4);
  rhs << 1.0, -1.0, 0.0, 0.0;
  CHECK_THROWS_AS(solve_on_delta(blocks, rhs), NumericError);

  const Matrix g = two_state(1.0, 2.0);
  CHECK_THROWS_AS(solve_on_delta(g, delta(2, 0)), DomainError);
}

TEST_CASE("solver residual stays within tolerance") {
  const Matrix g = random_generator(6, 21);
  GeneratorSolver solver(g);
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Vector rhs(6);
    for (Eigen::Index i = 0; i < 6; ++i) rhs(i) = 2.0 * rng.uniform() - 1.0;
    rhs.array() -= rhs.mean();
    const Vector z = solver.solve_on_delta(rhs);
    CHECK((g * z + rhs).norm() <= tol::solve_residual * std::max(1.0, rhs.norm()));
    CHECK(std::abs(z.sum()) < 1e-10);
  }
}

TEST_CASE("null space dimension") {
  CHECK(null_space_dim(Matrix::Zero(3, 3)) == 3);
  CHECK(null_space_dim(two_state(1.0, 2.0)) == 1);
  Matrix blocks = Matrix::Zero(4, 4);
  blocks.topLeftCorner(2, 2) = two_state(1.0, 2.0);
  blocks.bottomRightCorner(2, 2) = two_state(3.0, 4.0);
  CHECK(null_space_dim(blocks) == 2);
}

TEST_CASE("vector predicates") {
  CHECK(is_normalized(uniform(4)));
  CHECK_FALSE(is_normalized(2.0 * uniform(4)));
  Vector y(3);
  y << 1.0, -0.5, -0.5;
  CHECK(is_sum_zero(y));
  CHECK_FALSE(is_sum_zero(delta(3, 0)));
  CHECK(is_valid_generator(two_state(0.5, 0.25)));
  Matrix bad = two_state(1.0, 2.0);
  bad(1, 0) = -1.0;
  CHECK_FALSE(is_valid_generator(bad));
}
