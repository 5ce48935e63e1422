#ifndef DSF_CORE_HPP
#define DSF_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Numeric tolerances used across the library. These are pinned, not tunable:
// changing them changes the contract of every operation that cites them.
namespace tol {
inline constexpr double normalization = 1e-10;
inline constexpr double solve_residual = 1e-10;
inline constexpr double rank_relative = 1e-9;
inline constexpr double column_sum = 1e-12;
inline constexpr double quadrature = 1e-8;
}  // namespace tol

// Hard cap on the number of system configurations. Product configuration
// spaces grow exponentially; this library is for desk-scale verification.
inline constexpr std::size_t kDefaultMaxStates = 4096;

// Dense full-matrix exponential is used instead of uniformization below
// this dimension when the uniformization rate-time product is large.
inline constexpr std::size_t kSmallDenseDim = 64;

// Execution policy for the data-parallel kernels (path sampling, parameter
// sweeps). Results are bitwise identical across policies: work is indexed,
// merged in index order, and every random stream is keyed by (seed, index).
enum class Exec { serial, parallel };

enum class ErrorCode : int {
  usage = 2,
  spec = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Invalid shapes, out-of-range indices, malformed inputs.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::spec, what) {}
};

// Violated numeric preconditions: non-ergodic solves, singular systems,
// step sizes that leave the feasible set.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::numeric, what) {}
};

}  // namespace dsf

#endif  // DSF_CORE_HPP
