#include "dsf/objective.hpp"

#include <cmath>
#include <functional>

namespace dsf {

ObjectiveOperator::ObjectiveOperator(std::size_t dim,
                                     const std::vector<ObjectiveEntry>& entries)
    : dim_(dim) {
  for (const auto& e : entries) {
    if (e.to >= dim || e.from >= dim)
      throw DomainError("objective: entry index out of range");
    if (e.to == e.from)
      throw DomainError("objective: diagonal entries are forbidden");
    if (e.value != 0.0) entries_[{e.to, e.from}] += e.value;
  }
}

double ObjectiveOperator::at(std::size_t to, std::size_t from) const {
  auto it = entries_.find({to, from});
  return it == entries_.end() ? 0.0 : it->second;
}

double ObjectiveOperator::operator()(const TildeVector& v) const {
  double total = 0.0;
  for (const auto& e : v) total += at(e.to, e.from) * e.value;
  return total;
}

Vector ObjectiveOperator::signal_rate(const Matrix& generator) const {
  if (static_cast<std::size_t>(generator.rows()) != dim_ ||
      generator.rows() != generator.cols())
    throw DomainError("signal_rate: shape mismatch");
  Vector rate = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& [key, gamma] : entries_)
    rate(static_cast<Eigen::Index>(key.second)) +=
        gamma * generator(static_cast<Eigen::Index>(key.first),
                          static_cast<Eigen::Index>(key.second));
  return rate;
}

ObjectiveOperator ObjectiveOperator::scaled(double c) const {
  ObjectiveOperator out;
  out.dim_ = dim_;
  if (c != 0.0)
    for (const auto& [key, v] : entries_) out.entries_[key] = c * v;
  return out;
}

ObjectiveOperator build_objective(std::size_t dim,
                                  const std::vector<ObjectiveEntry>& entries) {
  return ObjectiveOperator(dim, entries);
}

bool check_locality(const FieldTopology& topology, std::size_t x,
                    const ObjectiveOperator& gamma) {
  const IndexSpace& omega = topology.omega();
  if (gamma.dim() != omega.total())
    throw DomainError("check_locality: objective on a different space");
  const Region& obs = topology.obs_region(x);
  for (const auto& [key, value] : gamma.entries()) {
    if (value == 0.0) continue;
    const Configuration to = omega.decode(key.first);
    const Configuration from = omega.decode(key.second);
    if (agree_on(to, from, obs)) return false;
  }
  return true;
}

double objective_value(const ObjectiveOperator& gamma, const Matrix& g,
                       const Vector& phibar, bool phibar_is_stationary) {
  if (!phibar_is_stationary)
    return objective_value(gamma, g, phibar);
  return gamma.signal_rate(g).dot(phibar);
}

double objective_value(const ObjectiveOperator& gamma, const Matrix& g,
                       const Vector& phi0) {
  if (gamma.empty()) return 0.0;
  const Vector phibar = stationary(g, phi0).stationary;
  return gamma.signal_rate(g).dot(phibar);
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double eps,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1);
}

}  // namespace

double expected_signal_quadrature(const ObjectiveOperator& gamma,
                                  const Matrix& g, std::size_t omega0,
                                  double t_max) {
  if (t_max < 0.0) throw DomainError("expected_signal_quadrature: negative T");
  if (t_max == 0.0 || gamma.empty()) return 0.0;
  const Eigen::Index n = g.rows();
  if (omega0 >= static_cast<std::size_t>(n))
    throw DomainError("expected_signal_quadrature: start out of range");
  const Vector rate = gamma.signal_rate(g);
  Vector phi = Vector::Zero(n);
  phi(static_cast<Eigen::Index>(omega0)) = 1.0;
  // Integrate in unit panels, advancing the state panel by panel so the
  // integrand is always a short evolution from the panel start.
  double total = 0.0;
  double a = 0.0;
  while (a < t_max) {
    const double b = std::min(a + 1.0, t_max);
    auto f = [&](double s) { return rate.dot(expm_apply(g, phi, s - a)); };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    total += adaptive_simpson(f, a, b, fa, fm, fb,
                              tol::quadrature / std::max(1.0, t_max), 40);
    phi = expm_apply(g, phi, b - a);
    a = b;
  }
  return total;
}

}  // namespace dsf
