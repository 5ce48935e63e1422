#include "dsf/gradient.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsf {

namespace {

// c_w = (Gamma G~) S (delta_w - delta_0) for every w, from one LU
// factorization. c is defined up to a common shift, which cancels in every
// difference c_{w'} - c_w.
Vector signal_response(const GeneratorSolver& solver, const Vector& u,
                       Exec exec) {
  const Eigen::Index n = static_cast<Eigen::Index>(solver.dim());
  Vector c(n);
  c(0) = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
  for (Eigen::Index w = 1; w < n; ++w) {
    Vector rhs = Vector::Zero(n);
    rhs(w) = 1.0;
    rhs(0) -= 1.0;
    c(w) = u.dot(solver.solve_on_delta(rhs));
  }
  (void)exec;
  return c;
}

Vector stationary_of(const GeneratorSolver& solver, const Matrix& g) {
  const Eigen::Index n = g.rows();
  const Vector phi0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return phi0 + solver.solve_on_delta(g * phi0);
}

}  // namespace

GradientTable grad_system(const ObjectiveOperator& gamma, const Matrix& g,
                          Exec exec) {
  if (!is_valid_generator(g))
    throw DomainError("grad_system: not a valid generator");
  const Eigen::Index n = g.rows();
  if (gamma.dim() != static_cast<std::size_t>(n))
    throw DomainError("grad_system: objective on a different space");

  GeneratorSolver solver(g);
  if (!solver.ergodic())
    throw NumericError("grad_system: generator is not ergodic");
  const Vector phibar = stationary_of(solver, g);
  const Vector u = gamma.signal_rate(g);
  const Vector c = signal_response(solver, u, exec);

  GradientTable table;
  table.values = Matrix::Zero(n, n);
  for (Eigen::Index from = 0; from < n; ++from)
    for (Eigen::Index to = 0; to < n; ++to) {
      if (to == from) continue;
      const double gamma_tf = gamma.at(static_cast<std::size_t>(to),
                                       static_cast<std::size_t>(from));
      table.values(to, from) = phibar(from) * (gamma_tf + c(to) - c(from));
    }
  return table;
}

GradientTable grad_local(const ObjectiveOperator& gamma_x,
                         const FieldTopology& topology,
                         const std::vector<LocalGeneratorTable>& tables,
                         std::size_t x, Exec exec) {
  return grad_local(gamma_x, topology, assemble_system(topology, tables), x,
                    exec);
}

GradientTable grad_local(const ObjectiveOperator& gamma_x,
                         const FieldTopology& topology, const Matrix& g,
                         std::size_t x, Exec exec) {
  if (x >= topology.num_nodes()) throw DomainError("grad_local: bad node");
  const IndexSpace& omega = topology.omega();
  if (gamma_x.dim() != omega.total())
    throw DomainError("grad_local: objective on a different space");

  GeneratorSolver solver(g);
  if (!solver.ergodic())
    throw NumericError("grad_local: assembled system is not ergodic");
  const Vector phibar = stationary_of(solver, g);
  const Vector u = gamma_x.signal_rate(g);
  const Vector c = signal_response(solver, u, exec);

  const IndexSpace& act = topology.act_space(x);
  const IndexSpace& obs = topology.obs_space(x);
  const Region& act_region = topology.act_region(x);
  const Region& obs_region = topology.obs_region(x);
  const std::size_t n = omega.total();

  GradientTable table;
  table.values =
      Matrix::Zero(static_cast<Eigen::Index>(act.total()),
                   static_cast<Eigen::Index>(obs.total()));
  // One pass per actionable destination; each iteration owns one row, so
  // the parallel sweep writes disjoint memory and stays deterministic.
  const Eigen::Index act_total = static_cast<Eigen::Index>(act.total());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
  for (Eigen::Index o = 0; o < act_total; ++o) {
    const std::vector<int> dest = act.decode(static_cast<std::size_t>(o));
    for (std::size_t w = 0; w < n; ++w) {
      const Configuration cfg = omega.decode(w);
      const std::vector<int> obs_digits = restrict_to(cfg, obs_region);
      // The actionable digits are the leading observable digits.
      std::vector<int> act_digits(obs_digits.begin(),
                                  obs_digits.begin() +
                                      static_cast<std::ptrdiff_t>(
                                          act_region.factor_indices.size()));
      if (act.encode(act_digits) == static_cast<std::size_t>(o)) continue;
      const std::size_t uu = obs.encode(obs_digits);
      const std::size_t wplus = omega.encode(replace_in(cfg, act_region, dest));
      const double gamma_pw =
          gamma_x.at(wplus, w) + c(static_cast<Eigen::Index>(wplus)) -
          c(static_cast<Eigen::Index>(w));
      table.values(o, static_cast<Eigen::Index>(uu)) +=
          phibar(static_cast<Eigen::Index>(w)) * gamma_pw;
    }
  }
  (void)exec;
  return table;
}

namespace {

double objective_at(const ObjectiveOperator& gamma, const Matrix& g) {
  const Eigen::Index n = g.rows();
  const Vector phi0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return objective_value(gamma, g, phi0);
}

// Shared stencil logic: evaluate takes a signed rate offset and returns the
// objective value of the perturbed system.
template <class Eval>
double fd_stencil(double rate, double h, Eval&& evaluate) {
  if (h <= 0.0) throw DomainError("fd_gradient: step must be positive");
  if (rate < 0.0) throw DomainError("fd_gradient: negative base rate");
  if (rate == 0.0) return (evaluate(h) - evaluate(0.0)) / h;
  if (rate < h)
    throw NumericError("fd_gradient: step leaves the feasible rate set");
  return (evaluate(h) - evaluate(-h)) / (2.0 * h);
}

}  // namespace

double fd_gradient(const ObjectiveOperator& gamma, const Matrix& g,
                   std::size_t to, std::size_t from, double h) {
  const Eigen::Index n = g.rows();
  if (to >= static_cast<std::size_t>(n) || from >= static_cast<std::size_t>(n))
    throw DomainError("fd_gradient: parameter out of range");
  if (to == from) throw DomainError("fd_gradient: diagonal is not a parameter");
  if (!is_valid_generator(g))
    throw DomainError("fd_gradient: not a valid generator");
  const Eigen::Index r = static_cast<Eigen::Index>(to);
  const Eigen::Index s = static_cast<Eigen::Index>(from);
  return fd_stencil(g(r, s), h, [&](double delta) {
    Matrix gp = g;
    gp(r, s) += delta;
    gp(s, s) -= delta;
    return objective_at(gamma, gp);
  });
}

double fd_gradient(const ObjectiveOperator& gamma_x,
                   const FieldTopology& topology,
                   const std::vector<LocalGeneratorTable>& tables,
                   std::size_t x, std::size_t to_act, std::size_t from_obs,
                   double h) {
  if (x >= topology.num_nodes()) throw DomainError("fd_gradient: bad node");
  const LocalGeneratorTable& base = tables[x];
  const Matrix& rates = base.rates();
  if (to_act >= static_cast<std::size_t>(rates.rows()) ||
      from_obs >= static_cast<std::size_t>(rates.cols()))
    throw DomainError("fd_gradient: parameter out of range");
  if (to_act == base.act_of_obs(from_obs))
    throw DomainError("fd_gradient: diagonal is not a parameter");

  const double rate = rates(static_cast<Eigen::Index>(to_act),
                            static_cast<Eigen::Index>(from_obs));
  return fd_stencil(rate, h, [&](double delta) {
    std::vector<LocalRate> entries;
    for (Eigen::Index o = 0; o < rates.rows(); ++o)
      for (Eigen::Index uu = 0; uu < rates.cols(); ++uu) {
        if (static_cast<std::size_t>(o) ==
            base.act_of_obs(static_cast<std::size_t>(uu)))
          continue;
        double value = rates(o, uu);
        if (static_cast<std::size_t>(o) == to_act &&
            static_cast<std::size_t>(uu) == from_obs)
          value += delta;
        if (value != 0.0)
          entries.push_back({static_cast<std::size_t>(uu),
                             static_cast<std::size_t>(o), value});
      }
    std::vector<LocalGeneratorTable> perturbed = tables;
    perturbed[x] = LocalGeneratorTable(topology, x, entries);
    return objective_at(gamma_x, assemble_system(topology, perturbed));
  });
}

}  // namespace dsf
